"""Command line entry point: ``illumest analyze`` and ``illumest synth``.

Exit codes: 0 success, 1 any per-image failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .errors import IllumError
from .image import load_image, save_png, synth_blob_scene, synth_uniform_noise_scene
from .overlay import render_overlay
from .report import AnalysisOptions, batch, reports_to_json

log = logging.getLogger("illumest")


def _threshold(text):
    if text == "auto":
        return "auto"
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 0-255 or 'auto', got {text!r}") from None
    if not 0 <= value <= 255:
        raise argparse.ArgumentTypeError(f"threshold {value} outside 0-255")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="illumest", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    an = sub.add_parser("analyze", help="estimate light direction for one or more images")
    an.add_argument("paths", nargs="+")
    an.add_argument("--threshold", type=_threshold, default=200, help="0-255, or 'auto' for Otsu (default 200)")
    an.add_argument("--blur", type=float, default=0.05)
    an.add_argument("--seed", type=int, default=0)
    an.add_argument("--k", type=_positive_int, default=2, help="k-means clusters (default 2)")
    an.add_argument("--subsample-cap", type=_positive_int, default=4096)
    an.add_argument("--no-normalize", action="store_true", help="transport at pixel scale")
    an.add_argument(
        "--paper-literal-empty",
        action="store_true",
        help="with no bright pixels, report a (0, 0) centroid instead of omitting the direction",
    )
    an.add_argument(
        "--overlay",
        nargs="?",
        const="",
        default=None,
        metavar="DIR",
        help="write annotated PNGs into DIR, or next to each input when DIR is omitted",
    )
    an.add_argument("--json", default="-", metavar="FILE", help="report destination ('-' for stdout)")
    an.add_argument("--jobs", type=_positive_int, default=None, help="worker processes (default: CPU count)")

    sy = sub.add_parser("synth", help="write a synthetic grayscale test scene as PNG")
    kinds = sy.add_subparsers(dest="kind", required=True)
    blob = kinds.add_parser("blob", help="Gaussian highlight")
    blob.add_argument("--width", type=_positive_int, default=128)
    blob.add_argument("--height", type=_positive_int, default=128)
    blob.add_argument("--center", type=float, nargs=2, metavar=("ROW", "COL"), required=True)
    blob.add_argument("--sigma", type=float, default=3.0)
    blob.add_argument("--peak", type=int, default=255)
    blob.add_argument("--background", type=int, default=10)
    blob.add_argument("--out", required=True)
    noise = kinds.add_parser("noise", help="bright pixels scattered uniformly")
    noise.add_argument("--width", type=_positive_int, default=128)
    noise.add_argument("--height", type=_positive_int, default=128)
    noise.add_argument("--n-bright", type=int, required=True)
    noise.add_argument("--bright-value", type=int, default=255)
    noise.add_argument("--background", type=int, default=10)
    noise.add_argument("--seed", type=int, default=0)
    noise.add_argument("--out", required=True)
    return parser


def _overlay_path(input_path, overlay_dir):
    src = Path(input_path)
    name = f"{src.stem}_overlay.png"
    return src.with_name(name) if overlay_dir == "" else Path(overlay_dir) / name


def _write_overlays(reports, overlay_dir):
    if overlay_dir:
        os.makedirs(overlay_dir, exist_ok=True)
    for rep in reports:
        if rep.status != "ok":
            continue
        try:
            save_png(_overlay_path(rep.input_path, overlay_dir), render_overlay(load_image(rep.input_path), rep))
        except (OSError, IllumError) as exc:
            log.error("overlay for %s failed: %s", rep.input_path, exc)
            return False
    return True


def _run_analyze(args) -> int:
    opts = AnalysisOptions(
        threshold=args.threshold,
        blur=args.blur,
        seed=args.seed,
        k=args.k,
        subsample_cap=args.subsample_cap,
        normalize=not args.no_normalize,
        paper_literal_empty=args.paper_literal_empty,
    )
    reports = batch(args.paths, opts, jobs=args.jobs)
    for rep in reports:
        if rep.status != "ok":
            print(f"illumest: {rep.input_path}: {rep.error}", file=sys.stderr)
        elif rep.warning:
            print(f"illumest: {rep.input_path}: warning {rep.warning}", file=sys.stderr)
    ok = all(rep.status == "ok" for rep in reports)
    if args.overlay is not None:
        ok = _write_overlays(reports, args.overlay) and ok
    text = reports_to_json(reports)
    if args.json == "-":
        sys.stdout.write(text)
    else:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0 if ok else 1


def _run_synth(args) -> int:
    if args.kind == "blob":
        img = synth_blob_scene(args.width, args.height, tuple(args.center), args.sigma, args.peak, args.background)
    else:
        img = synth_uniform_noise_scene(
            args.width, args.height, args.n_bright, args.bright_value, args.background, args.seed
        )
    save_png(args.out, img)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "analyze":
            return _run_analyze(args)
        return _run_synth(args)
    except IllumError as exc:
        # invalid option combinations surface here rather than in argparse
        print(f"illumest: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"illumest: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
