import json
import math
from pathlib import Path

import jsonschema
import numpy as np
import pytest

from illumest.errors import InvalidParam
from illumest.image import replicate, save_png, synth_blob_scene, synth_uniform_noise_scene
from illumest.report import (
    AnalysisOptions,
    IlluminationReport,
    analyze_array,
    analyze_image,
    batch,
    reports_from_json,
    reports_to_json,
)

SCHEMA = json.loads((Path(__file__).parents[1] / "docs" / "report.schema.json").read_text())


def _validate(reports):
    jsonschema.validate(json.loads(reports_to_json(reports)), SCHEMA)


def _blob_rgb(center=(20, 40), size=64, sigma=4.0):
    return replicate(synth_blob_scene(size, size, center, sigma))


def test_options_validation():
    with pytest.raises(InvalidParam):
        AnalysisOptions(threshold=300)
    with pytest.raises(InvalidParam):
        AnalysisOptions(threshold="otsu")
    with pytest.raises(InvalidParam):
        AnalysisOptions(k=0)
    with pytest.raises(InvalidParam):
        AnalysisOptions(blur=-1.0)


def test_blob_report_fields():
    rep = analyze_array(_blob_rgb(), input_path="blob")
    assert rep.status == "ok" and rep.warning is None
    assert (rep.width, rep.height) == (64, 64)
    assert rep.threshold_mode == "fixed" and rep.threshold_used == 200
    assert rep.center == (32.0, 32.0)
    assert rep.centroid == pytest.approx((20.0, 40.0), abs=1e-9)
    assert rep.direction == pytest.approx((-12.0, 8.0), abs=1e-9)
    assert rep.angle_deg == pytest.approx(math.degrees(math.atan2(12, 8)), abs=1e-6)
    w = rep.wasserstein
    assert w.w2 > 0 and w.converged and w.units == "normalized"
    assert w.w2 == pytest.approx(math.sqrt(max(w.divergence, 0)), rel=1e-8)
    aux = rep.aux
    assert aux.brightest_px == (20, 40)
    assert sum(c.size for c in aux.clusters) == rep.n_bright
    assert len(aux.clusters) == 2
    assert aux.cos_sim_brightest_vs_centroid == pytest.approx(1.0, abs=1e-9)
    assert aux.hausdorff_px > 0
    _validate([rep])


def test_pixel_units():
    rep = analyze_array(_blob_rgb(), AnalysisOptions(normalize=False, blur=3.0))
    assert rep.wasserstein.units == "pixels"
    assert rep.wasserstein.w2 > 1.0


def test_otsu_mode():
    rep = analyze_array(_blob_rgb(), AnalysisOptions(threshold="auto"))
    assert rep.threshold_mode == "otsu"
    assert 10 <= rep.threshold_used < 255
    flat = analyze_array(np.full((8, 8, 3), 90, np.uint8), AnalysisOptions(threshold="auto"))
    assert flat.threshold_used == 90
    assert flat.warning == "EmptyBrightSet"


def test_empty_bright_set_contract():
    rep = analyze_array(np.zeros((16, 24, 3), np.uint8))
    assert rep.status == "ok"
    assert rep.warning == "EmptyBrightSet"
    assert rep.n_bright == 0
    for field in ("centroid", "center", "direction", "angle_deg", "wasserstein", "aux"):
        assert getattr(rep, field) is None
    _validate([rep])


def test_empty_bright_set_literal_mode():
    rep = analyze_array(np.zeros((16, 24, 3), np.uint8), AnalysisOptions(paper_literal_empty=True))
    assert rep.warning == "EmptyBrightSet"
    assert rep.centroid == (0.0, 0.0)
    assert rep.center == (8.0, 12.0)
    assert rep.direction == (-8.0, -12.0)
    assert rep.wasserstein is None and rep.aux is None
    _validate([rep])


def test_single_bright_pixel():
    img = np.zeros((9, 9), np.uint8)
    img[2, 7] = 255
    rep = analyze_array(replicate(img))
    assert rep.n_bright == 1
    assert len(rep.aux.clusters) == 1
    _validate([rep])


def test_one_by_one_image():
    rep = analyze_array(np.full((1, 1, 3), 255, np.uint8))
    assert rep.n_bright == 1
    assert rep.wasserstein.w2 == 0.0
    assert rep.aux.gradient_dir is None
    assert rep.aux.variance_ratio is None
    _validate([rep])


def test_centered_bright_set_has_no_angle():
    img = np.zeros((10, 10), np.uint8)
    img[4:7, 4:7] = 255
    rep = analyze_array(replicate(img))
    assert rep.direction == (0.0, 0.0)
    assert rep.angle_deg is None
    assert rep.aux.cos_sim_brightest_vs_centroid is None
    _validate([rep])


def test_json_roundtrip_and_format():
    reps = [
        analyze_array(_blob_rgb(), input_path="a"),
        analyze_array(np.zeros((5, 5, 3), np.uint8), input_path="b"),
        IlluminationReport(input_path="c", status="error", error="DecodeError: bad"),
    ]
    text = reports_to_json(reps)
    assert reports_from_json(text) == reps
    assert reports_to_json(reports_from_json(text)) == text
    d = json.loads(text)[0]
    assert list(d)[:3] == ["input_path", "status", "error"]
    for v in (*d["wasserstein"].values(), d["aux"]["hausdorff_px"], *d["centroid"]):
        if isinstance(v, float):
            assert float(f"{v:.9g}") == v
    _validate(reps)


def test_report_is_deterministic():
    a = analyze_array(_blob_rgb()).to_dict()
    b = analyze_array(_blob_rgb()).to_dict()
    a.pop("runtime_ms"), b.pop("runtime_ms")
    assert a == b


def test_seed_changes_reference():
    a = analyze_array(_blob_rgb(), AnalysisOptions(seed=1))
    b = analyze_array(_blob_rgb(), AnalysisOptions(seed=2))
    assert a.seed == 1 and b.seed == 2
    assert a.wasserstein.w2 != b.wasserstein.w2
    assert a.centroid == b.centroid


def test_analyze_image_matches_array(tmp_path):
    g = synth_blob_scene(48, 32, (10, 30), 3.0)
    path = tmp_path / "blob.png"
    save_png(path, g)
    rep = analyze_image(path)
    ref = analyze_array(replicate(g), input_path=str(path))
    d1, d2 = rep.to_dict(), ref.to_dict()
    d1.pop("runtime_ms"), d2.pop("runtime_ms")
    assert d1 == d2


def test_batch_error_isolation(tmp_path):
    good = tmp_path / "good.png"
    save_png(good, synth_blob_scene(32, 32, (8, 8), 2.0))
    bad = tmp_path / "bad.png"
    bad.write_bytes(b"\x89PNG\r\n\x1a\n broken")
    missing = tmp_path / "missing.png"
    reps = batch([good, bad, good, missing], jobs=1)
    assert [r.status for r in reps] == ["ok", "error", "ok", "error"]
    assert reps[1].error.startswith("DecodeError:")
    assert reps[3].error.startswith("FileNotFoundError:")
    assert "\n" not in reps[1].error
    _validate(reps)


def test_batch_parallel_matches_serial(tmp_path):
    paths = []
    for i in range(4):
        p = tmp_path / f"n{i}.png"
        save_png(p, synth_uniform_noise_scene(40, 30, 20 + i, seed=i))
        paths.append(p)
    serial = [r.to_dict() for r in batch(paths, jobs=1)]
    parallel = [r.to_dict() for r in batch(paths, jobs=3)]
    for r in serial + parallel:
        r.pop("runtime_ms")
    assert serial == parallel
    assert [r["input_path"] for r in parallel] == [str(p) for p in paths]


def test_batch_needs_paths():
    with pytest.raises(InvalidParam):
        batch([])
