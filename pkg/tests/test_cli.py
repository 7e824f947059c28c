import json
import subprocess
import sys

import numpy as np
import pytest

from illumest.cli import main
from illumest.image import load_image, save_png, synth_blob_scene


@pytest.fixture
def blob_png(tmp_path):
    path = tmp_path / "blob.png"
    save_png(path, synth_blob_scene(64, 48, (12, 40), 3.0))
    return path


def _run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_analyze_to_stdout(blob_png, capsys):
    code, out, err = _run(["analyze", blob_png, "--jobs", "1"], capsys)
    assert code == 0
    (rep,) = json.loads(out)
    assert rep["input_path"] == str(blob_png)
    assert rep["centroid"] == pytest.approx([12.0, 40.0], abs=1e-9)
    assert rep["wasserstein"]["blur"] == 0.05


def test_analyze_options_propagate(blob_png, tmp_path, capsys):
    dest = tmp_path / "r.json"
    argv = ["analyze", blob_png, "--threshold", "auto", "--blur", "0.1", "--seed", "7", "--k", "1"]
    argv += ["--subsample-cap", "50", "--no-normalize", "--json", dest, "--jobs", "1"]
    code, out, _ = _run(argv, capsys)
    assert code == 0 and out == ""
    (rep,) = json.loads(dest.read_text())
    assert rep["threshold_mode"] == "otsu"
    assert rep["seed"] == 7
    assert rep["wasserstein"]["blur"] == 0.1
    assert rep["wasserstein"]["units"] == "pixels"
    assert len(rep["aux"]["clusters"]) == 1


def test_empty_image_exit_zero_with_warning(tmp_path, capsys):
    path = tmp_path / "black.png"
    save_png(path, np.zeros((20, 30), np.uint8))
    code, out, err = _run(["analyze", path, "--jobs", "1"], capsys)
    assert code == 0
    (rep,) = json.loads(out)
    assert rep["warning"] == "EmptyBrightSet"
    assert rep["direction"] is None and rep["wasserstein"] is None
    assert "EmptyBrightSet" in err
    code, out, _ = _run(["analyze", path, "--paper-literal-empty", "--jobs", "1"], capsys)
    assert code == 0
    assert json.loads(out)[0]["centroid"] == [0.0, 0.0]


def test_failure_exit_one_and_batch_continues(blob_png, tmp_path, capsys):
    bad = tmp_path / "bad.png"
    bad.write_bytes(b"garbage")
    code, out, err = _run(["analyze", blob_png, bad, blob_png, "--jobs", "1"], capsys)
    assert code == 1
    reps = json.loads(out)
    assert [r["status"] for r in reps] == ["ok", "error", "ok"]
    assert str(bad) in err
    assert len(err.strip().splitlines()) == 1


def test_usage_errors_exit_two(blob_png, capsys):
    for argv in (
        [],
        ["analyze"],
        ["analyze", blob_png, "--threshold", "300"],
        ["analyze", blob_png, "--threshold", "high"],
        ["analyze", blob_png, "--k", "0"],
        ["frobnicate"],
    ):
        with pytest.raises(SystemExit) as exc:
            main([str(a) for a in argv])
        assert exc.value.code == 2
    capsys.readouterr()
    code, _, err = _run(["analyze", blob_png, "--blur", "-1"], capsys)
    assert code == 2 and "blur" in err


def test_overlay_next_to_input(blob_png, capsys):
    code, _, _ = _run(["analyze", blob_png, "--overlay", "--jobs", "1"], capsys)
    assert code == 0
    over = blob_png.with_name("blob_overlay.png")
    assert over.exists()
    img = load_image(over)
    assert img.shape == (48, 64, 3)
    assert np.any(np.all(img == [0, 0, 255], axis=2))


def test_overlay_into_directory(blob_png, tmp_path, capsys):
    dest = tmp_path / "overlays"
    code, out, _ = _run(["analyze", blob_png, "--overlay", dest, "--jobs", "1"], capsys)
    assert code == 0
    assert (dest / "blob_overlay.png").exists()
    assert json.loads(out)[0]["status"] == "ok"


def test_synth_commands(tmp_path, capsys):
    blob = tmp_path / "b.png"
    noise = tmp_path / "n.png"
    assert main(["synth", "blob", "--width", "40", "--height", "30", "--center", "10", "20", "--out", str(blob)]) == 0
    assert main(["synth", "noise", "--width", "40", "--height", "30", "--n-bright", "25", "--seed", "3", "--out", str(noise)]) == 0
    b = load_image(blob)[:, :, 0]
    n = load_image(noise)[:, :, 0]
    assert np.array_equal(b, synth_blob_scene(40, 30, (10, 20), 3.0))
    assert np.count_nonzero(n == 255) == 25
    code, _, err = _run(["synth", "blob", "--center", "200", "0", "--out", tmp_path / "x.png"], capsys)
    assert code == 2 and "outside" in err


def test_module_entry_point(blob_png):
    proc = subprocess.run(
        [sys.executable, "-m", "illumest", "analyze", str(blob_png), "--jobs", "1"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)[0]["status"] == "ok"


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "illumest" in capsys.readouterr().out
