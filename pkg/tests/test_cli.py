import os

import pytest

from mimo_isar.cli import EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC, EXIT_OK, main
from mimo_isar.exceptions import ParameterWarning


@pytest.fixture
def small_cfg_path(tmp_path, small_config_text):
    path = tmp_path / "small.cfg"
    path.write_text(small_config_text, encoding="utf-8")
    return str(path)


def test_formats(capsys):
    assert main(["formats"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "ISARCUBE" in out and "P5" in out


def test_simulate_mocomp_image_metrics(tmp_path, small_cfg_path, capsys):
    out = str(tmp_path / "sim")
    assert main(["simulate", "--config", small_cfg_path, "--out", out, "--seed", "3"]) == EXIT_OK
    cubes = sorted(os.listdir(os.path.join(out, "cubes")))
    assert cubes == ["blank_0000.cube", "blank_0001.cube", "frame_0084.cube"]
    frame = os.path.join(out, "cubes", "frame_0084.cube")
    blanks = [os.path.join(out, "cubes", f"blank_000{i}.cube") for i in (0, 1)]

    assert main(["mocomp", frame, "--algo", "pga", "--config", small_cfg_path, "--out", out]) == EXIT_OK
    assert os.path.exists(os.path.join(out, "frame_0084_pga.cube"))

    assert main(["image", frame, "--config", small_cfg_path, "--out", out]) == EXIT_OK
    for name in ("frame_0084_siso.pgm", "frame_0084_mimo.csv", "frame_0084_mimo.axes.txt"):
        assert os.path.exists(os.path.join(out, name))

    capsys.readouterr()
    code = main(["metrics", frame, "--blank", *blanks, "--config", small_cfg_path, "--algo", "ccr", "--out", out])
    assert code == EXIT_OK
    text = capsys.readouterr().out
    assert "Cross-correlation" in text and "Phase gradient" not in text
    assert os.path.exists(os.path.join(out, "report.csv"))


def test_run_writes_report(tmp_path, small_cfg_path, capsys):
    out = tmp_path / "run"
    assert main(["run", "--config", small_cfg_path, "--out", str(out), "--algo", "em", "--threads", "2"]) == EXIT_OK
    assert (out / "report.txt").read_text() == capsys.readouterr().out
    assert sorted(os.listdir(out / "images")) == ["em", "none"]


def test_default_radar_warns_about_table_velocity(tmp_path, capsys):
    cfg = tmp_path / "blank.cfg"
    cfg.write_text("scene.preset = blank\npipeline.blank_frames = 1\npipeline.frames = 0.0\n", encoding="utf-8")
    with pytest.warns(ParameterWarning, match="max_velocity"):
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_OK


def test_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("scene.preset = uturn-car\nradar.num_tx = -1\n", encoding="utf-8")
    assert main(["run", "--config", str(bad)]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "line 2" in err and "radar.num_tx" in err


def test_bad_frame_time_is_config_error(small_cfg_path, capsys):
    assert main(["simulate", "--config", small_cfg_path, "--frames", "8.45"]) == EXIT_CONFIG


def test_io_error_exit_codes(tmp_path, small_cfg_path, capsys):
    assert main(["image", str(tmp_path / "missing.cube"), "--config", small_cfg_path]) == EXIT_IO
    junk = tmp_path / "junk.cube"
    junk.write_bytes(b"ISARCUBE" + b"\0" * 10)
    assert main(["image", str(junk), "--config", small_cfg_path]) == EXIT_IO
    assert "truncated" in capsys.readouterr().err


def test_numeric_error_exit_code(tmp_path, small_cfg_path, capsys):
    out = str(tmp_path / "late")
    assert main(["simulate", "--config", small_cfg_path, "--frames", "30.0", "--out", out]) == EXIT_NUMERIC
    assert "outside the trajectory" in capsys.readouterr().err


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["mocomp", "x.cube"])
    assert info.value.code == 2
    with pytest.raises(SystemExit):
        main(["run", "--seed", "-4"])
