from __future__ import annotations

import subprocess
import sys

import pytest
from test_scenarios import TINY_IMPACT, TINY_WAVE

from perikon.cli import EXIT_CONFIG, EXIT_INSTABILITY, EXIT_IO, EXIT_OK, main


@pytest.fixture
def impact_cfg(tmp_path):
    path = tmp_path / "tiny.cfg"
    path.write_text(TINY_IMPACT.replace("t_end = 1e-4", "t_end = 1e-5"))
    return path


def test_validate_preset(capsys):
    assert main(["validate", "--config", "desk-4.2"]) == EXIT_OK
    assert "valid impact" in capsys.readouterr().out


def test_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[geometry]\nspacing = 1\n")
    assert main(["validate", "--config", str(bad)]) == EXIT_CONFIG
    assert "unknown key" in capsys.readouterr().err


def test_kind_mismatch_is_config_error(impact_cfg, tmp_path):
    assert main(["wave", "--config", str(impact_cfg), "--out", str(tmp_path / "o")]) == EXIT_CONFIG


def test_bad_thread_count(impact_cfg, tmp_path):
    assert main(["impact", "--config", str(impact_cfg), "--out", str(tmp_path / "o"),
                 "--threads", "0"]) == EXIT_CONFIG


def test_impact_run(impact_cfg, tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["impact", "--config", str(impact_cfg), "--out", str(out), "--seed", "3",
                 "--threads", "1"]) == EXIT_OK
    assert (out / "projectile.csv").exists()
    assert "residual velocity" in capsys.readouterr().out


def test_unwritable_output_exit_code(impact_cfg, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["impact", "--config", str(impact_cfg), "--out", str(blocker / "sub")]) == EXIT_IO


def test_runtime_failure_exit_code(tmp_path):
    path = tmp_path / "wave.cfg"
    path.write_text(TINY_WAVE.replace("t_end = 2e-4", "t_end = 1e-5"))
    assert main(["wave", "--config", str(path), "--out", str(tmp_path / "o")]) == EXIT_INSTABILITY


def test_homogenize_command(tmp_path):
    assert main(["homogenize", "--config", "homogenize", "--out", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "homogenize.csv").exists()


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "perikon.cli", "validate", "--config", "paper-4.1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
