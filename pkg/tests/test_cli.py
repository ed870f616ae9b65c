import json
import subprocess
import sys

import numpy as np

from dualdomain.cli import main
from dualdomain.experiments import CSV_HEADER
from dualdomain.numerics import load_grid


def test_resolutions_table(capsys):
    assert main(["resolutions"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 4
    assert "1.2199" in out[1] and "1.8797" in out[1]
    assert "0.3050" in out[3] and "0.4699" in out[3]


def test_resolutions_custom_case(capsys):
    assert main(["resolutions", "--cases", "2048x32"]) == 0
    assert "0.6099" in capsys.readouterr().out


def test_invalid_config_exits_nonzero(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"M": 128, "N": 8}))
    assert main(["resolutions", "--config", str(cfg)]) == 2
    captured = capsys.readouterr()
    assert captured.out == "" and "error" in captured.err


def test_missing_config_file(tmp_path, capsys):
    assert main(["resolutions", "--config", str(tmp_path / "nope.json")]) == 2


def test_trial_dumps(tmp_path, capsys):
    tx, ydd = tmp_path / "tx.csv", tmp_path / "ydd.bin"
    code = main(["trial", "--case", "1024x64", "--beta=-5e-3", "--steady-targets",
                 "--dump-txft", str(tx), "--dump-ydd", str(ydd)])
    assert code == 0
    assert "UE2" in capsys.readouterr().out
    assert np.loadtxt(tx, delimiter=",").shape == (1024, 64)
    assert load_grid(ydd).shape == (1024, 64)


def test_sweep_command(tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert main(["sweep", "--trials", "2", "--beta-points", "2", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER) and len(lines) == 3


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dualdomain", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "sweep" in proc.stdout
