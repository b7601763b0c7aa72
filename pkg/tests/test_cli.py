"""Command-line interface: subcommands, exit codes, artifact emission."""

import json
import math
import xml.etree.ElementTree as ET

import pytest

from ballopt.cli import main
from ballopt.outputs import read_csv

CONFIG_1D = """
[domain]
shape = interval
lo = 0.0
hi = 1.0

[grid]
h = 0.005

[weights]
m_bar = 4.0
m_under = 1.0

[sweep]
eps_list = 0.1, 0.06
certify = false

[optimizer]
eps = 0.1
stride = 0.05

[output]
timestamps = false
"""


def test_limit_command(capsys):
    rc = main(["limit", "--dim", "1", "--mbar", "1", "--munder", "1", "--rho", "0.5"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert float(out["lambda0"]) == pytest.approx(math.pi ** 2 / 4, abs=1e-10)
    assert float(out["gamma"]) > 0
    assert float(out["phi"]) > 0
    assert out["N"] == 1


def test_solve_command_flags_only(capsys):
    rc = main(["solve", "--domain", "rectangle:lo=0,0;hi=1,1", "--eps", "0.05",
               "--mbar", "4", "--munder", "1", "--h", "0.02",
               "--center", "0.5", "0.5"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert float(out["residual"]) <= 1e-8
    assert float(out["lambda"]) > 0


def test_optimize_command_with_config(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(CONFIG_1D)
    rc = main(["optimize", "--config", str(cfg)])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert abs(float(out["center"][0]) - 0.5) <= 0.02
    lams = [float(t["lambda"]) for t in out["trace"]]
    assert all(b <= a for a, b in zip(lams, lams[1:]))


def test_sweep_command_artifacts(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(CONFIG_1D + f"\n[output]\ndir = {tmp_path}/out\n" if False else
                   CONFIG_1D.replace("timestamps = false",
                                     f"timestamps = false\ndir = {tmp_path}/out"))
    rc = main(["sweep", "--config", str(cfg)])
    assert rc == 0
    rows, meta = read_csv(str(tmp_path / "out" / "records.csv"))
    assert len(rows) == 2
    assert meta["config_sha256"]
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert "_metadata" in report
    assert report["route_gap_max"] < 1e-8
    ET.parse(str(tmp_path / "out" / "lambda_tilde.svg"))
    ET.parse(str(tmp_path / "out" / "gap_vs_beta.svg"))


def test_config_error_exit_code(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("[domain]\nshape = disk\n")  # missing weights
    assert main(["sweep", "--config", str(cfg)]) == 2


def test_missing_domain_exit_code():
    assert main(["solve", "--eps", "0.05"]) == 2


def test_solver_failure_exit_code(tmp_path):
    cfg = tmp_path / "run.cfg"
    # eps too large for the interval: admissible set empty
    cfg.write_text(CONFIG_1D.replace("eps = 0.1", "eps = 3.0"))
    assert main(["optimize", "--config", str(cfg)]) == 3
