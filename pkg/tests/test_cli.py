import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from rdc_lab import cli, gaussian_rdc
from rdc_lab.model import CaseLabel, TradeoffCurve, TradeoffPoint


def _run(tmp_path, *argv, name="out.csv"):
    out = tmp_path / name
    code = cli.run([*argv, "-o", str(out)])
    return code, out, out.with_suffix(".json")


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_gaussian_dcr_csv(tmp_path):
    code, out, rep = _run(tmp_path, "gaussian-dcr", "--sigma2-x", "1", "--sigma2-s", "1",
                          "--theta1", "0.7", "--rate", "0.2", "--points", "200")
    assert code == 0
    rows = _rows(out)
    assert rows[0] == ["C", "R", "D", "case"]
    assert len(rows) == 201
    D = np.array([float(r[2]) for r in rows[1:]])
    assert np.all(np.diff(D) <= 0)
    report = json.loads(rep.read_text())
    assert list(report)[:2] == ["command", "version"]
    assert list(report)[-1] == "wall_time"
    assert report["max_violation"] == 0.0


def test_csv_is_round_trip_precise(tmp_path):
    code, out, _ = _run(tmp_path, "gaussian-rdc", "--points", "5")
    assert code == 0
    raw = out.read_bytes()
    assert b"\r" not in raw
    D = float(_rows(out)[1][0])
    assert format(D, ".17g") == _rows(out)[1][0]


def test_bits_divide_information_columns(tmp_path):
    args = ["gaussian-dcr", "--rate", "0.3", "--points", "4"]
    _, nats, _ = _run(tmp_path, *args)
    _, bits, _ = _run(tmp_path, *args, "--units", "bits", name="bits.csv")
    for a, b in zip(_rows(nats)[1:], _rows(bits)[1:]):
        assert float(b[0]) == pytest.approx(float(a[0]) / math.log(2), rel=1e-15)
        assert float(b[1]) == pytest.approx(0.3 / math.log(2), rel=1e-15)
        assert b[2] == a[2]


def test_universal_reports_violation(tmp_path):
    rates = "0.05,0.1,0.15,0.2,0.34"
    code, out, rep = _run(tmp_path, "gaussian-universal", "--theta1", "0.7", "--rates", rates,
                          "--boundary", "exact")
    assert code == 0
    report = json.loads(rep.read_text())
    assert report["max_violation"] <= 1e-9 and report["passed"]
    assert _rows(out)[0] == ["rate", "target_D", "target_C", "achieved_D", "achieved_C", "gamma"]
    assert len(_rows(out)) == 501
    # the published boundary is not met by the published decoder; --strict turns that into exit 3
    code, _, rep = _run(tmp_path, "gaussian-universal", "--rates", rates, "--strict", name="s.csv")
    assert code == 3
    assert json.loads(rep.read_text())["max_violation"] > 0.1


def test_bound_check_ratio(tmp_path):
    code, out, rep = _run(tmp_path, "bound-check", "--mode", "discrete", "--seed", "7")
    assert code == 0
    assert abs(json.loads(rep.read_text())["ratio"] - 2.0) <= 1e-12
    assert _rows(out)[0] == ["d_min", "d_ps", "ratio", "psnr_drop_db"]


def test_discrete_and_region_schemas(tmp_path):
    code, out, _ = _run(tmp_path, "discrete-dcr", "--resolution", "16", "--points", "6")
    assert code == 0
    rows = _rows(out)
    assert rows[0] == ["C", "R", "D", "lp_status"] and len(rows) == 7
    code, out, rep = _run(tmp_path, "region", "--q", "0.3,0.3,0.4", "--distortion", "mse",
                          "--T", "0.9,0.2,0.1;0.1,0.8,0.9", "--rate", "0.4",
                          "--resolution", "8", "--stochastic-grid", "5", name="r.csv")
    assert code == 0
    rows = _rows(out)
    assert rows[0] == ["kind", "D", "C"]
    assert {r[0] for r in rows[1:]} == {"inner", "outer", "extreme"}
    assert json.loads(rep.read_text())["passed"]


def test_w2(tmp_path):
    code, out, _ = _run(tmp_path, "w2", "--xs", "0,1", "--px", "0.5,0.5", "--ys", "0,2",
                        "--py", "0.5,0.5")
    assert code == 0 and _rows(out) == [["cost"], ["0.5"]]
    code, out, _ = _run(tmp_path, "w2", "--gaussian", "0,1,0,4", name="g.csv")
    assert float(_rows(out)[1][0]) == 1.0


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep settings\nrate = 0.4\npoints = 7\ntheta1 = 0.5\n")
    code, out, rep = _run(tmp_path, "gaussian-dcr", "--config", str(cfg), "--points", "3")
    assert code == 0
    report = json.loads(rep.read_text())
    assert report["rate"] == 0.4 and report["theta1"] == 0.5
    assert len(_rows(out)) == 4


@pytest.mark.parametrize("argv", [
    ["gaussian-dcr", "--points", "1"],
    ["w2", "--xs", "0"],
    ["gaussian-dcr", "--theta1", "5"],
])
def test_config_errors_exit_1(tmp_path, argv):
    assert _run(tmp_path, *argv)[0] == 1


def test_bad_flag_exits_1(tmp_path):
    with pytest.raises(SystemExit) as err:
        _run(tmp_path, "gaussian-dcr", "--no-such-flag")
    assert err.value.code == 1


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("rate = 0.1\nbogus = 3\n")
    assert _run(tmp_path, "gaussian-dcr", "--config", str(cfg))[0] == 1


def test_infeasible_exit_2(tmp_path):
    assert _run(tmp_path, "gaussian-rdc", "--class-level", "0.5")[0] == 2
    assert _run(tmp_path, "discrete-dcr", "--sweep", "C", "--fixed", "0", "--start", "0.1",
                "--stop", "0.2")[0] == 2


def test_invariant_violation_exit_3(tmp_path, monkeypatch, capsys):
    rising = [TradeoffPoint(0.5, 0.2, 0.1, CaseLabel.DISTORTION_ACTIVE),
              TradeoffPoint(1.0, 0.5, 0.1, CaseLabel.DISTORTION_ACTIVE)]
    monkeypatch.setattr(gaussian_rdc, "sample_dcr_curve",
                        lambda *a, **k: TradeoffCurve(rising, "C", "x"))
    code, out, _ = _run(tmp_path, "gaussian-dcr")
    assert code == 3
    assert not out.exists()
    dump = capsys.readouterr().err
    assert "InvariantViolation" in dump


def _strip_time(path):
    report = json.loads(path.read_text())
    report.pop("wall_time")
    return report


def test_byte_identical_reruns(tmp_path):
    argv = ["bound-check", "--mode", "gaussian", "--samples", "100000", "--seed", "3"]
    _, a, ra = _run(tmp_path, *argv, name="a.csv")
    _, b, rb = _run(tmp_path, *argv, name="b.csv")
    assert a.read_bytes() == b.read_bytes()
    assert _strip_time(ra) == _strip_time(rb)


def test_module_entry_point(tmp_path):
    out = tmp_path / "m.csv"
    proc = subprocess.run([sys.executable, "-m", "rdc_lab", "w2", "--gaussian", "0,1,1,1",
                           "-o", str(out)], capture_output=True)
    assert proc.returncode == 0
    assert out.read_text() == "cost\n1\n"
