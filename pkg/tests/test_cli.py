import json

import numpy as np
import pytest

from nsacvdw.cli import DEFAULTS, main, parse_config
from nsacvdw.errors import ConfigError
from nsacvdw.solver import SERIES_COLUMNS

CONSTANT = {
    "params": {"epsilon": 1.0, "c_v": 5.0},
    "far_field": {"v_bar": 3.0, "theta_bar": 1.2},
    "grid": {"x_min": -5.0, "x_max": 5.0, "n": 65},
    "time": {"dt": 0.01, "t_end": 0.1},
    "ic": {"kind": "constant"},
    "output": {"every": 1},
}
SMOOTH = {
    "params": {"epsilon": 1.0, "c_v": 5.0},
    "far_field": {"v_bar": 3.0, "theta_bar": 1.2},
    "grid": {"x_min": -8.0, "x_max": 8.0, "n": 205},
    "time": {"dt": 0.02, "t_end": 0.2},
    "ic": {"kind": "perturbation", "width": 0.5, "interface_width": 0.5},
    "output": {"every": 2},
}


def write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def read_csv(path):
    return np.genfromtxt(path, delimiter=",", names=True)


# -- configuration ---------------------------------------------------------


def test_minimal_config_echoes_every_default(tmp_path):
    spec = parse_config(write(tmp_path, {}))
    for section, body in DEFAULTS.items():
        assert set(spec.effective[section]) >= set(body)
    assert spec.effective["params"]["h"] == pytest.approx(0.05 * spec.params.b)
    params, far, grid, sim, profile = spec
    assert grid.n == 512 and profile == {"kind": "constant"}


@pytest.mark.parametrize("raw, key", [
    ({"params": {"beta": -1}}, "params.beta"),
    ({"params": {"a": 0}}, "params.a"),
    ({"grid": {"n": 10.5}}, "grid.n"),
    ({"time": {"mode": "Euler"}}, "time.mode"),
    ({"time": {"cfl": 1.5}}, "time.cfl"),
    ({"bogus": {}}, "bogus"),
    ({"params": {"colour": 1}}, "params.colour"),
    ({"ic": {"kind": "wave"}}, "ic.kind"),
    ({"params": {"epsilon": "1"}}, "params.epsilon"),
    ({"far_field": {"v_bar": 0.3}}, "far_field.v_bar"),
])
def test_config_errors_name_the_key(raw, key):
    with pytest.raises(ConfigError) as info:
        parse_config(raw)
    assert info.value.key == key


def test_reduced_config_is_admissible(tmp_path):
    raw = {"params": {"a": 3.0, "b": 1 / 3, "R": 8 / 3},
           "far_field": {"v_bar": 3.0, "theta_bar": 0.9}}
    spec = parse_config(write(tmp_path, raw))
    assert spec.far.theta_bar == 0.9


def test_missing_and_malformed_files(tmp_path):
    assert main(["run", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", "--config", str(bad), "--out", str(tmp_path)]) == 2


# -- eos -------------------------------------------------------------------


def test_eos_subcommand(tmp_path, capsys):
    raw = {"params": {"a": 3.0, "b": 1 / 3, "R": 8 / 3},
           "far_field": {"v_bar": 0.5, "theta_bar": 0.9},
           "output": {"isotherms": [0.9, 1.5], "n_samples": 50}}
    out = tmp_path / "eos"
    assert main(["eos", "--config", write(tmp_path, raw), "--out", str(out)]) == 0
    captured = capsys.readouterr()
    assert "theta_c=1 v_c=1 p_c=1" in captured.out
    assert "NoSpinodal" in captured.err
    iso = read_csv(out / "isotherm_0.9.csv")
    assert iso.dtype.names == ("v", "p", "dp_dv") and iso.size == 50
    assert np.all(np.diff(iso["v"]) > 0)
    rows = read_csv(out / "analysis.csv")
    assert rows.dtype.names == ("theta", "v_alpha", "v_beta", "v_star", "v_sup", "p_eq")
    assert rows.size == 2
    assert rows["v_star"][0] < rows["v_alpha"][0] < rows["v_beta"][0] < rows["v_sup"][0]
    assert np.isnan(rows["p_eq"][1]) and np.isnan(rows["v_alpha"][1])


# -- run and check ---------------------------------------------------------


def test_constant_run_has_zero_energies(tmp_path):
    out = tmp_path / "run"
    assert main(["run", "--config", write(tmp_path, CONSTANT), "--out", str(out)]) == 0
    series = read_csv(out / "series.csv")
    assert series.size == 10
    for name in ("e_kin", "e_W", "e_phi", "e_psi", "e_total", "V"):
        assert np.all(series[name] == 0)
    header = (out / "series.csv").read_text().splitlines()[0]
    assert header == ",".join(SERIES_COLUMNS)
    snap = (out / "snap_00000000.csv").read_text().splitlines()[0]
    assert snap == "x,v,u,theta,chi,mu"
    assert len(list(out.glob("snap_*.csv"))) == 11
    report = json.loads((out / "report.json").read_text())
    assert report["run"]["steps"] == report["run"]["expected_steps"] == 10
    assert main(["check", str(out)]) == 0


def test_run_is_byte_identical(tmp_path):
    cfg = write(tmp_path, SMOOTH)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--config", cfg, "--out", str(a)]) == 0
    assert main(["run", "--config", cfg, "--out", str(b)]) == 0
    assert (a / "series.csv").read_bytes() == (b / "series.csv").read_bytes()
    assert (a / "snap_00000010.csv").read_bytes() == (b / "snap_00000010.csv").read_bytes()


def test_beta_zero_guard(tmp_path, capsys):
    raw = dict(CONSTANT, params={"beta": 0.0, "c_v": 5.0})
    cfg = write(tmp_path, raw)
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "r")]) == 2
    assert "params.beta" in capsys.readouterr().err
    with pytest.warns(RuntimeWarning):
        code = main(["run", "--config", cfg, "--out", str(tmp_path / "r"), "--allow-unproven"])
    assert code == 0


def test_check_corrupted_snapshot(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["run", "--config", write(tmp_path, SMOOTH), "--out", str(out)]) == 0
    assert main(["check", "--out", str(out)]) == 0
    path = out / "snap_00000010.csv"
    lines = path.read_text().splitlines()
    cells = lines[100].split(",")
    cells[1] = repr(2 * float(cells[1]))
    lines[100] = ",".join(cells)
    path.write_text("\n".join(lines) + "\n")
    capsys.readouterr()
    assert main(["check", str(out)]) == 1
    captured = capsys.readouterr()
    assert "FAIL kazhikhov" in captured.out and "kazhikhov" in captured.err
    report = json.loads((out / "report.json").read_text())
    assert {c["name"] for c in report["checks"] if not c["ok"]} >= {"kazhikhov"}
    assert set(report["checks"][0]) == {"name", "ok", "worst_margin", "details"}


def test_check_empty_and_truncated_directories(tmp_path):
    assert main(["check", str(tmp_path)]) == 2
    out = tmp_path / "run"
    assert main(["run", "--config", write(tmp_path, CONSTANT), "--out", str(out)]) == 0
    snap = out / "snap_00000005.csv"
    snap.write_text("\n".join(snap.read_text().splitlines()[:10]) + "\n")
    assert main(["check", str(out)]) == 2


def test_solver_abort_exit_code(tmp_path):
    raw = dict(CONSTANT, time={"dt": 1.0, "t_end": 2.0})
    out = tmp_path / "run"
    assert main(["run", "--config", write(tmp_path, raw), "--out", str(out)]) == 3
    report = json.loads((out / "report.json").read_text())
    assert report["abort"]["error"] == "CflViolation"
    assert (out / "config.json").is_file()


# -- converge --------------------------------------------------------------


def test_converge_needs_two_levels(tmp_path):
    cfg = write(tmp_path, SMOOTH)
    assert main(["converge", "--config", cfg, "--out", str(tmp_path), "--levels", "1"]) == 2


def test_converge_table(tmp_path):
    raw = dict(SMOOTH, checks={"mms_n0": 64, "mms_t_end": 0.1})
    out = tmp_path / "conv"
    assert main(["converge", "--config", write(tmp_path, raw), "--out", str(out),
                 "--levels", "2"]) == 0
    table = read_csv(out / "convergence.csv")
    assert table.dtype.names == ("n", "dx", "dt_space", "error_space", "order_space",
                                 "dt_time", "error_time", "order_time", "energy_defect",
                                 "defect_ratio")
    assert list(table["n"]) == [64, 128]
    assert table["order_space"][1] > 1.7
    assert table["order_time"][1] > 0.8
