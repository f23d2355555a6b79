import csv
import json

import numpy as np
import pytest

from kdvflat.cli import EXIT_CONFIG, EXIT_OK, EXIT_PROPERTY, RunConfig, main
from kdvflat.errors import ConfigError


def run_cli(tmp_path, doc, name="cfg.json"):
    cfg = tmp_path / name
    cfg.write_text(json.dumps(doc))
    out = tmp_path / "out"
    code = main([str(cfg), "-o", str(out)])
    return code, out


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def report(out):
    return json.loads((out / "report.json").read_text())


def test_config_validation():
    with pytest.raises(ConfigError):
        RunConfig("fly")
    with pytest.raises(ConfigError):
        RunConfig("reach", a=-1.0)
    with pytest.raises(ConfigError):
        RunConfig("reach", tau=1.5)
    with pytest.raises(ConfigError):
        RunConfig("null-control", s=3.0)
    with pytest.raises(ConfigError):
        RunConfig("simulate", discretization={"n_x": 8})
    with pytest.raises(ConfigError):
        RunConfig.from_json({"command": "simulate", "colour": 1})
    with pytest.raises(ConfigError):
        RunConfig.from_json({"a": 1.0})


@pytest.mark.parametrize(
    "doc",
    [
        {"command": "reach", "a": -1.0},
        {"command": "reach", "bogus": True},
        {"command": "reach", "a": 1.0, "target": "x2"},  # violates the boundary conditions
        {"command": "reach", "target": "nonsense"},
    ],
)
def test_config_errors_exit_2(tmp_path, doc):
    assert run_cli(tmp_path, doc)[0] == EXIT_CONFIG


def test_missing_or_malformed_file_exit_2(tmp_path):
    assert main([str(tmp_path / "absent.json")]) == EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main([str(bad)]) == EXIT_CONFIG


def test_reach_fig1_artifacts(tmp_path):
    code, out = run_cli(tmp_path, {"command": "reach", "target": "fig1"})
    assert code == EXIT_OK
    head, u = read_csv(out / "u.csv")
    assert head == ["t", "u"] and u.shape == (1001, 2)
    head, fs = read_csv(out / "final_state.csv")
    assert head == ["t", "x", "y"] and np.all(fs[:, 0] == 1.0)
    x = fs[:, 1]
    y1 = 3 * sum(x ** (3 * n + 2) / np.prod(np.arange(1, 3 * n + 3)) for n in range(7))
    assert np.max(np.abs(fs[:, 2] - y1)) <= 1e-3
    rep = report(out)
    assert rep["schema"] == "kdvflat.report" and rep["schema_version"] == 1
    assert rep["status"] == "ok" and rep["command"] == "reach"
    assert rep["results"]["final_max_error"] <= 1e-3
    assert rep["results"]["b"] == pytest.approx([3.0 * (-1) ** n for n in range(7)])


def test_csv_roundtrips_full_precision(tmp_path):
    code, out = run_cli(tmp_path, {"command": "reach", "target": "x5"})
    assert code == EXIT_OK
    rep = report(out)
    _, fs = read_csv(out / "final_state.csv")
    assert float(fs[0, 2]) == rep["results"]["y_left_T"]


def test_null_control(tmp_path):
    code, out = run_cli(tmp_path, {"command": "null-control", "a": 1.0, "n_snapshots": 5})
    assert code == EXIT_OK
    _, u = read_csv(out / "u.csv")
    assert np.all(u[u[:, 0] <= 0.5, 1] == 0.0)
    head, snaps = read_csv(out / "state_snapshots.csv")
    assert head == ["t", "x", "y"] and np.unique(snaps[:, 0]).size == 5
    res = report(out)["results"]
    assert res["final_relative_l2"] <= 1e-2 and res["free_phase_u_max"] == 0.0


def test_simulate_and_airy(tmp_path):
    code, out = run_cli(tmp_path, {"command": "simulate", "a": 1.0, "y0": "bubble"})
    assert code == EXIT_OK
    res = report(out)["results"]
    assert res["max_step_growth"] <= 1e-8 and res["kato_constant_fit"] <= res["kato_bound"]
    code, out = run_cli(tmp_path, {"command": "airy"}, "airy.json")
    assert code == EXIT_OK
    res = report(out)["results"]
    assert res["Ai0"] == pytest.approx(0.355028053887817, abs=1e-14)
    for name in ("fundamental_solution.csv", "line_solution.csv"):
        head, data = read_csv(out / name)
        assert head == ["t", "x", "y"] and np.all(np.isfinite(data))


def test_sampled_initial_state(tmp_path):
    xs = np.linspace(-1, 0, 51)
    f = tmp_path / "y0.csv"
    np.savetxt(f, np.c_[xs, np.sin(np.pi * xs)], delimiter=",", header="x,y", comments="")
    code, out = run_cli(tmp_path, {"command": "simulate", "y0": {"file": str(f)}})
    assert code == EXIT_OK
    assert report(out)["results"]["l2_initial"] == pytest.approx(np.sqrt(0.5), rel=1e-4)


def test_verify_and_mutation(tmp_path):
    code, out = run_cli(tmp_path, {"command": "verify", "n_polys": 20})
    assert code == EXIT_OK and report(out)["results"]["failed"] == []
    doc = {"command": "verify", "n_polys": 20, "mutation": {"a": 0.0, "i": 3, "k": 11, "delta": 1e-3}}
    code, out = run_cli(tmp_path, doc, "mut.json")
    assert code == EXIT_PROPERTY
    rep = report(out)
    assert rep["status"] == "property_failure"
    assert "generating_envelope[a=0]" in rep["results"]["failed"]
    assert all(name.endswith("[a=0]") for name in rep["results"]["failed"])


def test_trace_depth_above_cap_is_a_numerical_error(tmp_path):
    code, _ = run_cli(tmp_path, {"command": "null-control", "trace_depth": 8, "discretization": {"n_t": 200}})
    assert code == 4
