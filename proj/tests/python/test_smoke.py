import json
import math
import os
from pathlib import Path

import numpy as np
import pytest

import liborforge as lf

SPECS = Path(os.environ.get("LIBORFORGE_SPEC_DIR", Path(__file__).resolve().parents[2] / "specs"))


def model(name):
    return lf.Model.from_file(str(SPECS / f"{name}.json"))


@pytest.mark.parametrize("name,family", [("lmm_4tenor", "lmm"), ("fpm_4tenor", "fpm"), ("affine_4tenor", "affine")])
def test_specs_load_and_validate(name, family):
    m = model(name)
    assert m.family == family
    assert m.rate_count == 3
    assert m.dates == pytest.approx([0.0, 0.5, 1.0, 1.5, 2.0])
    report = m.validate(samples=200)
    assert report["verdict"]
    assert m.residual_sweep(samples=200)["passed"]


def test_lmm_drift_residual_vanishes():
    m = model("lmm_4tenor")
    x = np.array([0.3, -0.2, 0.1])
    for k in range(1, 4):
        assert abs(m.drift_residual_backward(k, 0.25, x)) < 1e-10
    assert abs(m.with_zero_drift().drift_residual_backward(1, 0.25, x)) > 1e-6


def test_simulate_shape_and_forward_start():
    m = model("fpm_4tenor")
    grid = m.simulate(paths=16, seed=3)
    assert grid.states.shape == (16, len(grid.times), m.dimension)
    assert grid.times[0] == 0.0 and grid.times[-1] == pytest.approx(2.0)
    forwards = np.asarray(m.forward_prices(grid, 1))
    b = [math.exp(-0.03 * t) for t in m.dates]
    assert forwards[:, 0] == pytest.approx(b[1] / b[4], rel=1e-12)


def test_simulation_reproducible_across_workers():
    m = model("lmm_4tenor")
    a = m.simulate(paths=50, seed=11, workers=1).states
    b = m.simulate(paths=50, seed=11, workers=4).states
    assert np.array_equal(a, b)


def test_riccati_linear_closed_form():
    d = lf.AffineDriver(1.0, -1.0, 0.0)
    sol = lf.riccati_solve(d, 1.0, 1.0, 1e-3)
    t = np.asarray(sol["t"])
    assert np.max(np.abs(np.asarray(sol["psi"]) - np.exp(-t))) < 1e-8


def test_mgf_of_pure_drift_driver():
    d = lf.AffineDriver(1.0, -1.0, 0.0)
    # dX = (1 - X) dt from X_0 = 1 stays at 1.
    assert lf.mgf(d, 0.7, 1.0, 1.0) == pytest.approx(math.exp(0.7), rel=1e-8)


def test_calibration_reproduces_curve():
    d = lf.AffineDriver(0.6, -0.5, 0.1, constant_jumps=[(0.2, 0.5)], state_jumps=[(0.1, 0.3)])
    dates = [0.0, 0.5, 1.0, 1.5, 2.0]
    prices = [math.exp(-0.03 * t) for t in dates[1:]]
    u = lf.calibrate_u(d, dates, prices)
    assert len(u) == 3
    assert all(a > b for a, b in zip(u, u[1:]))
    for k, uk in enumerate(u):
        target = prices[k] / prices[-1]
        assert lf.mgf(d, uk, dates[-1], 1.0) == pytest.approx(target, rel=1e-9)


def test_schema_error_is_raised():
    text = (SPECS / "minimal_2tenor.json").read_text()
    doc = json.loads(text)
    doc["surprise"] = 1
    with pytest.raises(lf.SchemaError):
        lf.Model.from_json(json.dumps(doc))
    assert issubclass(lf.SchemaError, lf.Error)


def test_canonicalize_is_a_fixpoint():
    text = (SPECS / "minimal_2tenor.json").read_text()
    once = lf.canonicalize_spec(text)
    assert lf.canonicalize_spec(once) == once


def test_run_cli_exit_codes(tmp_path):
    spec = str(SPECS / "fpm_4tenor.json")
    code, out, _ = lf.run_cli("check-martingale", spec, out_dir=str(tmp_path), paths=20000)
    assert code == 0
    assert (tmp_path / "martingale.csv").exists()
    code, _, _ = lf.run_cli("check-martingale", spec, out_dir=str(tmp_path), paths=20000, zero_drift=True)
    assert code == 1
    code, _, _ = lf.run_cli("validate", str(tmp_path / "missing.json"), out_dir=str(tmp_path))
    assert code == 2
    code, _, _ = lf.run_cli("riccati", str(SPECS / "lmm_4tenor.json"), out_dir=str(tmp_path))
    assert code == 3


def test_caplet_parity_strike_zero():
    m = model("lmm_4tenor")
    quotes = m.caplet_prices(strikes=[0.0], paths=20000, seed=5)
    b = [math.exp(-0.03 * t) for t in m.dates]
    for q in quotes:
        k = q["k"]
        delta = m.dates[k + 1] - m.dates[k]
        libor = (b[k] / b[k + 1] - 1.0) / delta
        assert abs(q["price"] - b[k + 1] * delta * libor) <= 3.0 * q["std_error"]
