import numpy as np
import pytest

from tqdengine.analysis import (
    InvalidSpec,
    NoEngineRegion,
    NoRootInBracket,
    RegimeLabel,
    SweepSpec,
    classify,
    find_decoupling_bias,
    find_stall_voltage,
    sweep,
)
from tqdengine.observables import solve

from conftest import FIG2

EQUAL_T = (1.0, 1.0, 1.0)


def obs(power=0.0, j_l=0.0, j_c=0.0, j_r=0.0):
    return {"power": power, "j_l": j_l, "j_c": j_c, "j_r": j_r}


@pytest.mark.parametrize(
    "values, temps, label",
    [
        (obs(power=1e-3, j_l=1e-3, j_c=2e-3, j_r=1e-3), EQUAL_T, RegimeLabel.E),
        (obs(power=1e-3, j_c=-1e-4, j_l=1e-3), EQUAL_T, RegimeLabel.ER_C),
        (obs(power=-1e-3, j_l=-1e-4, j_r=-1e-4, j_c=2e-3), EQUAL_T, RegimeLabel.R_L),
        (obs(power=-1e-3, j_l=-1e-4, j_r=-3e-4), EQUAL_T, RegimeLabel.R_R),
        (obs(power=-1e-3, j_l=1e-3), EQUAL_T, RegimeLabel.NONE),
        # the hot reservoir cannot be refrigerated
        (obs(power=-1e-3, j_l=-1e-3, j_r=1e-3), (1.1, 1.0, 1.0), RegimeLabel.NONE),
        (obs(power=-1e-3, j_l=1e-3, j_r=-1e-4), (1.1, 1.0, 1.0), RegimeLabel.R_R),
        (obs(power=1e-20, j_l=-1e-20), EQUAL_T, RegimeLabel.NONE),
    ],
)
def test_classify(values, temps, label):
    assert classify(values, temps) is label


def test_classify_accepts_observables():
    o = solve(FIG2.replace(mu_c=2.0, meas=0.5)).observables
    assert classify(o, EQUAL_T) in (RegimeLabel.E, RegimeLabel.ER_L, RegimeLabel.ER_C, RegimeLabel.ER_R)


def test_one_point_sweep_equals_single_solve():
    spec = SweepSpec(("mu_c_minus_mu", 2.0, 2.0, 1), ("meas", 0.3, 0.3, 1), fixed=FIG2)
    result = sweep(spec)
    single = solve(FIG2.replace(mu_c=2.0, meas=0.3)).observables
    for name, value in single.as_dict().items():
        np.testing.assert_equal(result.values[name][0, 0], value)


def test_sweep_is_row_major():
    spec = SweepSpec(("eps", -1.0, 0.0, 3), ("delta", 5.0, 10.0, 2))
    rows = list(sweep(spec).records())
    assert [(r["eps"], r["delta"]) for r in rows] == [(-1.0, 5.0), (-1.0, 10.0), (-0.5, 5.0), (-0.5, 10.0), (0.0, 5.0), (0.0, 10.0)]


def test_sweep_serial_equals_threaded():
    spec = SweepSpec(("eps_minus_mu", -4.0, 4.0, 41), ("mu_c_minus_mu", -10.0, 10.0, 37))
    a = sweep(spec)
    b = sweep(spec, workers=4, chunk=97)
    for name in a.values:
        np.testing.assert_array_equal(a.values[name], b.values[name])
    np.testing.assert_array_equal(a.regime, b.regime)


def test_sweep_keeps_degenerate_points():
    spec = SweepSpec(("eps", -30.0, -1.0, 2), ("meas", 0.0, 0.0, 1))
    result = sweep(spec)
    assert list(result.status[:, 0]) == ["DEGENERATE", "OK"]
    assert result.regime[0, 0] == "DEGENERATE"
    # fallback state evolved from the empty dot is still normalized
    assert result.values["p0"][0, 0] + result.values["pp"][0, 0] + result.values["pm"][0, 0] + result.values["pd"][0, 0] == pytest.approx(1.0)


def test_detuning_map_peaks_at_small_detuning():
    spec = SweepSpec(("eps_minus_mu", -4.0, 4.0, 17), ("delta", -10.0, 10.0, 41), fixed=FIG2.replace(meas=0.5))
    i_c = sweep(spec).values["i_c"]
    deltas = spec.values2
    best = deltas[np.argmax(i_c, axis=1)]
    # peak a few hoppings away from resonance, not at the largest detuning
    assert np.all((np.abs(best) >= 1.0) & (np.abs(best) <= 6.0))
    # long tail: a sizeable fraction survives at delta = 10 omega
    assert np.all(i_c[:, -1] > 0.1 * i_c.max(axis=1))


@pytest.mark.parametrize(
    "spec",
    [
        SweepSpec(("bogus", 0, 1, 2), ("eps", 0, 1, 2)),
        SweepSpec(("eps", 0, 1, 0), ("delta", 0, 1, 2)),
        SweepSpec(("eps", 0, 1, 2), ("eps", 0, 1, 2)),
        SweepSpec(("eps", 0, np.inf, 2), ("delta", 0, 1, 2)),
        SweepSpec(("eps", 0, 1, 2), ("delta", 0, 1, 2), outputs=("nope",)),
    ],
)
def test_invalid_specs(spec):
    with pytest.raises(InvalidSpec):
        sweep(spec)


def test_decoupling_bias():
    mu_star = find_decoupling_bias(FIG2)
    assert 0 < mu_star <= 15
    # near the alignment of the upper level with the central potential
    assert abs(mu_star - (FIG2.eps + 10.392304845413264 / 2 + 5.0)) < 2.0
    sol = solve(FIG2.replace(mu_c=mu_star))
    assert abs(float(sol.state.pp - sol.state.pm)) < 1e-9
    weak = solve(FIG2.replace(mu_c=mu_star, meas=0.1)).observables.i_c
    strong = solve(FIG2.replace(mu_c=mu_star, meas=0.2)).observables.i_c
    assert abs(float(weak - strong)) < 1e-6
    assert abs(float(sol.observables.j_det)) < 1e-8


def test_decoupling_bias_is_resolution_stable():
    a = find_decoupling_bias(FIG2)
    b = find_decoupling_bias(FIG2, bracket=(5.0, 15.0), xtol=0.5e-12)
    assert abs(a - b) < 1e-6


def test_decoupling_bias_needs_sign_change():
    with pytest.raises(NoRootInBracket):
        find_decoupling_bias(FIG2, bracket=(0.0, 1.0))


def test_stall_voltage_root():
    p = FIG2.replace(meas=0.5)
    v = find_stall_voltage(p)
    assert v > 0
    assert abs(float(solve(p.replace(mu_c=v)).observables.power)) < 1e-10
    assert float(solve(p.replace(mu_c=0.5 * v)).observables.power) > 0


def test_no_engine_without_resource():
    with pytest.raises(NoEngineRegion):
        find_stall_voltage(FIG2.replace(meas=0.0))
