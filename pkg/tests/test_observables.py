import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tqdengine.dynamics import StateVector
from tqdengine.model import ModelParams
from tqdengine.observables import (
    ApproximationOutOfRange,
    central_occupation,
    compute_observables,
    detector_energy_flow,
    efficiency,
    high_detuning_rho_cc0,
    purity,
    rho_cc0_from_occupations,
    solve,
    solve_batch,
)

from conftest import FIG2, random_params


def test_equilibrium_has_no_flows():
    obs = solve(FIG2.replace(meas=0.0)).observables
    for name in ("i_l", "i_c", "i_r", "j_l", "j_c", "j_r", "power", "j_det"):
        assert abs(float(getattr(obs, name))) < 1e-15


def test_conservation_laws(rng):
    sol = solve_batch(random_params(rng, 3000))
    ok = ~sol.degenerate
    o = sol.observables
    assert np.max(np.abs(o.i_l + o.i_c + o.i_r)[ok]) < 1e-10
    assert np.max(np.abs(o.power + o.j_l + o.j_c + o.j_r + o.j_det)[ok]) < 1e-14


def test_detector_heat_matches_dissipator_energy_flow(rng):
    sol = solve_batch(random_params(rng, 3000))
    ok = ~sol.degenerate
    flow = detector_energy_flow(sol.params, sol.eig, sol.state)
    scale = np.maximum.reduce([np.abs(sol.observables.j_l), np.abs(sol.observables.j_c), np.abs(sol.observables.j_r)])
    assert np.max((np.abs(sol.observables.j_det + flow) / scale)[ok]) < 1e-8


def test_zero_bias_measurement_current():
    assert float(solve(FIG2).observables.i_c) > 0
    assert abs(float(solve(FIG2.replace(meas=0.0)).observables.j_det)) < 1e-15


def test_symmetric_device_splits_currents_evenly():
    p = ModelParams(eps=-0.5, delta=6.0, mu_c=4.0, meas=0.3, t_c=1.4)
    o = solve(p).observables
    assert float(o.i_l) == pytest.approx(float(o.i_r), rel=1e-12)
    assert float(o.j_l) == pytest.approx(float(o.j_r), rel=1e-12)


def test_central_current_follows_occupation_at_strong_detection():
    # measurement turns the virtual central occupation into real transport
    o = solve(ModelParams(eps=-1.0, delta=20.0, meas=2.0)).observables
    assert float(o.i_c) == pytest.approx(0.1 * float(o.rho_cc), rel=0.1)


def test_power_is_bias_times_central_current():
    p = FIG2.replace(mu_c=3.0, mu_l=0.5, mu_r=0.5)
    o = solve(p).observables
    assert float(o.power) == pytest.approx(float(o.i_c) * 2.5, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(shift=st.floats(-10, 10))
def test_gauge_invariance(shift):
    p = FIG2.replace(mu_c=2.0, meas=0.4)
    q = p.replace(eps=p.eps + shift, mu_l=shift, mu_c=2.0 + shift, mu_r=shift)
    a, b = solve(p).observables, solve(q).observables
    for name in ("i_l", "i_c", "i_r", "j_l", "j_c", "j_r", "j_det", "rho_cc", "purity"):
        assert float(getattr(b, name)) == pytest.approx(float(getattr(a, name)), rel=1e-8, abs=1e-13)


def test_efficiency_domain():
    assert np.isnan(efficiency(-1e-3, -1.0))
    assert np.isnan(efficiency(0.0, -1.0))
    assert np.isnan(efficiency(1e-3, 2e-3))
    assert efficiency(1e-3, -2e-3) == pytest.approx(0.5)


def test_purity_examples():
    assert purity(StateVector(0, 0, 0, 1, 0, 0)) == 1.0
    assert purity(StateVector(0, 0, 0.5, 0.5, 0, 0)) == 0.5
    assert purity(StateVector(0.25, 0.25, 0.25, 0.25, 0, 0)) == 0.25
    # a pure superposition of |+> and |->
    assert purity(StateVector(0, 0.5, 0.5, 0, 0.5, 0)) == pytest.approx(1.0)


def test_purity_bounds(rng):
    sol = solve_batch(random_params(rng, 2000))
    zeta = sol.observables.purity[~sol.degenerate]
    assert np.all(zeta >= 0.25 - 1e-12) and np.all(zeta <= 1 + 1e-12)


def test_central_occupation_of_empty_or_dark_dot():
    sol = solve(FIG2)
    assert central_occupation(StateVector(1, 0, 0, 0, 0, 0), sol.eig) == 0.0
    assert central_occupation(StateVector(0, 0, 0, 1, 0, 0), sol.eig) == 0.0


def test_rho_cc0_order_of_limits():
    omega, delta = 1.0, 50.0
    # both occupations saturate together: residual occupation vanishes
    assert rho_cc0_from_occupations(1.0, 1.0, omega, delta) == 0.0
    # f_- -> 1 first, f_D still below 1
    for f_dark in (0.1, 0.5, 0.9, 0.999):
        assert rho_cc0_from_occupations(1.0, f_dark, omega, delta) == pytest.approx(2 * omega**2 / delta**2)


def test_rho_cc0_against_full_solution():
    p = ModelParams(eps=-1.0, delta=50.0, omega=1.0, meas=1e-4)
    full = float(solve(p).observables.rho_cc)
    approx = float(high_detuning_rho_cc0(p)) * (1 + 1e-3)
    assert full == pytest.approx(approx, rel=0.05)


def test_rho_cc0_slope_in_measurement_strength():
    p = ModelParams(eps=-1.0, delta=50.0, omega=1.0)
    base = float(high_detuning_rho_cc0(p))
    for ratio in (1e-3, 0.1):
        full = float(solve(p.replace(meas=ratio * 0.1)).observables.rho_cc)
        assert full == pytest.approx(base * (1 + ratio), rel=0.05)


def test_rho_cc0_warns_outside_range():
    with pytest.warns(ApproximationOutOfRange):
        high_detuning_rho_cc0(ModelParams(eps=-1.0, delta=3.0))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        high_detuning_rho_cc0(ModelParams(eps=-1.0, delta=50.0))


def test_observables_of_degenerate_batch_are_flagged():
    sol = solve_batch(ModelParams(eps=np.array([-1.0, -30.0]), meas=0.0))
    assert list(sol.degenerate) == [False, True]


def test_compute_observables_reproduces_solve():
    sol = solve(FIG2)
    again = compute_observables(sol.params, sol.eig, sol.rates, sol.state)
    np.testing.assert_equal(again.as_dict(), sol.observables.as_dict())
