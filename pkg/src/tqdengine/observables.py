"""Currents, heats, power, detector heat, efficiency, occupation and purity."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, fields

import numpy as np

from .dynamics import (
    Generator,
    StateVector,
    build_generator,
    lindblad_dissipator,
    measurement_operator,
    solve_stationary,
    steady_state,
    to_density_matrix,
)
from .model import EigenStructure, ModelParams, diagonalize, validate
from .rates import C, L, R, RateSet, fermi, golden_rule_rates, fermi_hole


class ApproximationOutOfRange(UserWarning):
    """The high-detuning closed form is used outside its range of validity."""


@dataclass(frozen=True)
class Observables:
    """Stationary outputs. Currents are positive when flowing into a reservoir.

    ``eta`` is NaN wherever the device is not a detector-powered engine.
    """

    i_l: np.ndarray
    i_c: np.ndarray
    i_r: np.ndarray
    j_l: np.ndarray
    j_c: np.ndarray
    j_r: np.ndarray
    power: np.ndarray
    j_det: np.ndarray
    eta: np.ndarray
    rho_cc: np.ndarray
    purity: np.ndarray

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


OBSERVABLE_NAMES = tuple(f.name for f in fields(Observables))


def _flows(state: StateVector, rates: RateSet, l: int) -> np.ndarray:
    # net particle flow from each eigenstate into reservoir l, shape (3, *batch)
    return rates.w_out[l] * state.populations - rates.w_in[l] * state.p0


def particle_current(state: StateVector, rates: RateSet, l: int):
    return _flows(state, rates, l).sum(axis=0)


def heat_current(state: StateVector, rates: RateSet, eig: EigenStructure, mu, l: int):
    """Heat flowing into reservoir ``l`` held at chemical potential ``mu``."""
    return ((eig.energies - mu) * _flows(state, rates, l)).sum(axis=0)


def electrical_power(params: ModelParams, currents) -> np.ndarray:
    """Sum_l mu_l I_l; equals I_C (mu_C - mu) when mu_L = mu_R = mu."""
    return sum(mu * i for mu, i in zip(params.mus, currents))


def detector_heat(power, heats) -> np.ndarray:
    """Energy balance: J_d = -(P + J_L + J_C + J_R)."""
    return -(power + sum(heats))


def detector_energy_flow(params: ModelParams, eig: EigenStructure, state: StateVector) -> np.ndarray:
    """Tr{H D_M[rho]}: energy injected into the dots by the measurement.

    Evaluated from the explicit 4x4 dissipator; in the stationary state this
    equals -J_d, which makes it an independent check on the energy balance.
    """
    rho = to_density_matrix(state)
    drho = lindblad_dissipator(measurement_operator(params, eig), rho)
    energies = np.stack(np.broadcast_arrays(0.0 * eig.e_plus, eig.e_plus, eig.e_minus, eig.e_d), axis=-1)
    return np.einsum("...k,...kk->...", energies, drho).real


def efficiency(power, j_det):
    """P / (-J_d) where P > 0 and J_d < 0, NaN elsewhere."""
    power = np.asarray(power, dtype=float)
    j_det = np.asarray(j_det, dtype=float)
    engine = (power > 0) & (j_det < 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(engine, power / np.where(engine, -j_det, 1.0), np.nan)


def central_occupation(state: StateVector, eig: EigenStructure):
    return eig.theta_alpha_plus**2 * state.pp + eig.theta_alpha_minus**2 * state.pm


def purity(state: StateVector):
    return state.p0**2 + state.pp**2 + state.pm**2 + state.pd**2 + 2.0 * (state.x**2 + state.y**2)


def rho_cc0_from_occupations(f_minus, f_dark, omega, delta):
    """Residual central occupation 2 f_- (1 - f_D) / (1 - f_- f_D) * (Omega/Delta)^2.

    Separated from :func:`high_detuning_rho_cc0` so the order-of-limits
    behaviour can be probed with the occupations set directly.
    """
    f_minus = np.asarray(f_minus, dtype=float)
    hole_dark = 1.0 - np.asarray(f_dark, dtype=float)
    # 1 - f_- f_D rewritten as a sum of non-negative terms
    denom = (1.0 - f_minus) + f_minus * hole_dark
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(denom > 0, 2.0 * f_minus * hole_dark / np.where(denom > 0, denom, 1.0), 0.0)
    return ratio * (np.asarray(omega) / np.asarray(delta)) ** 2


def high_detuning_rho_cc0(params: ModelParams):
    """Leading-order central-dot occupation without the detector.

    Assumes zero bias and equal tunnel rates. Emits
    :class:`ApproximationOutOfRange` (a warning) when the detuning is not
    at least five times Omega, T and |eps - mu|.
    """
    scale = max(abs(float(params.omega)), float(params.t_l), abs(float(params.eps) - float(params.mu_l)))
    if abs(float(params.delta)) < 5.0 * scale:
        warnings.warn(
            f"delta={params.delta} is not >> max(omega, T, |eps-mu|)={scale}",
            ApproximationOutOfRange,
            stacklevel=2,
        )
    eig = diagonalize(params)
    f_minus = fermi(eig.e_minus, params.mu_l, params.t_l)
    hole_minus = fermi_hole(eig.e_minus, params.mu_l, params.t_l)
    hole_dark = fermi_hole(eig.e_d, params.mu_l, params.t_l)
    denom = hole_minus + f_minus * hole_dark
    return 2.0 * f_minus * hole_dark / denom * (params.omega / params.delta) ** 2


def compute_observables(
    params: ModelParams, eig: EigenStructure, rates: RateSet, state: StateVector
) -> Observables:
    currents = [particle_current(state, rates, l) for l in (L, C, R)]
    heats = [heat_current(state, rates, eig, params.mus[l], l) for l in (L, C, R)]
    power = electrical_power(params, currents)
    j_det = detector_heat(power, heats)
    return Observables(
        i_l=currents[L],
        i_c=currents[C],
        i_r=currents[R],
        j_l=heats[L],
        j_c=heats[C],
        j_r=heats[R],
        power=power,
        j_det=j_det,
        eta=efficiency(power, j_det),
        rho_cc=central_occupation(state, eig),
        purity=purity(state),
    )


@dataclass(frozen=True)
class Solution:
    """Everything computed for one parameter point (or one batch)."""

    params: ModelParams
    eig: EigenStructure
    rates: RateSet
    generator: Generator
    state: StateVector
    observables: Observables
    degenerate: np.ndarray


def prepare(params: ModelParams):
    params = validate(params)
    eig = diagonalize(params)
    rates = golden_rule_rates(params, eig)
    return params, eig, rates, build_generator(params, eig, rates)


def solve(params: ModelParams) -> Solution:
    """Validate, build and solve a single point; raises on a degenerate kernel."""
    params, eig, rates, gen = prepare(params)
    state = steady_state(gen)
    obs = compute_observables(params, eig, rates, state)
    return Solution(params, eig, rates, gen, state, obs, np.asarray(False))


def solve_batch(params: ModelParams) -> Solution:
    """Solve every point of an array-valued parameter set without raising.

    Degenerate points are flagged in ``Solution.degenerate``; their state is
    whatever the bordered solve returned and callers decide how to treat it.
    """
    params, eig, rates, gen = prepare(params)
    state, degenerate = solve_stationary(gen)
    obs = compute_observables(params, eig, rates, state)
    return Solution(params, eig, rates, gen, state, obs, degenerate)


__all__ = [
    "ApproximationOutOfRange",
    "Observables",
    "OBSERVABLE_NAMES",
    "Solution",
    "central_occupation",
    "compute_observables",
    "detector_energy_flow",
    "detector_heat",
    "efficiency",
    "electrical_power",
    "heat_current",
    "high_detuning_rho_cc0",
    "particle_current",
    "purity",
    "rho_cc0_from_occupations",
    "solve",
    "solve_batch",
]
