"""Physical parameters and the closed-form eigenbasis of the triple dot.

Units: hbar = k_B = e = 1 and the reference temperature is 1, so every energy
is measured in k_B T and every rate in k_B T / hbar.

All fields may hold numpy arrays of a common (broadcastable) shape instead of
scalars; every function in this package then evaluates element-wise. The
sweep machinery relies on this to solve whole grids in one batch.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np


class InvalidParameter(ValueError):
    """A model parameter violates its physical constraints."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class DegenerateDetuning(ZeroDivisionError):
    """The effective virtual coupling is undefined at zero detuning."""


@dataclass(frozen=True)
class ModelParams:
    """Inputs of the monitored triple-dot model.

    The defaults are the working point shared by most presets: outer
    levels one k_B T below the (common) chemical potential, central dot
    detuned by 10 k_B T, Omega = k_B T, Gamma = 0.1 k_B T / hbar, and a
    detector strength of 5 Gamma.
    """

    eps: float = -1.0
    delta: float = 10.0
    omega: float = 1.0
    gamma_l: float = 0.1
    gamma_c: float = 0.1
    gamma_r: float = 0.1
    meas: float = 0.5
    mu_l: float = 0.0
    mu_c: float = 0.0
    mu_r: float = 0.0
    t_l: float = 1.0
    t_c: float = 1.0
    t_r: float = 1.0

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)

    @property
    def gammas(self):
        return (self.gamma_l, self.gamma_c, self.gamma_r)

    @property
    def mus(self):
        return (self.mu_l, self.mu_c, self.mu_r)

    @property
    def temps(self):
        return (self.t_l, self.t_c, self.t_r)

    @property
    def shape(self) -> tuple:
        return np.broadcast_shapes(*(np.shape(v) for v in dataclasses.astuple(self)))

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in PARAM_NAMES}

    def broadcast(self) -> "ModelParams":
        """Copy with every field expanded to the common batch shape."""
        shape = self.shape
        if not shape:
            return self
        return ModelParams(
            **{name: np.broadcast_to(np.asarray(value, dtype=float), shape) for name, value in self.as_dict().items()}
        )


PARAM_NAMES = tuple(f.name for f in dataclasses.fields(ModelParams))


def validate(params: ModelParams) -> ModelParams:
    """Return ``params`` unchanged, or raise :class:`InvalidParameter`.

    The first offending field (in declaration order) is reported.
    """
    for name in PARAM_NAMES:
        value = np.asarray(getattr(params, name), dtype=float)
        if not np.all(np.isfinite(value)):
            raise InvalidParameter(name, "must be finite")
    if np.any(np.asarray(params.omega) <= 0):
        raise InvalidParameter("omega", "hopping must be > 0")
    for name in ("gamma_l", "gamma_c", "gamma_r", "meas"):
        if np.any(np.asarray(getattr(params, name)) < 0):
            raise InvalidParameter(name, "rates must be >= 0")
    if np.any(np.asarray(params.gamma_l) + np.asarray(params.gamma_c) + np.asarray(params.gamma_r) <= 0):
        raise InvalidParameter("gamma_l", "at least one tunnel rate must be > 0")
    for name in ("t_l", "t_c", "t_r"):
        if np.any(np.asarray(getattr(params, name)) <= 0):
            raise InvalidParameter(name, "temperature must be > 0")
    return params


@dataclass(frozen=True)
class EigenStructure:
    """Single-particle eigenbasis {|+>, |->, |D>} of the dot Hamiltonian.

    ``beta_plus`` and ``beta_minus`` are stored as positive magnitudes; the
    central-dot state decomposes as |C> = beta_minus |-> - beta_plus |+>.
    """

    chi: np.ndarray
    alpha_plus: np.ndarray
    alpha_minus: np.ndarray
    e_d: np.ndarray
    e_plus: np.ndarray
    e_minus: np.ndarray
    theta_omega_plus: np.ndarray
    theta_omega_minus: np.ndarray
    theta_alpha_plus: np.ndarray
    theta_alpha_minus: np.ndarray
    beta_plus: np.ndarray
    beta_minus: np.ndarray
    lambda_cap: np.ndarray

    @property
    def energies(self) -> np.ndarray:
        """Eigenenergies stacked in state order (+, -, D)."""
        return np.stack(np.broadcast_arrays(self.e_plus, self.e_minus, self.e_d))


def diagonalize(params: ModelParams) -> EigenStructure:
    params = params.broadcast()
    eps = np.asarray(params.eps, dtype=float)
    delta = np.asarray(params.delta, dtype=float)
    omega = np.asarray(params.omega, dtype=float)

    chi = np.sqrt(delta**2 + 8.0 * omega**2)
    # alpha_+ alpha_- = -2 Omega^2: take the root without cancellation, then
    # recover the other from the product (matters for |Delta| >> Omega).
    large = np.where(delta >= 0, 0.5 * (delta + chi), 0.5 * (delta - chi))
    small = -2.0 * omega**2 / large
    alpha_plus = np.where(delta >= 0, large, small)
    alpha_minus = np.where(delta >= 0, small, large)

    norm_plus = np.sqrt(2.0 * omega**2 + alpha_plus**2)
    norm_minus = np.sqrt(2.0 * omega**2 + alpha_minus**2)
    beta_plus = norm_plus / chi
    beta_minus = norm_minus / chi

    return EigenStructure(
        chi=chi,
        alpha_plus=alpha_plus,
        alpha_minus=alpha_minus,
        e_d=eps + 0.0,
        e_plus=eps + alpha_plus,
        e_minus=eps + alpha_minus,
        theta_omega_plus=omega / norm_plus,
        theta_omega_minus=omega / norm_minus,
        theta_alpha_plus=alpha_plus / norm_plus,
        theta_alpha_minus=alpha_minus / norm_minus,
        beta_plus=beta_plus,
        beta_minus=beta_minus,
        lambda_cap=beta_plus**2 - beta_minus**2,
    )


def single_particle_hamiltonian(params: ModelParams) -> np.ndarray:
    """3x3 one-electron block of the Hamiltonian in the local basis (L, C, R)."""
    eps, delta, omega = float(params.eps), float(params.delta), float(params.omega)
    return np.array(
        [
            [eps, -omega, 0.0],
            [-omega, eps + delta, -omega],
            [0.0, -omega, eps],
        ]
    )


def effective_coupling(params: ModelParams) -> float:
    """Second-order (virtual) L-R coupling Omega^2 / Delta through the central dot."""
    if np.any(np.asarray(params.delta) == 0):
        raise DegenerateDetuning("effective coupling undefined at delta = 0")
    return np.asarray(params.omega) ** 2 / np.asarray(params.delta)
