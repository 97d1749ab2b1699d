"""Fermi occupations and golden-rule tunneling rates."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .model import EigenStructure, ModelParams

# Reservoir and eigenstate indices used by every rate/array in the package.
L, C, R = 0, 1, 2
PLUS, MINUS, DARK = 0, 1, 2
RESERVOIRS = ("L", "C", "R")
STATES = ("+", "-", "D")


def fermi(e, mu, t):
    """Fermi occupation 1 / (1 + exp((e - mu) / t)).

    ``expit`` evaluates the logistic on the branch that cannot overflow, so
    arguments of order +-1e4 return cleanly (the far tail underflows to 0).
    """
    return expit(-(np.asarray(e, dtype=float) - mu) / t)


def fermi_hole(e, mu, t):
    # 1 - f computed directly; avoids cancellation when f -> 1.
    return expit((np.asarray(e, dtype=float) - mu) / t)


@dataclass(frozen=True)
class RateSet:
    """Dense rate table indexed as ``w_in[reservoir][state]``.

    ``w_in`` fills the empty dot (|0> -> |state>) from a reservoir and
    ``w_out`` empties it (|state> -> |0>) into that reservoir. Trailing axes
    carry any batch shape of the parameters.
    """

    w_in: np.ndarray
    w_out: np.ndarray

    @property
    def total_out(self) -> np.ndarray:
        """Total emptying rate of each eigenstate, summed over reservoirs."""
        return self.w_out.sum(axis=0)

    @property
    def total_in(self) -> np.ndarray:
        return self.w_in.sum(axis=0)


def matrix_elements(params: ModelParams, eig: EigenStructure) -> np.ndarray:
    """Gamma_l times |<lambda|l>|^2, shape (3 reservoirs, 3 states, *batch)."""
    params = params.broadcast()
    zero = np.zeros(params.shape)
    outer = np.stack([eig.theta_omega_plus**2 + zero, eig.theta_omega_minus**2 + zero, 0.5 + zero])
    central = np.stack([eig.theta_alpha_plus**2 + zero, eig.theta_alpha_minus**2 + zero, zero])
    return np.stack(
        [
            np.asarray(params.gamma_l) * outer,
            np.asarray(params.gamma_c) * central,
            np.asarray(params.gamma_r) * outer,
        ]
    )


def golden_rule_rates(params: ModelParams, eig: EigenStructure) -> RateSet:
    params = params.broadcast()
    weights = matrix_elements(params, eig)
    energies = eig.energies
    w_in = np.empty_like(weights)
    w_out = np.empty_like(weights)
    for idx, (mu, t) in enumerate(zip(params.mus, params.temps)):
        w_in[idx] = weights[idx] * fermi(energies, mu, t)
        w_out[idx] = weights[idx] * fermi_hole(energies, mu, t)
    # The dark state has no amplitude on the central dot.
    w_in[C, DARK] = 0.0
    w_out[C, DARK] = 0.0
    return RateSet(w_in=w_in, w_out=w_out)
