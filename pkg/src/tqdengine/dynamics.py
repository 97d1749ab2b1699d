"""Master-equation generator, stationary solver and time-evolution oracle.

The tracked variables are ordered (rho_00, rho_++, rho_--, rho_DD, X, Y) with
rho_+- = X + iY; coherences involving |0> or |D> are not tracked.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import EigenStructure, ModelParams
from .rates import DARK, MINUS, PLUS, RateSet

P0, PP, PM, PD, X, Y = range(6)
NVAR = 6
TRACE_ROW = np.array([1.0, 1.0, 1.0, 1.0, 0.0, 0.0])

RESIDUAL_TOL = 1e-10
NEGATIVE_CLAMP = 1e-10
DEGENERACY_RATIO = 1e-8
CONVERGENCE_TOL = 1e-6


class DegenerateSteadyState(RuntimeError):
    """The generator has more than one (numerically) stationary state."""


class NonConvergence(RuntimeError):
    """Time evolution did not settle within the requested horizon."""


@dataclass(frozen=True)
class StateVector:
    p0: np.ndarray
    pp: np.ndarray
    pm: np.ndarray
    pd: np.ndarray
    x: np.ndarray
    y: np.ndarray

    @classmethod
    def from_array(cls, v) -> "StateVector":
        v = np.asarray(v, dtype=float)
        return cls(*(v[..., k] for k in range(NVAR)))

    @classmethod
    def empty(cls) -> "StateVector":
        """The unoccupied dot |0><0|."""
        return cls(1.0, 0.0, 0.0, 0.0, 0.0, 0.0)

    def as_array(self) -> np.ndarray:
        return np.stack(np.broadcast_arrays(self.p0, self.pp, self.pm, self.pd, self.x, self.y), axis=-1)

    @property
    def trace(self):
        return self.p0 + self.pp + self.pm + self.pd

    @property
    def populations(self) -> np.ndarray:
        """Populations stacked in state order (+, -, D)."""
        return np.stack(np.broadcast_arrays(self.pp, self.pm, self.pd))


@dataclass(frozen=True)
class Generator:
    """Real matrix ``A`` with d(state)/dt = A @ state; shape (..., 6, 6)."""

    matrix: np.ndarray

    @property
    def chi(self):
        return np.abs(self.matrix[..., X, Y])


def build_generator(params: ModelParams, eig: EigenStructure, rates: RateSet) -> Generator:
    w_in = rates.total_in
    w_out = rates.total_out
    batch = w_in.shape[1:]
    g = np.asarray(params.meas, dtype=float) + np.zeros(batch)
    bp, bm, lam = eig.beta_plus, eig.beta_minus, eig.lambda_cap
    mixing = g * bp**2 * bm**2
    coupling = g * bp * bm * lam

    A = np.zeros(batch + (NVAR, NVAR))
    for state in (PLUS, MINUS, DARK):
        row = 1 + state
        A[..., P0, P0] -= w_in[state]
        A[..., P0, row] = w_out[state]
        A[..., row, P0] = w_in[state]
        A[..., row, row] = -w_out[state]

    A[..., PP, PP] -= mixing
    A[..., PP, PM] += mixing
    A[..., PP, X] = -coupling
    A[..., PM, PM] -= mixing
    A[..., PM, PP] += mixing
    A[..., PM, X] = coupling

    tunnel_out = w_out[PLUS] + w_out[MINUS]
    A[..., X, Y] = eig.chi
    A[..., X, X] = -0.5 * (tunnel_out + g * (bp**2 - bm**2) ** 2)
    A[..., X, PP] = -0.5 * coupling
    A[..., X, PM] = 0.5 * coupling
    A[..., Y, X] = -eig.chi
    A[..., Y, Y] = -0.5 * (tunnel_out + g * (bp**2 + bm**2) ** 2)
    return Generator(A)


def measurement_operator(params: ModelParams, eig: EigenStructure) -> np.ndarray:
    """Jump operator sqrt(gamma) |C><C| in the basis (|0>, |+>, |->, |D>).

    Assembled from the signed expansion sum_{i,j=+-} i j beta_i beta_j |i><j|.
    """
    beta = {+1: np.asarray(eig.beta_plus), -1: np.asarray(eig.beta_minus)}
    index = {+1: 1, -1: 2}
    batch = np.broadcast_shapes(np.shape(params.meas), np.shape(eig.chi))
    op = np.zeros(batch + (4, 4), dtype=complex)
    for i in (+1, -1):
        for j in (+1, -1):
            op[..., index[i], index[j]] = i * j * beta[i] * beta[j]
    return np.sqrt(np.asarray(params.meas, dtype=float))[..., None, None] * op


def _basis_operator(k: int) -> np.ndarray:
    rho = np.zeros((4, 4), dtype=complex)
    if k < 4:
        rho[k, k] = 1.0
    elif k == X:
        rho[1, 2] = rho[2, 1] = 1.0
    else:
        rho[1, 2] = 1j
        rho[2, 1] = -1j
    return rho


def to_density_matrix(state: StateVector) -> np.ndarray:
    """Embed the tracked variables into a 4x4 density matrix (0, +, -, D)."""
    v = state.as_array()
    rho = np.zeros(v.shape[:-1] + (4, 4), dtype=complex)
    for k in range(4):
        rho[..., k, k] = v[..., k]
    rho[..., 1, 2] = v[..., X] + 1j * v[..., Y]
    rho[..., 2, 1] = v[..., X] - 1j * v[..., Y]
    return rho


def _project(rho: np.ndarray) -> np.ndarray:
    return np.stack(
        [
            rho[..., 0, 0].real,
            rho[..., 1, 1].real,
            rho[..., 2, 2].real,
            rho[..., 3, 3].real,
            rho[..., 1, 2].real,
            rho[..., 1, 2].imag,
        ],
        axis=-1,
    )


def lindblad_dissipator(jump: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """D[rho] = L rho L^dag - {L^dag L, rho} / 2."""
    jump_dag = np.conj(np.swapaxes(jump, -1, -2))
    jdj = jump_dag @ jump
    return jump @ rho @ jump_dag - 0.5 * (jdj @ rho + rho @ jdj)


def build_measurement_dissipator(params: ModelParams, eig: EigenStructure) -> np.ndarray:
    """Action of the measurement dissipator on the six tracked variables.

    Built column by column from the explicit 4x4 operator algebra, so it is
    independent of the hand-expanded coefficients in :func:`build_generator`.
    """
    jump = measurement_operator(params, eig)
    columns = [_project(lindblad_dissipator(jump, _basis_operator(k))) for k in range(NVAR)]
    return np.stack(columns, axis=-1)


def _solve_bordered(A: np.ndarray) -> np.ndarray:
    M = A.copy()
    M[..., P0, :] = TRACE_ROW
    rhs = np.zeros(A.shape[:-1] + (1,))
    rhs[..., P0, 0] = 1.0
    try:
        v = np.linalg.solve(M, rhs)
        # one step of iterative refinement
        v = v + np.linalg.solve(M, rhs - M @ v)
        return v[..., 0]
    except np.linalg.LinAlgError:
        # exactly singular somewhere in the batch: fall back point by point
        if M.ndim == 2:
            return np.linalg.lstsq(M, rhs[:, 0], rcond=None)[0]
        out = np.array([_solve_bordered(a) for a in A.reshape(-1, NVAR, NVAR)])
        return out.reshape(A.shape[:-1])


def degeneracy_mask(A: np.ndarray) -> np.ndarray:
    """True where the second-smallest singular value signals a 2D kernel."""
    s = np.linalg.svd(A, compute_uv=False)
    return s[..., -2] < DEGENERACY_RATIO * s[..., 0]


def _clamp(v: np.ndarray) -> np.ndarray:
    v = v.copy()
    pops = v[..., :4]
    pops[(pops < 0) & (pops >= -NEGATIVE_CLAMP)] = 0.0
    return v


def solve_stationary(gen: Generator) -> tuple[StateVector, np.ndarray]:
    """Batched stationary solve.

    Returns the state (one per batch element) and a boolean mask flagging
    degenerate kernels. Degenerate entries still hold the bordered-solve
    output, which is only one arbitrary member of the stationary family.
    """
    A = np.asarray(gen.matrix, dtype=float)
    v = _clamp(_solve_bordered(A))
    return StateVector.from_array(v), degeneracy_mask(A)


def residual(gen: Generator, state: StateVector) -> np.ndarray:
    return np.max(np.abs(gen.matrix @ state.as_array()[..., None])[..., 0], axis=-1)


def steady_state(gen: Generator) -> StateVector:
    """Unique stationary state of a single generator.

    Raises
    ------
    DegenerateSteadyState
        If the kernel of the generator is (numerically) more than
        one-dimensional, e.g. in the bistable corner where both |-> and |D>
        are trapped below the Fermi level and the detector is off.
    """
    if np.ndim(gen.matrix) != 2:
        raise ValueError("steady_state expects a single 6x6 generator; use solve_stationary for batches")
    state, degenerate = solve_stationary(gen)
    if degenerate:
        raise DegenerateSteadyState("stationary state is not unique")
    return state


def default_timestep(gen: Generator) -> float:
    A = np.asarray(gen.matrix)
    return 0.1 / max(6.0 * float(np.max(np.abs(A))), float(gen.chi))


def rk4_propagator(A: np.ndarray, dt: float) -> np.ndarray:
    """One classic RK4 step for the linear system dv/dt = A v, as a matrix."""
    h = dt * A
    eye = np.eye(A.shape[-1])
    return eye + h @ (eye + h @ (eye + h @ (eye + h / 4.0) / 3.0) / 2.0)


def _trace_fix(M: np.ndarray) -> np.ndarray:
    # Re-impose exact probability conservation lost to rounding.
    M[..., P0, :] = TRACE_ROW - M[..., PP:X, :].sum(axis=-2)
    return M


def _power(M: np.ndarray, n: int) -> np.ndarray:
    result = np.eye(M.shape[-1])
    base = _trace_fix(M.copy())
    while n:
        if n & 1:
            result = _trace_fix(base @ result)
        n >>= 1
        if n:
            base = _trace_fix(base @ base)
    return result


def evolve(
    gen: Generator,
    v0: StateVector,
    t_final: float,
    dt: float | None = None,
    check_convergence: bool = False,
) -> StateVector:
    """Fixed-step RK4 integration of the master equation up to ``t_final``.

    The n-step RK4 map of a linear system is the n-th power of its one-step
    propagator, so it is applied by repeated squaring; the result equals
    stepping n times but costs O(log n) matrix products. The step is shrunk
    so that an even number of steps lands exactly on ``t_final``.

    With ``check_convergence`` the state at ``t_final / 2`` is compared with
    the final one and :class:`NonConvergence` raised if they differ by more
    than 1e-6 (max norm).
    """
    A = np.asarray(gen.matrix, dtype=float)
    if dt is None:
        dt = default_timestep(gen)
    if t_final <= 0:
        return v0
    half_steps = max(1, math.ceil(t_final / dt / 2))
    step = rk4_propagator(A, t_final / (2 * half_steps))
    half = _power(step, half_steps)
    v_half = half @ v0.as_array()
    v_final = half @ v_half
    if check_convergence:
        gap = float(np.max(np.abs(v_final - v_half)))
        if gap > CONVERGENCE_TOL:
            raise NonConvergence(f"state still moving at t_final (max change {gap:.3e})")
    return StateVector.from_array(v_final)


def relaxation_horizon(params: ModelParams) -> float:
    """Default oracle horizon: 1e4 over the smallest nonzero tunnel rate."""
    gammas = [float(g) for g in params.gammas if float(g) > 0]
    return 1e4 / min(gammas)


def evolve_from_empty(gen: Generator, params: ModelParams) -> StateVector:
    """Fallback preparation used when the stationary state is not unique."""
    return evolve(gen, StateVector.empty(), relaxation_horizon(params))
