"""Parameter sweeps, operating-regime labels and bias root-finders."""
from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect

from .dynamics import Generator, evolve_from_empty
from .model import PARAM_NAMES, ModelParams, validate
from .observables import OBSERVABLE_NAMES, compute_observables, solve, solve_batch

ALIASES = ("mu_c_minus_mu", "eps_minus_mu")
STATE_OUTPUTS = ("p0", "pp", "pm", "pd", "x", "y")
EXTRA_OUTPUTS = ("i_c0", "i_c_minus_i_c0")
OUTPUT_NAMES = OBSERVABLE_NAMES + STATE_OUTPUTS + EXTRA_OUTPUTS

# |J|, P below this are treated as zero when labelling regimes
REGIME_TOL = 1e-14
MAX_ITER = 200


class InvalidSpec(ValueError):
    pass


class NoRootInBracket(ValueError):
    pass


class NoEngineRegion(ValueError):
    pass


class RegimeLabel(str, enum.Enum):
    E = "E"
    R_L = "R_L"
    R_C = "R_C"
    R_R = "R_R"
    ER_L = "ER_L"
    ER_C = "ER_C"
    ER_R = "ER_R"
    NONE = "NONE"
    DEGENERATE = "DEGENERATE"


_FRIDGE = {0: RegimeLabel.R_L, 1: RegimeLabel.R_C, 2: RegimeLabel.R_R}
_HYBRID = {0: RegimeLabel.ER_L, 1: RegimeLabel.ER_C, 2: RegimeLabel.ER_R}


def classify(obs, temps, tol: float = REGIME_TOL) -> RegimeLabel:
    """Operating regime of one converged point.

    A reservoir counts as refrigerated when its heat current is negative and
    it is (one of) the coldest. With several candidates the most negative
    heat current wins, ties going to L, then C, then R. ``obs`` may be an
    :class:`Observables` or any mapping with the same field names.
    """
    get = obs.get if isinstance(obs, dict) else lambda k: getattr(obs, k)
    heats = [float(get("j_l")), float(get("j_c")), float(get("j_r"))]
    temps = [float(t) for t in temps]
    coldest = min(temps)
    cooled = [k for k in range(3) if temps[k] <= coldest and heats[k] < -tol]
    engine = float(get("power")) > tol
    if cooled:
        k = min(cooled, key=lambda k: heats[k])
        return _HYBRID[k] if engine else _FRIDGE[k]
    return RegimeLabel.E if engine else RegimeLabel.NONE


@dataclass(frozen=True)
class SweepSpec:
    """Two-axis grid over ``fixed``; each axis is (name, min, max, count)."""

    axis1: tuple
    axis2: tuple
    fixed: ModelParams = field(default_factory=ModelParams)
    outputs: tuple = OBSERVABLE_NAMES

    def check(self) -> "SweepSpec":
        for axis in (self.axis1, self.axis2):
            name, lo, hi, count = axis
            if name not in PARAM_NAMES and name not in ALIASES:
                raise InvalidSpec(f"unknown sweep parameter {name!r}")
            if int(count) != count or count < 1:
                raise InvalidSpec(f"count for {name!r} must be a positive integer")
            if not (np.isfinite(lo) and np.isfinite(hi)):
                raise InvalidSpec(f"bounds for {name!r} must be finite")
        if self.axis1[0] == self.axis2[0]:
            raise InvalidSpec("the two sweep axes must differ")
        unknown = [name for name in self.outputs if name not in OUTPUT_NAMES]
        if unknown:
            raise InvalidSpec(f"unknown outputs {unknown}")
        return self

    @property
    def values1(self) -> np.ndarray:
        return np.linspace(self.axis1[1], self.axis1[2], int(self.axis1[3]))

    @property
    def values2(self) -> np.ndarray:
        return np.linspace(self.axis2[1], self.axis2[2], int(self.axis2[3]))


def apply_axes(base: ModelParams, assignments: dict) -> ModelParams:
    """Set plain fields first, then the aliases measured from mu = mu_L."""
    direct = {k: v for k, v in assignments.items() if k in PARAM_NAMES}
    params = base.replace(**direct)
    if "mu_c_minus_mu" in assignments:
        params = params.replace(mu_c=np.asarray(params.mu_l) + assignments["mu_c_minus_mu"])
    if "eps_minus_mu" in assignments:
        params = params.replace(eps=np.asarray(params.mu_l) + assignments["eps_minus_mu"])
    return params


@dataclass
class SweepResult:
    spec: SweepSpec
    values: dict
    status: np.ndarray
    regime: np.ndarray

    @property
    def shape(self) -> tuple:
        return self.status.shape

    def records(self):
        """Row-major records: axis values, requested outputs, regime, status."""
        name1, name2 = self.spec.axis1[0], self.spec.axis2[0]
        v1, v2 = self.spec.values1, self.spec.values2
        for i in range(len(v1)):
            for j in range(len(v2)):
                row = {name1: float(v1[i]), name2: float(v2[j])}
                for name in self.spec.outputs:
                    row[name] = float(self.values[name][i, j])
                row["regime"] = str(self.regime[i, j])
                row["status"] = str(self.status[i, j])
                yield row


def _fallback(gens: Generator, params: ModelParams, mask: np.ndarray, states: np.ndarray) -> np.ndarray:
    # Stationary state is not unique: prepare from |0> instead (see evolve_from_empty).
    states = states.copy()
    flat_params = params.broadcast()
    for idx in zip(*np.nonzero(mask)):
        point = ModelParams(**{k: float(np.asarray(v)[idx]) for k, v in flat_params.as_dict().items()})
        states[idx] = evolve_from_empty(Generator(gens.matrix[idx]), point).as_array()
    return states


def evaluate_points(params: ModelParams) -> tuple[dict, np.ndarray]:
    """Solve an array-valued parameter set, substituting the |0>-prepared
    state wherever the stationary state is degenerate.

    Returns a dict of output arrays (every name in ``OUTPUT_NAMES``) and the
    degeneracy mask.
    """
    sol = solve_batch(params)
    mask = np.asarray(sol.degenerate)
    state, obs = sol.state, sol.observables
    if mask.any():
        arr = _fallback(sol.generator, sol.params, mask, state.as_array())
        state = type(state).from_array(arr)
        obs = compute_observables(sol.params, sol.eig, sol.rates, state)
    out = obs.as_dict()
    for name in STATE_OUTPUTS:
        out[name] = getattr(state, name)
    return out, mask


def _evaluate_chunk(params: ModelParams, outputs) -> tuple[dict, np.ndarray]:
    out, mask = evaluate_points(params)
    if any(name in EXTRA_OUTPUTS for name in outputs):
        bare, _ = evaluate_points(params.replace(meas=np.zeros(params.shape)))
        out["i_c0"] = bare["i_c"]
        out["i_c_minus_i_c0"] = out["i_c"] - bare["i_c"]
    return out, mask


def sweep(spec: SweepSpec, workers: int = 1, chunk: int = 4096) -> SweepResult:
    """Evaluate the grid of ``spec``.

    Points are independent; with ``workers > 1`` contiguous chunks are solved
    on a thread pool. Every point goes through the same per-matrix LAPACK
    calls either way, so the result does not depend on ``workers``.
    """
    spec.check()
    g1, g2 = np.meshgrid(spec.values1, spec.values2, indexing="ij")
    shape = g1.shape
    grid = apply_axes(spec.fixed, {spec.axis1[0]: g1.ravel(), spec.axis2[0]: g2.ravel()}).broadcast()
    validate(grid)

    n = g1.size
    bounds = [(s, min(s + chunk, n)) for s in range(0, n, chunk)]
    pieces = [
        ModelParams(**{k: np.asarray(v)[a:b] for k, v in grid.as_dict().items()}) for a, b in bounds
    ]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda p: _evaluate_chunk(p, spec.outputs), pieces))
    else:
        results = [_evaluate_chunk(p, spec.outputs) for p in pieces]

    names = list(results[0][0])
    values = {k: np.concatenate([np.asarray(r[0][k]) for r in results]).reshape(shape) for k in names}
    degenerate = np.concatenate([r[1] for r in results]).reshape(shape)
    status = np.where(degenerate, "DEGENERATE", "OK")

    temps = np.stack([np.broadcast_to(np.asarray(t), (n,)) for t in grid.temps], axis=-1).reshape(shape + (3,))
    regime = np.empty(shape, dtype=object)
    for idx in np.ndindex(shape):
        if degenerate[idx]:
            regime[idx] = RegimeLabel.DEGENERATE.value
        else:
            point = {k: values[k][idx] for k in ("j_l", "j_c", "j_r", "power")}
            regime[idx] = classify(point, temps[idx]).value
    return SweepResult(spec=spec, values=values, status=status, regime=regime)


def _bisect(func, a: float, b: float, xtol: float) -> float:
    return bisect(func, a, b, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=MAX_ITER)


def population_imbalance(params: ModelParams) -> float:
    state = solve(params).state
    return float(state.pp - state.pm)


def find_decoupling_bias(params: ModelParams, bracket=(0.0, 15.0), xtol: float = 1e-12) -> float:
    """Central-reservoir potential mu* at which rho_++ = rho_--.

    There the measurement terms of the master equation vanish on the
    stationary state, so currents no longer depend on the detector strength
    and no heat is exchanged with it.
    """

    def imbalance(mu_c):
        return population_imbalance(params.replace(mu_c=mu_c))

    lo, hi = bracket
    f_lo, f_hi = imbalance(lo), imbalance(hi)
    if f_lo == 0.0:
        return float(lo)
    if f_hi == 0.0:
        return float(hi)
    if np.sign(f_lo) == np.sign(f_hi):
        raise NoRootInBracket(f"rho_++ - rho_-- does not change sign on [{lo}, {hi}]")
    return float(_bisect(imbalance, lo, hi, xtol))


def _scan_offsets(span: float) -> np.ndarray:
    # geometric near zero bias (low-voltage peak at weak detection), linear beyond
    return np.unique(np.concatenate([np.geomspace(1e-6, span, 400), np.linspace(0.0, span, 1501)[1:]]))


def find_stall_voltage(params: ModelParams, direction: int = 1, span: float = 30.0, xtol: float = 1e-12) -> float:
    """Bias mu_C - mu where the generated power first falls back to zero.

    The bias is scanned away from zero in the sign of ``direction``; the
    first interval where P goes from positive to non-positive after the
    power-generating window is refined by bisection. Returns the signed bias.
    """
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    mu = float(params.mu_l)
    offsets = direction * _scan_offsets(span)
    power = np.asarray(solve_batch(params.replace(mu_c=mu + offsets)).observables.power)
    producing = np.nonzero(power > REGIME_TOL)[0]
    if producing.size == 0:
        raise NoEngineRegion("P <= 0 over the whole scan")
    first = producing[0]
    after = np.nonzero(power[first:] <= 0)[0]
    if after.size == 0:
        raise NoEngineRegion(f"P stays positive up to |mu_C - mu| = {span}; widen the scan")
    k = first + after[0]

    def p_of(v):
        return float(solve(params.replace(mu_c=mu + v)).observables.power)

    return float(_bisect(p_of, offsets[k - 1], offsets[k], xtol))
