"""Search for the best dirty-paper design point and the capacity threshold."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .errors import BracketError, ParameterError
from .rates import (
    DpcParams,
    DpcSpec,
    _dpc_rate_unchecked,
    _received_power,
    dpc_outer_bound,
)

__all__ = ["DpcOptResult", "optimize_dpc", "dpc_gamma_threshold", "golden_max"]

ALPHA_BOX = (-2.0, 3.0)
RHO_EPS = 1e-6
_GOLDEN = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class DpcOptResult:
    status: str  # "ok" or "infeasible"
    best_params: DpcParams | None
    best_rate: float
    feasibility_margin: float
    grid_step: float
    refine_tol: float
    delta: float

    @property
    def feasible(self) -> bool:
        return self.status == "ok"

    @property
    def achievable_rate(self) -> float:
        """``best_rate`` floored at zero; the raw value can be negative."""
        return max(0.0, self.best_rate) if self.feasible else 0.0


def golden_max(f, lo: float, hi: float, tol: float, max_iter: int = 200) -> tuple[float, float]:
    """Golden-section search for a maximum of ``f`` on ``[lo, hi]``."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def _objective(spec: DpcSpec, delta: float):
    def f(alpha, rho):
        with np.errstate(divide="ignore", invalid="ignore"):
            rate = _dpc_rate_unchecked(spec, alpha, rho)
            ok = _received_power(spec, alpha, rho) - spec.lambda_ >= delta
        return np.where(ok & np.isfinite(rate), rate, -np.inf)

    return f


def optimize_dpc(
    spec: DpcSpec,
    grid_step: float = 0.01,
    refine_tol: float = 1e-9,
    delta: float | None = None,
) -> DpcOptResult:
    """Maximise the dirty-paper rate over the feasible ``(alpha, rho)`` set.

    An exhaustive grid over ``alpha in [-2, 3]`` and ``rho in (-1, 1)``
    restricted to ``received_power - lambda >= delta`` seeds a cyclic
    coordinate ascent (golden section per coordinate) run to ``refine_tol``.

    If no grid point is feasible the result has ``status="infeasible"`` and
    rate 0; no rate is claimed in that case.
    """
    if not grid_step > 0 or not refine_tol > 0:
        raise ParameterError("grid_step and refine_tol must be > 0")
    if delta is None:
        delta = 1e-6 * (spec.lambda_ + 1)
    f = _objective(spec, delta)

    rho_hi = 1 - RHO_EPS
    alphas = np.arange(ALPHA_BOX[0], ALPHA_BOX[1] + grid_step / 2, grid_step)
    rhos = np.arange(-rho_hi, rho_hi + grid_step / 2, grid_step)
    rhos = np.clip(np.union1d(rhos, [0.0]), -rho_hi, rho_hi)
    A, R = np.meshgrid(alphas, rhos, indexing="ij")
    vals = f(A, R)
    if not np.isfinite(vals).any():
        return DpcOptResult("infeasible", None, 0.0, -math.inf, grid_step, refine_tol, delta)
    i, j = np.unravel_index(np.argmax(vals), vals.shape)
    a, r, best = float(A[i, j]), float(R[i, j]), float(vals[i, j])

    h = grid_step
    for _ in range(200):
        prev = best
        a_new, v = golden_max(
            lambda x: float(f(x, r)), max(ALPHA_BOX[0], a - 2 * h), min(ALPHA_BOX[1], a + 2 * h), refine_tol
        )
        if v > best:
            a, best = a_new, v
        r_new, v = golden_max(
            lambda x: float(f(a, x)), max(-rho_hi, r - 2 * h), min(rho_hi, r + 2 * h), refine_tol
        )
        if v > best:
            r, best = r_new, v
        if best - prev <= refine_tol:
            h = max(h / 2, refine_tol)
            if h <= refine_tol * 10:
                break

    params = DpcParams.of(spec, a, r)
    return DpcOptResult(
        "ok", params, best, params.received_power - spec.lambda_, grid_step, refine_tol, delta
    )


def dpc_gamma_threshold(lambda_: float, sigma_t2: float, sigma_w2: float, xtol: float = 1e-12) -> float:
    """Input power at which Costa's parameters exactly meet the jammer.

    Solves ``(g + a0 st2)^2 / (g + a0^2 st2) = lambda`` with
    ``a0 = g / (g + lambda + sigma_w2)`` by bisection on ``(0, lambda]``.
    """
    if min(lambda_, sigma_t2, sigma_w2) < 0:
        raise ParameterError("inputs must be >= 0")
    if sigma_t2 == 0 or lambda_ == 0:
        return float(lambda_)

    def excess(g):
        a0 = g / (g + lambda_ + sigma_w2)
        return (g + a0 * sigma_t2) ** 2 / (g + a0**2 * sigma_t2) - lambda_

    lo, hi = 1e-300, max(lambda_, 1e-300)
    if not excess(lo) < 0 < excess(hi):
        raise BracketError(
            f"no sign change on [{lo:g}, {hi:g}]: excess = ({excess(lo):.3g}, {excess(hi):.3g})"
        )
    return float(bisect(excess, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=2000))


def outer_bound_gap(spec: DpcSpec, result: DpcOptResult) -> float:
    """Non-negative shortfall of the optimiser against the naive outer bound."""
    return dpc_outer_bound(spec) - result.best_rate
