"""Rank-one jammer on a diagonal M-antenna Gaussian channel.

Covers mutual waterfilling against a full-rank jammer, the optimistic
upper bound, the max-min rate against a single jamming direction, the
closed form for M = 2 and a direct search over jamming directions used to
certify that elementary directions are worst for diagonal inputs.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .dpc_opt import golden_max
from .errors import DegenerateError, ParameterError
from .rates import LOG

log = logging.getLogger(__name__)

__all__ = [
    "MimoSpec",
    "PowerAllocation",
    "JamDirection",
    "waterfill",
    "full_rank_rate",
    "upper_bound_rate",
    "mimo_rate",
    "det_rank_one_update",
    "optimal_jam_index",
    "OracleResult",
    "worst_g_oracle",
    "Maxmin221",
    "maxmin_rate_221",
    "rate_wfillnew",
    "asymptotic_rate_221",
    "MaxminResult",
    "maxmin_solver_general",
    "project_simplex",
]


@dataclass(frozen=True, eq=False)
class MimoSpec:
    """Noise variances ``nu``, transmit budget ``gamma``, jammer budget ``lambda_``.

    Several results assume ``nu`` ascending; those operations check it
    themselves (:meth:`require_sorted`) so that unsorted spectra can still
    be used for plain rate evaluation.
    """

    nu: np.ndarray
    gamma: float
    lambda_: float

    def __post_init__(self):
        nu = np.atleast_1d(np.asarray(self.nu, dtype=float))
        if nu.ndim != 1 or nu.size < 1:
            raise ParameterError("nu must be a non-empty vector")
        if not np.all(nu > 0):
            raise ParameterError("all noise variances must be > 0")
        if self.gamma < 0 or self.lambda_ < 0:
            raise ParameterError("gamma and lambda must be >= 0")
        nu.setflags(write=False)
        object.__setattr__(self, "nu", nu)

    @property
    def m(self) -> int:
        return self.nu.size

    @property
    def is_sorted(self) -> bool:
        return bool(np.all(np.diff(self.nu) >= 0))

    def require_sorted(self):
        if not self.is_sorted:
            raise ParameterError(f"noise variances must be ascending, got {self.nu.tolist()}")


@dataclass(frozen=True)
class PowerAllocation:
    powers: np.ndarray
    water_level: float | None = None

    @property
    def total(self) -> float:
        return float(np.sum(self.powers))


@dataclass(frozen=True)
class JamDirection:
    g: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        norm = np.linalg.norm(g)
        if norm == 0:
            raise ParameterError("jamming direction must be non-zero")
        g = g / norm
        nz = np.flatnonzero(np.abs(g) > 1e-6)
        if nz.size and g[nz[0]] < 0:
            g = -g
        object.__setattr__(self, "g", g)

    @classmethod
    def elementary(cls, m: int, index: int) -> "JamDirection":
        e = np.zeros(m)
        e[index] = 1.0
        return cls(e)

    def angle_to(self, other: "JamDirection") -> float:
        c = abs(float(self.g @ other.g))
        return math.acos(min(1.0, c))


def waterfill(noise: Sequence[float], budget: float) -> PowerAllocation:
    """Water-filling of ``budget`` over parallel channels with the given noise levels.

    The level solves ``sum((level - noise)^+) = budget``. With the noise
    sorted, the candidate level for the ``k`` quietest channels is
    ``(budget + sum of their noise) / k``; the active set is the largest ``k``
    whose candidate exceeds the ``k``-th noise level.
    """
    noise = np.asarray(noise, dtype=float)
    if not np.all(noise > 0):
        raise ParameterError("noise levels must be > 0")
    if budget < 0:
        raise ParameterError("budget must be >= 0")
    if budget == 0:
        return PowerAllocation(np.zeros_like(noise), float(noise.min()))

    ordered = np.sort(noise)
    k = np.arange(1, noise.size + 1)
    levels = (budget + np.cumsum(ordered)) / k
    active = int(np.nonzero(levels > ordered)[0].max()) + 1 if np.any(levels > ordered) else 1
    level = float(levels[active - 1])
    powers = np.maximum(level - noise, 0.0)
    total = powers.sum()
    if total > 0:
        powers *= budget / total
    else:  # budget below the resolution of the noise floor
        quiet = noise == ordered[0]
        powers[quiet] = budget / quiet.sum()
    return PowerAllocation(powers, level)


def _parallel_rate(powers, noise) -> float:
    return float(np.sum(0.5 * LOG(1.0 + np.asarray(powers) / np.asarray(noise))))


def full_rank_rate(spec: MimoSpec) -> float:
    """Rate when the jammer waterfills first and the transmitter answers it."""
    jam = waterfill(spec.nu, spec.lambda_).powers
    tx = waterfill(spec.nu + jam, spec.gamma).powers
    return _parallel_rate(tx, spec.nu + jam)


def upper_bound_rate(spec: MimoSpec) -> float:
    """Waterfilling rate with the whole jammer budget on the quietest channel."""
    spec.require_sorted()
    tau = spec.nu.copy()
    tau[0] += spec.lambda_
    tx = waterfill(tau, spec.gamma).powers
    return _parallel_rate(tx, tau)


def det_rank_one_update(a, u, v) -> float:
    """``det(a + u v^T)`` as ``det(a) * (1 + v^T a^{-1} u)``."""
    a = np.asarray(a, dtype=float)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    sign, logdet = np.linalg.slogdet(a)
    if sign == 0 or not np.isfinite(logdet):
        raise DegenerateError("matrix is singular")
    try:
        x = np.linalg.solve(a, u)
    except np.linalg.LinAlgError as exc:
        raise DegenerateError("matrix is singular") from exc
    return float(sign * math.exp(logdet) * (1.0 + v @ x))


def _check_covariance(spec: MimoSpec, sx) -> np.ndarray:
    sx = np.asarray(sx, dtype=float)
    if sx.ndim == 1:
        sx = np.diag(sx)
    if sx.shape != (spec.m, spec.m):
        raise ParameterError(f"covariance must be {spec.m}x{spec.m}")
    scale = max(1.0, float(np.abs(sx).max()))
    if not np.allclose(sx, sx.T, atol=1e-12 * scale):
        raise ParameterError("covariance must be symmetric")
    if np.linalg.eigvalsh(sx).min() < -1e-10 * scale:
        raise ParameterError("covariance must be positive semidefinite")
    if np.trace(sx) > spec.gamma + 1e-9:
        raise ParameterError(f"trace {np.trace(sx):.6g} exceeds power budget {spec.gamma:.6g}")
    return sx


def _rate_many(spec: MimoSpec, sx: np.ndarray, gs: np.ndarray) -> np.ndarray:
    """Rate for every row of ``gs`` (unit vectors) via the rank-one identity."""
    sw = np.diag(spec.nu)
    a = sx + sw
    a_inv = np.linalg.inv(a)
    _, logdet_a = np.linalg.slogdet(a)
    logdet_w = float(np.sum(np.log(spec.nu)))
    qa = np.einsum("ij,jk,ik->i", gs, a_inv, gs)
    qw = np.einsum("ij,ij->i", gs / spec.nu, gs)
    lam = spec.lambda_
    nats = 0.5 * (logdet_a - logdet_w + np.log1p(lam * qa) - np.log1p(lam * qw))
    return nats / math.log(2)


def mimo_rate(spec: MimoSpec, sx, g, check: bool = True) -> float:
    """Mutual information for input covariance ``sx`` and jamming direction ``g``.

    Parameters
    ----------
    spec : MimoSpec
    sx : array_like
        ``M x M`` PSD covariance (or its diagonal) with trace within the budget.
    g : JamDirection or array_like
    check : bool
        Also evaluate the two determinants directly and require agreement
        to 1e-10.
    """
    sx = _check_covariance(spec, sx)
    gv = g.g if isinstance(g, JamDirection) else JamDirection(g).g
    rate = float(_rate_many(spec, sx, gv[None, :])[0])
    if check:
        sw = np.diag(spec.nu)
        jam = spec.lambda_ * np.outer(gv, gv)
        _, num = np.linalg.slogdet(sx + sw + jam)
        _, den = np.linalg.slogdet(sw + jam)
        direct = 0.5 * (num - den) / math.log(2)
        if abs(direct - rate) > 1e-10 * max(1.0, abs(rate)):
            raise ArithmeticError(f"determinant identity mismatch: {rate!r} vs {direct!r}")
    return rate


def optimal_jam_index(sx_diag, nu, lambda_: float) -> int:
    """Worst elementary jamming direction (0-based) for a diagonal input.

    Maximises ``(p_i / nu_i) / (p_i + nu_i + lambda)``; ties go to the lowest
    index.
    """
    p = np.asarray(sx_diag, dtype=float)
    nu = np.asarray(nu, dtype=float)
    if p.shape != nu.shape:
        raise ParameterError("sx_diag and nu must have the same length")
    score = (p / nu) / (p + nu + lambda_)
    return int(np.argmax(score))


# --------------------------------------------------------------------------
# direction oracle


@dataclass(frozen=True)
class OracleResult:
    direction: JamDirection
    rate: float
    flat: bool  # objective does not depend on g


_ORACLE_POINTS = 10_000


def worst_g_oracle(spec: MimoSpec, sx, seed: int = 0, starts: int = _ORACLE_POINTS) -> OracleResult:
    """Brute-force minimisation of the rate over unit jamming directions.

    Independent of the elementary-direction result it is used to check:
    for M = 2 a 10^4-point angle grid on ``[0, pi]`` with golden-section
    polish; for M > 2 multistart projected gradient descent on the sphere.
    """
    sx = _check_covariance(spec, sx)
    m = spec.m
    if spec.lambda_ == 0:
        g = JamDirection.elementary(m, 0)
        return OracleResult(g, float(_rate_many(spec, sx, g.g[None])[0]), True)
    if m == 1:
        g = JamDirection(np.ones(1))
        return OracleResult(g, float(_rate_many(spec, sx, g.g[None])[0]), False)
    if m == 2:
        return _oracle_angle(spec, sx)
    return _oracle_sphere(spec, sx, seed, starts)


def _unit(theta):
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


def _oracle_angle(spec, sx):
    theta = np.linspace(0.0, math.pi, _ORACLE_POINTS)
    rates = _rate_many(spec, sx, _unit(theta))
    k = int(np.argmin(rates))
    step = theta[1] - theta[0]
    f = lambda t: -float(_rate_many(spec, sx, _unit(np.array([t])))[0])  # noqa: E731
    t_best, v = golden_max(f, theta[k] - step, theta[k] + step, 1e-12)
    if -v > rates[k]:
        t_best, v = theta[k], -rates[k]
    flat = bool(np.ptp(rates) < 1e-14)
    return OracleResult(JamDirection(_unit(t_best)), -v, flat)


def _oracle_sphere(spec, sx, seed, starts):
    m = spec.m
    gen = np.random.default_rng(seed)
    g = gen.standard_normal((starts, m))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    a = sx + np.diag(spec.nu)
    a_inv = np.linalg.inv(a)
    w_inv = np.diag(1.0 / spec.nu)
    lam = spec.lambda_
    # rate(g) = base + 0.5 log2((1 + lam g'A^-1 g) / (1 + lam g'W^-1 g)) by the determinant lemma
    base = 0.5 * (np.linalg.slogdet(a)[1] - np.log(spec.nu).sum()) / math.log(2)

    def evaluate(gs):
        ba = gs @ a_inv
        bw = gs * (1.0 / spec.nu)
        da = 1 + lam * np.einsum("ij,ij->i", ba, gs)
        dw = 1 + lam * np.einsum("ij,ij->i", bw, gs)
        val = base + 0.5 * np.log2(da / dw)
        return val, lam * (ba / da[:, None] - bw / dw[:, None])

    step = np.full(starts, 1.0 / (lam * (np.abs(a_inv).sum() + np.abs(w_inv).sum())))
    val, d = evaluate(g)
    checkpoint = val
    keep = starts
    for it in range(3000):
        d -= np.einsum("ij,ij->i", d, g)[:, None] * g  # tangent component
        trial = g - step[:, None] * d
        trial /= np.linalg.norm(trial, axis=1, keepdims=True)
        tval, tgrad = evaluate(trial)
        better = tval <= val
        g[better] = trial[better]
        val[better] = tval[better]
        d[better] = tgrad[better]
        step = np.where(better, step * 1.5, step * 0.5)
        if it == 40 and keep > 64:
            # most starts are in the same basins by now; carry the best on
            order = np.argsort(val)[:64]
            g, val, step, d, keep = g[order], val[order], step[order], d[order], 64
        if it > 40 and np.all(step < 1e-14):
            break
        if it % 100 == 99:
            # stalled: no start moved its value in the last 100 steps
            if it > 100 and np.max(checkpoint - val) < 1e-15:
                break
            checkpoint = val.copy()
    k = int(np.argmin(val))
    # report the rate through the checked evaluator, not the fused one
    return OracleResult(JamDirection(g[k]), float(_rate_many(spec, sx, g[k][None])[0]), False)


# --------------------------------------------------------------------------
# max-min rates


@dataclass(frozen=True)
class Maxmin221:
    rate: float
    allocation: PowerAllocation
    case: int
    label: str  # "capacity" or "achievable"
    beta: float
    gamma_split: float


def _balance_root(nu1, nu2, gamma, lam) -> float:
    """Power on channel 1 at which both elementary directions are equally bad."""
    a = nu1 - nu2
    b = nu2 * (gamma + nu2 + lam) - nu1 * (gamma - nu1 - lam)
    c = -nu1 * gamma * (nu1 + lam)
    if gamma == 0:
        return 0.0
    if abs(a) < 1e-15 * max(abs(b), 1.0):
        root = -c / b
    else:
        disc = math.sqrt(b * b - 4 * a * c)
        # stable pair of roots
        q = -0.5 * (b + math.copysign(disc, b))
        roots = [q / a, c / q] if q != 0 else [-b / (2 * a)]
        inside = [r for r in roots if -1e-12 <= r <= gamma + 1e-12]
        if len(inside) != 1:
            raise ArithmeticError(f"expected one balance root in [0, {gamma}], got {roots}")
        root = inside[0]
    return min(max(root, 0.0), gamma)


def _r_split(p1, nu1, nu2, gamma, lam) -> float:
    return float(0.5 * LOG(1 + p1 / (lam + nu1)) + 0.5 * LOG(1 + (gamma - p1) / nu2))


def maxmin_rate_221(spec: MimoSpec) -> Maxmin221:
    """Closed-form max-min rate of the 2x2 channel with a single-antenna jammer.

    Cases follow the three regimes: the jammer's extra noise on channel 1
    stays below channel 2's noise (1), exceeds it but waterfilling keeps the
    jammer on channel 1 (2), otherwise the transmitter balances both
    directions (3). Cases 1-2 are labelled capacity, case 3 achievable.
    """
    if spec.m != 2:
        raise ParameterError("maxmin_rate_221 needs M = 2")
    if spec.nu[0] > spec.nu[1]:
        raise ParameterError(f"need nu1 <= nu2, got {spec.nu.tolist()}")
    nu1, nu2 = map(float, spec.nu)
    g, lam = spec.gamma, spec.lambda_
    beta = _balance_root(nu1, nu2, g, lam)
    split = 0.5 * (g - (nu1 + lam - nu2))
    # the split is a waterfilling allocation only once clipped to [0, gamma]
    wf = min(max(split, 0.0), g)
    if nu1 + lam <= nu2:
        case, p1, label = 1, wf, "capacity"
    elif g > nu1 + lam - nu2 and split > beta:
        case, p1, label = 2, wf, "capacity"
    else:
        case, p1, label = 3, beta, "achievable"
    level = nu1 + lam + p1 if case < 3 else None
    alloc = PowerAllocation(np.array([p1, g - p1]), level)
    return Maxmin221(_r_split(p1, nu1, nu2, g, lam), alloc, case, label, beta, split)


def rate_wfillnew(spec: MimoSpec) -> float:
    """Mutual-waterfilling input with the jammer confined to the quietest channel."""
    spec.require_sorted()
    jam = waterfill(spec.nu, spec.lambda_).powers
    tx = waterfill(spec.nu + jam, spec.gamma).powers
    noise = spec.nu.copy()
    noise[0] += spec.lambda_
    return _parallel_rate(tx, noise)


def asymptotic_rate_221(spec: MimoSpec) -> tuple[float, PowerAllocation]:
    """Limit of the 2x2 max-min rate as the jammer power grows without bound."""
    if spec.m != 2:
        raise ParameterError("asymptotic_rate_221 needs M = 2")
    nu1, nu2 = map(float, spec.nu)
    if not nu1 < nu2:
        raise ParameterError("need nu1 < nu2")
    total = nu1 + nu2
    alloc = PowerAllocation(np.array([spec.gamma * nu1 / total, spec.gamma * nu2 / total]))
    return float(0.5 * LOG(1 + spec.gamma / total)), alloc


def project_simplex(v: np.ndarray, total: float) -> np.ndarray:
    """Euclidean projection onto ``{x >= 0, sum(x) = total}``."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - total
    idx = np.arange(1, v.size + 1)
    k = idx[u - css / idx > 0][-1]
    tau = css[k - 1] / k
    return np.maximum(v - tau, 0.0)


def _elementary_rates(p, nu, lam):
    """Rate against each elementary direction, for a diagonal input ``p``."""
    base = 0.5 * np.log1p(p / nu)
    jammed = 0.5 * np.log1p(p / (nu + lam))
    return (base.sum() - base + jammed) / math.log(2)


def _elementary_grads(p, nu, lam):
    c = 0.5 / math.log(2)
    free = c / (nu + p)
    grads = np.tile(free, (nu.size, 1))
    np.fill_diagonal(grads, c / (nu + lam + p))
    return grads


@dataclass(frozen=True)
class MaxminResult:
    rate: float
    allocation: PowerAllocation
    jam_index: int
    iterations: int


def maxmin_solver_general(
    spec: MimoSpec, tol: float = 1e-6, max_iter: int = 20_000, polish: bool = True
) -> MaxminResult:
    """Max over diagonal inputs of the min over elementary jamming directions.

    Each per-direction rate is concave in the power vector, so their
    minimum is concave. Projected subgradient ascent with diminishing steps
    on the power simplex finds the optimum region; an SLSQP solve of the
    epigraph form then polishes the kink to ``tol``.
    """
    if not tol > 0:
        raise ParameterError("tol must be > 0")
    nu, lam, budget = spec.nu, spec.lambda_, spec.gamma
    m = spec.m
    if budget == 0:
        p = np.zeros(m)
        return MaxminResult(0.0, PowerAllocation(p), optimal_jam_index(p, nu, lam), 0)

    p = waterfill(nu, budget).powers
    best_p, best_v = p.copy(), float(_elementary_rates(p, nu, lam).min())
    it = 0
    stall = 0
    for it in range(1, max_iter + 1):
        rates = _elementary_rates(p, nu, lam)
        active = int(np.argmin(rates))
        gvec = _elementary_grads(p, nu, lam)[active]
        gvec = gvec - gvec.mean()  # component inside the simplex's affine hull
        norm = np.linalg.norm(gvec)
        if norm == 0:
            break
        p = project_simplex(p + (0.5 * budget / math.sqrt(it)) * gvec / norm, budget)
        v = float(_elementary_rates(p, nu, lam).min())
        if v > best_v + tol * 1e-3:
            best_p, best_v, stall = p.copy(), v, 0
        else:
            stall += 1
            if stall > 2000:
                break

    if polish and m > 1:
        best_p, best_v = _polish(best_p, best_v, nu, lam, budget, tol)

    jam = optimal_jam_index(best_p, nu, lam)
    if jam != 0 and lam > 0:
        log.info(
            "max-min optimum has worst jamming direction e_%d (not e_1): nu=%s gamma=%g lambda=%g",
            jam + 1, nu.tolist(), budget, lam,
        )
    return MaxminResult(best_v, PowerAllocation(best_p), jam, it)


def _polish(p0, v0, nu, lam, budget, tol):
    m = nu.size
    x0 = np.append(p0, v0)
    cons = [
        {
            "type": "ineq",
            "fun": lambda x: _elementary_rates(np.maximum(x[:m], 0), nu, lam) - x[m],
            "jac": lambda x: np.hstack(
                [_elementary_grads(np.maximum(x[:m], 0), nu, lam), -np.ones((m, 1))]
            ),
        },
        {"type": "eq", "fun": lambda x: x[:m].sum() - budget,
         "jac": lambda x: np.append(np.ones(m), 0.0)[None, :]},
    ]
    res = minimize(
        lambda x: -x[m],
        x0,
        jac=lambda x: np.append(np.zeros(m), -1.0),
        bounds=[(0, budget)] * m + [(None, None)],
        constraints=cons,
        method="SLSQP",
        options={"ftol": min(tol, 1e-10) * 1e-2, "maxiter": 500},
    )
    p = project_simplex(np.maximum(res.x[:m], 0), budget)
    v = float(_elementary_rates(p, nu, lam).min())
    return (p, v) if v >= v0 else (p0, v0)
