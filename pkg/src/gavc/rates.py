"""Closed-form rates, regions and thresholds for the scalar channel families.

All rates are in bits per channel use. ``LOG`` is the only place the base
is fixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence, Union

import numpy as np

from .channel import ScalarAvcSpec
from .errors import DegenerateError, FeasibilityError, ParameterError, ScheduleError

__all__ = [
    "LOG",
    "awgn_rate",
    "randomized_capacity",
    "deterministic_capacity",
    "BroadcastSpec",
    "RateRegionPoint",
    "BroadcastRegion",
    "broadcast_region",
    "broadcast_sum_rate_cap",
    "DpcSpec",
    "DpcParams",
    "alpha0",
    "dpc_feasible",
    "dpc_rate",
    "dpc_capacity_condition",
    "dpc_outer_bound",
    "WatermarkPower",
    "watermark_covertext_power",
    "key_size_schedule",
]

LOG: Callable = np.log2


def awgn_rate(snr) -> float:
    """Half log of ``1 + snr``."""
    return 0.5 * LOG(1.0 + snr)


def randomized_capacity(spec: ScalarAvcSpec) -> float:
    """Capacity with unlimited shared randomness: the jammer acts as extra noise."""
    return float(awgn_rate(spec.gamma / (spec.lambda_ + spec.sigma_w2)))


def deterministic_capacity(spec: ScalarAvcSpec) -> float:
    """Average-error capacity of deterministic codes; zero when gamma <= lambda."""
    if spec.gamma <= spec.lambda_:
        return 0.0
    return randomized_capacity(spec)


# --------------------------------------------------------------------------
# degraded broadcast


@dataclass(frozen=True)
class BroadcastSpec:
    gamma: float
    lambda_: float
    sigma1_2: float
    sigma2_2: float

    def __post_init__(self):
        if self.gamma < 0 or self.lambda_ < 0:
            raise ParameterError("gamma and lambda must be >= 0")
        if not 0 < self.sigma1_2 < self.sigma2_2:
            raise ParameterError("need 0 < sigma1_2 < sigma2_2 (receiver 1 is the strong user)")


@dataclass(frozen=True)
class RateRegionPoint:
    r1: float
    r2: float
    alpha: float
    kind: str = "superposition"


@dataclass(frozen=True)
class BroadcastRegion:
    """Superposition curve over the alpha grid plus the rate-splitting segment.

    ``segment`` runs from the ``alpha = lambda/gamma`` corner to the point
    where the weak user hands its whole rate to the strong user.
    """

    curve: tuple[RateRegionPoint, ...]
    segment: tuple[RateRegionPoint, ...]
    sum_rate_cap: float

    @property
    def points(self) -> tuple[RateRegionPoint, ...]:
        return self.curve + self.segment

    @property
    def empty(self) -> bool:
        return not self.curve and not self.segment

    def __bool__(self):
        return not self.empty

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def contains(self, r1: float, r2: float, tol: float = 1e-12) -> bool:
        """Membership in the convex hull of the points and the origin, closed downward."""
        if self.empty or r1 < -tol or r2 < -tol:
            return False
        pts = [(p.r1, p.r2) for p in self.points]
        pts += [(0.0, 0.0), (max(p[0] for p in pts), 0.0), (0.0, max(p[1] for p in pts))]
        from scipy.spatial import ConvexHull

        hull = ConvexHull(np.asarray(pts))
        eq = hull.equations
        return bool(np.all(eq[:, :2] @ np.array([r1, r2]) + eq[:, 2] <= tol))


def _strong_rate(spec: BroadcastSpec, alpha):
    return awgn_rate((1 - alpha) * spec.gamma / (spec.lambda_ + spec.sigma1_2))


def _weak_rate(spec: BroadcastSpec, alpha):
    return awgn_rate(
        alpha * spec.gamma / ((1 - alpha) * spec.gamma + spec.lambda_ + spec.sigma2_2)
    )


def broadcast_sum_rate_cap(spec: BroadcastSpec) -> float:
    g, lam = spec.gamma, spec.lambda_
    return float(
        awgn_rate((g - lam) / (lam + spec.sigma1_2)) + awgn_rate(lam / (g + spec.sigma2_2))
    )


def broadcast_region(spec: BroadcastSpec, alpha_grid: Sequence[float]) -> BroadcastRegion:
    """Achievable region of the jammed degraded broadcast channel.

    Parameters
    ----------
    spec : BroadcastSpec
    alpha_grid : sequence of float
        Cloud-centre power fractions, each in ``(lambda/gamma, 1]``.

    Returns
    -------
    BroadcastRegion
        Empty when ``lambda >= gamma``: the jammer can then symmetrize the
        cloud-centre codebook.
    """
    if spec.lambda_ >= spec.gamma:
        return BroadcastRegion((), (), 0.0)
    lo = spec.lambda_ / spec.gamma
    alphas = np.asarray(alpha_grid, dtype=float)
    bad = (alphas <= lo) | (alphas > 1)
    if bad.any():
        raise ParameterError(
            f"alpha must lie in ({lo:.6g}, 1]; offending values {alphas[bad][:5].tolist()}"
        )
    curve = tuple(
        RateRegionPoint(float(_strong_rate(spec, a)), float(_weak_rate(spec, a)), float(a))
        for a in alphas
    )
    corner = RateRegionPoint(
        float(_strong_rate(spec, lo)), float(_weak_rate(spec, lo)), lo, "time_sharing"
    )
    cap = broadcast_sum_rate_cap(spec)
    segment = (corner, RateRegionPoint(cap, 0.0, lo, "time_sharing"))
    return BroadcastRegion(curve, segment, cap)


# --------------------------------------------------------------------------
# dirty paper coding


@dataclass(frozen=True)
class DpcSpec:
    gamma: float
    lambda_: float
    sigma_w2: float
    sigma_t2: float

    def __post_init__(self):
        for name in ("gamma", "lambda_", "sigma_w2", "sigma_t2"):
            if not getattr(self, name) >= 0:
                raise ParameterError(f"{name.rstrip('_')} must be >= 0")

    @property
    def scalar(self) -> ScalarAvcSpec:
        """The same channel with the known interference removed."""
        return ScalarAvcSpec(self.gamma, self.lambda_, self.sigma_w2)


@dataclass(frozen=True)
class DpcParams:
    """A dirty-paper design point and the powers it induces.

    Build with :meth:`of`; the derived fields depend on the channel.
    """

    alpha: float
    rho: float
    p_u: float
    p_i: float
    p_y: float
    beta2: float  # nan when undefined
    received_power: float

    @classmethod
    def of(cls, spec: DpcSpec, alpha: float, rho: float) -> "DpcParams":
        if not -1 <= rho <= 1:
            raise ParameterError(f"rho must lie in [-1, 1], got {rho}")
        g, st2 = spec.gamma, spec.sigma_t2
        cross = math.sqrt(g * st2)
        p_u = g + 2 * rho * alpha * cross + alpha**2 * st2
        p_i = spec.lambda_ + spec.sigma_w2
        p_y = g + 2 * rho * cross + st2 + p_i
        decorrelated = (1 - rho**2) * g
        if p_u > decorrelated and st2 > 0:
            beta2 = (p_u / st2) * (1 + decorrelated / (p_u - decorrelated))
        else:
            beta2 = math.nan
        if p_u > 0:
            received = (g + (1 + alpha) * rho * cross + alpha * st2) ** 2 / p_u
        else:
            received = math.nan
        return cls(alpha, rho, p_u, p_i, p_y, beta2, received)

    @property
    def beta(self) -> float:
        return math.sqrt(self.beta2)


def alpha0(spec: DpcSpec) -> float:
    """Costa's scaling ``gamma / (gamma + lambda + sigma_w2)``."""
    den = spec.gamma + spec.lambda_ + spec.sigma_w2
    return spec.gamma / den if den > 0 else 0.0


def dpc_feasible(spec: DpcSpec, params: DpcParams) -> tuple[bool, float]:
    """Whether the auxiliary codebook's received power beats the jammer.

    Returns ``(feasible, margin)`` with ``margin = received_power - lambda``.
    """
    if not params.p_u > 0:
        raise DegenerateError("auxiliary power P_U is zero; received power undefined")
    margin = params.received_power - spec.lambda_
    return margin > 0, margin


def _dpc_rate_unchecked(spec: DpcSpec, alpha, rho):
    """Vectorised rate expression; no feasibility test."""
    g, st2 = spec.gamma, spec.sigma_t2
    cross = np.sqrt(g * st2)
    p_u = g + 2 * rho * alpha * cross + alpha**2 * st2
    p_i = spec.lambda_ + spec.sigma_w2
    p_y = g + 2 * rho * cross + st2 + p_i
    d = (1 - rho**2) * g
    return 0.5 * LOG(d * p_y / ((1 - alpha) ** 2 * d * st2 + p_i * p_u))


def _received_power(spec: DpcSpec, alpha, rho):
    g, st2 = spec.gamma, spec.sigma_t2
    cross = np.sqrt(g * st2)
    p_u = g + 2 * rho * alpha * cross + alpha**2 * st2
    with np.errstate(divide="ignore", invalid="ignore"):
        return (g + (1 + alpha) * rho * cross + alpha * st2) ** 2 / p_u


def dpc_rate(spec: DpcSpec, params: DpcParams) -> float:
    """Dirty-paper achievable rate at a feasible ``(alpha, rho)``.

    Raises
    ------
    DegenerateError
        ``|rho| = 1`` (the rate is minus infinity) or ``P_U = 0``.
    FeasibilityError
        Received auxiliary power does not exceed the jammer power.
    """
    if abs(params.rho) >= 1:
        raise DegenerateError("|rho| = 1 leaves no decorrelated power; rate is -inf")
    ok, margin = dpc_feasible(spec, params)
    if not ok:
        raise FeasibilityError(
            f"(alpha={params.alpha}, rho={params.rho}) infeasible: received power "
            f"{params.received_power:.6g} <= lambda {spec.lambda_:.6g} (margin {margin:.3g})"
        )
    d = (1 - params.rho**2) * spec.gamma
    num = d * params.p_y
    den = (1 - params.alpha) ** 2 * d * spec.sigma_t2 + params.p_i * params.p_u
    return float(0.5 * LOG(num / den))


def dpc_capacity_condition(spec: DpcSpec) -> bool:
    """True when Costa's parameters beat the jammer, so DPC reaches capacity."""
    if spec.gamma == 0:
        return False
    a0 = alpha0(spec)
    st2 = spec.sigma_t2
    return spec.lambda_ < (spec.gamma + a0 * st2) ** 2 / (spec.gamma + a0**2 * st2)


def dpc_outer_bound(spec: DpcSpec) -> float:
    if spec.lambda_ > (math.sqrt(spec.sigma_t2) + math.sqrt(spec.gamma)) ** 2:
        return 0.0
    return randomized_capacity(spec.scalar)


class WatermarkPower(NamedTuple):
    sigma_t2: float
    clamped: bool


def watermark_covertext_power(gamma: float, lambda_: float) -> WatermarkPower:
    """Covertext variance needed for noiseless deterministic watermarking at capacity.

    Below ``lambda = gamma`` the raw expression is negative: no covertext is
    needed, so the value is clamped to zero and ``clamped`` is set.
    """
    if not gamma > 0:
        raise ParameterError("gamma must be > 0")
    if lambda_ < 0:
        raise ParameterError("lambda must be >= 0")
    b = lambda_ / gamma
    value = gamma * (0.5 * b * math.sqrt(5 + 4 * b) - 0.5 * b - 1)
    if value < 0:
        return WatermarkPower(0.0, True)
    return WatermarkPower(value, False)


# --------------------------------------------------------------------------
# key sizes

KeyRule = Union[str, Callable[[int], int]]

_RULES: dict[str, Callable[[int, float], int]] = {
    "1": lambda n, c: 1,
    "n": lambda n, c: n,
    "cn": lambda n, c: max(1, int(math.ceil(c * n))),
    "nlogn": lambda n, c: n * int(math.ceil(math.log2(n))),
    "n2": lambda n, c: n * n,
    "2^n": lambda n, c: 1 << n,
}
_ALIASES = {"n^2": "n2", "n*n": "n2", "n*logn": "nlogn", "nlog2n": "nlogn", "2**n": "2^n", "exp": "2^n"}

# log2(K)/n above this at n = 2**12 means the schedule is not sub-exponential
_SUBEXP_PROBE_N = 1 << 12
_SUBEXP_LIMIT = 0.05


def _log2_int(k: int) -> float:
    if k < 1:
        raise ScheduleError(f"key size must be >= 1, got {k}")
    bits = k.bit_length()
    if bits <= 52:
        return math.log2(k)
    return bits - 53 + math.log2(k >> (bits - 53))


def key_size_schedule(n: int, rule: KeyRule = "nlogn", c: float = 1.0) -> int:
    """Key size ``K(n)`` for a named rule or a callable.

    Named rules: ``"1"``, ``"n"``, ``"cn"``, ``"nlogn"`` (n * ceil(log2 n)),
    ``"n2"``. Any rule whose ``log2 K(n) / n`` does not vanish (``"2^n"``,
    for instance) raises :class:`ScheduleError`.
    """
    if n < 2:
        raise ParameterError("n must be >= 2")
    if callable(rule):
        fn = lambda m: int(rule(m))  # noqa: E731
        label = getattr(rule, "__name__", "callable")
    else:
        key = _ALIASES.get(str(rule).replace(" ", ""), str(rule).replace(" ", ""))
        if key not in _RULES:
            raise ParameterError(f"unknown key-size rule {rule!r}; choose from {sorted(_RULES)}")
        fn = lambda m: _RULES[key](m, c)  # noqa: E731
        label = key
    probe = _log2_int(fn(_SUBEXP_PROBE_N)) / _SUBEXP_PROBE_N
    if probe > _SUBEXP_LIMIT:
        raise ScheduleError(
            f"rule {label!r} is not sub-exponential: log2 K(n)/n = {probe:.3g} at n={_SUBEXP_PROBE_N}"
        )
    return fn(n)
