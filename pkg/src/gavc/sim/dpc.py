"""Binned dirty-paper encoder over a jammed channel with known interference."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..channel import sample_sphere_rows
from ..errors import ParameterError
from ..rates import LOG, DpcParams, DpcSpec
from .estimate import ErrorEstimate, from_counts

__all__ = [
    "bin_rate_threshold",
    "DpcEncoderConfig",
    "DpcCode",
    "build_dpc_code",
    "DpcEncoding",
    "dpc_encode",
    "encoder_failure_trials",
]

# largest auxiliary codebook we are willing to hold
_MAX_AUX = 1 << 20


def bin_rate_threshold(spec: DpcSpec, alpha: float, rho: float) -> float:
    """Smallest bin rate (bits) at which quantising ``beta T`` is expected to succeed."""
    p = DpcParams.of(spec, alpha, rho)
    return float(0.5 * LOG(p.p_u / ((1 - rho**2) * spec.gamma)))


@dataclass(frozen=True)
class DpcEncoderConfig:
    n: int
    r_bin: float
    r_u: float
    alpha: float
    rho: float
    spec: DpcSpec
    eps2: float | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError("n must be >= 1")
        if not self.r_u > self.r_bin >= 0:
            raise ParameterError(f"need r_u > r_bin >= 0, got r_u={self.r_u}, r_bin={self.r_bin}")
        if self.params.p_u <= 0:
            raise ParameterError("auxiliary power must be > 0")

    @property
    def params(self) -> DpcParams:
        return DpcParams.of(self.spec, self.alpha, self.rho)

    @property
    def tolerance(self) -> float:
        """Slack on the correlation test; defaults to 5% of sqrt(gamma * sigma_t2)."""
        if self.eps2 is not None:
            return self.eps2
        return 0.05 * math.sqrt(self.spec.gamma * self.spec.sigma_t2)

    @property
    def total_codewords(self) -> int:
        return max(1, math.ceil(2.0 ** (self.n * self.r_u) - 1e-9))

    @property
    def num_bins(self) -> int:
        return max(1, math.ceil(2.0 ** (self.n * (self.r_u - self.r_bin)) - 1e-9))


@dataclass(frozen=True, eq=False)
class DpcCode:
    config: DpcEncoderConfig
    codewords: np.ndarray  # auxiliary codebook on the sqrt(n P_U) sphere
    bins: tuple[np.ndarray, ...]  # indices into codewords, one array per message

    @property
    def num_messages(self) -> int:
        return len(self.bins)


def build_dpc_code(config: DpcEncoderConfig, seed: int) -> DpcCode:
    """Auxiliary codebook split into equal (+-1) bins by a seeded shuffle."""
    total, nb = config.total_codewords, config.num_bins
    if total > _MAX_AUX:
        raise ParameterError(f"auxiliary codebook of {total} words is beyond desk scale")
    if nb > total:
        raise ParameterError(f"{nb} bins cannot be filled by {total} codewords")
    gen = np.random.default_rng(seed)
    cw = sample_sphere_rows(total, config.n, math.sqrt(config.n * config.params.p_u), gen)
    bins = tuple(np.sort(b) for b in np.array_split(gen.permutation(total), nb))
    return DpcCode(config, cw, bins)


@dataclass(frozen=True)
class DpcEncoding:
    u: np.ndarray
    x: np.ndarray
    index: int  # position of u in the auxiliary codebook
    success: bool
    power_ok: bool
    correlation_ok: bool


def dpc_encode(code: DpcCode, m: int, t: np.ndarray) -> DpcEncoding:
    """Encode message ``m`` against interference ``t``.

    Picks the bin codeword closest to ``beta t`` and sends ``u - alpha t``.
    Success requires the power constraint and the correlation
    ``<x, t>/n >= rho sqrt(gamma sigma_t2) - eps2``; a failure is reported
    in the result, not raised.
    """
    cfg = code.config
    if not 0 <= m < code.num_messages:
        raise ParameterError(f"message {m} out of range [0, {code.num_messages})")
    members = code.bins[m]
    if members.size == 0:
        raise ParameterError(f"bin {m} is empty")
    t = np.asarray(t, dtype=float)
    p = cfg.params
    spec = cfg.spec
    beta = p.beta if np.isfinite(p.beta2) else 0.0
    cand = code.codewords[members]
    target = beta * t
    k = int(np.argmin(np.einsum("ij,ij->i", cand - target, cand - target)))
    u = cand[k]
    x = u - cfg.alpha * t
    n = cfg.n
    # relative slack absorbs round-off when |x|^2 = n gamma exactly
    power_ok = bool(x @ x <= n * spec.gamma * (1 + 1e-12))
    corr_ok = bool((x @ t) / n >= cfg.rho * math.sqrt(spec.gamma * spec.sigma_t2) - cfg.tolerance)
    return DpcEncoding(u, x, int(members[k]), power_ok and corr_ok, power_ok, corr_ok)


def encoder_failure_trials(code: DpcCode, trials: int, seed: int) -> ErrorEstimate:
    """Encoder failure frequency over fresh Gaussian interference draws.

    Messages cycle through the bins; success frequency is ``1 - rate_hat``.
    """
    if trials <= 0:
        raise ParameterError("trials must be > 0")
    gen = np.random.default_rng(seed)
    st = math.sqrt(code.config.spec.sigma_t2)
    failed = 0
    for i in range(trials):
        t = gen.standard_normal(code.config.n) * st
        failed += not dpc_encode(code, i % code.num_messages, t).success
    return from_counts(failed, trials, seed)
