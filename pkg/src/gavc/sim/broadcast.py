"""Superposition code for the jammed degraded broadcast channel.

Cloud centres ``u_i`` (power ``alpha * gamma``) carry the weak user's
message. Around each centre, satellites ``v_ij`` on the
``sqrt((n-1)(1-alpha) gamma)`` sphere of R^(n-1) are rotated by a per-cloud
Haar matrix and embedded in the hyperplane orthogonal to ``u_i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import stats

from ..channel import Codebook, SeededRng, haar_rotation, random_codebook, sample_sphere_rows
from ..errors import DegenerateError, ParameterError
from ..rates import BroadcastSpec
from .estimate import ErrorEstimate, from_counts, from_probabilities
from .jammers import JammerStrategy, check_power
from .trials import MAX_CODEWORDS, codebook_size, decode_rows

__all__ = [
    "householder_embed",
    "householder_project",
    "SuperpositionCode",
    "build_superposition_code",
    "superposition_encode",
    "BroadcastReport",
    "run_broadcast_trials",
    "competitor_error_probability",
]


def _reflector(u: np.ndarray) -> np.ndarray | None:
    norm = np.linalg.norm(u)
    if norm == 0:
        raise DegenerateError("cloud centre is the zero vector")
    w = -u / norm
    w[-1] += 1.0
    ww = w @ w
    return None if ww < 1e-30 else w * math.sqrt(2.0 / ww)


def householder_embed(u: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Isometric image of ``z`` in R^(n-1) inside the hyperplane orthogonal to ``u``.

    Uses the reflection that swaps ``e_n`` and ``u/|u|``; ``z`` occupies the
    first n-1 coordinates.
    """
    u = np.asarray(u, dtype=float)
    full = np.append(np.asarray(z, dtype=float), 0.0)
    w = _reflector(u)
    if w is None:
        return full
    return full - w * (w @ full)


def householder_project(u: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Adjoint of :func:`householder_embed`: coordinates of ``r`` in the hyperplane."""
    r = np.asarray(r, dtype=float)
    w = _reflector(np.asarray(u, dtype=float))
    if w is None:
        return r[:-1].copy()
    return (r - w * (w @ r))[:-1]


@dataclass(frozen=True, eq=False)
class SuperpositionCode:
    cloud: Codebook
    n_satellites: int
    alpha: float
    gamma: float
    seed: int
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.cloud.n

    @property
    def satellite_radius(self) -> float:
        return math.sqrt((self.n - 1) * (1 - self.alpha) * self.gamma)

    def rotation(self, i: int) -> np.ndarray:
        return haar_rotation(self.n - 1, SeededRng(self.seed, 2 * i + 1))

    def satellites(self, i: int) -> np.ndarray:
        """Satellite codebook of cloud ``i`` (rows in R^(n-1)), built on first use."""
        hit = self._cache.get(i)
        if hit is None:
            gen = SeededRng(self.seed, 2 * i + 2).generator()
            hit = sample_sphere_rows(self.n_satellites, self.n - 1, self.satellite_radius, gen)
            if len(self._cache) < 64:
                self._cache[i] = hit
        return hit


def build_superposition_code(n: int, big_n2: int, big_n1: int, alpha: float, gamma: float, seed: int) -> SuperpositionCode:
    if n < 2:
        raise ParameterError("n must be >= 2")
    if not 0 <= alpha <= 1:
        raise ParameterError("alpha must lie in [0, 1]")
    cloud = random_codebook(n, big_n2, alpha * gamma, SeededRng(seed, 0))
    return SuperpositionCode(cloud, big_n1, alpha, gamma, seed)


def _superpose(u, rotation, v):
    return u + householder_embed(u, rotation @ v)


def superposition_encode(code: SuperpositionCode, i: int, j: int) -> np.ndarray:
    """Codeword ``u_i + A_i U_i v_ij`` for the message pair (cloud ``i``, satellite ``j``)."""
    return _superpose(code.cloud[i], code.rotation(i), code.satellites(i)[j])


# --------------------------------------------------------------------------


def competitor_error_probability(cos_true: np.ndarray, dim: int, competitors: float) -> np.ndarray:
    """Chance that one of ``competitors`` uniform sphere points beats the true codeword.

    With equal-norm codewords, a competitor wins when its cosine with the
    received vector exceeds ``cos_true``; ``(1 + cos) / 2`` of a uniform
    point on S^(dim-1) is Beta((dim-1)/2, (dim-1)/2).
    """
    a = (dim - 1) / 2
    p = stats.beta.sf((1 + np.asarray(cos_true)) / 2, a, a)
    if competitors <= 0:
        return np.zeros_like(p)
    with np.errstate(divide="ignore"):  # p = 1 gives log1p(-1) = -inf and probability 1
        return -np.expm1(competitors * np.log1p(-p))


def _cos(a, b):
    return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))


@dataclass(frozen=True)
class BroadcastReport:
    strong: ErrorEstimate
    weak: ErrorEstimate
    mode: str
    config: dict

    def to_dict(self) -> dict:
        return {"strong": self.strong.to_dict(), "weak": self.weak.to_dict(), "mode": self.mode, "config": self.config}


def run_broadcast_trials(
    spec: BroadcastSpec,
    alpha: float,
    r1: float,
    r2: float,
    n: int,
    jammer: JammerStrategy,
    trials: int,
    seed: int,
    mode: str = "auto",
) -> BroadcastReport:
    """Two-user Monte Carlo of the superposition code.

    The weak user decodes the cloud centre by minimum distance. The strong
    user does the same, removes the centre, maps the residual back through
    the embedding and rotation, and decodes the satellite.

    ``mode="explicit"`` builds both codebooks and decodes by brute force;
    it needs at most 4096 words per codebook. ``mode="ensemble"``
    transmits real codewords through the real channel but replaces the
    brute-force search by the exact probability, over the random-codebook
    ensemble, that some competitor is closer. ``auto`` picks explicit when
    it fits.
    """
    if trials <= 0:
        raise ParameterError("trials must be > 0")
    if spec.lambda_ >= spec.gamma:
        raise ParameterError("region is empty when lambda >= gamma")
    lo = spec.lambda_ / spec.gamma
    if not lo < alpha <= 1:
        raise ParameterError(f"alpha must lie in ({lo:.6g}, 1]")
    n2 = codebook_size(n, r2)
    n1 = codebook_size(n, r1)
    if mode == "auto":
        mode = "explicit" if max(n1, n2) <= MAX_CODEWORDS else "ensemble"
    config = {
        "gamma": spec.gamma, "lambda": spec.lambda_, "sigma1_2": spec.sigma1_2,
        "sigma2_2": spec.sigma2_2, "alpha": alpha, "r1_bits": r1, "r2_bits": r2,
        "n": n, "N1": float(n1), "N2": float(n2), "trials": trials, "seed": seed,
        **jammer.describe(),
    }
    if mode == "explicit":
        if max(n1, n2) > MAX_CODEWORDS:
            raise ParameterError(f"codebooks of {n2} x {n1} words are beyond desk scale; use mode='ensemble'")
        strong, weak = _explicit(spec, alpha, n, n1, n2, jammer, trials, seed)
    elif mode == "ensemble":
        if jammer.needs_codebook:
            raise ParameterError("ensemble mode has no fixed codebook for the jammer to use")
        strong, weak = _ensemble(spec, alpha, n, n1, n2, jammer, trials, seed)
    else:
        raise ParameterError(f"unknown mode {mode!r}")
    return BroadcastReport(strong, weak, mode, config)


def _channel_draws(spec, n, jammer, trials, seed, codebook=None):
    gen_msg, gen_jam, gen_w1, gen_w2 = (np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(4))
    s = jammer.emit(trials, n, gen_jam, codebook)
    check_power(s, spec.lambda_)
    w1 = gen_w1.standard_normal((trials, n)) * math.sqrt(spec.sigma1_2)
    w2 = gen_w2.standard_normal((trials, n)) * math.sqrt(spec.sigma2_2)
    return gen_msg, s, w1, w2


def _explicit(spec, alpha, n, n1, n2, jammer, trials, seed):
    code = build_superposition_code(n, n2, n1, alpha, spec.gamma, seed)
    gen_msg, s, w1, w2 = _channel_draws(spec, n, jammer, trials, seed + 1, code.cloud)
    ii = gen_msg.integers(0, n2, trials)
    jj = gen_msg.integers(0, n1, trials)
    eye = np.eye(n)
    x = np.stack([superposition_encode(code, i, j) for i, j in zip(ii, jj)])
    y1 = x + s + w1
    y2 = x + s + w2
    weak_hat = decode_rows(code.cloud, eye, y2)
    strong_cloud = decode_rows(code.cloud, eye, y1)
    strong_ok = strong_cloud == ii
    for t in np.flatnonzero(strong_ok):
        i = ii[t]
        z = code.rotation(i).T @ householder_project(code.cloud[i], y1[t] - code.cloud[i])
        sat = code.satellites(i)
        strong_ok[t] = int(np.argmax(sat @ z)) == jj[t]
    return (
        from_counts(int((~strong_ok).sum()), trials, seed),
        from_counts(int((weak_hat != ii).sum()), trials, seed),
    )


def _ensemble(spec, alpha, n, n1, n2, jammer, trials, seed):
    gen_msg, s, w1, w2 = _channel_draws(spec, n, jammer, trials, seed + 1)
    gen_code = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
    u_all = sample_sphere_rows(trials, n, math.sqrt(n * alpha * spec.gamma), gen_code)
    sat_r = math.sqrt((n - 1) * (1 - alpha) * spec.gamma)
    v_all = sample_sphere_rows(trials, n - 1, sat_r, gen_code)
    p_strong = np.empty(trials)
    p_weak = np.empty(trials)
    for t in range(trials):
        u, v = u_all[t], v_all[t]
        rot = haar_rotation(n - 1, gen_code)
        x = _superpose(u, rot, v)
        y1 = x + s[t] + w1[t]
        y2 = x + s[t] + w2[t]
        p_weak[t] = competitor_error_probability(_cos(y2, u), n, n2 - 1)
        stage1 = competitor_error_probability(_cos(y1, u), n, n2 - 1)
        z = rot.T @ householder_project(u, y1 - u)
        stage2 = competitor_error_probability(_cos(z, v), n - 1, n1 - 1)
        p_strong[t] = 1 - (1 - stage1) * (1 - stage2)
    return from_probabilities(p_strong, seed), from_probabilities(p_weak, seed)
