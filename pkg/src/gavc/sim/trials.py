"""Rotated sphere codes with limited keys: encoding, decoding and error trials."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..channel import Codebook, RotationKeySet, ScalarAvcSpec, random_codebook
from ..errors import ParameterError
from ..rates import key_size_schedule, randomized_capacity
from .estimate import ErrorEstimate, from_counts
from .jammers import FixedVector, JammerStrategy, check_power

__all__ = [
    "MAX_N",
    "MAX_CODEWORDS",
    "MAX_KEYS",
    "SWEEP_LIMIT",
    "codebook_size",
    "build_code",
    "min_distance_decode",
    "decode_rows",
    "pairwise_min_distance",
    "TrialReport",
    "run_trials",
    "SweepRow",
    "key_size_sweep",
    "is_nonincreasing",
]

# desk-scale limits
MAX_N = 1024
MAX_CODEWORDS = 4096
MAX_KEYS = 1 << 16
# maximal error is swept over every message up to this codebook size
SWEEP_LIMIT = 1 << 10
DEFAULT_MESSAGE_SAMPLE = 8
BLOCK_SIZE = 1000


def codebook_size(n: int, rate_bits: float) -> int:
    """``ceil(2^(n R))`` guarded against round-off just above an integer."""
    return max(1, math.ceil(2.0 ** (n * rate_bits) - 1e-9))


def build_code(n: int, rate_bits: float, power: float, k: int, seed: int) -> tuple[Codebook, RotationKeySet]:
    """Random sphere codebook plus ``k`` rotation keys, both derived from ``seed``."""
    if not 1 <= n <= MAX_N:
        raise ParameterError(f"blocklength {n} outside desk scale [1, {MAX_N}]")
    big_n = codebook_size(n, rate_bits)
    if big_n > MAX_CODEWORDS:
        raise ParameterError(f"codebook size {big_n} exceeds desk-scale limit {MAX_CODEWORDS}")
    if not 1 <= k <= MAX_KEYS:
        raise ParameterError(f"key size {k} outside [1, {MAX_KEYS}]")
    ss = np.random.SeedSequence(seed)
    cb_seq, key_seq = ss.spawn(2)
    codebook = random_codebook(n, big_n, power, np.random.default_rng(cb_seq))
    keys = RotationKeySet(n, k, int(key_seq.generate_state(1)[0]))
    return codebook, keys


def decode_rows(codebook: Codebook, rotation: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Minimum-distance decoding of each row of ``ys`` against ``rotation @ codebook``.

    ``|y - U x_j|^2 = |y|^2 - 2 <U^T y, x_j> + |x_j|^2``, so only the
    inner products against the unrotated codebook are needed.
    """
    z = ys @ rotation  # rows are U^T y
    x = codebook.codewords
    score = z @ x.T - 0.5 * np.einsum("ij,ij->i", x, x)[None, :]
    return np.argmax(score, axis=1)  # first maximum: ties to the lowest index


def min_distance_decode(codebook: Codebook, key: int, keys: RotationKeySet, y: np.ndarray) -> int:
    """Index of the rotated codeword closest to ``y``; ties go to the lowest index."""
    y = np.asarray(y, dtype=float)
    if y.shape != (codebook.n,) or keys.n != codebook.n:
        raise ParameterError("dimension mismatch between y, codebook and keys")
    u = keys.matrix(key)
    d = np.linalg.norm(y[None, :] - codebook.codewords @ u.T, axis=1)
    return int(np.argmin(d))


def pairwise_min_distance(codebook: Codebook) -> float:
    """Smallest distance between two distinct codewords (``inf`` for a single codeword)."""
    if codebook.big_n < 2:
        return math.inf
    from scipy.spatial.distance import pdist

    return float(pdist(codebook.codewords).min())


# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TrialReport:
    average: ErrorEstimate
    max_message: ErrorEstimate
    worst_message: int
    messages: np.ndarray  # message indices that were exercised
    mode: str
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "average": self.average.to_dict(),
            "max_message": self.max_message.to_dict(),
            "worst_message": self.worst_message,
            "message_mode": self.mode,
            "messages_exercised": int(self.messages.size),
            "config": self.config,
        }


def _vulnerable_messages(codebook: Codebook, count: int) -> np.ndarray:
    """Messages whose nearest neighbour is closest, the likeliest maximisers of error."""
    x = codebook.codewords
    best = np.full(codebook.big_n, -np.inf)
    for start in range(0, codebook.big_n, 1024):
        g = x[start:start + 1024] @ x.T
        sq = np.einsum("ij,ij->i", x, x)
        d2 = sq[start:start + 1024, None] + sq[None, :] - 2 * g
        idx = np.arange(start, min(start + 1024, codebook.big_n))
        d2[np.arange(idx.size), idx] = np.inf
        best[idx] = -d2.min(axis=1)
    return np.sort(np.argsort(-best, kind="stable")[:count])


def _message_plan(codebook: Codebook, trials: int, mode: str, sample: int) -> tuple[str, np.ndarray | None]:
    if mode == "auto":
        mode = "sweep" if codebook.big_n <= SWEEP_LIMIT else "sample"
    if mode == "sweep":
        return mode, np.arange(codebook.big_n)
    if mode == "sample":
        return mode, _vulnerable_messages(codebook, min(sample, codebook.big_n))
    if mode == "uniform":
        return mode, None
    raise ParameterError(f"unknown message mode {mode!r}")


def run_trials(
    codebook: Codebook,
    keys: RotationKeySet,
    spec: ScalarAvcSpec,
    jammer: JammerStrategy,
    trials: int,
    seed: int,
    *,
    messages: str = "auto",
    message_sample: int = DEFAULT_MESSAGE_SAMPLE,
    block_size: int = BLOCK_SIZE,
    workers: int = 1,
) -> TrialReport:
    """Estimate average and maximal error of the randomized code over the jammed channel.

    Each trial picks a message, a key ``k`` uniform on ``[0, K)``, a jamming
    vector drawn without knowledge of ``k``, and AWGN; it sends
    ``U_k x_i + s + w`` and decodes with the key.

    Parameters
    ----------
    messages : {"auto", "sweep", "sample", "uniform"}
        ``sweep`` cycles through every message; ``sample`` cycles through
        the ``message_sample`` codewords with the closest neighbours;
        ``uniform`` draws messages at random (average error only). ``auto``
        sweeps when the codebook has at most 1024 words, else samples.
    block_size : int
        Trials per random stream. Results depend on the seed and block
        size only, never on ``workers``.
    """
    if trials <= 0:
        raise ParameterError("trials must be > 0")
    if keys.n != codebook.n:
        raise ParameterError("key set and codebook blocklengths differ")
    if codebook.power > spec.gamma * (1 + 1e-12):
        raise ParameterError(f"codebook power {codebook.power} exceeds gamma {spec.gamma}")
    n = codebook.n
    mode, plan = _message_plan(codebook, trials, messages, message_sample)

    nblocks = -(-trials // block_size)
    root = np.random.SeedSequence(seed)
    msg = np.empty(trials, dtype=np.int64)
    key = np.empty(trials, dtype=np.int64)
    s = np.empty((trials, n))
    w = np.empty((trials, n))
    # phase 1: all randomness, block by block
    for b, child in enumerate(root.spawn(nblocks)):
        lo, hi = b * block_size, min(trials, (b + 1) * block_size)
        g_msg, g_key, g_jam, g_noise = (np.random.default_rng(c) for c in child.spawn(4))
        if plan is None:
            msg[lo:hi] = g_msg.integers(0, codebook.big_n, hi - lo)
        else:
            msg[lo:hi] = plan[np.arange(lo, hi) % plan.size]
        key[lo:hi] = g_key.integers(0, keys.k, hi - lo)
        s[lo:hi] = jammer.emit(hi - lo, n, g_jam, codebook)
        w[lo:hi] = g_noise.standard_normal((hi - lo, n)) * math.sqrt(spec.sigma_w2)
    check_power(s, spec.lambda_)

    # phase 2: transmit and decode, grouped by key
    order = np.argsort(key, kind="stable")
    bounds = np.flatnonzero(np.diff(key[order])) + 1
    groups = np.split(order, bounds)
    decoded = np.empty(trials, dtype=np.int64)

    def work(idx):
        u = keys.matrix(int(key[idx[0]]))
        y = codebook.codewords[msg[idx]] @ u.T + s[idx] + w[idx]
        decoded[idx] = decode_rows(codebook, u, y)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(work, groups))
    else:
        for idx in groups:
            work(idx)

    wrong = decoded != msg
    average = from_counts(wrong.sum(), trials, seed, nblocks)
    exercised = np.unique(msg)
    per_err = np.bincount(msg, weights=wrong, minlength=codebook.big_n)[exercised]
    per_cnt = np.bincount(msg, minlength=codebook.big_n)[exercised]
    ratio = per_err / per_cnt
    # worst message by point estimate, larger sample breaks ties
    worst = int(np.lexsort((-per_cnt, -ratio))[0])
    max_message = from_counts(per_err[worst], per_cnt[worst], seed, nblocks)
    config = {
        "n": n,
        "N": codebook.big_n,
        "K": keys.k,
        "rate_bits": codebook.rate_bits,
        "gamma": spec.gamma,
        "lambda": spec.lambda_,
        "sigma_w2": spec.sigma_w2,
        "trials": trials,
        "seed": seed,
        "block_size": block_size,
        **jammer.describe(),
    }
    return TrialReport(average, max_message, int(exercised[worst]), exercised, mode, config)


# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    n: int
    k: int
    big_n: int
    report: TrialReport


def key_size_sweep(
    spec: ScalarAvcSpec,
    rate_fraction: float,
    n_list,
    k_rule,
    jammer,
    trials: int,
    seed: int,
    **run_kw,
) -> list[SweepRow]:
    """One :func:`run_trials` row per blocklength at a fixed fraction of capacity.

    ``jammer`` is a strategy or a callable ``codebook -> strategy`` (for
    vectors chosen per codebook).
    """
    rate = rate_fraction * randomized_capacity(spec)
    rows = []
    for i, n in enumerate(n_list):
        k = key_size_schedule(n, k_rule)
        codebook, keys = build_code(n, rate, spec.gamma, k, seed + 7919 * i)
        strat = jammer(codebook) if callable(jammer) and not isinstance(jammer, JammerStrategy) else jammer
        rows.append(SweepRow(n, k, codebook.big_n, run_trials(codebook, keys, spec, strat, trials, seed + i, **run_kw)))
    return rows


def is_nonincreasing(estimates: list[ErrorEstimate]) -> bool:
    """Each estimate is at most its predecessor, or their 95% intervals overlap."""
    return all(b.rate_hat <= a.rate_hat or a.overlaps(b) for a, b in zip(estimates, estimates[1:]))


def fixed_toward_codeword(lambda_: float, index: int = 0):
    """Factory for :func:`key_size_sweep`: aim at codeword ``index`` of each codebook."""
    return lambda codebook: FixedVector.toward_codeword(codebook, lambda_, index)
