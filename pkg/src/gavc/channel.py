"""Geometric and stochastic primitives for the scalar Gaussian AVC.

Everything random in the package flows through :class:`SeededRng`, so a
result is a pure function of ``(inputs, seed, stream_id)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

__all__ = [
    "SeededRng",
    "ScalarAvcSpec",
    "Codebook",
    "RotationKeySet",
    "sample_sphere",
    "haar_rotation",
    "awgn",
    "random_codebook",
]


@dataclass(frozen=True)
class SeededRng:
    """A (seed, stream) pair naming an independent random stream.

    ``generator()`` always returns a *fresh* generator positioned at the
    start of the stream, so the same pair reproduces the same draws.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if self.seed < 0 or self.stream_id < 0:
            raise ParameterError("seed and stream_id must be non-negative")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        return np.random.default_rng(ss)

    def child(self, stream_id: int) -> "SeededRng":
        """Sub-stream derived from this one; distinct from all siblings."""
        return SeededRng(self.seed, _mix(self.stream_id, stream_id))


def _mix(a: int, b: int) -> int:
    # injective enough for our stream counts, stays within uint64
    return (a * 0x9E3779B1 + b + 1) % (1 << 63)


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, SeededRng):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None or isinstance(rng, (int, np.integer)):
        return np.random.default_rng(rng)
    raise TypeError(f"cannot make a generator from {type(rng).__name__}")


@dataclass(frozen=True)
class ScalarAvcSpec:
    """Power budget ``gamma``, jammer budget ``lambda_`` and noise variance."""

    gamma: float
    lambda_: float
    sigma_w2: float

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ParameterError(f"gamma must be >= 0, got {self.gamma}")
        if not self.lambda_ >= 0:
            raise ParameterError(f"lambda must be >= 0, got {self.lambda_}")
        if not self.sigma_w2 > 0:
            raise ParameterError(f"sigma_w2 must be > 0, got {self.sigma_w2}")


def sample_sphere(n: int, radius: float, rng) -> np.ndarray:
    """Draw a point uniformly on the sphere of the given radius in R^n.

    A standard Gaussian vector is normalised; a zero-norm draw is redrawn.
    """
    if n < 1:
        raise ParameterError("n must be >= 1")
    if radius < 0:
        raise ParameterError("radius must be >= 0")
    gen = _as_generator(rng)
    while True:
        v = gen.standard_normal(n)
        norm = np.linalg.norm(v)
        if norm > 0:
            return radius * (v / norm)


def sample_sphere_rows(count: int, n: int, radius: float, gen: np.random.Generator) -> np.ndarray:
    """``count`` independent sphere points stacked as rows."""
    v = gen.standard_normal((count, n))
    norms = np.linalg.norm(v, axis=1)
    bad = norms == 0
    while bad.any():
        v[bad] = gen.standard_normal((int(bad.sum()), n))
        norms = np.linalg.norm(v, axis=1)
        bad = norms == 0
    return radius * (v / norms[:, None])


def haar_rotation(n: int, rng) -> np.ndarray:
    """Haar-distributed real orthogonal ``n x n`` matrix.

    QR of an i.i.d. Gaussian matrix, with the columns of Q multiplied by
    ``sign(diag(R))``; without that correction the law is not Haar.
    """
    if n < 1:
        raise ParameterError("n must be >= 1")
    gen = _as_generator(rng)
    while True:
        z = gen.standard_normal((n, n))
        q, r = np.linalg.qr(z)
        d = np.diag(r)
        if np.all(d != 0):
            return q * np.sign(d)


def awgn(n: int, variance: float, rng) -> np.ndarray:
    """i.i.d. ``N(0, variance)`` vector of length ``n``."""
    if variance < 0:
        raise ParameterError(f"noise variance must be >= 0, got {variance}")
    if variance == 0:
        return np.zeros(n)
    return _as_generator(rng).standard_normal(n) * np.sqrt(variance)


@dataclass(frozen=True, eq=False)
class Codebook:
    """``big_n`` codewords of blocklength ``n`` on the sphere of radius sqrt(n * power)."""

    codewords: np.ndarray
    power: float

    def __post_init__(self):
        cw = np.asarray(self.codewords, dtype=float)
        if cw.ndim != 2 or cw.shape[0] < 1:
            raise ParameterError("codewords must be a non-empty 2-D array")
        cw.setflags(write=False)
        object.__setattr__(self, "codewords", cw)
        target = cw.shape[1] * self.power
        sq = np.einsum("ij,ij->i", cw, cw)
        if not np.allclose(sq, target, rtol=1e-9, atol=1e-12):
            raise ParameterError("codewords must lie on the power sphere")

    @property
    def n(self) -> int:
        return self.codewords.shape[1]

    @property
    def big_n(self) -> int:
        return self.codewords.shape[0]

    @property
    def rate_bits(self) -> float:
        return float(np.log2(self.big_n) / self.n)

    def __len__(self):
        return self.big_n

    def __getitem__(self, i):
        return self.codewords[i]


def random_codebook(n: int, big_n: int, power: float, rng) -> Codebook:
    """i.i.d. uniform codebook on the sqrt(n * power) sphere."""
    if big_n < 1:
        raise ParameterError("codebook needs at least one codeword")
    gen = _as_generator(rng)
    return Codebook(sample_sphere_rows(big_n, n, np.sqrt(n * power), gen), power)


@dataclass(frozen=True)
class RotationKeySet:
    """``k`` shared orthogonal matrices; entry 0 is the identity.

    Matrices are generated on demand from ``(seed, key index)`` so that a
    key set with thousands of 256 x 256 rotations costs no memory until used.
    """

    n: int
    k: int
    seed: int = 0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 1 or self.k < 1:
            raise ParameterError("n and k must be >= 1")

    def matrix(self, index: int) -> np.ndarray:
        if not 0 <= index < self.k:
            raise IndexError(f"key {index} out of range for K={self.k}")
        if index == 0:
            return np.eye(self.n)
        hit = self._cache.get(index)
        if hit is not None:
            return hit
        u = haar_rotation(self.n, SeededRng(self.seed, index))
        if len(self._cache) < _CACHE_LIMIT // max(1, self.n * self.n):
            self._cache[index] = u
        return u

    @property
    def matrices(self) -> list[np.ndarray]:
        """All K matrices, materialised. Only sensible for small K * n^2."""
        return [self.matrix(i) for i in range(self.k)]

    def __len__(self):
        return self.k


# doubles kept in the per-keyset cache
_CACHE_LIMIT = 1 << 24
