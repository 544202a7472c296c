"""Jammer strategies. Every emitted vector lies in the ball of radius sqrt(n * lambda)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..channel import Codebook, sample_sphere_rows
from ..errors import ParameterError

__all__ = [
    "JammerStrategy",
    "NoJammer",
    "GaussianNoise",
    "FixedVector",
    "SphereUniform",
    "SymmetrizeCodeword",
    "OrthogonalNoise",
    "symmetrize_attack",
    "check_power",
    "JAMMERS",
]

POWER_SLACK = 1e-9


class JammerStrategy:
    """Base class. ``emit`` returns ``count`` jamming vectors as rows.

    The jammer knows the (unrotated) codebook but never the key or the
    noise realisation.
    """

    name = "base"
    lambda_: float = 0.0
    needs_codebook = False

    def emit(self, count: int, n: int, gen: np.random.Generator, codebook: Codebook | None = None):
        raise NotImplementedError

    def describe(self) -> dict:
        return {"jammer": self.name, "lambda": self.lambda_}


@dataclass(frozen=True)
class NoJammer(JammerStrategy):
    name = "none"
    lambda_ = 0.0

    def emit(self, count, n, gen, codebook=None):
        return np.zeros((count, n))


@dataclass(frozen=True)
class GaussianNoise(JammerStrategy):
    """i.i.d. N(0, lambda) noise, shrunk onto the sphere when it overshoots the budget."""

    lambda_: float
    name = "gaussian"

    def emit(self, count, n, gen, codebook=None):
        s = gen.standard_normal((count, n)) * np.sqrt(self.lambda_)
        norms = np.linalg.norm(s, axis=1)
        cap = np.sqrt(n * self.lambda_)
        over = norms > cap
        s[over] *= (cap / norms[over])[:, None]
        return s


@dataclass(frozen=True)
class SphereUniform(JammerStrategy):
    lambda_: float
    name = "sphere"

    def emit(self, count, n, gen, codebook=None):
        return sample_sphere_rows(count, n, np.sqrt(n * self.lambda_), gen)


@dataclass(frozen=True, eq=False)
class FixedVector(JammerStrategy):
    """The same vector in every trial, typically picked from the codebook."""

    s: np.ndarray
    name = "fixed"

    @property
    def lambda_(self):
        v = np.asarray(self.s, dtype=float)
        return float(v @ v / v.size)

    @classmethod
    def toward_codeword(cls, codebook: Codebook, lambda_: float, index: int = 0) -> "FixedVector":
        """Codeword ``index`` rescaled to the jammer's full power."""
        x = codebook[index]
        return cls(x * np.sqrt(codebook.n * lambda_) / np.linalg.norm(x))

    def emit(self, count, n, gen, codebook=None):
        v = np.asarray(self.s, dtype=float)
        if v.shape != (n,):
            raise ParameterError(f"fixed jamming vector has shape {v.shape}, need ({n},)")
        return np.broadcast_to(v, (count, n)).copy()


def symmetrize_attack(codebook: Codebook, lambda_: float, rng) -> np.ndarray:
    """A uniformly chosen codeword rescaled to norm sqrt(n * lambda)."""
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    return SymmetrizeCodeword(lambda_).emit(1, codebook.n, gen, codebook)[0]


@dataclass(frozen=True)
class SymmetrizeCodeword(JammerStrategy):
    """Impersonate the encoder: send a random codeword scaled to the jammer's power."""

    lambda_: float
    name = "symmetrize"
    needs_codebook = True

    def emit(self, count, n, gen, codebook=None):
        if codebook is None:
            raise ParameterError("symmetrizing jammer needs the codebook")
        idx = gen.integers(0, codebook.big_n, size=count)
        x = codebook.codewords[idx]
        return x * (np.sqrt(n * self.lambda_) / np.linalg.norm(x, axis=1))[:, None]


@dataclass(frozen=True)
class OrthogonalNoise(JammerStrategy):
    """Sphere noise orthogonal to one randomly guessed (unrotated) codeword."""

    lambda_: float
    name = "orthogonal"
    needs_codebook = True

    def emit(self, count, n, gen, codebook=None):
        if codebook is None:
            raise ParameterError("orthogonal jammer needs the codebook")
        idx = gen.integers(0, codebook.big_n, size=count)
        x = codebook.codewords[idx]
        x = x / np.linalg.norm(x, axis=1, keepdims=True)
        z = gen.standard_normal((count, n))
        z -= np.einsum("ij,ij->i", z, x)[:, None] * x
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        return z * np.sqrt(n * self.lambda_)


def check_power(s: np.ndarray, lambda_: float):
    """Raise if any row of ``s`` exceeds the ball of radius sqrt(n * lambda)."""
    s = np.atleast_2d(s)
    n = s.shape[1]
    worst = float(np.max(np.einsum("ij,ij->i", s, s))) if s.size else 0.0
    if worst > n * lambda_ + POWER_SLACK:
        raise ParameterError(
            f"jamming vector power {worst / n:.6g} per symbol exceeds lambda = {lambda_:.6g}"
        )


JAMMERS = {
    "none": lambda lam: NoJammer(),
    "gaussian": GaussianNoise,
    "sphere": SphereUniform,
    "symmetrize": SymmetrizeCodeword,
    "orthogonal": OrthogonalNoise,
}
