"""Initial velocity distributions f0."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

RADEMACHER = "rademacher"
DISCRETE = "discrete"
GAUSSIAN = "gaussian"
F0_KINDS = (RADEMACHER, DISCRETE, GAUSSIAN)


@dataclass(frozen=True)
class InitialDatum:
    kind: str = RADEMACHER
    points: tuple = field(default=())
    weights: tuple = field(default=())
    mean: float = 0.0
    variance: float = 1.0

    def __post_init__(self):
        if self.kind not in F0_KINDS:
            raise DomainError(f"unknown initial datum {self.kind!r}")
        if self.kind == DISCRETE:
            pts = np.asarray(self.points, dtype=float)
            w = np.asarray(self.weights, dtype=float)
            if pts.ndim != 1 or pts.size == 0 or pts.shape != w.shape:
                raise DomainError("discrete f0 needs equally many points and weights")
            if not np.all(np.isfinite(pts)) or not np.all(np.isfinite(w)):
                raise DomainError("discrete f0 points and weights must be finite")
            if np.any(w < 0):
                raise DomainError("discrete f0 weights must be non-negative")
            if abs(w.sum() - 1.0) > 1e-12:
                raise DomainError(f"discrete f0 weights sum to {w.sum()!r}, not 1")
        elif self.kind == GAUSSIAN:
            if not (math.isfinite(self.mean) and math.isfinite(self.variance)) or self.variance < 0:
                raise DomainError("gaussian f0 needs a finite mean and a non-negative variance")
        if not self.energy > 0:
            raise DomainError("f0 must have positive energy")

    @classmethod
    def rademacher(cls) -> "InitialDatum":
        return cls(RADEMACHER)

    @classmethod
    def discrete(cls, points, weights) -> "InitialDatum":
        return cls(DISCRETE, tuple(float(p) for p in points), tuple(float(w) for w in weights))

    @classmethod
    def gaussian(cls, mean=0.0, variance=1.0) -> "InitialDatum":
        return cls(GAUSSIAN, mean=float(mean), variance=float(variance))

    @property
    def is_discrete(self) -> bool:
        return self.kind != GAUSSIAN

    def atoms(self):
        """(points, weights) arrays of a discrete datum."""
        if self.kind == RADEMACHER:
            return np.array([-1.0, 1.0]), np.array([0.5, 0.5])
        if self.kind == DISCRETE:
            return np.asarray(self.points, dtype=float), np.asarray(self.weights, dtype=float)
        raise DomainError("gaussian f0 has no atoms")

    def moment(self, p: int) -> float:
        """Exact raw moment E[X**p] for an integer p >= 0."""
        if self.is_discrete:
            pts, w = self.atoms()
            return float(np.dot(w, pts**p))
        mu, var = self.mean, self.variance
        total = 0.0
        for k in range(0, p + 1, 2):
            # E[Z**k] = (k - 1)!! for even k
            total += math.comb(p, k) * mu ** (p - k) * var ** (k // 2) * _double_factorial(k - 1)
        return total

    @property
    def energy(self) -> float:
        return self.moment(2)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.is_discrete:
            pts, w = self.atoms()
            idx = rng.choice(pts.size, size=n, p=w)
            return pts[idx].astype(float)
        return self.mean + math.sqrt(self.variance) * rng.standard_normal(n)


def _double_factorial(k):
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out
