"""Reference laws: the grazing (Fokker-Planck / Ornstein-Uhlenbeck) limit and
the exact fourth-moment trajectory of the Kac equation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .initial import InitialDatum
from .metrics import QuantileFunction, step_quantile
from .mixture import GaussianMixture


@dataclass(frozen=True)
class OULimitLaw:
    """Law at time t of Y_t = Y_0 exp(-t/2) + sqrt(E (1 - exp(-t))) xi, Y_0 ~ f0.

    This solves the Fokker-Planck equation obtained in the grazing limit.
    ``energy`` defaults to the second moment of f0.
    """

    f0: InitialDatum
    t: float
    energy: float | None = None

    def __post_init__(self):
        if not self.t >= 0:
            raise DomainError("t must be non-negative")
        if self.energy is not None and not self.energy > 0:
            raise DomainError("energy must be positive")

    @property
    def E(self) -> float:
        return self.f0.energy if self.energy is None else self.energy

    @property
    def degenerate(self) -> bool:
        return self.t == 0 and self.f0.is_discrete

    def mixture(self) -> GaussianMixture:
        if self.degenerate:
            raise DomainError("the law at t = 0 of a discrete datum has no Gaussian part")
        decay = math.exp(-0.5 * self.t)
        noise_var = -self.E * math.expm1(-self.t)
        if self.f0.is_discrete:
            pts, w = self.f0.atoms()
            return GaussianMixture(w, pts * decay, math.sqrt(noise_var))
        var = self.f0.variance * decay**2 + noise_var
        return GaussianMixture([1.0], [self.f0.mean * decay], math.sqrt(var))

    def quantile_function(self) -> QuantileFunction:
        if self.degenerate:
            pts, w = self.f0.atoms()
            return step_quantile(pts, w)
        return self.mixture().quantile_function()

    def cdf(self, x):
        return self.mixture().cdf(x)

    def sample(self, rng, size):
        if self.degenerate:
            return self.f0.sample(rng, size)
        return self.mixture().sample(rng, size)


def ou_limit_quantile(law: OULimitLaw, alpha):
    alpha_arr = np.asarray(alpha, dtype=float)
    if np.any((alpha_arr <= 0) | (alpha_arr >= 1) | np.isnan(alpha_arr)):
        raise DomainError("alpha must lie in (0, 1)")
    out = law.quantile_function()(alpha_arr)
    return float(out) if np.ndim(alpha) == 0 else out


def m4_trajectory(f0: InitialDatum, m4_decay_c: float, t: float, energy: float | None = None) -> float:
    """Fourth moment at time t: (m4(f0) - 3E**2) exp(-c t) + 3E**2."""
    E = f0.energy if energy is None else energy
    eq = 3.0 * E * E
    return (f0.moment(4) - eq) * math.exp(-m4_decay_c * t) + eq


def empirical_moments(sample, orders=(2, 4)) -> dict:
    v = np.asarray(sample, dtype=float)
    if v.size == 0:
        raise DomainError("empty sample")
    out = {}
    for p in orders:
        if int(p) != p or p < 0:
            raise DomainError(f"moment order must be a non-negative integer, got {p!r}")
        out[int(p)] = float(np.mean(v ** int(p)))
    return out
