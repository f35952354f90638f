"""Gaussian mixtures with a common variance: CDF, density, inverse CDF."""

from __future__ import annotations

import math

import numpy as np
from scipy import special

from .errors import DomainError, NumericalError
from .metrics import QuantileFunction
from .quadrature import adaptive_gk_batch

QUANTILE_ATOL = 1e-12
_TABLE_SIZE = 2049
_MAX_ITER = 100


class GaussianMixture:
    """sum_k w_k N(m_k, sd**2) with a common standard deviation."""

    def __init__(self, weights, means, sd):
        self.weights = np.asarray(weights, dtype=float)
        self.means = np.asarray(means, dtype=float)
        self.sd = float(sd)
        if not self.sd > 0:
            raise DomainError("mixture needs sd > 0")
        lo = self.means.min() - 10.0 * self.sd
        hi = self.means.max() + 10.0 * self.sd
        self._grid = np.linspace(lo, hi, _TABLE_SIZE)
        self._grid_cdf = self.cdf(self._grid)

    def _z(self, x):
        return (np.asarray(x, dtype=float)[..., None] - self.means) / self.sd

    def cdf(self, x):
        return special.ndtr(self._z(x)) @ self.weights

    def sf(self, x):
        return special.ndtr(-self._z(x)) @ self.weights

    def pdf(self, x):
        z = self._z(x)
        return np.exp(-0.5 * z * z) @ self.weights / (self.sd * math.sqrt(2.0 * math.pi))

    def _residual(self, x, alpha):
        """(r, slope) with sign(r) = sign(cdf(x) - alpha), slope = dr/dx.

        Components with z >= 0 enter through their upper tail:
        cdf - alpha = L - U - c, L = sum_{z<0} w Phi(z), U = sum_{z>=0} w Phi(-z),
        c = alpha - sum_{z>=0} w.  When c is exactly zero (alpha equals a
        partial weight sum) L and U may both underflow between far-apart
        atoms, so r = log L - log U is used instead.
        """
        z = self._z(x)
        pos = z >= 0
        w = self.weights
        c = alpha - pos @ w
        lower = np.where(pos, 0.0, special.ndtr(z)) @ w
        upper = np.where(pos, special.ndtr(-z), 0.0) @ w
        r = lower - upper - c
        slope = self.pdf(x)
        tie = c == 0
        if np.any(tie):
            zt, pt = z[tie], pos[tie]
            logw = np.log(w)
            logphi = -0.5 * zt * zt - 0.5 * math.log(2.0 * math.pi) + logw
            with np.errstate(divide="ignore"):
                lL = special.logsumexp(np.where(pt, -np.inf, special.log_ndtr(zt) + logw), axis=-1)
                lU = special.logsumexp(np.where(pt, special.log_ndtr(-zt) + logw, -np.inf), axis=-1)
                dL = np.exp(special.logsumexp(np.where(pt, -np.inf, logphi), axis=-1) - lL)
                dU = np.exp(special.logsumexp(np.where(pt, logphi, -np.inf), axis=-1) - lU)
            with np.errstate(invalid="ignore"):
                r[tie] = lL - lU
                slope[tie] = (dL + dU) / self.sd
        return r, slope

    def ppf(self, alpha):
        """Inverse CDF: bracket from a tabulated CDF, then safeguarded Newton."""
        alpha = np.asarray(alpha, dtype=float)
        shape = alpha.shape
        alpha = alpha.ravel()
        if np.any((alpha <= 0) | (alpha >= 1) | np.isnan(alpha)):
            raise DomainError("quantile level must lie in (0, 1)")
        if self.means.size == 1:
            return (self.means[0] + self.sd * special.ndtri(alpha)).reshape(shape)

        grid, gcdf = self._grid, self._grid_cdf
        k = np.searchsorted(gcdf, alpha)
        a = grid[np.clip(k - 1, 0, grid.size - 1)].copy()
        b = grid[np.clip(k, 0, grid.size - 1)].copy()
        # Hard bounds from the extreme components.
        a_safe = self.means.min() + self.sd * (special.ndtri(alpha) - 1.0)
        b_safe = self.means.max() - self.sd * (special.ndtri(1.0 - alpha) - 1.0)
        bad_a = (k == 0) | ~(self._residual(a, alpha)[0] <= 0)
        bad_b = (k == grid.size) | ~(self._residual(b, alpha)[0] >= 0)
        a[bad_a] = a_safe[bad_a]
        b[bad_b] = b_safe[bad_b]
        x = 0.5 * (a + b)

        active = np.arange(alpha.size)
        for _ in range(_MAX_ITER):
            xa = x[active]
            resid, dens = self._residual(xa, alpha[active])
            # resid > 0 means x is above the root.
            hi_side = resid > 0
            b[active] = np.where(hi_side, xa, b[active])
            a[active] = np.where(hi_side, a[active], xa)
            with np.errstate(divide="ignore", invalid="ignore"):
                newton = xa - resid / dens
            inside = np.isfinite(newton) & (newton > a[active]) & (newton < b[active])
            new = np.where(inside, newton, 0.5 * (a[active] + b[active]))
            new = np.where(resid == 0, xa, new)
            step = np.abs(new - xa)
            x[active] = new
            done = (resid == 0) | (step <= QUANTILE_ATOL) | (b[active] - a[active] <= QUANTILE_ATOL)
            active = active[~done]
            if active.size == 0:
                return x.reshape(shape)
        raise NumericalError("mixture quantile did not converge", float(x[active[0]]), float(step.max()))

    def sample(self, rng, size):
        comp = rng.choice(self.weights.size, size=size, p=self.weights)
        return self.means[comp] + self.sd * rng.standard_normal(size)

    def tail(self, c, p, side, delta):
        """int over the extreme ``delta`` of mass of |c - F^{-1}|**p.

        Done in y-space as E[|c - Y|**p ; Y beyond y0], y0 the cut quantile,
        over 40 standard deviations past y0.
        """
        if side == "lower":
            y0 = float(self.ppf(np.array([delta]))[0])
            lo, hi = y0 - 40.0 * self.sd, y0
        else:
            y0 = float(self.ppf(np.array([1.0 - delta]))[0])
            lo, hi = y0, y0 + 40.0 * self.sd

        def g(y):
            return np.abs(c - y) ** p * self.pdf(y)

        edges = np.linspace(lo, hi, 81)
        return adaptive_gk_batch(g, edges[:-1], edges[1:], tol=1e-8)

    def sq_segment(self, ya, yb, c):
        """int_{ya}^{yb} (y - c)**2 dF(y) in closed form; ya, yb may be infinite.

        Per component, with Z standard normal on (a, b) and y - c = sd Z + d:
        sd**2 E[Z**2] + 2 sd d E[Z] + d**2 P, all three by Phi and phi.
        """
        s = self.sd
        a = (np.asarray(ya, dtype=float)[:, None] - self.means) / s
        b = (np.asarray(yb, dtype=float)[:, None] - self.means) / s
        d = self.means - np.asarray(c, dtype=float)[:, None]
        # Mass from whichever tail keeps it accurate.
        right = a > 0
        m0 = np.where(right, special.ndtr(-a) - special.ndtr(-b), special.ndtr(b) - special.ndtr(a))
        pa = np.exp(-0.5 * a * a) / math.sqrt(2.0 * math.pi)
        pb = np.exp(-0.5 * b * b) / math.sqrt(2.0 * math.pi)
        with np.errstate(invalid="ignore"):
            apa = np.where(np.isfinite(a), a * pa, 0.0)
            bpb = np.where(np.isfinite(b), b * pb, 0.0)
        m1 = pa - pb
        m2 = m0 + apa - bpb
        return (s * s * m2 + 2.0 * s * d * m1 + d * d * m0) @ self.weights

    def quantile_function(self) -> QuantileFunction:
        return QuantileFunction(
            self.ppf, cdf=self.cdf, pdf=self.pdf, tail=self.tail, sq_segment=self.sq_segment
        )


def normal_quantile(mean=0.0, sd=1.0) -> QuantileFunction:
    return GaussianMixture([1.0], [mean], sd).quantile_function()
