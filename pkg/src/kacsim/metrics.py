"""One-dimensional Wasserstein distances through quantile functions.

W_p(mu, nu)**p = int_0^1 |F_mu^{-1}(a) - F_nu^{-1}(a)|**p da
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from .errors import DomainError, NumericalError
from .quadrature import adaptive_gk_batch

TAIL_CUT = 1e-9


class EmpiricalMeasure:
    """Uniform measure on a sample; values are sorted once on construction."""

    __slots__ = ("sorted_values",)

    def __init__(self, values, presorted=False):
        v = np.asarray(values, dtype=float).ravel()
        if v.size == 0:
            raise DomainError("empirical measure needs at least one value")
        self.sorted_values = v if presorted else np.sort(v)

    def __len__(self):
        return self.sorted_values.size

    def quantile_function(self) -> "QuantileFunction":
        return step_quantile(self.sorted_values)


@dataclass
class QuantileFunction:
    """alpha -> F^{-1}(alpha) on (0, 1).

    ``breakpoints`` are the alphas where the function may jump.  ``cdf`` (when
    known) lets integrators split at the alpha where the quantile crosses a
    level; ``pdf`` (when the law has a density) lets them integrate in the
    law's own variable instead of in alpha.  ``tail(c, p, side, delta)`` returns the contribution of
    |c - F^{-1}|**p over (0, delta) (side 'lower') or (1 - delta, 1) ('upper').
    ``sq_segment(ya, yb, c)``, when present, gives int_{ya}^{yb} (y - c)**2 dF
    exactly and lets p = 2 skip quadrature altogether.
    """

    fn: Callable
    breakpoints: np.ndarray = field(default_factory=lambda: np.empty(0))
    cdf: Callable | None = None
    pdf: Callable | None = None
    tail: Callable | None = None
    sq_segment: Callable | None = None
    edge_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __call__(self, alpha):
        return self.fn(alpha)


def step_quantile(values, weights=None) -> QuantileFunction:
    """Quantile of the discrete law sum_k w_k delta_{v_k} (uniform by default)."""
    v = np.asarray(values, dtype=float)
    order = np.argsort(v, kind="stable")
    v = v[order]
    if weights is None:
        cum = np.arange(1, v.size + 1) / v.size
    else:
        w = np.asarray(weights, dtype=float)[order]
        if np.any(w < 0):
            raise DomainError("negative weight")
        cum = np.cumsum(w) / w.sum()
    cum[-1] = 1.0

    def fn(alpha):
        idx = np.searchsorted(cum, np.asarray(alpha, dtype=float), side="left")
        return v[np.minimum(idx, v.size - 1)]

    def tail(c, p, side, delta):
        edge = v[0] if side == "lower" else v[-1]
        mass = cum[0] if side == "lower" else 1.0 - cum[-2] if v.size > 1 else 1.0
        if delta > mass:
            raise NumericalError("tail cut exceeds the extreme atom's mass", float("nan"))
        return delta * abs(c - edge) ** p

    return QuantileFunction(fn, breakpoints=cum[:-1].copy(), tail=tail)


def _check_p(p):
    if not p >= 1:
        raise DomainError(f"Wasserstein order p must be >= 1, got {p!r}")


def _as_measure(x):
    return x if isinstance(x, EmpiricalMeasure) else EmpiricalMeasure(x)


def wasserstein_pp_empirical(x, y, p=2.0) -> float:
    """W_p(x, y)**p between two empirical measures."""
    _check_p(p)
    xs = _as_measure(x).sorted_values
    ys = _as_measure(y).sorted_values
    n, m = xs.size, ys.size
    if n == m:
        # Correctly rounded, so independent of summation order.
        return math.fsum(np.abs(xs - ys) ** p) / n
    # Merged grid {i/n} U {j/m}, kept exact as integers over n*m.
    grid = np.union1d(np.arange(n + 1, dtype=np.int64) * m, np.arange(m + 1, dtype=np.int64) * n)
    lo = grid[:-1]
    width = np.diff(grid)
    ix = lo // m
    iy = lo // n
    return float(np.dot(width, np.abs(xs[ix] - ys[iy]) ** p) / (n * m))


def wasserstein_empirical(x, y, p=2.0) -> float:
    return wasserstein_pp_empirical(x, y, p) ** (1.0 / p)


def wasserstein_pp_vs_quantile(x, q: QuantileFunction, p=2.0, tol=1e-8, tail_cut=TAIL_CUT) -> float:
    """W_p**p between an empirical measure and a law given by its quantile.

    The integral runs segment by segment over {i/n} and the breakpoints of
    ``q``; the empirical quantile is constant on each segment.  With a density
    available a segment (a, b) is integrated as int_{q(a)}^{q(b)} |c - y|**p
    pdf(y) dy, split at y = c; otherwise in alpha, split where q crosses c when
    ``q.cdf`` is known.  (0, tail_cut) and (1 - tail_cut, 1) are added through
    ``q.tail`` when available and dropped otherwise.
    """
    _check_p(p)
    xs = _as_measure(x).sorted_values
    n = xs.size
    if p == 2 and q.sq_segment is not None:
        return _w2sq_closed(xs, q)
    lo, hi = tail_cut, 1.0 - tail_cut
    edges = [np.arange(n + 1) / n, np.asarray(q.breakpoints, dtype=float), [lo, hi]]
    if q.pdf is None and q.cdf is not None:
        edges.append(np.asarray(q.cdf(xs), dtype=float))
    edges = np.unique(np.concatenate(edges))
    edges = edges[(edges >= lo) & (edges <= hi)]
    a, b = edges[:-1], edges[1:]
    keep = b > a
    a, b = a[keep], b[keep]
    idx = np.minimum((0.5 * (a + b) * n).astype(np.int64), n - 1)
    c = xs[idx]

    if q.pdf is not None:
        ya = q(a)
        yb = q(b)
        cut = np.clip(c, ya, yb)
        lo_side = np.concatenate([ya, cut])
        hi_side = np.concatenate([cut, yb])
        level = np.concatenate([c, c])
        keep = hi_side > lo_side

        def integrand(y, lev):
            return np.abs(lev - y) ** p * q.pdf(y)

        total = adaptive_gk_batch(integrand, lo_side[keep], hi_side[keep], args=(level[keep],), tol=tol)
    else:

        def integrand(alpha, lev):
            return np.abs(lev - q(alpha)) ** p

        total = adaptive_gk_batch(integrand, a, b, args=(c,), tol=tol)
    if q.tail is not None and tail_cut > 0:
        total += q.tail(xs[0], p, "lower", tail_cut)
        total += q.tail(xs[-1], p, "upper", tail_cut)
    return total


def _w2sq_closed(xs, q):
    n = xs.size
    # The quantile at the segment edges depends on n only: kept for reuse.
    cached = q.edge_cache.get(n)
    if cached is None:
        edges = np.unique(np.concatenate([np.arange(n + 1) / n, np.asarray(q.breakpoints, dtype=float)]))
        edges = edges[(edges >= 0.0) & (edges <= 1.0)]
        inner = np.asarray(q(edges[1:-1]), dtype=float)
        y = np.concatenate([[-np.inf], np.maximum.accumulate(inner) if inner.size else inner, [np.inf]])
        cached = q.edge_cache[n] = (edges, y)
    edges, y = cached
    mid = 0.5 * (edges[:-1] + edges[1:])
    c = xs[np.minimum((mid * n).astype(np.int64), n - 1)]
    parts = q.sq_segment(y[:-1], y[1:], c)
    return float(np.sum(parts))


def wasserstein_vs_quantile(x, q: QuantileFunction, p=2.0, tol=1e-8, tail_cut=TAIL_CUT) -> float:
    return wasserstein_pp_vs_quantile(x, q, p, tol, tail_cut) ** (1.0 / p)

