"""Fixed-order Gauss-Legendre panels with adaptive bisection.

Used for the angular integrals of the cross sections (integrable power
singularity at the origin) and for quantile integrals in the metrics module.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import NumericalError

GL_ORDER = 15
_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(GL_ORDER)

MAX_DEPTH = 40
MAX_GEOMETRIC_PANELS = 400


def gl_panel(f, a, b):
    """15-point Gauss-Legendre estimate of the integral of ``f`` over [a, b]."""
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = mid + half * _NODES
    return half * float(np.dot(_WEIGHTS, f(x)))


def adaptive_gl(f, a, b, atol, depth=MAX_DEPTH):
    """Adaptive bisection on [a, b] until panel halves agree to ``atol``.

    ``f`` must accept and return numpy arrays.  Raises NumericalError when the
    recursion depth is exhausted.
    """
    whole = gl_panel(f, a, b)
    return _refine(f, a, b, whole, atol, depth)


def _refine(f, a, b, whole, atol, depth):
    m = 0.5 * (a + b)
    left = gl_panel(f, a, m)
    right = gl_panel(f, m, b)
    err = abs(left + right - whole)
    if err <= atol or not math.isfinite(err):
        if not math.isfinite(left + right):
            raise NumericalError("non-finite integrand", left + right, err)
        return left + right
    if depth <= 0:
        raise NumericalError(f"panel [{a!r}, {b!r}] did not converge", left + right, err)
    return _refine(f, a, m, left, 0.5 * atol, depth - 1) + _refine(
        f, m, b, right, 0.5 * atol, depth - 1
    )


def integrate_power_singular(f, lo, hi, tol=1e-10):
    """Integral of ``f`` over (lo, hi] with a possible power singularity at 0.

    The interval is cut into geometric panels [hi/2**(k+1), hi/2**k].  When
    ``lo > 0`` the last panel stops at ``lo``.  When ``lo == 0`` the panels are
    continued until the ratio of successive panel integrals has settled, and the
    remaining (0, delta] piece is added as the geometric series implied by that
    ratio; this is exact for a pure power law and has relative error
    O(delta**2) for f(x) = a x**s (1 + O(x**2)).
    """
    if not 0.0 <= lo < hi:
        raise ValueError(f"need 0 <= lo < hi, got lo={lo!r}, hi={hi!r}")

    edges = [hi]
    if lo > 0.0:
        e = hi
        while e / 2.0 > lo:
            e /= 2.0
            edges.append(e)
        edges.append(lo)
        rough = sum(gl_panel(f, a, b) for a, b in zip(edges[1:], edges[:-1]))
        atol = tol * abs(rough) / len(edges) + 1e-300
        return sum(adaptive_gl(f, a, b, atol) for a, b in zip(edges[1:], edges[:-1]))

    # lo == 0: walk towards the singularity.
    panels = []
    b = hi
    rough_total = 0.0
    for _ in range(8):
        panels.append(gl_panel(f, 0.5 * b, b))
        rough_total += panels[-1]
        b *= 0.5
    scale = abs(rough_total)
    if scale == 0.0:
        return 0.0

    total = 0.0
    values = []
    prev_estimate = None
    b = hi
    for k in range(MAX_GEOMETRIC_PANELS):
        a = 0.5 * b
        atol = 0.05 * tol * max(scale, abs(total))
        v = adaptive_gl(f, a, b, atol)
        values.append(v)
        total += v
        b = a
        if len(values) < 3:
            continue
        if v == 0.0 and values[-2] == 0.0:
            return total
        r = v / values[-2] if values[-2] != 0.0 else math.inf
        if not 0.0 <= r < 1.0:
            prev_estimate = None
            continue
        estimate = total + v * r / (1.0 - r)
        if prev_estimate is not None:
            err = abs(estimate - prev_estimate)
            if err <= 0.1 * tol * abs(estimate):
                return estimate
        prev_estimate = estimate
    raise NumericalError(
        "geometric panels did not converge towards 0 (integrand not integrable?)",
        total,
        math.inf if prev_estimate is None else abs(prev_estimate - total),
    )


# Gauss-Kronrod 7/15 pair (QUADPACK qk15), nodes listed for x >= 0.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG7 = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
GK_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
GK_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_G7_FULL = np.zeros(15)
_G7_FULL[[1, 3, 5]] = _WG7[:3]
_G7_FULL[[13, 11, 9]] = _WG7[:3]
_G7_FULL[7] = _WG7[3]
G7_WEIGHTS = _G7_FULL


def gk15_batch(f, a, b, args=()):
    """Kronrod estimates and |K15 - G7| error bounds on many intervals at once.

    ``f(x, *args)`` receives x of shape (m, 15) and per-interval args of shape
    (m, 1).
    """
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = mid[:, None] + half[:, None] * GK_NODES[None, :]
    vals = f(x, *[np.asarray(v)[:, None] for v in args])
    k15 = half * (vals @ GK_WEIGHTS)
    g7 = half * (vals @ G7_WEIGHTS)
    return k15, np.abs(k15 - g7)


def adaptive_gk_batch(f, a, b, args=(), tol=1e-8, max_rounds=40):
    """Sum of integrals over the intervals [a_k, b_k] (each with its own args).

    Intervals are bisected until every Kronrod error estimate is within
    ``tol`` relative to the running total (split evenly across intervals) or
    relative to the interval's own value.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    args = [np.asarray(v) for v in args]
    total = 0.0
    est, err = gk15_batch(f, a, b, args)
    scale = abs(float(est.sum()))
    for _ in range(max_rounds):
        share = tol * scale / max(est.size, 1)
        ok = (err <= tol * np.abs(est)) | (err <= share) | (err == 0.0)
        total += float(est[ok].sum())
        if ok.all():
            return total
        a, b = a[~ok], b[~ok]
        args = [v[~ok] for v in args]
        m = 0.5 * (a + b)
        a, b = np.concatenate([a, m]), np.concatenate([m, b])
        args = [np.concatenate([v, v]) for v in args]
        est, err = gk15_batch(f, a, b, args)
    raise NumericalError(
        f"{est.size} intervals did not converge", total + float(est.sum()), float(err.sum())
    )
