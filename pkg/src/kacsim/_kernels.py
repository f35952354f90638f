"""Compiled event loop.  Must consume the generator in the same order as the
pure-Python path in ``engine.advance``: per event (T, i, j, u, sign[, g_i, g_j])."""

import math

import numba as nb
import numpy as np

KIND_POWER_LAW = 0
KIND_GRAZING = 1


@nb.njit(nogil=True, cache=True)
def _refresh(v, last, k, t, b, energy, g):
    dt = t - last[k]
    decay = math.exp(-b * dt)
    var = -energy * math.expm1(-2.0 * b * dt)
    v[k] = v[k] * decay + math.sqrt(var) * g
    last[k] = t


@nb.njit(nogil=True, cache=True)
def run_events(v, last, now, t_final, rate, b, energy, kind, nu, eps, diffuse, exclude_self, rng):
    """Advance collisions up to ``t_final``; returns (now, events).

    The terminal Gaussian sweep is not done here.
    """
    n = v.shape[0]
    events = 0
    if rate <= 0.0:
        return t_final, events
    scale = 1.0 / rate
    if kind == KIND_POWER_LAW:
        a = eps ** (-nu)
        span = a - math.pi ** (-nu)
        inv = -1.0 / nu
    else:
        a = 0.0
        span = 0.0
        inv = 0.0
    while True:
        tau = rng.exponential(scale)
        if now + tau > t_final:
            break
        now += tau
        i = rng.integers(0, n)
        if exclude_self:
            j = rng.integers(0, n - 1)
            if j >= i:
                j += 1
        else:
            j = rng.integers(0, n)
        u = rng.random()
        positive = rng.random() < 0.5
        if diffuse:
            gi = rng.standard_normal()
            gj = rng.standard_normal()
            _refresh(v, last, i, now, b, energy, gi)
            _refresh(v, last, j, now, b, energy, gj)
        if kind == KIND_POWER_LAW:
            mag = (a - u * span) ** inv
        else:
            mag = eps * u
        theta = mag if positive else -mag
        v[i] = math.cos(theta) * v[i] - math.sin(theta) * v[j]
        events += 1
    return now, events


@nb.njit(nogil=True, cache=True)
def sweep(v, last, t, b, energy, rng):
    for k in range(v.shape[0]):
        g = rng.standard_normal()
        _refresh(v, last, k, t, b, energy, g)
