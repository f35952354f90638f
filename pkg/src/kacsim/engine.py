"""Event-driven particle dynamics.

Three schemes share one aggregated exponential clock of rate n * lambda_eps;
each event picks a particle i and a partner j uniformly and rotates only
V(i) <- cos(theta) V(i) - sin(theta) V(j).

* ``diffusion``: power-law kernel cut at eps; between events every particle
  follows the Ornstein-Uhlenbeck flow dV = -b_eps V dt + sqrt(2 E b_eps) dB,
  solved exactly and applied lazily (i and j are refreshed before each
  collision, everybody at the end).
* ``truncation``: same jumps, small angles simply dropped.
* ``grazing``: finite uniform-grazing kernel, every collision simulated.

Generator draws per event are consumed in the order
(T, i, j, u_theta, sign_theta, gauss_i, gauss_j); the terminal sweep draws one
Gaussian per particle in index order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .cross_section import CollisionCoefficients, CrossSection, compute_coefficients, sample_theta
from .errors import ClockError, DomainError
from .initial import InitialDatum

DIFFUSION = "diffusion"
TRUNCATION = "truncation"
GRAZING = "grazing"
SCHEMES = (DIFFUSION, TRUNCATION, GRAZING)


@dataclass
class ParticleEnsemble:
    velocities: np.ndarray
    last_update: np.ndarray
    now: float
    scheme: str
    energy: float
    coeffs: CollisionCoefficients
    cross_section: CrossSection
    eps: float
    rng: np.random.Generator
    event_count: int = 0
    exclude_self: bool = False

    @property
    def n(self) -> int:
        return self.velocities.size


def check_scheme(scheme: str, cs: CrossSection):
    if scheme not in SCHEMES:
        raise DomainError(f"unknown scheme {scheme!r}")
    if (scheme == GRAZING) == cs.is_power_law:
        raise DomainError(f"scheme {scheme!r} does not run with a {cs.kind} kernel")


def init_ensemble(
    f0: InitialDatum,
    n: int,
    scheme: str,
    cs: CrossSection,
    eps: float,
    seed: int | np.random.Generator,
    exclude_self: bool = False,
    coeffs: CollisionCoefficients | None = None,
) -> ParticleEnsemble:
    if n < 2:
        raise DomainError("need at least two particles")
    check_scheme(scheme, cs)
    eps = cs.check_eps(eps)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if coeffs is None:
        coeffs = compute_coefficients(cs, eps)
    return ParticleEnsemble(
        velocities=f0.sample(rng, n),
        last_update=np.zeros(n),
        now=0.0,
        scheme=scheme,
        energy=f0.energy,
        coeffs=coeffs,
        cross_section=cs,
        eps=eps,
        rng=rng,
        exclude_self=exclude_self,
    )


def ou_refresh(ens: ParticleEnsemble, i: int, t: float, gauss: float) -> float:
    """Exact Ornstein-Uhlenbeck transition of particle i from its last update to t."""
    if ens.scheme != DIFFUSION:
        raise DomainError("only the diffusion scheme has an Ornstein-Uhlenbeck part")
    dt = t - ens.last_update[i]
    if dt < 0:
        raise ClockError(f"particle {i} last updated at {ens.last_update[i]!r}, asked for t={t!r}")
    b = ens.coeffs.b_eps
    decay = math.exp(-b * dt)
    var = -ens.energy * math.expm1(-2.0 * b * dt)
    v = ens.velocities[i] * decay + math.sqrt(var) * gauss
    ens.velocities[i] = v
    ens.last_update[i] = t
    return v


def apply_collision(ens: ParticleEnsemble, i: int, j: int, theta: float) -> None:
    """One-sided rotation: V(i) <- cos(theta) V(i) - sin(theta) V(j)."""
    v = ens.velocities
    v[i] = math.cos(theta) * v[i] - math.sin(theta) * v[j]


def advance(ens: ParticleEnsemble, t_final: float, fast: bool = True, angle_fn=None) -> None:
    """Run events up to ``t_final``, then (diffusion only) refresh every particle.

    ``fast=False`` or an ``angle_fn(u, sign)`` override runs the pure-Python
    loop built from ``ou_refresh``/``apply_collision``; it consumes the
    generator exactly like the compiled loop.
    """
    if t_final < ens.now:
        raise ClockError(f"cannot advance from {ens.now!r} back to {t_final!r}")
    rate = ens.n * ens.coeffs.lambda_eps
    diffuse = ens.scheme == DIFFUSION
    if fast and angle_fn is None:
        cs = ens.cross_section
        kind = _kernels.KIND_POWER_LAW if cs.is_power_law else _kernels.KIND_GRAZING
        _, events = _kernels.run_events(
            ens.velocities,
            ens.last_update,
            float(ens.now),
            float(t_final),
            float(rate),
            float(ens.coeffs.b_eps),
            float(ens.energy),
            kind,
            float(cs.nu or 0.0),
            float(ens.eps),
            diffuse,
            bool(ens.exclude_self),
            ens.rng,
        )
        ens.event_count += int(events)
        ens.now = float(t_final)
        if diffuse:
            _kernels.sweep(ens.velocities, ens.last_update, ens.now, float(ens.coeffs.b_eps), float(ens.energy), ens.rng)
        return

    rng = ens.rng
    n = ens.n
    if rate > 0:
        while True:
            tau = rng.exponential(1.0 / rate)
            if ens.now + tau > t_final:
                break
            ens.now += tau
            i = int(rng.integers(0, n))
            if ens.exclude_self:
                j = int(rng.integers(0, n - 1))
                j += j >= i
            else:
                j = int(rng.integers(0, n))
            u = rng.random()
            sign = 1 if rng.random() < 0.5 else -1
            if diffuse:
                gi = rng.standard_normal()
                gj = rng.standard_normal()
                ou_refresh(ens, i, ens.now, gi)
                ou_refresh(ens, j, ens.now, gj)
            if angle_fn is None:
                theta = sample_theta(ens.cross_section, ens.eps, u, sign)
            else:
                theta = angle_fn(u, sign)
            apply_collision(ens, i, j, theta)
            ens.event_count += 1
    ens.now = float(t_final)
    if diffuse:
        for k in range(n):
            ou_refresh(ens, k, ens.now, rng.standard_normal())


def snapshot_grid(t_final: float, snapshot_times=(), include_zero: bool = False) -> list[float]:
    times = {float(t_final), *map(float, snapshot_times)}
    if include_zero:
        times.add(0.0)
    grid = sorted(times)
    if grid[0] < 0 or grid[-1] > t_final:
        raise DomainError("snapshot times must lie in [0, t_final]")
    return grid


@dataclass
class Snapshot:
    t: float
    velocities: np.ndarray
    event_count: int


def simulate(
    f0: InitialDatum,
    n: int,
    scheme: str,
    cs: CrossSection,
    eps: float,
    seed: int,
    times,
    exclude_self: bool = False,
    coeffs: CollisionCoefficients | None = None,
) -> list[Snapshot]:
    """One replica observed at each time of a sorted grid (copies of the state)."""
    ens = init_ensemble(f0, n, scheme, cs, eps, seed, exclude_self, coeffs)
    out = []
    for t in times:
        advance(ens, t)
        out.append(Snapshot(t, ens.velocities.copy(), ens.event_count))
    return out


def derive_seed(base_seed: int, replica: int, stream: int = 0) -> int:
    """base_seed XOR replica_index, with independent arms separated by ``stream``
    in the bits above 32."""
    return int(base_seed) ^ int(replica) ^ (int(stream) << 32)


def parallel_map(fn, items, workers: int = 1):
    """Ordered map; threads only change scheduling, never results."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def run_replicas(config, workers: int = 1):
    """Independent replicas of one scheme, observed on the snapshot grid.

    Records m2, m4 and the cumulative event count per replica and time; the
    final velocities of every replica are kept in ``report.samples``.
    """
    from .report import RunReport

    cs = config.cross_section()
    eps = config.eps_list[0]
    f0 = config.initial_datum()
    coeffs = compute_coefficients(cs, eps)
    times = snapshot_grid(config.t_final, config.snapshot_times)
    seeds = [derive_seed(config.base_seed, r) for r in range(config.replicas)]

    def one(seed):
        return simulate(f0, config.n, config.scheme, cs, eps, seed, times, config.exclude_self_collision, coeffs)

    report = RunReport(config)
    with report.timer(config.scheme):
        runs = parallel_map(one, seeds, workers)
    for r, (seed, snaps) in enumerate(zip(seeds, runs)):
        for s in snaps:
            v = s.velocities
            common = dict(eps=eps, n=config.n, t=s.t, replicate=r, seed=seed)
            report.record(metric="m2", value=float(np.mean(v * v)), **common)
            report.record(metric="m4", value=float(np.mean(v**4)), **common)
            report.record(metric="events", value=s.event_count, **common)
        report.samples[r] = snaps[-1].velocities
    report.aggregate()
    report.summarize(metric="expected_events", eps=eps, n=config.n, t=config.t_final,
                     mean=config.n * config.t_final * coeffs.lambda_eps)
    if config.emit_histograms:
        pooled = np.concatenate([report.samples[r] for r in range(config.replicas)])
        report.add_histogram(f"{config.scheme}_t{config.t_final!r}", pooled, config.bins)
    return report
