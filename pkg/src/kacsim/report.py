"""Run reports and their serialization to CSV files plus a JSON manifest."""

from __future__ import annotations

import json
import math
import platform
import time
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import numpy as np

RECORD_HEADER = "scenario,nu,eps,n,t,replicate,seed,metric,value"
SUMMARY_HEADER = "scenario,nu,eps,n,t,metric,mean,stderr,slope,slope_halfwidth"
HIST_HEADER = "bin_left,bin_right,density"
KDE_HEADER = "x,density"
KDE_POINTS = 256


@dataclass
class Record:
    scenario: str
    nu: float | None
    eps: float | None
    n: int | None
    t: float | None
    replicate: int | None
    seed: int
    metric: str
    value: float


@dataclass
class SummaryRow:
    scenario: str
    nu: float | None
    eps: float | None
    n: int | None
    t: float | None
    metric: str
    mean: float | None = None
    stderr: float | None = None
    slope: float | None = None
    slope_halfwidth: float | None = None


@dataclass
class Histogram:
    tag: str
    edges: np.ndarray
    density: np.ndarray
    kde_x: np.ndarray | None = None
    kde_density: np.ndarray | None = None


def histogram(values, bins: int, value_range=None) -> tuple[np.ndarray, np.ndarray]:
    """(edges, density) with the density integrating to 1 over the range."""
    v = np.asarray(values, dtype=float)
    if value_range is None:
        value_range = (float(v.min()), float(v.max())) if v.size else (0.0, 1.0)
    density, edges = np.histogram(v, bins=bins, range=value_range, density=True)
    return edges, density


def gaussian_kde(values, points: int = KDE_POINTS, chunk: int = 1 << 16):
    """Gaussian kernel estimate, bandwidth 1.06 * sd * n**(-1/5), on a grid."""
    v = np.asarray(values, dtype=float)
    sd = float(np.std(v))
    bw = 1.06 * sd * v.size ** (-0.2) if sd > 0 else 1.0
    x = np.linspace(v.min() - 3 * bw, v.max() + 3 * bw, points)
    dens = np.zeros(points)
    for k in range(0, v.size, chunk):
        z = (x[:, None] - v[None, k : k + chunk]) / bw
        dens += np.exp(-0.5 * z * z).sum(axis=1)
    dens /= v.size * bw * math.sqrt(2 * math.pi)
    return x, dens


class RunReport:
    """Per-replica records, aggregated rows, plot data and run metadata."""

    def __init__(self, config):
        self.config = config
        self.records: list[Record] = []
        self.summary: list[SummaryRow] = []
        self.histograms: list[Histogram] = []
        self.samples: dict = {}
        self.timings: dict = {}
        self.seeds: dict = {}
        self.notes: list[str] = []

    def _row_prefix(self):
        return self.config.scenario, self.config.nu

    def record(self, *, metric, value, eps=None, n=None, t=None, replicate=None, seed=None):
        scenario, nu = self._row_prefix()
        if seed is None:
            seed = self.config.base_seed
        self.records.append(Record(scenario, nu, eps, n, t, replicate, int(seed), metric, value))

    def summarize(self, *, metric, eps=None, n=None, t=None, mean=None, stderr=None, slope=None, slope_halfwidth=None):
        scenario, nu = self._row_prefix()
        self.summary.append(SummaryRow(scenario, nu, eps, n, t, metric, mean, stderr, slope, slope_halfwidth))

    def aggregate(self, metrics=None):
        """Mean and standard error (sd / sqrt(R)) over replicates of every
        (eps, n, t, metric) group, in order of first appearance.  A group seen
        in a single replicate gets an empty stderr."""
        groups: dict = {}
        for r in self.records:
            if r.replicate is None or (metrics is not None and r.metric not in metrics):
                continue
            groups.setdefault((r.eps, r.n, r.t, r.metric), []).append(r.value)
        for (eps, n, t, metric), vals in groups.items():
            mean, se = mean_stderr(vals)
            self.summarize(metric=metric, eps=eps, n=n, t=t, mean=mean, stderr=se)

    def add_histogram(self, tag, values, bins, value_range=None, kde=True):
        edges, density = histogram(values, bins, value_range)
        h = Histogram(tag, edges, density)
        if kde and np.size(values) > 1:
            h.kde_x, h.kde_density = gaussian_kde(values)
        self.histograms.append(h)
        return h

    @contextmanager
    def timer(self, name):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] = self.timings.get(name, 0.0) + time.perf_counter() - start


def mean_stderr(values):
    v = np.asarray(values, dtype=float)
    mean = float(v.mean())
    if v.size < 2:
        return mean, None
    return mean, float(v.std(ddof=1) / math.sqrt(v.size))


def fmt(v) -> str:
    """Shortest round-trip decimal; empty for missing values."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _csv_field(v) -> str:
    s = fmt(v)
    if any(ch in s for ch in ',"\n'):
        s = '"' + s.replace('"', '""') + '"'
    return s


def _write_csv(path: Path, header: str, rows) -> None:
    lines = [header] + [",".join(_csv_field(x) for x in row) for row in rows]
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"{path}: {exc.strerror or exc}") from exc


def _safe_tag(tag: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in tag)


def write_report(report: RunReport, out_dir, runtime: dict | None = None) -> list[Path]:
    """Write records.csv, summary.csv, hist_/kde_ files and manifest.json.

    Wall-clock timings go only to the manifest so that the CSV files depend on
    the configuration and seed alone.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"{out}: {exc.strerror or exc}") from exc
    written = []

    path = out / "records.csv"
    _write_csv(path, RECORD_HEADER, (
        (r.scenario, r.nu, r.eps, r.n, r.t, r.replicate, r.seed, r.metric, r.value) for r in report.records
    ))
    written.append(path)

    path = out / "summary.csv"
    _write_csv(path, SUMMARY_HEADER, (
        (s.scenario, s.nu, s.eps, s.n, s.t, s.metric, s.mean, s.stderr, s.slope, s.slope_halfwidth)
        for s in report.summary
    ))
    written.append(path)

    for h in report.histograms:
        tag = _safe_tag(h.tag)
        path = out / f"hist_{tag}.csv"
        _write_csv(path, HIST_HEADER, zip(h.edges[:-1], h.edges[1:], h.density))
        written.append(path)
        if h.kde_x is not None:
            path = out / f"kde_{tag}.csv"
            _write_csv(path, KDE_HEADER, zip(h.kde_x, h.kde_density))
            written.append(path)

    if report.config.keep_velocities and report.samples:
        path = out / "velocities.csv"
        _write_csv(path, "replicate,value", (
            (r, x) for r in sorted(report.samples) for x in report.samples[r]
        ))
        written.append(path)

    from . import __version__

    manifest = {
        "package": "kacsim",
        "version": __version__,
        "config": report.config.to_dict(),
        "base_seed": report.config.base_seed,
        "seeds": report.seeds,
        "notes": report.notes,
        "files": [p.name for p in written],
        "runtime": {
            **(runtime or {}),
            "timings_s": report.timings,
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
    }
    path = out / "manifest.json"
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=False, allow_nan=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"{path}: {exc.strerror or exc}") from exc
    written.append(path)
    return written
