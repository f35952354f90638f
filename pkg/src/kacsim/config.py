"""Scenario configuration: a flat ``key = value`` document.

Grammar::

    document := line*
    line     := blank | comment | section | entry
    comment  := '#' text              (also allowed after a value)
    section  := '[' name ']'          (run, f0 or output; optional)
    entry    := key '=' value
    value    := scalar | scalar (',' scalar)*

Scalars are integers (``10000`` or ``1e4``), reals, ``true``/``false`` or bare
words.  Every key belongs to exactly one section; under a section header only
that section's keys are accepted.  Keys absent from the document take the
defaults of the chosen scenario (see ``PRESETS``).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

from .cross_section import KINDS, POWER_LAW, UNIFORM_GRAZING, CrossSection
from .engine import DIFFUSION, GRAZING, SCHEMES
from .errors import ConfigError, DomainError
from .initial import DISCRETE, F0_KINDS, GAUSSIAN, InitialDatum

SIMULATE = "simulate"
COEFFS = "coeffs"
GRAZING_RATE = "grazing_rate"
SCHEME_COMPARE = "scheme_compare"
EPS_RATE = "eps_rate"
N_RATE = "n_rate"
MOMENT_TRACK = "moment_track"
LEMMA_A3 = "lemma_a3_rate"
LEMMA_A4 = "lemma_a4_rate"
POISSON_DEMO = "poisson_gaussian_demo"
SCENARIOS = (
    SIMULATE, COEFFS, GRAZING_RATE, SCHEME_COMPARE, EPS_RATE,
    N_RATE, MOMENT_TRACK, LEMMA_A3, LEMMA_A4, POISSON_DEMO,
)
# Scenarios whose kernel exponent has no default.
NEEDS_NU = (SIMULATE, COEFFS, SCHEME_COMPARE, EPS_RATE, N_RATE, MOMENT_TRACK)


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str = SIMULATE
    scheme: str = DIFFUSION
    kernel: str = POWER_LAW
    nu: float | None = None
    eps_list: tuple = (0.1,)
    eps_ref: float = 0.03
    n: int = 10_000
    n_ref: int = 1_000_000
    n_list: tuple = (100, 1000, 10000)
    h_list: tuple = (0.5, 0.25, 0.125)
    t_final: float = 0.1
    snapshot_times: tuple = ()
    replicas: int = 1
    base_seed: int = 0
    gamma: float = 1.5
    samples: int = 10_000
    floor_draws: int = 4
    truncation_n_factor: int = 2
    exclude_self_collision: bool = False
    f0: str = "rademacher"
    f0_points: tuple = ()
    f0_weights: tuple = ()
    f0_mean: float = 0.0
    f0_variance: float = 1.0
    emit_histograms: bool = False
    bins: int = 50
    keep_velocities: bool = False
    cache_dir: str = ""

    def cross_section(self) -> CrossSection:
        if self.kernel == UNIFORM_GRAZING:
            return CrossSection.uniform_grazing()
        return CrossSection.power_law(self.nu)

    def initial_datum(self) -> InitialDatum:
        if self.f0 == DISCRETE:
            return InitialDatum.discrete(self.f0_points, self.f0_weights)
        if self.f0 == GAUSSIAN:
            return InitialDatum.gaussian(self.f0_mean, self.f0_variance)
        return InitialDatum.rademacher()

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in dataclasses.asdict(self).items()}

    def replace(self, **changes) -> "ScenarioConfig":
        return validate(dataclasses.replace(self, **changes))


SECTIONS = {
    "run": (
        "scenario", "scheme", "kernel", "nu", "eps_list", "eps_ref", "n", "n_ref", "n_list",
        "h_list", "t_final", "snapshot_times", "replicas", "base_seed", "gamma", "samples",
        "floor_draws", "truncation_n_factor", "exclude_self_collision",
    ),
    "f0": ("f0", "f0_points", "f0_weights", "f0_mean", "f0_variance"),
    "output": ("emit_histograms", "bins", "keep_velocities", "cache_dir"),
}
SECTION_OF = {k: s for s, keys in SECTIONS.items() for k in keys}
FIELDS = {f.name: f for f in dataclasses.fields(ScenarioConfig)}
assert set(SECTION_OF) == set(FIELDS)

_INT = ("n", "n_ref", "replicas", "base_seed", "samples", "floor_draws", "truncation_n_factor", "bins")
_REAL = ("nu", "eps_ref", "t_final", "gamma", "f0_mean", "f0_variance")
_BOOL = ("exclude_self_collision", "emit_histograms", "keep_velocities")
_WORD = ("scenario", "scheme", "kernel", "f0", "cache_dir")
_INT_LIST = ("n_list",)
_REAL_LIST = ("eps_list", "h_list", "snapshot_times", "f0_points", "f0_weights")

PRESETS = {
    SIMULATE: {},
    COEFFS: {},
    GRAZING_RATE: dict(
        scheme=GRAZING, kernel=UNIFORM_GRAZING, eps_list=(0.4, 0.2, 0.1), t_final=1.0,
        snapshot_times=(1e-4, 3e-4, 1e-3, 3e-3, 0.01, 0.03, 0.1, 0.3), replicas=20,
    ),
    SCHEME_COMPARE: dict(replicas=20),
    EPS_RATE: dict(eps_list=(0.2, 0.1, 0.05), n=100_000, replicas=4),
    N_RATE: dict(eps_list=(0.05,), n_list=(1000, 10000, 100000), replicas=10),
    MOMENT_TRACK: dict(eps_list=(0.01,), t_final=1.0, snapshot_times=(0.25, 0.5), replicas=20),
    LEMMA_A3: dict(f0=GAUSSIAN, replicas=100),
    LEMMA_A4: dict(f0=GAUSSIAN, replicas=100),
    POISSON_DEMO: dict(replicas=10, t_final=1.0),
}


def _convert(key, raw, line):
    raw = raw.strip()
    try:
        if key in _INT:
            return _to_int(raw)
        if key in _REAL:
            return float(raw)
        if key in _BOOL:
            low = raw.lower()
            if low not in ("true", "false"):
                raise ValueError("expected true or false")
            return low == "true"
        if key in _WORD:
            return raw
        items = [s.strip() for s in raw.split(",")] if raw else []
        if any(s == "" for s in items):
            raise ValueError("empty list item")
        if key in _INT_LIST:
            return tuple(_to_int(s) for s in items)
        return tuple(float(s) for s in items)
    except ValueError as exc:
        raise ConfigError(f"cannot read {raw!r}: {exc}", key, line) from None


def _to_int(raw):
    try:
        return int(raw)
    except ValueError:
        try:
            x = float(raw)
        except ValueError:
            raise ValueError("expected an integer") from None
        if not x.is_integer():
            raise ValueError("expected an integer") from None
        return int(x)


def parse_config(text: str = "", overrides: dict | None = None, scenario: str | None = None) -> ScenarioConfig:
    """Parse a document, apply overrides (which win), fill defaults, validate.

    ``scenario`` (the CLI subcommand) selects the preset when the document
    does not name one.  Override values may be strings or already typed.
    """
    values: dict = {}
    lines: dict = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if body.startswith("["):
            if not body.endswith("]") or body[1:-1].strip() not in SECTIONS:
                raise ConfigError(f"unknown section {body!r}", None, lineno)
            section = body[1:-1].strip()
            continue
        if "=" not in body:
            raise ConfigError("expected 'key = value'", None, lineno)
        key, raw = (s.strip() for s in body.split("=", 1))
        if key not in FIELDS:
            raise ConfigError("unknown key", key, lineno)
        if section is not None and SECTION_OF[key] != section:
            raise ConfigError(f"key belongs to section [{SECTION_OF[key]}], not [{section}]", key, lineno)
        if key in values:
            raise ConfigError(f"duplicate key (first set on line {lines[key]})", key, lineno)
        values[key] = _convert(key, raw, lineno)
        lines[key] = lineno

    for key, raw in (overrides or {}).items():
        if key not in FIELDS:
            raise ConfigError("unknown key", key)
        values[key] = _convert(key, raw, None) if isinstance(raw, str) else _coerce(key, raw)
        lines.pop(key, None)

    name = values.get("scenario", scenario or SIMULATE)
    if name not in SCENARIOS:
        raise ConfigError(f"unknown scenario {name!r}", "scenario", lines.get("scenario"))
    merged = {**PRESETS[name], **values, "scenario": name}
    try:
        return validate(ScenarioConfig(**merged), lines)
    except DomainError as exc:
        raise ConfigError(str(exc)) from None


def _coerce(key, v):
    if key in _INT_LIST:
        return tuple(int(x) for x in v)
    if key in _REAL_LIST:
        return tuple(float(x) for x in v)
    return v


def validate(cfg: ScenarioConfig, lines: dict | None = None) -> ScenarioConfig:
    lines = lines or {}

    def fail(key, msg):
        raise ConfigError(msg, key, lines.get(key))

    def positive(key):
        v = getattr(cfg, key)
        if not (v > 0 and math.isfinite(v)):
            fail(key, f"must be positive, got {v!r}")

    if cfg.scenario not in SCENARIOS:
        fail("scenario", f"unknown scenario {cfg.scenario!r}")
    if cfg.scheme not in SCHEMES:
        fail("scheme", f"must be one of {', '.join(SCHEMES)}")
    if cfg.kernel not in KINDS:
        fail("kernel", f"must be one of {', '.join(KINDS)}")
    if (cfg.scheme == GRAZING) != (cfg.kernel == UNIFORM_GRAZING):
        fail("scheme", f"scheme {cfg.scheme} cannot run the {cfg.kernel} kernel")
    if cfg.nu is not None and not 0.0 < cfg.nu < 2.0:
        fail("nu", f"must lie in (0, 2), got {cfg.nu!r}")
    if cfg.nu is None and cfg.kernel == POWER_LAW and cfg.scenario in NEEDS_NU:
        fail("nu", "required (no default)")
    if cfg.kernel == UNIFORM_GRAZING and cfg.nu is not None:
        fail("nu", "the uniform-grazing kernel takes no exponent")
    for key in ("eps_list", "n_list", "h_list"):
        if not getattr(cfg, key):
            fail(key, "must not be empty")
    for e in (*cfg.eps_list, cfg.eps_ref):
        if not 0.0 < e <= math.pi:
            fail("eps_list" if e in cfg.eps_list else "eps_ref", f"eps must lie in (0, pi], got {e!r}")
    if cfg.n < 2:
        fail("n", "need at least two particles")
    if cfg.n_ref < 2:
        fail("n_ref", "need at least two particles")
    if any(k < 2 for k in cfg.n_list):
        fail("n_list", "sizes must be at least 2")
    if any(not h > 0 for h in cfg.h_list):
        fail("h_list", "jump sizes must be positive")
    positive("t_final")
    if any(not 0.0 <= s <= cfg.t_final for s in cfg.snapshot_times):
        fail("snapshot_times", "must lie in [0, t_final]")
    for key in ("replicas", "samples", "floor_draws", "truncation_n_factor", "bins"):
        if getattr(cfg, key) < 1:
            fail(key, "must be at least 1")
    if cfg.base_seed < 0:
        fail("base_seed", "must be non-negative")
    if not cfg.gamma >= 1.0:
        fail("gamma", "Wasserstein order must be >= 1")
    if cfg.f0 not in F0_KINDS:
        fail("f0", f"must be one of {', '.join(F0_KINDS)}")
    try:
        cfg.initial_datum()
    except DomainError as exc:
        fail("f0_points" if cfg.f0 == DISCRETE else "f0", str(exc))
    return cfg


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ", ".join(_fmt(x) for x in v)
    return repr(v) if isinstance(v, float) else str(v)


def render_config(cfg: ScenarioConfig) -> str:
    """Inverse of ``parse_config``: every field written out, grouped by section."""
    out = []
    for section, keys in SECTIONS.items():
        out.append(f"[{section}]")
        for key in keys:
            v = getattr(cfg, key)
            if v is None:
                continue
            if key in _WORD and (v == "" or v != v.strip() or "#" in v):
                if v == "":
                    continue
                raise ConfigError("value cannot be written to a document", key)
            out.append(f"{key} = {_fmt(v)}".rstrip())
        out.append("")
    return "\n".join(out)
