"""Command-line entry point: ``kacsim <subcommand> [--config FILE] [flags]``.

Every configuration key has a flag (``--eps-list 0.4,0.2``); flags override the
config file.  Errors print one line ``kacsim: error: <Type>: <message>`` on
stderr and exit with status 2 (usage and configuration) or 1 (run failure).
"""

from __future__ import annotations

import argparse
import sys
import time

from . import __version__
from . import config as C
from .errors import ConfigError, DomainError, NumericalError
from .report import write_report

SUBCOMMANDS = {
    "coeffs": C.COEFFS,
    "simulate": C.SIMULATE,
    "grazing-rate": C.GRAZING_RATE,
    "scheme-compare": C.SCHEME_COMPARE,
    "eps-rate": C.EPS_RATE,
    "n-rate": C.N_RATE,
    "moment-track": C.MOMENT_TRACK,
    "lemma-rates": C.LEMMA_A3,
    "poisson-demo": C.POISSON_DEMO,
}
# Subcommands that may run more than one scenario through the config key.
ALLOWED = {"lemma-rates": (C.LEMMA_A3, C.LEMMA_A4)}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kacsim", description="Particle Monte Carlo for the Kac collision model.")
    parser.add_argument("--version", action="version", version=f"kacsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="configuration file (key = value lines)")
        p.add_argument("--out", default=None, help="output directory (default: out/<subcommand>)")
        p.add_argument("--seed", type=int, default=None, help="alias of --base-seed")
        p.add_argument("--workers", type=int, default=1, help="threads for independent replicas")
        for key in C.FIELDS:
            p.add_argument("--" + key.replace("_", "-"), dest="set_" + key, default=None, metavar="VALUE")
    return parser


def resolve_config(args) -> C.ScenarioConfig:
    text = ""
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"{args.config}: {exc.strerror or exc}") from None
    overrides = {k[4:]: v for k, v in vars(args).items() if k.startswith("set_") and v is not None}
    if args.seed is not None:
        overrides["base_seed"] = str(args.seed)
    cfg = C.parse_config(text, overrides, scenario=SUBCOMMANDS[args.command])
    allowed = ALLOWED.get(args.command, (SUBCOMMANDS[args.command],))
    if cfg.scenario not in allowed:
        raise ConfigError(f"scenario {cfg.scenario!r} cannot run under '{args.command}'", "scenario")
    return cfg


def main(argv=None) -> int:
    from .experiments import run_scenario

    try:
        args = build_parser().parse_args(argv)
        if args.workers < 1:
            raise ConfigError("--workers must be at least 1")
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"kacsim: error: ConfigError: {exc}", file=sys.stderr)
        return 2
    out = args.out or f"out/{args.command}"
    try:
        start = time.perf_counter()
        report = run_scenario(cfg, args.workers)
        runtime = {"workers": args.workers, "wall_s": time.perf_counter() - start, "command": args.command}
        files = write_report(report, out, runtime)
    except (DomainError, NumericalError, OSError, RuntimeError) as exc:
        print(f"kacsim: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for path in files:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
