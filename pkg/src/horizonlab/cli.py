"""``horizonlab`` command line.

Exit codes: 0 success, 1 configuration or input error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import os
import sys

from . import scenario
from .errors import ConfigError, HorizonLabError, NumericalFailure


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError("arguments", message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="horizonlab", description="Radial free fall towards Rindler and Schwarzschild horizons.")
    p.add_argument("mode", choices=scenario.MODES)
    p.add_argument("--config", help="JSON scenario file; flags override its values")
    p.add_argument("--a", type=float, help="Rob's proper acceleration (fig1, transform)")
    p.add_argument("--r0", type=float, help="Alice's starting radius")
    p.add_argument("--R0", type=float, help="initial Schwarzschild radius")
    p.add_argument("--submode", choices=scenario.SUBMODES)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--k", type=float, help="evaporation constant (length^3/time)")
    g.add_argument("--tau-evap", dest="tau_evap", type=float, help="evaporation time; sets k = R0^3 / tau_evap")
    p.add_argument("--rel-tol", dest="rel_tol", type=float)
    p.add_argument("--abs-tol", dest="abs_tol", type=float)
    p.add_argument("--epsilon-horizon", dest="epsilon_horizon", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--format", choices=scenario.FORMATS)
    p.add_argument("--out", dest="output_path")
    p.add_argument("--units", choices=scenario.UNIT_SYSTEMS)
    p.add_argument("--include-dtau-metric-terms", dest="include_dtau_metric_terms", action="store_true", default=None)
    p.add_argument("--to", dest="direction", choices=scenario.DIRECTIONS, help="transform direction")
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        overrides = {k: v for k, v in vars(args).items() if k != "config"}
        cfg = scenario.load_scenario(args.config, overrides)
        table = scenario.run(cfg, sys.stdin if cfg.mode == "transform" else None)
        scenario.emit_table(table, cfg.output_path, cfg.format)
    except BrokenPipeError:
        # downstream reader closed early (e.g. `| head`); silence the final flush
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 1
    except NumericalFailure as exc:
        print(f"horizonlab: numerical failure: {exc}", file=sys.stderr)
        return 2
    except (HorizonLabError, OSError) as exc:
        print(f"horizonlab: {exc}", file=sys.stderr)
        return 1
    term = table.meta.get("termination")
    if term is not None:
        print(f"horizonlab: termination={term} tau={table.meta['event_tau']!r}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
