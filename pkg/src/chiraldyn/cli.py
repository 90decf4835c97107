"""Command-line entry point: ``chiraldyn run|compare-pure-mixed|validate|list-presets``.

Exit codes: 0 success, 1 config error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .config import ConfigError, RunManifest, load_config
from .output import default_output_dir, emit_csv, emit_delta_csv, safe_stem
from .scenarios import PRESETS, ScenarioError, compare_pure_mixed, preset, run_scenario
from .types import NumericalError, ParameterError, StateError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2

log = logging.getLogger("chiraldyn")


def _load(target: str):
    """A preset name or a config path -> (scenario, out_dir from config)."""
    if target in PRESETS and not os.path.exists(target):
        return preset(target), None
    if not os.path.exists(target):
        raise ConfigError(f"{target!r} is neither a preset nor a readable file")
    doc = load_config(target)
    return doc.scenario, doc.out_dir


def _apply_overrides(sc, args):
    kw = {}
    for name in ("seed", "n_traj", "dt", "t_max", "workers"):
        value = getattr(args, name, None)
        if value is not None:
            kw[name] = value
    sc = replace(sc, **kw)
    sc.validate()
    return sc


def _out_dir(args, config_dir) -> Path:
    return default_output_dir(args.out or config_dir)


def _emit(results, root: Path) -> list[Path]:
    written = []
    for r in results:
        stem = safe_stem(r.label) + ("" if r.branch == "pure" else f"_{r.branch}")
        manifest = RunManifest(r.scenario, r.label, r.branch, __version__, r.wall_time)
        written.append(emit_csv(r.series, root / f"{stem}.csv", manifest))
    return written


def cmd_run(args) -> int:
    sc, cfg_dir = _load(args.target)
    sc = _apply_overrides(sc, args)
    root = _out_dir(args, cfg_dir) / safe_stem(sc.name)
    for path in _emit(run_scenario(sc), root):
        print(path)
    return EXIT_OK


def cmd_compare(args) -> int:
    sc, cfg_dir = _load(args.target)
    sc = _apply_overrides(sc, args)
    root = _out_dir(args, cfg_dir) / safe_stem(sc.name)
    reports = compare_pure_mixed(sc)
    for rep in reports:
        _emit(rep.runs, root)
        stem = safe_stem(rep.label)
        emit_delta_csv(rep, root / f"{stem}_delta.csv")
        pop = "yes" if rep.by_population else "no"
        coh = "yes" if rep.by_coherence else "no"
        print(f"{rep.label}: max|d rho_RR| = {rep.max_delta_rho_RR:.3g}  "
              f"distinguishable by population: {pop}, by coherence: {coh}")
    return EXIT_OK


def cmd_validate(args) -> int:
    sc, _ = _load(args.target)
    n = len(sc.points())
    print(f"ok: {sc.name} ({sc.engine}, {n} sweep point{'s' if n != 1 else ''})")
    return EXIT_OK


def cmd_list(args) -> int:
    for name, sc in PRESETS.items():
        print(f"{name:6s} {sc.engine:13s} {sc.description}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chiraldyn", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def overrides(p):
        p.add_argument("target", help="config file or preset name")
        p.add_argument("--seed", type=int)
        p.add_argument("--n-traj", dest="n_traj", type=int)
        p.add_argument("--dt", type=float)
        p.add_argument("--t-max", dest="t_max", type=float)
        p.add_argument("--workers", type=int)
        p.add_argument("--out", help="output directory (default: $CHIRALDYN_OUTPUT_DIR or ./chiraldyn_out)")

    p = sub.add_parser("run", help="run a scenario and write CSV + manifest per sweep point")
    overrides(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare-pure-mixed", help="pure vs incoherent-mixture comparison")
    overrides(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("validate", help="check a config without running it")
    p.add_argument("target")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("list-presets", help="list the built-in figure presets")
    p.set_defaults(func=cmd_list)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ScenarioError, ParameterError, StateError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
