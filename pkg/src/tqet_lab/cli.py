"""Command-line front end.

    tqet-lab ground   --set n_sites=6
    tqet-lab trace    --config run.cfg --out results/
    tqet-lab timelike --set n_sites=6
    tqet-lab sweep gh|ece|ratio|fixed --config run.cfg --workers 8
    tqet-lab validate

Exit codes: 0 success, 1 config/validation error, 2 numerical-consistency
error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import FORMATS, OUT_ENV, RunConfig, parse_config
from .errors import ConfigError, NumericalConsistencyError, UndefinedEfficiencyError
from .experiments import CELL_COLUMNS, SWEEPS, SweepResult
from .model import Chain
from .output import write_table
from .protocol import ece, run_trace
from .timelike import run_series, sync_analysis
from .validate import CHECK_NAMES, DEFAULT_N, timed_validation

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3

TRACE_HEADER = ("t", "M", "N", "theta_star", "dE_min", "E_NTE", "E_TQET_opt")
SUMMARY_HEADER = ("E_QET", "E_input", "eta_tqet", "eta_qet")
TIMELIKE_HEADER = (
    "t", "re_trT2_rhoA", "im_trT2_rhoA", "re_trT2_rho0", "im_trT2_rho0",
    "trTTdag_rhoA", "trTTdag_rho0", "re_dtrT2", "im_dtrT2",
)
SYNC_HEADER = ("t_min", "t_critical", "gap")
GROUND_HEADER = ("n_sites", "energy", "degeneracy_gap", "degenerate")


def _emit(cfg: RunConfig, name: str, header, rows) -> list[Path]:
    return write_table(Path(cfg.out) / name, header, rows, cfg.config_hash(), cfg.format)


def cmd_ground(cfg: RunConfig) -> list[Path]:
    chain = Chain.build(cfg.chain_spec())
    gs = chain.ground
    return _emit(cfg, "ground", GROUND_HEADER, [(cfg.n_sites, gs.energy, gs.degeneracy_gap, gs.degenerate)])


def cmd_trace(cfg: RunConfig) -> list[Path]:
    tr = run_trace(cfg.chain_spec())
    rows = zip(tr.t, tr.m, tr.n_corr, tr.theta_star, tr.de_min, tr.e_nte, tr.e_tqet_opt)
    files = _emit(cfg, "trace", TRACE_HEADER, rows)
    try:
        eta_t, eta_q = ece(tr)
    except UndefinedEfficiencyError:
        eta_t = eta_q = float("nan")
    files += _emit(cfg, "summary", SUMMARY_HEADER, [(tr.e_qet, tr.e_input, eta_t, eta_q)])
    if cfg.plot:
        from .plotting import plot_trace

        files.append(plot_trace(tr, Path(cfg.out) / "trace"))
    return files


def cmd_timelike(cfg: RunConfig) -> list[Path]:
    spec = cfg.chain_spec()
    chain = Chain.build(spec)
    tr = run_trace(spec, chain)
    ser = run_series(spec, chain)
    report = sync_analysis(tr, ser, cfg.scalarization)
    rows = zip(
        ser.times,
        ser.tr_t2_rho_a.real, ser.tr_t2_rho_a.imag,
        ser.tr_t2_rho_0.real, ser.tr_t2_rho_0.imag,
        ser.tr_ttdag_rho_a, ser.tr_ttdag_rho_0,
        ser.delta_tr_t2.real, ser.delta_tr_t2.imag,
    )
    files = _emit(cfg, "timelike", TIMELIKE_HEADER, rows)
    files += _emit(cfg, "sync", SYNC_HEADER, report.pairs)
    if cfg.plot:
        from .plotting import plot_timelike

        files.append(plot_timelike(ser, report, Path(cfg.out) / "timelike"))
    return files


def run_sweep(cfg: RunConfig, which: str) -> SweepResult:
    base = cfg.chain_spec()
    if which == "gh":
        g_grid = np.linspace(cfg.g_min, cfg.g_max, cfg.g_num)
        h_grid = np.linspace(cfg.h_min, cfg.h_max, cfg.h_num)
        return SWEEPS["gh"](base, g_grid, h_grid, workers=cfg.workers)
    if which == "fixed":
        return SWEEPS["fixed"](base, cfg.n_values(), workers=cfg.workers, distance=cfg.distance)
    return SWEEPS[which](base, cfg.n_values(), workers=cfg.workers)


def cmd_sweep(cfg: RunConfig, which: str) -> list[Path]:
    result = run_sweep(cfg, which)
    header = list(result.axis_names) + list(CELL_COLUMNS) + ["flag"]
    rows = [list(p) + [getattr(c, k) for k in CELL_COLUMNS] + [c.flag] for p, c in result.rows()]
    files = _emit(cfg, f"sweep_{which}", header, rows)
    if cfg.plot:
        from .plotting import plot_gh, plot_scaling

        plotter = plot_gh if which == "gh" else plot_scaling
        files.append(plotter(result, Path(cfg.out) / f"sweep_{which}"))
    return files


def cmd_validate(cfg: RunConfig | None, corrupt=(), echo=print) -> int:
    base = cfg.chain_spec() if cfg is not None else None
    results, elapsed = timed_validation(n_values=DEFAULT_N, base=base, corrupt=corrupt, echo=echo)
    failed = [r for r in results if not r.passed]
    echo(f"{len(results) - len(failed)}/{len(results)} checks passed in {elapsed:.2f} s")
    return EXIT_OK if not failed else EXIT_CONFIG


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key = value configuration file")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override one configuration key (repeatable)")
    common.add_argument("--out", metavar="DIR", help=f"output directory (default ${OUT_ENV} or .)")
    common.add_argument("--workers", type=int, metavar="N", help="process-pool size for sweeps")
    common.add_argument("--format", choices=FORMATS, help="output format")
    common.add_argument("--plot", action="store_true", help="render PNG figures next to the data files")

    parser = argparse.ArgumentParser(prog="tqet-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"tqet-lab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ground", parents=[common], help="ground-state energy and gap")
    sub.add_parser("trace", parents=[common], help="optimized protocol trace and efficiencies")
    sub.add_parser("timelike", parents=[common], help="correlator moments and sync report")
    sw = sub.add_parser("sweep", parents=[common], help="parameter sweeps")
    sw.add_argument("which", choices=sorted(SWEEPS))
    val = sub.add_parser("validate", parents=[common], help="run the invariant suite at N = 4, 6")
    val.add_argument("--corrupt", action="append", default=[], choices=CHECK_NAMES,
                     help="test mode: force the named check to fail")
    return parser


def _overrides(args) -> list[str]:
    items = list(args.overrides)
    if args.out is not None:
        items.append(f"out={args.out}")
    if args.workers is not None:
        items.append(f"workers={args.workers}")
    if args.format is not None:
        items.append(f"format={args.format}")
    if args.plot:
        items.append("plot=true")
    return items


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            cfg = None
            if args.config or args.overrides:
                items = list(args.overrides)
                if not any(o.split("=", 1)[0].strip() == "n_sites" for o in items):
                    items.append("n_sites=6")
                cfg = parse_config(args.config, items)
            return cmd_validate(cfg, corrupt=args.corrupt)
        cfg = parse_config(args.config, _overrides(args))
        if args.command == "ground":
            files = cmd_ground(cfg)
        elif args.command == "trace":
            files = cmd_trace(cfg)
        elif args.command == "timelike":
            files = cmd_timelike(cfg)
        else:
            files = cmd_sweep(cfg, args.which)
    except ConfigError as exc:
        print(f"tqet-lab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalConsistencyError as exc:
        print(f"tqet-lab: numerical consistency error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"tqet-lab: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    for f in files:
        print(f)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
