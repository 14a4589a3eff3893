"""Command-line interface: ``ncfv run | reproduce | convergence | list-tests``.

Exit codes: 0 success, 1 acceptance failure, 2 configuration error,
3 solver error.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .config import load_config
from .errors import ConfigError, NcfvError
from .harness import convergence, reproduce, run_config, write_result
from .io import write_error_table, write_gnuplot
from .models import make_system
from .registry import list_tests

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3


def _on_off(text):
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return text == "on"


def _cells_list(text):
    try:
        cells = [int(c) for c in text.split(",") if c.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad cell list {text!r}") from None
    if not cells:
        raise argparse.ArgumentTypeError("empty cell list")
    return cells


def _overrides(p, cells=True):
    p.add_argument("--cfl", type=float, help="CFL number in (0, 1)")
    if cells:
        p.add_argument("--cells", type=int, help="number of cells")
    p.add_argument("--order", type=int, choices=(1, 2), help="scheme order")
    p.add_argument("--disrec", type=_on_off, metavar="on|off",
                   help="in-cell discontinuous reconstruction")
    p.add_argument("--strategy", choices=("roe", "exact"), help="reconstruction strategy")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ncfv",
        description="Path-conservative finite volume solver with in-cell "
                    "discontinuous reconstruction.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one configuration file")
    p.add_argument("config", help="TOML configuration")
    p.add_argument("--out", help="output directory (default: the config's output)")
    p.add_argument("--gnuplot", action="store_true", help="also write a gnuplot script")
    _overrides(p)

    p = sub.add_parser("reproduce", help="rerun a builtin test and its checks")
    p.add_argument("test_id", help="builtin test id, see list-tests")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--gnuplot", action="store_true", help="also write gnuplot scripts")

    p = sub.add_parser("convergence", help="L1 error table over several grids")
    p.add_argument("config", help="TOML configuration")
    p.add_argument("--cells", type=_cells_list, default=[100, 200, 400, 800],
                   help="comma-separated cell counts (default: 100,200,400,800)")
    p.add_argument("--out", help="output directory (default: the config's output)")
    _overrides(p, cells=False)

    sub.add_parser("list-tests", help="list builtin test ids")
    return parser


def _apply(cfg, args):
    return cfg.with_overrides(cfl=args.cfl, cells=getattr(args, "cells", None)
                              if args.command == "run" else None,
                              order=args.order, disrec=args.disrec, strategy=args.strategy)


def _fmt(e):
    return " ".join(f"{v:.6e}" for v in np.atleast_1d(e))


def cmd_run(args):
    cfg = _apply(load_config(args.config), args)
    out = args.out or cfg.output
    res = run_config(cfg)
    system = make_system(cfg.system, **cfg.system_options)
    paths = write_result(res, cfg, out, cfg.label, system)
    print(f"{cfg.label} {res.variant} N={res.cells}: {res.steps} steps, {res.seconds:.2f}s")
    if res.l1 is not None:
        print(f"L1 error at t={cfg.t_end:g}: {_fmt(res.l1)}")
    for p in paths:
        print(f"wrote {p}")
    if args.gnuplot:
        gp = os.path.join(out, f"{cfg.label}_{res.variant}_N{res.cells}.gp")
        write_gnuplot(gp, [os.path.basename(paths[-1])], list(system.names),
                      f"{cfg.label} {res.variant}", with_exact=res.exact is not None)
        print(f"wrote {gp}")
    return EXIT_OK


def cmd_reproduce(args):
    print(f"reproducing {args.test_id}")
    report = reproduce(args.test_id, args.out, args.gnuplot)
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}")
    print(f"wrote {len(report.files)} files to {args.out}")
    if report.checks and not report.passed:
        print("failing checks:")
        for c in report.checks:
            if not c.passed:
                print(f"  - {c.name}")
        return EXIT_FAIL
    return EXIT_OK


def cmd_convergence(args):
    cfg = _apply(load_config(args.config), args)
    out = args.out or cfg.output
    table = convergence(cfg, args.cells)
    path = os.path.join(out, f"{cfg.label}_{cfg.scheme.name}_errors.csv")
    write_error_table(table, path)
    orders = table.orders
    print(f"{'cells':>8s}  errors / orders")
    for c, e, o in zip(table.cells, table.errors, orders):
        print(f"{c:8d}  {_fmt(e)}  " + " ".join("   -  " if np.isnan(v) else f"{v:6.3f}" for v in o))
    print(f"wrote {path}")
    return EXIT_OK


def cmd_list(args):
    for t in list_tests():
        tag = " (supplementary)" if t.supplementary else ""
        cells = ",".join(str(c) for c in t.cells)
        print(f"{t.id:16s} {t.title}{tag}; cells {cells}, t_end {t.t_end:g}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "reproduce": cmd_reproduce, "convergence": cmd_convergence,
            "list-tests": cmd_list}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except KeyError as exc:
        print(f"configuration error: {exc.args[0]}", file=sys.stderr)
        return EXIT_CONFIG
    except (NcfvError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
