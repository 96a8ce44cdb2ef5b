"""Command-line front end: ``parasdo <command> [options]``.

Exit codes: 0 success, 1 usage error, 2 validation failure, 3 numerical
nonconvergence, 4 acceptance failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .centralpath import geometric_schedule, initial_center, trace_path
from .errors import IdentificationError, NonConvergenceError, ParasdoError, ValidationError
from .experiments import (
    IDENT_EPS,
    reproduce,
    sweep_summary,
    table_identification,
    table_sensitivity,
)
from .fixtures import FIXTURES, get_fixture
from .intervals import SWEEP_COLUMNS, sweep, sweep_rows
from .model import load_instance, validate_instance
from .partition import PartitionConstants, compute_mu_tilde, estimate_sigma, find_mu_breve
from .sensitivity import SENSITIVITY_COLUMNS

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_NUMERIC, EXIT_ACCEPTANCE = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


# -- output ----------------------------------------------------------------


def _fmt_csv(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _fmt_md(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "" if math.isnan(v) else f"{float(v):.3E}"
    return str(v)


def render(rows, columns, fmt="csv") -> str:
    buf = io.StringIO()
    if fmt == "md":
        buf.write("| " + " | ".join(columns) + " |\n")
        buf.write("|" + "---|" * len(columns) + "\n")
        for r in rows:
            buf.write("| " + " | ".join(_fmt_md(r.get(c, "")) for c in columns) + " |\n")
        return buf.getvalue()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt_csv(r.get(c, "")) for c in columns])
    return buf.getvalue()


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# -- argument handling ----------------------------------------------------


def _instance(args):
    if args.fixture:
        try:
            fx = get_fixture(args.fixture)
        except KeyError as exc:
            raise UsageError(exc.args[0]) from None
        return fx.instance, fx
    if args.instance:
        return load_instance(args.instance), None
    raise UsageError("give --instance FILE or --fixture NAME")


def _eps_values(args, default=None) -> list[float]:
    given = [x for x in (args.eps, args.eps_range, args.eps_list) if x is not None]
    if len(given) > 1:
        raise UsageError("use only one of --eps, --eps-range, --eps-list")
    if args.eps is not None:
        return [args.eps]
    if args.eps_range is not None:
        lo, hi, step = args.eps_range
        if step <= 0 or hi < lo:
            raise UsageError("--eps-range needs LO <= HI and STEP > 0")
        k = int(math.floor((hi - lo) / step + 1e-9))
        return [round(lo + j * step, 12) for j in range(k + 1)]
    if args.eps_list is not None:
        if not args.eps_list:
            raise UsageError("--eps-list is empty")
        return list(args.eps_list)
    if default is not None:
        return list(default)
    raise UsageError("give --eps, --eps-range or --eps-list")


def _check_rate(args):
    if not 0 < args.mu_rate < 1:
        raise UsageError("--mu-rate must lie in (0, 1)")
    if args.mu_cutoff <= 0:
        raise UsageError("--mu-cutoff must be positive")


# -- commands -------------------------------------------------------------


def cmd_validate(args) -> int:
    inst, _ = _instance(args)
    rep = validate_instance(inst)
    print(f"n = {rep.n}, m = {rep.m}, rank = {rep.rank}")
    for k, v in rep.norms.items():
        print(f"|{k}| = {v:.4g}")
    for msg in rep.messages:
        print(msg)
    print("assumption 1: " + ("ok" if rep.ok else "FAILED"))
    return EXIT_OK if rep.ok else EXIT_INVALID


def cmd_solve(args) -> int:
    inst, _ = _instance(args)
    _check_rate(args)
    eps_values = _eps_values(args)
    mu_stop = args.mu if args.mu is not None else args.mu_stop
    n = inst.n
    cols = ["eps", "mu", "residual", "iterations"] + [f"lamX{i + 1}" for i in range(n)] + [f"lamS{i + 1}" for i in range(n)]
    rows = []
    for eps in eps_values:
        start = initial_center(inst, eps, 1.0)
        trace = trace_path(inst, eps, geometric_schedule(1.0, args.mu_rate, mu_stop), start)
        for sol, wx, ws in zip(trace.solutions, trace.eig_X, trace.eig_S):
            row = {"eps": eps, "mu": sol.mu, "residual": sol.residual, "iterations": sol.iterations}
            row.update({f"lamX{i + 1}": float(v) for i, v in enumerate(wx)})
            row.update({f"lamS{i + 1}": float(v) for i, v in enumerate(ws)})
            rows.append(row)
    _emit(render(rows, cols, args.format), args.out)
    return EXIT_OK


def cmd_partition(args) -> int:
    inst, fx = _instance(args)
    _check_rate(args)
    eps_values = _eps_values(args, IDENT_EPS if fx is not None and fx.name == "elliptope3" else None)
    rows = table_identification(inst, eps_values, fx, args.mu_rate, args.mu_cutoff)
    cols = ["eps", "mu_breve", "n_B", "n_T", "n_N", "dist_B", "dist_N", "err_X", "err_S", "status"]
    if args.sigma is not None or args.gamma is not None or args.c is not None:
        cols.insert(2, "mu_tilde")
        for r in rows:
            if r.get("status") != "ok":
                continue
            sigma = args.sigma
            if sigma is None:
                ident = find_mu_breve(inst, r["eps"], args.mu_rate, args.mu_cutoff)
                sigma = estimate_sigma(inst, r["eps"], ident.solution, ident.partition)
            consts = PartitionConstants(sigma=sigma, c=args.c or 1.0, gamma=args.gamma)
            r["mu_tilde"] = compute_mu_tilde(consts, inst.n).mu_tilde
    _emit(render(rows, cols, args.format), args.out)
    bad = [r for r in rows if r.get("status") != "ok"]
    for r in bad:
        print(f"eps = {r['eps']}: {r['status']}", file=sys.stderr)
    return EXIT_NUMERIC if bad and len(bad) == len(rows) else EXIT_OK


def cmd_sweep(args) -> int:
    inst, _ = _instance(args)
    _check_rate(args)
    nodes = _eps_values(args)
    classes, diags = sweep(
        inst, nodes=nodes, refine_tol=args.refine_tol, rate=args.mu_rate, cutoff=args.mu_cutoff, jobs=args.jobs
    )
    _emit(render(sweep_rows(diags, classes), SWEEP_COLUMNS, args.format), args.out)
    for line in sweep_summary(classes):
        print(line, file=sys.stderr if not args.out else sys.stdout)
    return EXIT_OK


def cmd_sensitivity(args) -> int:
    inst, _ = _instance(args)
    _check_rate(args)
    if args.center is None:
        raise UsageError("sensitivity needs --center EPS")
    if args.mu is None:
        raise UsageError("sensitivity needs a fixed --mu")
    primes = _eps_values(args)
    reports = table_sensitivity(inst, args.center, primes, args.mu, args.mu_rate, args.mu_cutoff)
    _emit(render([r.as_row() for r in reports], SENSITIVITY_COLUMNS, args.format), args.out)
    return EXIT_OK


def cmd_reproduce(args) -> int:
    if not args.fixture:
        raise UsageError("reproduce needs --fixture NAME")
    try:
        fx = get_fixture(args.fixture)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    bundle = reproduce(fx, jobs=args.jobs, sweep_step=args.step)
    outdir = Path(args.out) if args.out else None
    if outdir:
        outdir.mkdir(parents=True, exist_ok=True)
    ext = "md" if args.format == "md" else "csv"
    for name, rows in bundle.tables.items():
        if name == "sweep":
            classes, diags = rows
            rows, cols = sweep_rows(diags, classes), SWEEP_COLUMNS
        else:
            cols = list(rows[0].keys()) if rows else []
        text = render(rows, cols, args.format)
        if outdir:
            (outdir / f"{name}.{ext}").write_text(text)
        else:
            print(f"## {name}")
            print(text)
    for name, lines in bundle.summaries.items():
        for line in lines:
            print(f"{name}: {line}")
    for c in bundle.checks:
        print(c.line())
    return EXIT_OK if bundle.ok else EXIT_ACCEPTANCE


COMMANDS = {
    "validate": cmd_validate,
    "solve": cmd_solve,
    "partition": cmd_partition,
    "sweep": cmd_sweep,
    "sensitivity": cmd_sensitivity,
    "reproduce": cmd_reproduce,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="parasdo", description="Parametric SDO analysis: central path, optimal partition, intervals.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("command", choices=sorted(COMMANDS))
    src = p.add_mutually_exclusive_group()
    src.add_argument("--instance", metavar="FILE", help="instance JSON file")
    src.add_argument("--fixture", metavar="NAME", help="bundled instance: " + ", ".join(FIXTURES))
    p.add_argument("--eps", type=float)
    p.add_argument("--eps-range", type=float, nargs=3, metavar=("LO", "HI", "STEP"))
    p.add_argument("--eps-list", type=float, nargs="*")
    p.add_argument("--center", type=float, help="reference eps for the sensitivity table")
    p.add_argument("--mu", type=float, help="fixed mu (sensitivity) or last mu of the trajectory (solve)")
    p.add_argument("--mu-rate", type=float, default=0.9)
    p.add_argument("--mu-cutoff", type=float, default=1e-5)
    p.add_argument("--mu-stop", type=float, default=1e-10, help="last mu of the solve trajectory")
    p.add_argument("--refine-tol", type=float, default=1e-3)
    p.add_argument("--step", type=float, default=0.01, help="sweep step used by reproduce")
    p.add_argument("--c", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--format", choices=("csv", "md"), default="csv")
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"parasdo: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as exc:
        print(f"parasdo: invalid instance: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NonConvergenceError, IdentificationError) as exc:
        print(f"parasdo: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ParasdoError as exc:
        print(f"parasdo: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
