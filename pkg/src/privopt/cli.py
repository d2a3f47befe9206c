"""Command-line front end.

Exit codes: 0 success, 1 I/O failure, 2 usage or domain error, 3 malformed
input file, 4 solver or mechanism failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from privopt import condition
from privopt.errors import DimensionError, ParseError, PrivOptError
from privopt.experiments import advertising, portfolio, report, returns, transportation
from privopt.mechanism import (
    SensitivityModel,
    empirical_dp_check,
    laplace_mechanism_1d,
    perturb_constraints,
    solve_private,
    truncated_mechanism_1d,
)
from privopt.rng import DEFAULT_SEED, substream
from privopt.solver import problem_from_dict
from privopt.trunclap import PrivacyParams

EXIT_IO, EXIT_USAGE, EXIT_PARSE, EXIT_SOLVER = 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _norm_index(text: str) -> float:
    if text.lower() in ("inf", "infinity"):
        return math.inf
    v = float(text)
    if v not in (1.0, 2.0):
        raise argparse.ArgumentTypeError("norm index must be 1, 2 or inf")
    return v


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})", row=exc.lineno, column=exc.colno) from exc
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from exc


def _floor_value(v):
    if v is None or v == "-inf":
        return -math.inf
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return float(v)
    raise ParseError(f"invalid floor entry {v!r}")


def load_sensitivity(path, delta_sens: float) -> SensitivityModel:
    """Floors file: a list (``null`` or ``"-inf"`` for unbounded rows) or
    ``{"floors": [...], "private": [...]}``."""
    doc = _read_json(path)
    private = None
    if isinstance(doc, dict):
        if "floors" not in doc:
            raise ParseError(f"{path}: missing 'floors'")
        private = doc.get("private")
        doc = doc["floors"]
    if not isinstance(doc, list):
        raise ParseError(f"{path}: floors must be a list")
    try:
        return SensitivityModel(delta_sens, [_floor_value(v) for v in doc], private)
    except ParseError:
        raise
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def _json_value(v):
    if isinstance(v, np.ndarray):
        return [_json_value(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, np.integer):
        return int(v)
    return v


def _emit_json(doc: dict, out) -> None:
    text = json.dumps({k: _json_value(v) for k, v in doc.items()}, indent=2) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        report.atomic_write(out, text.encode())


def _privacy(args) -> PrivacyParams:
    return PrivacyParams(args.eps, args.delta)


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("PRIVOPT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise _UsageError(f"PRIVOPT_THREADS must be an integer, got {env!r}") from None
    return 1


# commands

def cmd_perturb(args):
    sens = load_sensitivity(args.floors, args.delta_sens)
    b = _read_json(args.b)
    if not isinstance(b, list):
        raise ParseError(f"{args.b}: b must be a list")
    b_bar = perturb_constraints(b, sens, _privacy(args), substream(args.seed))
    _emit_json({"b_bar": b_bar, "seed": args.seed}, args.out)


def cmd_solve(args):
    problem = problem_from_dict(_read_json(args.problem))
    sens = load_sensitivity(args.floors, args.delta_sens)
    if sens.m != problem.A.shape[0]:
        raise ParseError(f"{args.floors}: {sens.m} floors for {problem.A.shape[0]} constraints")
    sol = solve_private(problem, sens, _privacy(args), args.seed)
    _emit_json({"b_bar": sol.b_bar, "x": sol.x, "objective": sol.objective, "seed": sol.seed,
                "feasible_wrt_original": sol.feasible_wrt_original}, args.out)


def cmd_bounds(args):
    privacy = _privacy(args)
    doc = {"upper": condition.upper_bound(args.L, args.delta_sens, privacy, args.m, args.alpha)}
    if args.diag is not None:
        doc["lower"] = condition.lower_bound(args.delta_sens, privacy, args.diag)
    _emit_json(doc, None)


def cmd_cond(args):
    A = _read_json(args.matrix)
    if isinstance(A, dict):
        A = A.get("A")
    try:
        A = np.atleast_2d(np.asarray(A, dtype=float))
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{args.matrix}: matrix must be a list of numeric rows") from exc
    spec = condition.CondSpec(args.p, args.q, condition.Method(args.method))
    _emit_json({"method": args.method, "p": spec.p, "q": spec.q,
                "value": condition.condition_number(A, spec)}, None)


def _write_reports(rows, args):
    if args.out:
        report.emit_report(rows, "csv", args.out)
    else:
        sys.stdout.write(report.csv_text(rows))
    if args.svg:
        report.emit_report(rows, "svg", args.svg)


def cmd_portfolio(args):
    if args.returns:
        data = returns.load_returns_csv(args.returns)
    else:
        data = returns.synthesize_returns(seed=args.data_seed)
        print("note: no returns CSV given, using synthetic factor-model returns", file=sys.stderr)
    cfg = portfolio.PortfolioSweepConfig(
        n_investors=args.n, r_min=args.r_min, epsilon_grid=args.eps, delta_grid=args.delta,
        trials=args.trials, seed=args.seed, redraw_budget=args.redraw_budget)
    cells = portfolio.run_portfolio_sweep(cfg, data, threads=_threads(args))
    _write_reports(portfolio.report_rows(cfg, cells), args)


def cmd_advertising(args):
    cfg = advertising.AdSweepConfig(
        M=args.M, N=args.N, sims=args.sims, epsilon_grid=args.eps, delta=args.delta,
        seed=args.seed, shared_noise=args.shared_noise)
    rows = advertising.run_advertising_sweep(cfg, threads=_threads(args))
    _write_reports(advertising.report_rows(cfg, rows), args)


def cmd_transportation(args):
    d = transportation.demo_transportation(_privacy(args), args.seed)
    _emit_json({"optimal_cost": d.optimal_cost, "private_cost": d.private_cost, "gap": d.gap,
                "bound": d.bound, "x": d.x_private, "b_bar": d.b_bar, "seed": d.seed}, args.out)


def cmd_audit(args):
    privacy = _privacy(args)
    if args.mechanism == "truncated":
        mech = truncated_mechanism_1d(args.delta_sens, privacy)
    else:
        mech = laplace_mechanism_1d(args.delta_sens, privacy)
    b_prime = args.b + args.delta_sens if args.b_prime is None else args.b_prime
    r = empirical_dp_check(mech, args.b, b_prime, privacy, args.samples, args.bins, args.seed)
    _emit_json({"epsilon": r.epsilon, "delta_hat": r.delta_hat, "delta_sigma": r.delta_sigma,
                "max_ratio": r.max_ratio, "ratio_ok": r.ratio_ok, "seed": args.seed}, None)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="privopt", description="Differentially private linearly constrained optimization.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, required=True)

    def privacy_flags(sp, delta_default=None):
        sp.add_argument("--eps", type=float, required=True)
        sp.add_argument("--delta", type=float, required=delta_default is None, default=delta_default)

    def seed_flag(sp):
        sp.add_argument("--seed", type=int, default=DEFAULT_SEED)

    def report_flags(sp):
        sp.add_argument("--out", help="CSV report path (stdout if omitted)")
        sp.add_argument("--svg", help="optional SVG plot path")
        sp.add_argument("--threads", type=int, default=None)

    sp = sub.add_parser("perturb", help="release a perturbed constraint vector")
    sp.add_argument("--b", required=True, help="JSON list with the constraint vector")
    sp.add_argument("--floors", required=True)
    sp.add_argument("--delta-sens", type=float, required=True)
    sp.add_argument("--out")
    privacy_flags(sp)
    seed_flag(sp)
    sp.set_defaults(func=cmd_perturb)

    sp = sub.add_parser("solve", help="solve a problem privately")
    sp.add_argument("--problem", required=True)
    sp.add_argument("--floors", required=True)
    sp.add_argument("--delta-sens", type=float, required=True)
    sp.add_argument("--out")
    privacy_flags(sp)
    seed_flag(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("bounds", help="evaluate the utility bounds")
    sp.add_argument("--L", type=float, required=True)
    sp.add_argument("--delta-sens", type=float, required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--alpha", type=float, required=True, help="aggregate alpha * m**(1/p)")
    sp.add_argument("--diag", type=_floats, help="diagonal entries, adds the lower bound")
    privacy_flags(sp)
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("cond", help="condition number of a constraint matrix")
    sp.add_argument("--matrix", required=True, help="JSON matrix (list of rows)")
    sp.add_argument("--method", choices=[m.value for m in condition.Method], default="bruteforce")
    sp.add_argument("--p", type=_norm_index, default=math.inf)
    sp.add_argument("--q", type=_norm_index, default=1.0)
    sp.set_defaults(func=cmd_cond)

    sp = sub.add_parser("experiment-portfolio", help="portfolio quality sweep")
    sp.add_argument("--returns", help="weeks x tickers returns CSV")
    sp.add_argument("--data-seed", type=int, default=7, help="seed of the synthetic returns")
    sp.add_argument("--n", type=int, default=1000)
    sp.add_argument("--r-min", type=float, default=2.5)
    sp.add_argument("--eps", type=_floats, default=portfolio.PortfolioSweepConfig.epsilon_grid)
    sp.add_argument("--delta", type=_floats, default=portfolio.PortfolioSweepConfig.delta_grid)
    sp.add_argument("--trials", type=int, default=50)
    sp.add_argument("--redraw-budget", action="store_true")
    seed_flag(sp)
    report_flags(sp)
    sp.set_defaults(func=cmd_portfolio)

    sp = sub.add_parser("experiment-advertising", help="advertising revenue and violation sweep")
    sp.add_argument("--M", type=int, default=200)
    sp.add_argument("--N", type=int, default=10)
    sp.add_argument("--sims", type=int, default=50)
    sp.add_argument("--eps", type=_floats, default=advertising.DEFAULT_EPSILONS)
    sp.add_argument("--delta", type=float, default=1e-4)
    sp.add_argument("--shared-noise", action="store_true")
    seed_flag(sp)
    report_flags(sp)
    sp.set_defaults(func=cmd_advertising)

    sp = sub.add_parser("demo-transportation", help="2 x 2 transportation demo")
    privacy_flags(sp)
    seed_flag(sp)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_transportation)

    sp = sub.add_parser("audit-dp", help="empirical privacy audit of a 1-D mechanism")
    sp.add_argument("--mechanism", choices=["truncated", "laplace"], default="truncated")
    sp.add_argument("--delta-sens", type=float, default=1.0)
    sp.add_argument("--b", type=float, default=0.0)
    sp.add_argument("--b-prime", type=float, default=None)
    sp.add_argument("--samples", type=int, default=10**6)
    sp.add_argument("--bins", type=int, default=200)
    privacy_flags(sp)
    seed_flag(sp)
    sp.set_defaults(func=cmd_audit)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, DimensionError) as exc:
        print(f"privopt: input error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except PrivOptError as exc:
        print(f"privopt: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"privopt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"privopt: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
