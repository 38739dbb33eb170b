"""Command-line front end.

Every subcommand prints a CSV table or a JSON record to stdout or
``--output``. Exit status is 0 on success, 2 on a usage error and 1 when the
library rejects the input, in which case the error class is named on stderr.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import sys
from typing import Any, Sequence

import numpy as np

from .comparative import DEFAULT_P_GRID, Agent, proposition1_report, sample_queries
from .errors import DualRiskError
from .evaluation import (
    PremiumQuery,
    dt_premium_approx,
    premium_sensitivity,
    premium_surface,
    rdu_premium_approx,
    rdu_premium_exact,
    spread_for_query,
)
from .oracle import fd_derivative, indifference_bisect, maxiance_mc, maxiance_pairs
from .portfolio import (
    PortfolioProblem,
    contraction_reduction_approx,
    contraction_reduction_exact,
    foc,
    optimal_share,
)
from .preferences import (
    _UTILITIES,
    _WEIGHTINGS,
    IdentityWeighting,
    LinearUtility,
    parse_utility,
    parse_weighting,
)
from .risk_model import Lottery, binary_spread, gini, moments, risk_from_json

__all__ = ["main", "build_parser"]


class Table:
    def __init__(self, columns: Sequence[str], rows):
        self.columns = list(columns)
        self.rows = rows


# ---------------------------------------------------------------------------
# argument types
# ---------------------------------------------------------------------------


def _spec_type(table: dict, what: str):
    def check(text: str) -> str:
        name, sep, arg = text.strip().partition(":")
        name = name.strip().lower()
        if name not in table:
            raise argparse.ArgumentTypeError(
                f"unknown {what} {name!r}; choose from {', '.join(sorted(table))}"
            )
        if name in ("linear", "identity"):
            if sep:
                raise argparse.ArgumentTypeError(f"{name} takes no parameter")
            return text
        try:
            float(arg)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{what} {name!r} needs a numeric parameter") from None
        return text

    return check


utility_spec = _spec_type(_UTILITIES, "utility")
weighting_spec = _spec_type(_WEIGHTINGS, "weighting")


def grid_spec(text: str) -> np.ndarray:
    """``start:stop:count`` with ``count >= 2``."""
    parts = text.split(":")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if len(parts) != 3:
            raise ValueError
    except (ValueError, IndexError):
        raise argparse.ArgumentTypeError(f"grid must be start:stop:count, got {text!r}") from None
    if count < 2:
        raise argparse.ArgumentTypeError("grid count must be at least 2")
    if not stop > start:
        raise argparse.ArgumentTypeError("grid stop must exceed start")
    return np.linspace(start, stop, count)


def range_spec(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(t) for t in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"range must be lo:hi, got {text!r}") from None
    if not hi > lo:
        raise argparse.ArgumentTypeError("range hi must exceed lo")
    return lo, hi


def risk_spec(text: str) -> dict:
    """Inline JSON ``{"atoms": [[x, p], ...]}`` or ``@path`` to such a file."""
    try:
        if text.startswith("@"):
            with open(text[1:], encoding="utf-8") as fh:
                text = fh.read()
        return json.loads(text)
    except (OSError, ValueError) as exc:
        raise argparse.ArgumentTypeError(f"cannot read risk: {exc}") from None


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _cell(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None:
        return ""
    if isinstance(v, (list, tuple, dict)):
        return json.dumps(v)
    return str(v)


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict) and v:
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def _plain(v: Any) -> Any:
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return _plain(v.tolist())
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


def render(result: Table | dict, fmt: str) -> str:
    if fmt == "json":
        if isinstance(result, Table):
            data = [dict(zip(result.columns, map(_plain, row))) for row in result.rows]
        else:
            data = _plain(result)
        return json.dumps(data, indent=2) + "\n"
    if isinstance(result, Table):
        columns, rows = result.columns, result.rows
    else:
        flat = _flatten(result)
        columns, rows = list(flat), [list(flat.values())]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows([_cell(v) for v in row] for row in rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _risk(args):
    if args.binary_spread is not None:
        return binary_spread(*args.binary_spread)
    if args.risk is None:
        raise argparse.ArgumentTypeError("give --risk or --binary-spread")
    return risk_from_json(args.risk, kind=args.kind)


def cmd_moments(args):
    risk = _risk(args)
    kind = "lottery" if isinstance(risk, Lottery) else "spread"
    return {**risk.to_dict(), "kind": kind, **moments(risk).to_dict()}


def cmd_gini(args):
    risk = _risk(args)
    if not isinstance(risk, Lottery):
        raise argparse.ArgumentTypeError("gini needs a full-mass lottery")
    m = moments(risk)
    return {"gini": gini(risk), "mean": m.mean, "maxiance": m.maxiance}


def cmd_premium(args):
    U = parse_utility(args.utility)
    h = parse_weighting(args.weighting)
    if args.model == "eu":
        h = IdentityWeighting()
    elif args.model == "dt":
        U = LinearUtility()
    q = PremiumQuery(p0=args.p0, eps1=args.eps1, eps2=args.eps2, w0=args.w0, utility=U, weighting=h)
    if args.model == "dt":
        res = dt_premium_approx(h, q.p0, spread_for_query(q))
    else:
        res = rdu_premium_approx(U, h, q.w0, q.p0, spread_for_query(q))
        res = dataclasses.replace(res, exact=rdu_premium_exact(q))
    out = {
        "model": args.model,
        "utility": U.spec,
        "weighting": h.spec,
        "w0": q.w0,
        "p0": q.p0,
        "eps1": q.eps1,
        "eps2": q.eps2,
        **res.to_dict(),
        "error": res.error,
    }
    if args.model != "dt":
        out["d_lambda_d_eps2"] = premium_sensitivity(q, res.exact)
    return out


def cmd_index(args):
    if args.utility is not None:
        f = parse_utility(args.utility)
        grid = args.grid if args.grid is not None else np.linspace(1.0, 20.0, 101)
        names = ["w", "U", "U'", "U''", "local_index"]
    else:
        f = parse_weighting(args.weighting or "identity")
        grid = args.grid if args.grid is not None else np.linspace(0.01, 0.99, 99)
        names = ["p", "h", "h'", "h''", "local_index"]
    cols = [grid, f.value(grid), f.d1(grid), f.d2(grid), f.local_index(grid)]
    return Table(names, list(zip(*(np.asarray(c).tolist() for c in cols))))


def cmd_surface(args):
    U = parse_utility(args.utility)
    h = parse_weighting(args.weighting)
    mbar = args.mbar2_over_2pr
    m2 = args.m2_over_2pr if args.ratio is None else args.ratio * mbar
    lam = premium_surface(U, h, args.w0, args.p0, m2, mbar)
    rows = [(w, p, lam[i, j]) for i, w in enumerate(args.w0.tolist())
            for j, p in enumerate(args.p0.tolist())]
    return Table(["w0", "p0", "lambda_approx"], rows)


def cmd_compare(args):
    a1 = Agent(parse_utility(args.utility1), parse_weighting(args.weighting1), "agent1")
    a2 = Agent(parse_utility(args.utility2), parse_weighting(args.weighting2), "agent2")
    w_grid = np.linspace(args.w_range[0], args.w_range[1], args.w_points)
    p_grid = args.p_grid
    queries = sample_queries(
        args.n_queries, args.w_range, (float(p_grid[0]), float(p_grid[-1])),
        seed=args.seed, n_boundary=args.n_boundary,
    )
    report = proposition1_report(a1, a2, w_grid, p_grid, queries)
    return {
        "agent1": {"utility": a1.utility.spec, "weighting": a1.weighting.spec},
        "agent2": {"utility": a2.utility.spec, "weighting": a2.weighting.spec},
        "seed": args.seed,
        **report.to_dict(),
    }


def cmd_portfolio(args):
    U = parse_utility(args.utility)
    h = parse_weighting(args.weighting)
    p0 = args.p0
    if args.zero_participation:
        p0 = float(h.inverse(args.R1 / (args.R0 + args.R1)))
    if p0 is None:
        raise argparse.ArgumentTypeError("give --p0 or --zero-participation")
    prob = PortfolioProblem(w0=args.w0, p0=p0, R0=args.R0, R1=args.R1, utility=U, weighting=h)
    share = optimal_share(prob)
    out = {
        "w0": prob.w0,
        "p0": prob.p0,
        "R0": prob.R0,
        "R1": prob.R1,
        "h_p0": prob.loss_weight,
        "zero_participation_weight": prob.R1 / (prob.R0 + prob.R1),
        "share": share,
        "foc_residual": float(foc(prob, share)),
    }
    if args.eps1 is not None:
        out["eps1"] = args.eps1
        out["contraction_exact"] = contraction_reduction_exact(prob, args.eps1)
        out["contraction_approx"] = contraction_reduction_approx(prob, args.eps1)
    return out


def cmd_oracle_pairs(args):
    risk = _risk(args)
    return {"maxiance_pairs": maxiance_pairs(risk), "maxiance": moments(risk).maxiance}


def cmd_oracle_mc(args):
    risk = _risk(args)
    if not isinstance(risk, Lottery):
        raise argparse.ArgumentTypeError("maxiance-mc needs a full-mass lottery")
    return {**maxiance_mc(risk, args.n_samples, args.seed).to_dict(), "maxiance": moments(risk).maxiance}


def cmd_oracle_fd(args):
    f = parse_utility(args.utility) if args.utility else parse_weighting(args.weighting)
    out = {"x": args.x, "order": args.order, "fd": fd_derivative(f.value, args.x, args.order)}
    if args.order in (1, 2):
        out["analytic"] = float((f.d1 if args.order == 1 else f.d2)(args.x))
    return out


def cmd_oracle_bisect(args):
    U = parse_utility(args.utility)
    lam = indifference_bisect(args.lhs_weight, args.rhs_value, U, args.w0, args.bracket)
    residual = args.lhs_weight * float(U.value(args.w0 - lam)) - args.rhs_value
    return {"lambda": lam, "residual": residual}


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_output(p, default_fmt):
    p.add_argument("--format", choices=("csv", "json"), default=default_fmt)
    p.add_argument("--output", metavar="PATH", help="write here instead of stdout")


def _add_risk(p):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--risk", type=risk_spec, help='JSON {"atoms": [[x, p], ...]} or @file')
    g.add_argument("--binary-spread", type=float, nargs=2, metavar=("EPS1", "EPS2"))
    p.add_argument("--kind", choices=("auto", "lottery", "spread"), default="auto")


def _add_prefs(p, utility="linear", weighting="identity"):
    p.add_argument("--utility", type=utility_spec, default=utility)
    p.add_argument("--weighting", type=weighting_spec, default=weighting)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dualrisk", description="Dual moments, risk premia and risk-aversion comparisons."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("moments", help="mean, variance, maxiance and miniance of a risk")
    _add_risk(p)
    _add_output(p, "json")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("gini", help="Gini coefficient of a lottery")
    _add_risk(p)
    _add_output(p, "json")
    p.set_defaults(func=cmd_gini)

    p = sub.add_parser("premium", help="exact and approximate risk premium")
    p.add_argument("--model", choices=("eu", "dt", "rdu"), default="rdu")
    _add_prefs(p)
    p.add_argument("--w0", type=float, default=0.0)
    p.add_argument("--p0", type=float, required=True)
    p.add_argument("--eps1", type=float, required=True)
    p.add_argument("--eps2", type=float, default=1.0)
    _add_output(p, "json")
    p.set_defaults(func=cmd_premium)

    p = sub.add_parser("index", help="values, derivatives and local index on a grid")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--utility", type=utility_spec)
    g.add_argument("--weighting", type=weighting_spec)
    p.add_argument("--grid", type=grid_spec, help="start:stop:count")
    _add_output(p, "csv")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("surface", help="approximate premium over (w0, p0)")
    _add_prefs(p)
    p.add_argument("--w0", type=grid_spec, required=True, help="start:stop:count")
    p.add_argument("--p0", type=grid_spec, required=True, help="start:stop:count")
    p.add_argument("--m2-over-2pr", type=float, default=1.0)
    p.add_argument("--mbar2-over-2pr", type=float, default=1.0)
    p.add_argument("--ratio", type=float,
                   help="set m2/(2Pr) to RATIO times mbar2/(2Pr), e.g. 3 or 0.3333")
    _add_output(p, "csv")
    p.set_defaults(func=cmd_surface)

    p = sub.add_parser("compare", help="check whether agent 2 is more risk averse than agent 1")
    p.add_argument("--utility1", "--u1", type=utility_spec, default="linear")
    p.add_argument("--weighting1", "--h1", type=weighting_spec, default="identity")
    p.add_argument("--utility2", "--u2", type=utility_spec, default="linear")
    p.add_argument("--weighting2", "--h2", type=weighting_spec, default="identity")
    p.add_argument("--w-range", type=range_spec, default=(1.0, 20.0), help="lo:hi")
    p.add_argument("--w-points", type=int, default=101)
    p.add_argument("--p-grid", type=grid_spec, default=DEFAULT_P_GRID)
    p.add_argument("--n-queries", type=int, default=1000)
    p.add_argument("--n-boundary", type=int, help="boundary queries (default: n-queries / 10)")
    p.add_argument("--seed", type=int, default=0)
    _add_output(p, "json")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("portfolio", help="optimal risky share and contraction reduction")
    _add_prefs(p)
    p.add_argument("--w0", type=float, required=True)
    p.add_argument("--p0", type=float)
    p.add_argument("--zero-participation", action="store_true",
                   help="set p0 so that h(p0) = R1/(R0+R1)")
    p.add_argument("--R0", type=float, required=True)
    p.add_argument("--R1", type=float, required=True)
    p.add_argument("--eps1", type=float)
    _add_output(p, "json")
    p.set_defaults(func=cmd_portfolio)

    p = sub.add_parser("oracle", help="brute-force cross-checks")
    osub = p.add_subparsers(dest="oracle", required=True)
    q = osub.add_parser("maxiance-pairs")
    _add_risk(q)
    _add_output(q, "json")
    q.set_defaults(func=cmd_oracle_pairs)
    q = osub.add_parser("maxiance-mc")
    _add_risk(q)
    q.add_argument("--n-samples", type=int, default=10**6)
    q.add_argument("--seed", type=int, default=0)
    _add_output(q, "json")
    q.set_defaults(func=cmd_oracle_mc)
    q = osub.add_parser("fd")
    g = q.add_mutually_exclusive_group(required=True)
    g.add_argument("--utility", type=utility_spec)
    g.add_argument("--weighting", type=weighting_spec)
    q.add_argument("--x", type=float, required=True)
    q.add_argument("--order", type=int, choices=(1, 2, 3), default=1)
    _add_output(q, "json")
    q.set_defaults(func=cmd_oracle_fd)
    q = osub.add_parser("bisect")
    q.add_argument("--utility", type=utility_spec, default="linear")
    q.add_argument("--w0", type=float, required=True)
    q.add_argument("--lhs-weight", type=float, required=True)
    q.add_argument("--rhs-value", type=float, required=True)
    q.add_argument("--bracket", type=range_spec, required=True, help="lo:hi")
    _add_output(q, "json")
    q.set_defaults(func=cmd_oracle_bisect)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        text = render(args.func(args), args.format)
    except argparse.ArgumentTypeError as exc:
        parser.print_usage(sys.stderr)
        print(f"dualrisk: error: {exc}", file=sys.stderr)
        return 2
    except DualRiskError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if args.output:
        try:
            with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
            return 1
    else:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            sys.stderr.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
