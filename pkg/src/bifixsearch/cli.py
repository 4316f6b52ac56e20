"""Command-line front end.

Exit codes: 0 success, 1 I/O failure, 2 invalid input or flags, 3 the
computation itself failed (singular system, guard exceeded, truncation).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from . import design, exact, oracle
from .errors import ComputationError, TruncationWarning, ValidationError
from .model import Problem, load_problem
from .spectrum import build_spectrum, build_tail_vectors, is_cross_bifix_free

EXIT_OK, EXIT_IO, EXIT_INPUT, EXIT_COMPUTE = 0, 1, 2, 3


def num(x: Any) -> Any:
    """JSON-ready scalar: rationals become "num/den" strings, numpy scalars plain floats."""
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    return x


def tree(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {k: tree(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return tree(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return [tree(v) for v in obj]
    return num(obj)


def dump(obj: Any) -> str:
    return json.dumps(tree(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _mode(problem: Problem) -> str:
    return "exact" if problem.exact else "float"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_spectrum(args, problem: Problem) -> str:
    spectrum = build_spectrum(problem)
    out = {
        "N": problem.N,
        "M": problem.M,
        "sequences": [problem.render(j) for j in range(problem.M)],
        "h": spectrum.to_json(),
        "tails": [list(row) for row in build_tail_vectors(problem).r],
    }
    if args.free:
        out["cross_bifix_free"] = is_cross_bifix_free(spectrum)
    return dump(out)


def _check_kmax(kmax: int | None) -> None:
    if kmax is not None and kmax < 1:
        raise ValidationError("kmax must be ≥ 1", field="kmax")


def cmd_dist(args, problem: Problem) -> str:
    _check_kmax(args.kmax)
    if not args.tail_tol > 0:
        raise ValidationError("tail-tol must be > 0", field="tail-tol")
    dist = exact.distribution(problem, args.kmax, tail_tol=args.tail_tol)
    if args.format == "json":
        return dump(
            {
                "k_max": dist.k_max,
                "total": dist.total,
                "per_seq": dist.per_seq,
                "cumulative": dist.cumulative,
                "provenance": {
                    "method": "distribution recursion",
                    "numeric_mode": _mode(problem),
                    "k_max": dist.k_max,
                    "tail_tol": dist.tail_tol,
                    "truncated": dist.truncated,
                },
            }
        )
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["k", "pr_total"] + [f"pr_seq_{j + 1}" for j in range(problem.M)] + ["cdf"])
    for k in range(dist.k_max):
        row = [k + 1, dist.total[k], *dist.per_seq[:, k], dist.cumulative[k]]
        writer.writerow([num(v) for v in row])
    return buf.getvalue()


def moment_document(problem: Problem) -> dict:
    report = exact.moments(problem)
    doc = {
        "sequences": [problem.render(j) for j in range(problem.M)],
        "T": report.T,
        "second_moment": report.second_moment,
        "variance": report.variance,
        "split": report.split,
        "partial_means": report.partial_means,
        "C": report.C,
        "W": report.W,
        "cross_bifix_free": report.cross_bifix_free,
        "provenance": {"method": report.method, "numeric_mode": _mode(problem)},
    }
    if problem.M == 1 and report.T != 0:
        doc["secondary"] = {
            "method": exact.SINGLE_METHOD,
            "T": exact.mean_single(problem),
            "second_moment": exact.second_moment_single(problem),
            "variance": exact.variance_single(problem),
        }
    return doc


def cmd_moments(args, problem: Problem) -> str:
    return dump(moment_document(problem))


def _report_document(report: oracle.OracleReport, problem: Problem) -> dict:
    doc = {k: v for k, v in vars(report).items() if v is not None}
    doc["provenance"] = {"engine": report.engine, "numeric_mode": _mode(problem)}
    return doc


def cmd_oracle(args, problem: Problem) -> str:
    _check_kmax(args.kmax)
    engine = args.engine
    if engine == "chain":
        return dump(_report_document(oracle.chain_report(problem, args.kmax), problem))
    if engine == "enumerate":
        kmax = args.kmax if args.kmax is not None else 8
        per_seq = oracle.enumerate_distribution(problem, kmax)
        total = [sum(col, problem.zero()) for col in zip(*per_seq)]
        report = oracle.OracleReport(engine="enumerate", distribution=total, per_seq_distribution=per_seq)
        return dump(_report_document(report, problem))
    return cmd_simulate(args, problem)


def cmd_simulate(args, problem: Problem) -> str:
    if args.trials < 1:
        raise ValidationError("trials must be ≥ 1", field="trials")
    if args.batches < 1:
        raise ValidationError("batches must be ≥ 1", field="batches")
    _check_kmax(args.kmax)
    report = oracle.simulate(problem.as_float(), args.trials, args.seed, batches=args.batches, k_max=args.kmax)
    return dump(_report_document(report, problem))


def _parse_probs(text: str) -> list[str]:
    return [p.strip() for p in text.split(",") if p.strip()]


def cmd_design(args) -> str:
    probs = _parse_probs(args.probs) if args.probs else [f"1/{args.L}"] * args.L
    symbols = [s.strip() for s in args.symbols.split(",")] if args.symbols else None
    query = design.DesignQuery(
        L=args.L,
        N=args.N,
        M=args.M,
        probs=probs,
        objective=design.Objective(args.objective),
        constraint=design.Constraint(args.constraint),
        top_k=args.top,
        symbols=symbols,
    )
    return dump([item.to_json() for item in design.search_sets(query)])


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bifixsearch",
        description="Exact waiting-time statistics for sliding-window sequence search.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def with_problem(p: argparse.ArgumentParser) -> argparse.ArgumentParser:
        p.add_argument("problem", help="problem JSON file")
        p.add_argument("--exact", action="store_true", help="rational arithmetic")
        return p

    p = with_problem(sub.add_parser("spectrum", help="cross-bifix matrices and tail vectors"))
    p.add_argument("--free", action="store_true", help="also report overlap-freedom")

    p = with_problem(sub.add_parser("dist", help="distribution of the first successful test"))
    p.add_argument("--kmax", type=int, default=None)
    p.add_argument("--tail-tol", type=float, default=exact.DEFAULT_TAIL_TOL)
    p.add_argument("--format", choices=["csv", "json"], default="csv")

    with_problem(sub.add_parser("moments", help="mean, second moment, variance, split"))

    p = with_problem(sub.add_parser("oracle", help="independent reference computations"))
    p.add_argument("--engine", choices=["chain", "enumerate", "simulate"], default="chain")
    p.add_argument("--kmax", type=int, default=None)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--batches", type=int, default=1)

    p = with_problem(sub.add_parser("simulate", help="Monte Carlo estimate"))
    p.add_argument("--kmax", type=int, default=None)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--batches", type=int, default=1)

    p = sub.add_parser("design", help="search for marker sets")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--probs", default=None, help="comma-separated, e.g. 0.3,0.7 or 1/3,2/3")
    p.add_argument("--symbols", default=None, help="comma-separated labels (default 0..L-1)")
    p.add_argument("--objective", choices=[o.value for o in design.Objective], default="min_T")
    p.add_argument(
        "--constraint", choices=[c.value for c in design.Constraint], default="cross_bifix_free"
    )
    p.add_argument("--top", type=int, default=10)
    return parser


HANDLERS = {
    "spectrum": cmd_spectrum,
    "dist": cmd_dist,
    "moments": cmd_moments,
    "oracle": cmd_oracle,
    "simulate": cmd_simulate,
}


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK

    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", TruncationWarning)
            if args.command == "design":
                text = cmd_design(args)
            else:
                problem = load_problem(args.problem, exact=args.exact)
                text = HANDLERS[args.command](args, problem)
        for w in caught:
            print(f"warning: {w.message}", file=stderr)
    except ValidationError as exc:
        field = f"{exc.field}: " if exc.field else ""
        print(f"error: {field}{exc}", file=stderr)
        return EXIT_INPUT
    except ComputationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_COMPUTE
    except OSError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_IO
    stdout.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
