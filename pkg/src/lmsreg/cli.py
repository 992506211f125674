"""Command-line interface: ``lmsreg {fit,enumerate-minima,verify-theorem,generate}``.

Exit status is 0 on success, 2 for malformed input or arguments, 3 when a
dataset violates the shape/rank assumptions. ``verify-theorem`` exits 1 when
a measured count disagrees with theory.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .bpb import BpbConfig, bpb_solve
from .chebyshev import solve_minimax
from .core import (
    DEFAULT_TOL,
    Dataset,
    DatasetError,
    LMSError,
    objective_profile,
    profile_local_minima,
)
from .dataio import (
    SCHEMA_VERSION,
    InputFormatError,
    dump_json,
    format_csv,
    generate_instance,
    read_csv,
)
from .oracle import brute_force_lms
from .search import (
    count_local_minima_theory,
    enumerate_all_local_minima,
    enumerate_local_minima,
    exhaustive_solve,
    greedy_solve,
    is_general_position,
)

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2
EXIT_DATASET = 3


class UsageError(Exception):
    pass


def _load(args) -> Dataset:
    try:
        return read_csv(args.input)
    except OSError as exc:
        raise UsageError(f"cannot read {args.input}: {exc.strerror}") from None


def _resolve_k(args, data: Dataset) -> int:
    k = data.lms_k if args.k is None else args.k
    if not 0 <= k <= data.n - (data.p + 1):
        raise UsageError(f"--k must lie in [0, {data.n - data.p - 1}] for this dataset")
    return k


def _emit_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(v) -> str:
    return f"{v:.10g}"


def cmd_fit(args) -> int:
    data = _load(args)
    k = _resolve_k(args, data)
    tol = args.tolerance
    if args.algorithm == "greedy":
        report = greedy_solve(data, k, tol)
    elif args.algorithm == "exhaustive":
        report = exhaustive_solve(data, k, tol, force=args.force_large)
    elif args.algorithm == "bpb":
        config = BpbConfig(
            seed=args.seed,
            iterations=args.iterations,
            branch_factor=args.branch_factor,
            retention_quantile=args.retention_quantile,
        )
        report = bpb_solve(data, config, k, tol)
    else:
        report = brute_force_lms(data, k, tol)
    minimax = solve_minimax(data, None, tol)

    out = {
        "schema_version": SCHEMA_VERSION,
        "command": "fit",
        "n": data.n,
        "p": data.p,
        "h": data.h,
        "k": k,
        "tolerance": tol,
        **report.to_dict(),
        "minimax_fit": {
            "theta": [float(t) for t in minimax.theta],
            "rho": minimax.rho,
            "active": [i + 1 for i in minimax.active],
        },
    }
    if data.p == 1 and args.profile:
        prof = objective_profile(data, k, tol=tol)
        out["profile"] = [[t, v] for t, v in prof]
        out["profile_local_minima"] = profile_local_minima(prof, tol)

    if args.output == "json":
        dump_json(out, sys.stdout)
    elif args.output == "csv":
        header = [f"theta{j + 1}" for j in range(data.p)] + ["value", "rho", "active"]
        rows = [
            [repr(float(t)) for t in f.theta]
            + [repr(float(report.value)), repr(float(f.rho)), " ".join(str(i + 1) for i in f.active)]
            for f in report.optimizers
        ]
        sys.stdout.write(_emit_csv(header, rows))
        if "profile" in out:
            sys.stdout.write("\n" + _emit_csv(["theta", "value"], [[repr(t), repr(v)] for t, v in out["profile"]]))
    else:
        print(f"algorithm: {report.algorithm}  n={data.n} p={data.p} k={k}")
        print(f"objective (h-th smallest |residual|): {_fmt(report.value)}")
        print(f"median of squared residuals: {_fmt(report.value ** 2)}")
        for f in report.optimizers:
            theta = ", ".join(_fmt(t) for t in f.theta)
            print(f"  theta = [{theta}]  active = {[i + 1 for i in f.active]}")
        print(f"subproblems solved: {report.subproblems_solved}")
        print(f"candidates examined: {report.candidates_examined}")
        mm = ", ".join(_fmt(t) for t in minimax.theta)
        print(f"minimax fit on all rows: theta = [{mm}]  rho = {_fmt(minimax.rho)}")
        for w in report.warnings:
            print(f"warning: {w}")
        if "profile" in out:
            print("profile (theta, value):")
            for t, v in out["profile"]:
                print(f"  {_fmt(t)}\t{_fmt(v)}")
    return EXIT_OK


def cmd_enumerate_minima(args) -> int:
    data = _load(args)
    k = _resolve_k(args, data)
    recs = enumerate_local_minima(data, k, args.tolerance, threads=args.threads)
    theory = count_local_minima_theory(data.p, k)
    if args.output == "json":
        dump_json(
            {
                "schema_version": SCHEMA_VERSION,
                "command": "enumerate-minima",
                "n": data.n,
                "p": data.p,
                "k": k,
                "count": len(recs),
                "theory_count": theory,
                "minima": [r.to_dict() for r in recs],
                "warnings": recs.warnings,
            },
            sys.stdout,
        )
    elif args.output == "csv":
        header = [f"theta{j + 1}" for j in range(data.p)] + ["value", "rho", "active"]
        rows = [
            [repr(float(t)) for t in r.fit.theta]
            + [repr(float(r.value)), repr(float(r.fit.rho)), " ".join(str(i + 1) for i in r.fit.active)]
            for r in recs
        ]
        sys.stdout.write(_emit_csv(header, rows))
    else:
        print(f"local minima of f_{k}: {len(recs)} found, C(p+k, p) = {theory}")
        for r in recs:
            theta = ", ".join(_fmt(t) for t in r.fit.theta)
            print(f"  value {_fmt(r.value)}  theta = [{theta}]  active = {[i + 1 for i in r.fit.active]}")
        for w in recs.warnings:
            print(f"warning: {w}")
    return EXIT_OK


def _draw_instance(rng: np.random.Generator, n: int, p: int, tol: float):
    """Gaussian instance redrawn until in general position."""
    redraws = 0
    while True:
        try:
            data = Dataset(rng.standard_normal((n, p)), rng.standard_normal(n))
            if is_general_position(data, tol):
                return data, redraws
        except DatasetError:
            pass
        redraws += 1


def verify_theorem(trials, n_range, p_range, seed, tol=DEFAULT_TOL, threads=1):
    """Compare measured local-minimum counts with C(p+k, p) on random data.

    Returns per-(trial, k) count rows, per-trial identity rows and the
    total number of redraws.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    shapes = []
    for _ in range(trials):
        p = int(rng.integers(p_range[0], p_range[1] + 1))
        lo = max(n_range[0], 2 * p, p + 1)
        if lo > n_range[1]:
            raise UsageError(f"no admissible n in {n_range} for p={p}")
        shapes.append((int(rng.integers(lo, n_range[1] + 1)), p))
    instances = [_draw_instance(rng, n, p, tol) for n, p in shapes]

    def measure(item):
        return enumerate_all_local_minima(item[0], tol)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            counts = list(pool.map(measure, instances))
    else:
        counts = [measure(i) for i in instances]

    rows, identity, redraws = [], [], 0
    for t, ((data, r), by_k) in enumerate(zip(instances, counts)):
        redraws += r
        n, p = data.n, data.p
        top = n - (p + 1)
        for k in range(top + 1):
            m, theory = len(by_k[k]), count_local_minima_theory(p, k)
            rows.append({"trial": t + 1, "n": n, "p": p, "k": k, "measured": m, "theory": theory, "match": m == theory})
        lhs = sum(2 ** (top - j) * len(by_k[j]) for j in range(top + 1))
        rhs = sum(math.comb(n, j) for j in range(top + 1))
        identity.append({"trial": t + 1, "n": n, "p": p, "lhs": lhs, "rhs": rhs, "match": lhs == rhs})
    return rows, identity, redraws


def cmd_verify_theorem(args) -> int:
    rows, identity, redraws = verify_theorem(
        args.trials,
        (args.n_min, args.n_max),
        (args.p_min, args.p_max),
        args.seed,
        args.tolerance,
        args.threads,
    )
    ok = all(r["match"] for r in rows) and all(r["match"] for r in identity)
    if args.output == "json":
        dump_json(
            {
                "schema_version": SCHEMA_VERSION,
                "command": "verify-theorem",
                "seed": args.seed,
                "redraws": redraws,
                "all_match": ok,
                "counts": rows,
                "identity": identity,
            },
            sys.stdout,
        )
    elif args.output == "csv":
        sys.stdout.write(
            _emit_csv(
                ["trial", "n", "p", "k", "measured", "theory", "match"],
                [[r[c] for c in ("trial", "n", "p", "k", "measured", "theory", "match")] for r in rows],
            )
        )
    else:
        print(f"{'trial':>5} {'n':>3} {'p':>2} {'k':>3} {'measured':>9} {'C(p+k,p)':>9}  match")
        for r in rows:
            print(f"{r['trial']:>5} {r['n']:>3} {r['p']:>2} {r['k']:>3} {r['measured']:>9} {r['theory']:>9}  {'yes' if r['match'] else 'NO'}")
        print()
        print(f"{'trial':>5} {'n':>3} {'p':>2} {'sum 2^(n-p-1-j) M_j':>20} {'sum C(n,j)':>12}  match")
        for r in identity:
            print(f"{r['trial']:>5} {r['n']:>3} {r['p']:>2} {r['lhs']:>20} {r['rhs']:>12}  {'yes' if r['match'] else 'NO'}")
        print(f"\nredraws: {redraws}   all match: {'yes' if ok else 'NO'}")
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_generate(args) -> int:
    coef = None
    if args.coef is not None:
        coef = [float(c) for c in args.coef.split(",")]
    try:
        data, beta = generate_instance(
            args.n,
            args.p,
            seed=args.seed,
            outlier_fraction=args.outliers,
            noise=args.noise,
            outlier_shift=args.outlier_shift,
            intercept=args.intercept,
            coef=coef,
        )
    except (ValueError, DatasetError) as exc:
        raise UsageError(str(exc)) from None
    sys.stdout.write(format_csv(data))
    if args.truth:
        with open(args.truth, "w", encoding="utf-8") as fh:
            dump_json({"schema_version": SCHEMA_VERSION, "coef": [float(b) for b in beta]}, fh)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lmsreg", description="Least median of squares regression.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(output="json"):
        # a fresh parent per subcommand: argparse shares parent actions by reference
        parent = argparse.ArgumentParser(add_help=False)
        parent.add_argument("--tolerance", type=float, default=DEFAULT_TOL)
        parent.add_argument("--output", choices=("json", "csv", "human"), default=output)
        parent.add_argument("--threads", type=int, default=1)
        parent.add_argument("--seed", type=int, default=0)
        return parent

    fit = sub.add_parser("fit", parents=[common()], help="fit an LMS regression to a CSV file")
    fit.add_argument("input", help="CSV file with header x1,...,xp,y")
    fit.add_argument("--algorithm", choices=("greedy", "exhaustive", "bpb", "brute-force"), default="exhaustive")
    fit.add_argument("--k", type=int, default=None, help="observations to drop (default floor((n-1)/2))")
    fit.add_argument("--force-large", action="store_true", help="allow exhaustive search for p > 8")
    fit.add_argument("--iterations", type=int, default=1000, help="bpb: subsets to score")
    fit.add_argument("--branch-factor", type=int, default=4, help="bpb: samples per branch per round")
    fit.add_argument("--retention-quantile", type=float, default=0.5, help="bpb: branch pruning quantile")
    fit.add_argument("--profile", action="store_true", help="p=1 only: emit the exact objective profile")
    fit.set_defaults(func=cmd_fit)

    enum = sub.add_parser("enumerate-minima", parents=[common()], help="list every local minimum of f_k")
    enum.add_argument("input")
    enum.add_argument("--k", type=int, default=None)
    enum.set_defaults(func=cmd_enumerate_minima)

    ver = sub.add_parser("verify-theorem", parents=[common("human")], help="check local-minimum counts on random data")
    ver.add_argument("--trials", type=int, default=20)
    ver.add_argument("--n-min", type=int, default=2)
    ver.add_argument("--n-max", type=int, default=10)
    ver.add_argument("--p-min", type=int, default=1)
    ver.add_argument("--p-max", type=int, default=3)
    ver.set_defaults(func=cmd_verify_theorem)

    gen = sub.add_parser("generate", help="write a synthetic contaminated instance as CSV")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--p", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--outliers", type=float, default=0.3, help="contaminated fraction, < 0.5")
    gen.add_argument("--noise", type=float, default=0.1)
    gen.add_argument("--outlier-shift", type=float, default=10.0)
    gen.add_argument("--intercept", action="store_true", help="make x1 a constant column")
    gen.add_argument("--coef", default=None, help="comma-separated true coefficients")
    gen.add_argument("--truth", default=None, help="write the true coefficients as JSON here")
    gen.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, InputFormatError) as exc:
        print(f"lmsreg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DatasetError as exc:
        print(f"lmsreg: invalid dataset: {exc}", file=sys.stderr)
        return EXIT_DATASET
    except LMSError as exc:
        print(f"lmsreg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
