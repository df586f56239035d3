"""Command line entry point: ``skeweig {solve,bench,bse,verify}``.

Exit codes: 0 success, 1 usage, 2 I/O or input format, 3 numerical failure,
4 non-definite BSE input.
"""
import argparse
import csv
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from .bse import (
    BSEDecomposition,
    BSEHamiltonian,
    BSEValidationError,
    NotDefiniteError,
    bse_residuals,
    solve_bse,
)
from .core import EPS, ComplexPlanes, SkewValidationError, random_skew
from .driver import (
    FLAVORS,
    EigenDecomposition,
    SolverOptions,
    residual_report,
    solve_skew_eigen,
)
from .mmio import (
    MatrixFormatError,
    output_paths,
    read_complex,
    read_skew,
    read_values,
    write_matrix,
    write_values,
)
from .tridiag import DEFAULT_NB

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERICAL, EXIT_NOT_DEFINITE = 0, 1, 2, 3, 4

BENCH_COLUMNS = (
    "size", "flavor", "nb", "fraction", "repeat", "seed", "workers",
    "t_full_to_band", "t_band_to_tridiag", "t_tridiagonalize", "t_tridiag_solve",
    "t_back_transform", "t_total", "residual_rel", "unitarity",
)

STAGES = ("full_to_band", "band_to_tridiag", "tridiagonalize", "tridiag_solve",
          "back_transform", "total")


class UsageError(Exception):
    pass


class NumericalFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class RunReport:
    """Configuration echo, per-stage wall times (seconds) and residual metrics."""

    command: str
    config: dict
    timings: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)

    def to_json(self):
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json() + "\n")


def _plain(d):
    return {k: (None if v is None else float(v)) for k, v in d.items()}


def _workers(value):
    if value is not None:
        return value
    env = os.environ.get("SKEWEIG_WORKERS")
    if env in (None, ""):
        return None
    try:
        w = int(env)
    except ValueError:
        raise UsageError(f"SKEWEIG_WORKERS must be a positive integer, got {env!r}") from None
    if w < 1:
        raise UsageError(f"SKEWEIG_WORKERS must be a positive integer, got {env!r}")
    return w


def _options(args, fraction=None):
    try:
        return SolverOptions(flavor=args.flavor, nb=args.nb,
                             fraction=args.fraction if fraction is None else fraction,
                             workers=_workers(args.workers))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _csv_list(kind):
    def parse(text):
        try:
            vals = [kind(t) for t in text.split(",") if t.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad list {text!r}") from None
        if not vals:
            raise argparse.ArgumentTypeError("empty list")
        return vals
    return parse


def _solver_flags(p, fraction=True):
    p.add_argument("--flavor", choices=FLAVORS, default="two-step")
    p.add_argument("--nb", type=int, default=DEFAULT_NB, help="block size / band width")
    if fraction:
        p.add_argument("--fraction", type=float, default=0.5,
                       help="portion of eigenpairs (rounded up), default 0.5")
    p.add_argument("--workers", type=int, default=None,
                   help="BLAS threads (falls back to SKEWEIG_WORKERS)")


def build_parser():
    parser = _Parser(prog="skeweig", description="Skew-symmetric and BSE eigensolvers.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("solve", help="eigenpairs of a skew matrix from a Matrix Market file")
    p.add_argument("--input", required=True)
    _solver_flags(p)
    p.add_argument("--out", help="prefix for PREFIX.values.txt and PREFIX.vectors.mtx")
    p.add_argument("--report", help="JSON report path")

    p = sub.add_parser("bench", help="timing runs on random skew matrices, CSV output")
    p.add_argument("--sizes", type=_csv_list(int), required=True)
    p.add_argument("--flavors", type=_csv_list(str), default=list(FLAVORS))
    p.add_argument("--nb", type=_csv_list(int), default=[DEFAULT_NB])
    p.add_argument("--fractions", type=_csv_list(float), default=[0.5])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeat", type=int, default=1)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--csv", required=True, help="output path, '-' for stdout")

    p = sub.add_parser("bse", help="definite Bethe-Salpeter problem from blocks A and B")
    p.add_argument("--block-a", required=True)
    p.add_argument("--block-b", required=True)
    _solver_flags(p, fraction=False)
    p.add_argument("--out")
    p.add_argument("--report")
    p.add_argument("--verify", action="store_true",
                   help="re-read the written vectors and recheck the residuals")

    p = sub.add_parser("verify", help="check a stored decomposition against its matrix")
    p.add_argument("--input", required=True)
    p.add_argument("--values", required=True)
    p.add_argument("--vectors", required=True)
    p.add_argument("--tol", type=float, default=1e-10, help="relative tolerance (default 1e-10)")
    return parser


def _check_skew_metrics(m, n):
    tol = 100.0 * n * EPS
    if m.residual_rel > tol or m.unitarity > tol:
        raise NumericalFailure(
            f"residual {m.residual_rel:.3e} or unitarity {m.unitarity:.3e} exceeds {tol:.3e}")


def cmd_solve(args):
    opts = _options(args)
    A = read_skew(args.input)
    E = solve_skew_eigen(A, opts)
    metrics = residual_report(A, E)
    report = RunReport("solve", {"input": args.input, "flavor": opts.flavor, "nb": opts.nb,
                                 "n": A.n, "fraction": opts.fraction, "workers": opts.workers,
                                 "seed": None},
                       _plain(E.timings), _plain(metrics.as_dict()))
    if args.out:
        vpath, qpath = output_paths(args.out)
        write_values(vpath, E.lam)
        write_matrix(qpath, E.vectors)
    else:
        sys.stdout.writelines(repr(float(x)) + "\n" for x in E.lam)
    if args.report:
        report.write(args.report)
    _check_skew_metrics(metrics, A.n)
    return EXIT_OK


def bench_rows(sizes, flavors, nbs, fractions, seed, repeat, workers):
    for n in sizes:
        A = random_skew(n, seed)
        for flavor in flavors:
            for nb in nbs:
                for fraction in fractions:
                    opts = SolverOptions(flavor=flavor, nb=nb, fraction=fraction, workers=workers)
                    for r in range(repeat):
                        E = solve_skew_eigen(A, opts)
                        m = residual_report(A, E)
                        row = {"size": n, "flavor": flavor, "nb": nb, "fraction": fraction,
                               "repeat": r, "seed": seed,
                               "workers": "" if workers is None else workers}
                        for s in STAGES:
                            row["t_" + s] = repr(float(E.timings.get(s, 0.0)))
                        row["residual_rel"] = repr(m.residual_rel)
                        row["unitarity"] = repr(m.unitarity)
                        yield row


def cmd_bench(args):
    for f in args.flavors:
        if f not in FLAVORS:
            raise UsageError(f"unknown flavor {f!r}; choose from {', '.join(FLAVORS)}")
    if args.repeat < 1 or min(args.sizes) < 1 or min(args.nb) < 1:
        raise UsageError("sizes, nb and repeat must be positive")
    if not all(0 < f <= 1 for f in args.fractions):
        raise UsageError("fractions must lie in (0, 1]")
    workers = _workers(args.workers)
    if workers is not None and workers < 1:
        raise UsageError("workers must be positive")
    out = sys.stdout if args.csv == "-" else open(args.csv, "w", newline="", encoding="utf-8")
    try:
        w = csv.DictWriter(out, fieldnames=BENCH_COLUMNS)
        w.writeheader()
        for row in bench_rows(args.sizes, args.flavors, args.nb, args.fractions, args.seed,
                              args.repeat, workers):
            w.writerow(row)
            out.flush()
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def _bse_check(H, D):
    res, hnorm = bse_residuals(H, D)
    tol = 200.0 * H.n * EPS * hnorm
    return res, hnorm, res <= tol and bool(np.all(D.lam > 0))


def cmd_bse(args):
    opts = _options(args, fraction=0.5)
    A = read_complex(args.block_a)
    B = read_complex(args.block_b)
    if A.re.ndim != 2 or A.shape[0] != A.shape[1] or B.shape != A.shape:
        raise MatrixFormatError(args.block_b, None,
                                f"blocks must be square and equal in shape, got {A.shape} and {B.shape}")
    H = BSEHamiltonian(A, B)
    D = solve_bse(H, opts)
    res, hnorm, ok = _bse_check(H, D)
    report = RunReport("bse", {"block_a": args.block_a, "block_b": args.block_b,
                               "flavor": opts.flavor, "nb": opts.nb, "n": H.n,
                               "fraction": 0.5, "workers": opts.workers, "seed": None},
                       _plain(D.timings),
                       {"residual": res, "residual_rel": res / hnorm if hnorm else res,
                        "min_lambda": float(D.lam.min())})
    if args.out:
        vpath, qpath = output_paths(args.out)
        write_values(vpath, D.lam)
        write_matrix(qpath, D.X)
    else:
        sys.stdout.writelines(repr(float(x)) + "\n" for x in D.lam)
    if args.verify:
        check = D
        if args.out:
            check = BSEDecomposition(read_values(vpath), read_complex(qpath))
        res2, _, ok2 = _bse_check(H, check)
        report.metrics["verify_residual"] = res2
        ok = ok and ok2
    if args.report:
        report.write(args.report)
    if not ok:
        raise NumericalFailure(f"BSE residual {res:.3e} above tolerance or nonpositive eigenvalue")
    return EXIT_OK


def cmd_verify(args):
    if not args.tol >= 0:
        raise UsageError("--tol must be nonnegative")
    A = read_skew(args.input)
    lam = read_values(args.values)
    Q = read_complex(args.vectors)
    if Q.shape != (A.n, lam.size):
        raise MatrixFormatError(args.vectors, None,
                                f"vectors have shape {Q.shape}, expected ({A.n}, {lam.size})")
    half = bool(np.all(lam >= 0)) and lam.size <= math.ceil(A.n / 2)
    E = EigenDecomposition(lam, ComplexPlanes(Q.re, Q.im), half)
    m = residual_report(A, E)
    worst = m.worst_relative(A.norm_fro())
    print(json.dumps({**_plain(m.as_dict()), "worst_relative": worst, "tol": args.tol}))
    if not worst <= args.tol:
        raise NumericalFailure(f"worst relative metric {worst:.3e} exceeds tolerance {args.tol:.3e}")
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "bench": cmd_bench, "bse": cmd_bse, "verify": cmd_verify}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NotDefiniteError as exc:
        print(f"not definite: {exc}", file=sys.stderr)
        return EXIT_NOT_DEFINITE
    except (MatrixFormatError, SkewValidationError, BSEValidationError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NumericalFailure, ArithmeticError, RuntimeError, ValueError,
            np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
