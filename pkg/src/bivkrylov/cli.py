"""Command-line interface.

``bivkrylov solve`` approximates ``f{A,B}(c d^T)`` for matrices read from
Matrix Market files and writes the factors ``U``, ``X``, ``V`` plus a trace
of error estimates. ``bivkrylov experiment`` writes the convergence
experiments of :mod:`bivkrylov.experiments` as CSV.

Exit status: 0 when the iteration converged (or the Krylov spaces became
invariant), 2 when the basis budget ran out first, 1 on any error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from .dense import exp_function, sqrt_neg_function
from .driver import DriverOptions, Termination, approximate, stein_residual, sylvester_residual
from .errors import BivKrylovError
from .experiments import EXPERIMENTS, SEED_ENV, ExperimentConfig, run_experiment, write_csv
from .frechet import frechet_apply
from .kernels import FrequencyLimited, Stein, SumShift, Sylvester, TimeLimited
from .krylov import aslinearoperator
from .mmio import read_matrix_market, read_vector, write_matrix_market

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_BUDGET = 2

FUNCTIONS = (
    "sylvester",
    "stein",
    "time-limited",
    "frequency-limited",
    "exp-sum",
    "frechet-exp",
    "frechet-sqrtneg",
)


class FlagError(Exception):
    """Invalid input attributable to one command-line flag."""

    def __init__(self, flag, message):
        super().__init__(f"{flag}: {message}")
        self.flag = flag


class _Parser(argparse.ArgumentParser):
    # usage errors share exit status 1 with other failures; 2 means budget exhausted
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _float(text):
    if text.lower() in ("inf", "infinity"):
        return math.inf
    return float(text)


def _time_pair(text):
    try:
        t_s, t_e = text.split(":")
        return _float(t_s), _float(t_e)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected T_S:T_E, got {text!r}") from None


def build_parser():
    parser = _Parser(prog="bivkrylov", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="approximate f{A,B}(c d^T) from Matrix Market input")
    solve.add_argument("--A", dest="A", required=True, help="Matrix Market file for A")
    solve.add_argument("--B", dest="B", help="Matrix Market file for B (default: A; A^T for Frechet modes)")
    solve.add_argument("--c", dest="c", help="Matrix Market vector file for c (default: seeded random)")
    solve.add_argument("--d", dest="d", help="Matrix Market vector file for d (default: c, or seeded random)")
    solve.add_argument("--seed", type=int, default=None, help=f"seed for random c, d (default: ${SEED_ENV} or 0)")
    solve.add_argument("--function", choices=FUNCTIONS, default="sylvester")
    solve.add_argument("--shift", type=float, default=0.0, help="alpha in 1/(alpha + x + y)")
    solve.add_argument("--ts", type=_float, default=0.0, help="window start for time-limited")
    solve.add_argument("--te", type=_float, default=math.inf, help="window end for time-limited (inf allowed)")
    solve.add_argument("--w1", type=_float, default=0.0, help="lower frequency for frequency-limited")
    solve.add_argument("--w2", type=_float, default=math.inf, help="upper frequency (inf allowed)")
    solve.add_argument("--tol", type=float, default=1e-8, help="stop when the estimate is below tol*||c||*||d|| twice")
    solve.add_argument("--k-max", dest="k_max", type=int, default=None, help="basis size budget per side")
    solve.add_argument("--h", type=int, default=2, help="look-ahead of the error estimate")
    solve.add_argument("--out", default=".", help="output directory")

    exp = sub.add_parser("experiment", help="write a convergence experiment as CSV")
    exp.add_argument("--name", choices=EXPERIMENTS, default="gramian")
    exp.add_argument("--n", type=int, default=500, help="matrix size")
    exp.add_argument("--interval", nargs=2, type=float, default=(-100.0, -0.1), metavar=("LO", "HI"), help="spectrum interval")
    exp.add_argument("--distribution", choices=("spaced", "random"), default="spaced")
    exp.add_argument("--times", nargs="+", type=_time_pair, default=None, metavar="T_S:T_E", help="time windows for gramian")
    exp.add_argument("--functions", nargs="+", choices=("exp", "sqrt(-z)"), default=None)
    exp.add_argument("--k-max", dest="k_max", type=int, default=60, help="largest Krylov depth")
    exp.add_argument("--rho", nargs="+", type=float, default=None, help="rho values for phi-bounds")
    exp.add_argument("--k", nargs="+", type=int, default=None, help="k values for phi-bounds")
    exp.add_argument("--seed", type=int, default=None, help=f"random seed (default: ${SEED_ENV} or 0)")
    exp.add_argument("--out", default=None, help="CSV path (default: standard output)")
    return parser


def _read(flag, path, vector=False):
    if not os.path.isfile(path):
        raise FlagError(flag, f"file not found: {path}")
    try:
        return read_vector(path) if vector else read_matrix_market(path)
    except (BivKrylovError, ValueError, OSError) as exc:
        raise FlagError(flag, str(exc)) from exc


def _bivariate(args):
    if args.function == "sylvester":
        return Sylvester(args.shift)
    if args.function == "stein":
        return Stein()
    if args.function == "time-limited":
        return TimeLimited(args.ts, args.te)
    if args.function == "frequency-limited":
        return FrequencyLimited(args.w1, args.w2)
    return SumShift(exp_function())


def _start_vectors(args, m, n):
    seed = args.seed if args.seed is not None else int(os.environ.get(SEED_ENV, "0"))
    rng = np.random.default_rng(seed)
    if args.c is not None:
        c = _read("--c", args.c, vector=True)
    else:
        c = rng.standard_normal(m)
        c /= np.linalg.norm(c)
    if args.d is not None:
        d = _read("--d", args.d, vector=True)
    elif args.c is not None and n == m:
        d = c.copy()
    else:
        d = rng.standard_normal(n)
        d /= np.linalg.norm(d)
    if c.size != m:
        raise FlagError("--c", f"length {c.size} does not match A ({m})")
    if d.size != n:
        raise FlagError("--d", f"length {d.size} does not match B ({n})")
    return c, d


def solve(args):
    frechet = args.function.startswith("frechet")
    A = _read("--A", args.A)
    if A.shape[0] != A.shape[1]:
        raise FlagError("--A", f"matrix must be square, got {A.shape}")
    B = _read("--B", args.B) if args.B is not None else None
    if B is not None and B.shape[0] != B.shape[1]:
        raise FlagError("--B", f"matrix must be square, got {B.shape}")
    if frechet and B is not None and B.shape != A.shape:
        raise FlagError("--B", "Frechet modes need B = A^T of the same size as A")
    m = A.shape[0]
    n = m if B is None else B.shape[0]
    c, d = _start_vectors(args, m, n)
    budget = args.k_max
    if budget is not None and not 1 <= budget <= min(m, n):
        raise FlagError("--k-max", f"must lie in [1, {min(m, n)}]")
    try:
        opts = DriverOptions(tol=args.tol, h=args.h, k_max=budget, l_max=budget)
    except ValueError as exc:
        flag = "--h" if "h " in str(exc) else "--tol"
        raise FlagError(flag, str(exc)) from exc

    if frechet:
        f = exp_function() if args.function == "frechet-exp" else sqrt_neg_function()
        result = frechet_apply(f, A, B, c, d, opts)
    else:
        result = approximate(_bivariate(args), A, A if B is None else B, (c, d), opts)

    os.makedirs(args.out, exist_ok=True)
    write_matrix_market(os.path.join(args.out, "U.mtx"), result.U)
    write_matrix_market(os.path.join(args.out, "X.mtx"), result.X)
    write_matrix_market(os.path.join(args.out, "V.mtx"), result.V)
    footer = [f"termination={result.termination.value}", f"k={result.k}", f"l={result.l}"]
    scale = np.linalg.norm(c) * np.linalg.norm(d)
    opB = aslinearoperator(A if B is None else B)
    if args.function == "sylvester":
        res = sylvester_residual(A, opB, result, c, d, args.shift) / scale
        footer.append(f"relative_residual={float(res)!r}")
    elif args.function == "stein":
        footer.append(f"relative_residual={float(stein_residual(A, opB, result, c, d) / scale)!r}")
    write_csv(("k", "l", "estimate"), result.estimate_trace, os.path.join(args.out, "trace.csv"), footer=footer)
    return EXIT_BUDGET if result.termination is Termination.BUDGET_EXHAUSTED else EXIT_OK


def experiment(args):
    fields = dict(
        name=args.name,
        n=args.n,
        interval=tuple(args.interval),
        distribution=args.distribution,
        k_max=args.k_max,
        k_values=args.k,
        seed=args.seed,
        output=args.out,
    )
    if args.times is not None:
        fields["times"] = tuple(args.times)
    if args.functions is not None:
        fields["functions"] = tuple(args.functions)
    if args.rho is not None:
        fields["rhos"] = tuple(args.rho)
    try:
        config = ExperimentConfig(**fields)
    except ValueError as exc:
        raise FlagError("--" + _flag_for(str(exc)), str(exc)) from exc
    header, rows = run_experiment(config)
    comments = [f"experiment={config.name}", f"seed={config.resolved_seed()}"]
    if config.name != "phi-bounds":
        comments.append(f"distribution={config.distribution}")
    text = write_csv(header, rows, config.output, comments=comments)
    if config.output is None:
        sys.stdout.write(text)
    return EXIT_OK


def _flag_for(message):
    for key, flag in (("k_max", "k-max"), ("interval", "interval"), ("t_s", "times"), ("rho", "rho"), ("n must", "n")):
        if key in message:
            return flag
    return "name"


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return solve(args) if args.command == "solve" else experiment(args)
    except FlagError as exc:
        print(f"bivkrylov: error: {exc}", file=sys.stderr)
    except (BivKrylovError, ValueError, OSError) as exc:
        print(f"bivkrylov: error: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
