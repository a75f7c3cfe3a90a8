"""``l2infer`` command line: data generation, tests, QQ simulation and moment diagnostics.

Exit codes: 0 on success (whatever the test decision), 1 on usage errors,
2 on runtime or numerical errors.
"""

import argparse
import json
import math
import sys

import numpy as np

from . import io
from .calibrate import METHODS, CalibrationSpec, test_mean
from .covtest import P_MAX, test_cov
from .datagen import GaussianModel, Innovation, LinearModel, Model1, Model2, SparseBernoulliModel
from .diagnostics import diagnose
from .errors import L2InferError
from .simulate import simulate_qq
from .spectral import spectrum_of

MODELS = ("gaussian", "model1", "model2", "linear", "sparse-bernoulli")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _alpha(text):
    try:
        a = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid alpha {text!r}") from None
    if not 0 < a < 1:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1), got {text}")
    return a


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _innovation(text):
    """``normal``, ``t:DF`` (raw) or ``t-std:DF`` (unit variance)."""
    if text == "normal":
        return Innovation.normal()
    kind, _, df = text.partition(":")
    if kind in ("t", "t-std") and df:
        try:
            return Innovation.student_t(float(df), standardize=kind == "t-std")
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    raise argparse.ArgumentTypeError(f"unknown innovation {text!r} (use normal, t:DF or t-std:DF)")


def _model_args(p):
    p.add_argument("model", choices=MODELS)
    p.add_argument("--p", type=_positive_int)
    p.add_argument("--beta", type=float, help="decay exponent (model1) or sparsity exponent (sparse-bernoulli)")
    p.add_argument("--a", type=float, help="factor loading (model2)")
    p.add_argument("--K", type=int, default=2000, help="truncation lag (model1)")
    p.add_argument("--innovation", type=_innovation, default=None,
                   help="normal, t:DF or t-std:DF (model1 default t:5, linear default normal)")
    p.add_argument("--sigma", help="covariance matrix file (gaussian, default identity)")
    p.add_argument("--A", dest="A_path", help="coefficient matrix file (linear)")
    p.add_argument("--seed", type=int, default=0)


def build_parser():
    parser = _Parser(prog="l2infer", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a data matrix and its manifest")
    _model_args(g)
    g.add_argument("--n", type=_positive_int, required=True)
    g.add_argument("--out", required=True, help="CSV path; the manifest goes to OUT.manifest.json")

    def calibration(p):
        p.add_argument("--method", choices=METHODS, default="plugin")
        p.add_argument("--alpha", type=_alpha, default=0.05)
        p.add_argument("--m", type=int, help="subsample size (default floor(n / log n))")
        p.add_argument("--J", type=_positive_int, default=100, help="random subsets")
        p.add_argument("--n-mc", type=int, default=100_000, help="mixture Monte Carlo draws")
        p.add_argument("--seed", type=int, default=0)

    tm = sub.add_parser("test-mean", help="L2 test of H0: mu = mu0")
    tm.add_argument("data")
    tm.add_argument("--mu0", help="hypothesized mean (default zero)")
    tm.add_argument("--sigma", help="true covariance file, required by --method oracle")
    calibration(tm)

    tc = sub.add_parser("test-cov", help="L2 test of H0: Sigma = Sigma0")
    tc.add_argument("data")
    tc.add_argument("--sigma0", required=True)
    tc.add_argument("--A", dest="A_path", help="linear-process coefficients for the oracle (default Sigma0^{1/2})")
    tc.add_argument("--nu", type=float, default=2.0, help="Var(xi^2) of unit-variance innovations")
    tc.add_argument("--p-max", type=int, default=P_MAX)
    calibration(tc)

    sq = sub.add_parser("simulate-qq", help="write QQ tables for the four comparison panels")
    _model_args(sq)
    sq.add_argument("--n", type=_positive_int, required=True)
    sq.add_argument("--reps", type=_positive_int, default=100)
    sq.add_argument("--draws", type=_positive_int, default=100, help="plug-in mixture draws per replicate")
    sq.add_argument("--J", type=_positive_int, default=100)
    sq.add_argument("--m", type=int)
    sq.add_argument("--out", required=True, help="output directory")

    dg = sub.add_parser("diagnose", help="moment constants, bounds and rates for a generator")
    _model_args(dg)
    dg.add_argument("--delta", type=float, default=0.2)
    dg.add_argument("--N", type=_positive_int, default=100_000, help="Monte Carlo draws")
    dg.add_argument("--n", type=_positive_int, default=200, help="sample size for the rate")
    return parser


def build_model(args):
    m = args.model
    if m in ("model1", "model2", "sparse-bernoulli") and args.p is None:
        raise UsageError(f"{m} needs --p")
    if m in ("model1", "sparse-bernoulli") and args.beta is None:
        raise UsageError(f"{m} needs --beta")
    if m == "model1":
        return Model1(args.p, args.beta, args.K, args.innovation or Innovation.student_t(5))
    if m == "model2":
        if args.a is None:
            raise UsageError("model2 needs --a")
        return Model2(args.p, args.a)
    if m == "sparse-bernoulli":
        return SparseBernoulliModel(args.p, args.beta)
    if m == "linear":
        if args.A_path is None:
            raise UsageError("linear needs --A")
        return LinearModel(io.read_matrix(args.A_path), args.innovation or Innovation.normal())
    if args.sigma is not None:
        Sigma = io.read_matrix(args.sigma)
        if args.p is not None and args.p != Sigma.shape[0]:
            raise UsageError(f"--p {args.p} disagrees with the {Sigma.shape[0]}x{Sigma.shape[0]} --sigma")
    elif args.p is None:
        raise UsageError("gaussian needs --p or --sigma")
    else:
        Sigma = np.eye(args.p)
    return GaussianModel(Sigma)


def _spec(args, spectrum=None):
    return CalibrationSpec(args.method, alpha=args.alpha, seed=args.seed, n_mc=args.n_mc,
                           m=args.m, J=args.J, spectrum=spectrum)


def cmd_gen(args):
    model = build_model(args)
    X = model.sample(args.n, args.seed)
    io.write_matrix(args.out, X)
    io.write_json(args.out + ".manifest.json",
                  {**model.manifest(), "n": args.n, "p": X.shape[1], "seed": args.seed})
    return None


def cmd_test_mean(args):
    X = io.read_matrix(args.data)
    mu0 = None if args.mu0 is None else io.read_vector(args.mu0)
    spectrum = None
    if args.method == "oracle":
        if args.sigma is None:
            raise UsageError("--method oracle requires --sigma")
        spectrum = spectrum_of(io.read_matrix(args.sigma))
    return test_mean(X, mu0, _spec(args, spectrum)).to_dict()


def cmd_test_cov(args):
    X = io.read_matrix(args.data)
    S0 = io.read_matrix(args.sigma0)
    A = None if args.A_path is None else io.read_matrix(args.A_path)
    return test_cov(X, S0, _spec(args), A=A, nu=args.nu, p_max=args.p_max).to_dict()


def cmd_simulate_qq(args):
    model = build_model(args)
    paths = simulate_qq(model, args.n, args.reps, args.seed, args.out,
                        K=args.draws, J=args.J, m=args.m)
    return {"files": paths, "model": model.manifest(), "n": args.n, "reps": args.reps,
            "seed": args.seed}


def cmd_diagnose(args):
    model = build_model(args)
    report = diagnose(model, args.n, args.delta, args.N, args.seed).to_dict()
    report["model"] = model.manifest()
    return report


COMMANDS = {
    "gen": cmd_gen,
    "test-mean": cmd_test_mean,
    "test-cov": cmd_test_cov,
    "simulate-qq": cmd_simulate_qq,
    "diagnose": cmd_diagnose,
}


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return "unbounded" if obj > 0 else None
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out = COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"l2infer {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except (L2InferError, ValueError, OSError, np.linalg.LinAlgError) as exc:
        print(f"l2infer {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    if out is not None:
        json.dump(_jsonable(out), sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
