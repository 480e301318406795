"""Command line entry point.

Exit codes: 0 when every verdict passes, 2 when a verdict fails or a run
is incomplete, 1 on usage or configuration errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import (chaining, complexity, distributions, experiments, harness, orderstats, processes,
               verify)
from . import projection as proj
from .complexity import ConfigError
from .seeding import stream

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True))


def _seed(args) -> int:
    return 0 if args.seed is None else args.seed


def _out_dir(args) -> Path:
    return Path(args.out) if args.out else harness.default_out()


def _class_from(args) -> np.ndarray:
    if args.config:
        return harness.load_class(harness.load(args.config))
    if args.class_file:
        return np.atleast_2d(np.loadtxt(args.class_file, delimiter=",", ndmin=2))
    return experiments.random_gaussian_class(args.m, args.n, args.class_seed).T


def cmd_gamma(args) -> int:
    d = np.loadtxt(args.distances, delimiter=",", ndmin=2)
    res = {"gamma_upper": chaining.gamma_upper(d, args.alpha, args.s0), "m": len(d),
           "alpha": args.alpha, "s0": args.s0}
    if args.bruteforce:
        res["gamma_bruteforce"] = chaining.gamma_bruteforce(d, args.alpha, args.s0)
    _emit(res)
    return EXIT_OK


def cmd_lambda(args) -> int:
    F = complexity.LinearClass(_class_from(args), args.ensemble)
    s0 = complexity.s0_heuristic(F, 20_000, _seed(args)) if args.s0 is None else args.s0
    res = {"lambda_upper": complexity.lambda_upper(F, s0, args.u),
           "lambda_tilde": complexity.lambda_tilde(F, s0, args.u), "s0": s0, "u": args.u,
           "m": F.m, "ensemble": F.ensemble}
    if args.bruteforce:
        res["lambda_bruteforce"] = complexity.lambda_bruteforce(F, s0, args.u)
    _emit(res)
    return EXIT_OK


def cmd_decompose(args) -> int:
    if args.values:
        z = np.loadtxt(args.values, delimiter=",").ravel()
    else:
        z = distributions.by_name(args.law).sample(stream(_seed(args), "decompose"), args.N)
    if args.j is None:
        j = orderstats.cutoff_j0(orderstats.TailParams(q=args.q, r=args.r, p=args.p, c0=args.c0), z.size)
    else:
        j = args.j
    dec = orderstats.decompose(z, j)
    head = set(dec.support_U.tolist())
    print("index,value,part")
    for i, v in enumerate(z):
        print(f"{i},{float(v)!r},{'U' if i in head else 'V'}")
    print(f"# j={j} head_l2={float(np.linalg.norm(dec.U))!r} tail_l2={float(np.linalg.norm(dec.V))!r}",
          file=sys.stderr)
    return EXIT_OK


def cmd_tails(args) -> int:
    cfg = harness.ExperimentConfig(experiment="tails", seed=_seed(args), ensemble=args.law,
                                   N=args.N, trials=args.trials or 10_000, q=args.q, r=args.r, p=args.p)
    return _run(cfg, args)


def cmd_projection_check(args) -> int:
    T = _class_from(args)
    ens = processes.EnsembleSpec(args.ensemble, T.shape[1])
    pc = experiments.projection_from_sample(T, ens, args.N, _seed(args), u=args.u, s0=args.s0,
                                            q=args.q, r=args.r)
    a = [proj.check_assumption_A(proj.tight_instance(pc.V, pc.pi, pc.s0, pc.j, overlap=False), p)
         for p in (1, 2)]
    b = proj.check_assumption_B(pc)
    rb = proj.ell2_radius_bound(pc)
    cx = proj.projection_complexity(pc)
    res = {"assumption_A": all(x.passed for x in a), "assumption_B": b.passed,
           "witness": b.witness, "radius_lhs": rb.lhs, "radius_rhs": rb.rhs,
           "radius_passed": rb.passed, "Lambda_V": cx.Lambda_V, "Theta_V": cx.Theta_V,
           "d_V": cx.d_V, "s_1": cx.s_1, "j": pc.j.tolist()}
    _emit(res)
    return EXIT_OK if res["assumption_A"] and b.passed and rb.passed else EXIT_FAIL


def _run(cfg: harness.ExperimentConfig, args) -> int:
    out = _out_dir(args)
    try:
        rec = harness.run_experiment(cfg, out, threads=args.threads)
    except ConfigError:
        raise
    except Exception as exc:  # partial failure: the record on disk is marked incomplete
        print(f"run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print(harness.to_csv(rec["summary"]), end="")
    print(f"# {'PASS' if rec['passed'] else 'FAIL'} -> {out}", file=sys.stderr)
    return EXIT_OK if rec["passed"] else EXIT_FAIL


def cmd_simulate(args) -> int:
    if args.config:
        cfg = harness.load(args.config)
    else:
        if args.experiment is None or args.seed is None:
            raise UsageError("simulate needs --config or both --experiment and --seed")
        cfg = harness.ExperimentConfig(experiment=args.experiment, seed=args.seed)
    for key in ("experiment", "seed", "trials", "N"):
        val = getattr(args, key)
        if val is not None:
            setattr(cfg, key, val)
    return _run(cfg, args)


def cmd_verify(args) -> int:
    crit = ([int(c) for c in args.criteria.split(",")] if args.criteria
            else list(verify.SUITES[args.suite]))
    verdicts = []
    for c in crit:
        v = verify.run_one(c, seed=_seed(args), threads=args.threads)
        print(v.line(), flush=True)
        verdicts.append(v)
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    rows = [{"criterion": v.criterion, "name": v.name, "passed": v.passed, **v.detail}
            for v in verdicts]
    harness._atomic_write(out / "verify.csv", harness.to_csv(rows))
    return EXIT_OK if all(v.passed for v in verdicts) else EXIT_FAIL


def cmd_report(args) -> int:
    from . import report
    for path in report.render(args.run_dir, args.out):
        print(path)
    return EXIT_OK


def build_parser() -> Parser:
    common = Parser(add_help=False)
    common.add_argument("--config", help="experiment config file (INI, one [experiment] section)")
    common.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    common.add_argument("--out", help=f"output directory (default ${harness.OUT_ENV} or {harness.DEFAULT_OUT})")
    common.add_argument("--threads", type=int, default=1, help="worker threads for trials")

    klass = Parser(add_help=False)
    klass.add_argument("--class-file", help="CSV with one class vector per row")
    klass.add_argument("--m", type=int, default=32, help="generated class size")
    klass.add_argument("--n", type=int, default=16, help="generated class dimension")
    klass.add_argument("--class-seed", type=int, default=0)

    p = Parser(prog="chainbounds", description="Chaining functionals and empirical-process simulations.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gamma", parents=[common], help="gamma functional of a finite metric space")
    g.add_argument("--distances", required=True, help="CSV distance matrix")
    g.add_argument("--alpha", type=float, default=2.0)
    g.add_argument("--s0", type=int, default=0)
    g.add_argument("--bruteforce", action="store_true", help="also enumerate (m <= 6)")
    g.set_defaults(fn=cmd_gamma)

    lam = sub.add_parser("lambda", parents=[common, klass], help="graded chaining functional of a class")
    lam.add_argument("--ensemble", default="gaussian", choices=complexity.ENSEMBLES[:-1])
    lam.add_argument("--s0", type=int, default=None, help="default: width heuristic")
    lam.add_argument("--u", type=float, default=4.0)
    lam.add_argument("--bruteforce", action="store_true")
    lam.set_defaults(fn=cmd_lambda)

    d = sub.add_parser("decompose", parents=[common], help="head/tail split of a vector")
    d.add_argument("--values", help="CSV of values; otherwise a sample is drawn")
    d.add_argument("--law", default="pareto(5)")
    d.add_argument("--N", type=int, default=1024)
    d.add_argument("--j", type=int, default=None, help="cutoff; default j0 from --p --q --r")
    d.add_argument("--p", type=float, default=8.0)
    d.add_argument("--q", type=float, default=5.0)
    d.add_argument("--r", type=float, default=2.0)
    d.add_argument("--c0", type=float, default=1.0)
    d.set_defaults(fn=cmd_decompose)

    t = sub.add_parser("tails", parents=[common], help="exceedance frequencies of the head/tail bounds")
    t.add_argument("--law", default="pareto(5)")
    t.add_argument("--N", type=int, default=1024)
    t.add_argument("--trials", type=int, default=None)
    t.add_argument("--p", type=float, default=8.0)
    t.add_argument("--q", type=float, default=5.0)
    t.add_argument("--r", type=float, default=2.0)
    t.set_defaults(fn=cmd_tails)

    pc = sub.add_parser("projection-check", parents=[common, klass],
                        help="structural checks on a sampled coordinate projection")
    pc.add_argument("--ensemble", default="gaussian")
    pc.add_argument("--N", type=int, default=64)
    pc.add_argument("--u", type=float, default=4.0)
    pc.add_argument("--s0", type=int, default=0)
    pc.add_argument("--q", type=float, default=4.0)
    pc.add_argument("--r", type=float, default=2.0)
    pc.set_defaults(fn=cmd_projection_check)

    s = sub.add_parser("simulate", parents=[common], help="run a named experiment")
    s.add_argument("--experiment", choices=harness.EXPERIMENTS)
    s.add_argument("--trials", type=int)
    s.add_argument("--N", type=int)
    s.set_defaults(fn=cmd_simulate)

    v = sub.add_parser("verify", parents=[common], help="run acceptance checks")
    v.add_argument("--suite", default="all", choices=sorted(verify.SUITES))
    v.add_argument("--criteria", help="comma-separated criterion numbers")
    v.set_defaults(fn=cmd_verify)

    r = sub.add_parser("report", parents=[common], help="render figures for a finished run")
    r.add_argument("run_dir", help="directory written by simulate")
    r.set_defaults(fn=cmd_report)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.fn(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
