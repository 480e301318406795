"""Named experiments, key-value configuration and on-disk records.

A config file is an INI file with a single ``[experiment]`` section::

    [experiment]
    experiment = multiplier
    seed = 7
    trials = 800
    N = 512

Unknown keys are rejected. ``seed`` is mandatory. ``serialize`` writes every
field in declaration order, so ``serialize(parse(text))`` is a fixed point.

Each run writes three files to the output directory: ``trials.jsonl``
(one JSON object per trial, in trial order), ``summary.csv`` and
``record.json``. Nothing time-dependent is recorded, so reruns with the
same config are byte-identical.
"""
from __future__ import annotations

import configparser
import csv
import io
import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__, experiments, orderstats, processes
from . import distributions
from .complexity import ConfigError, LinearClass
from .seeding import stream

SECTION = "experiment"
OUT_ENV = "CHAINBOUNDS_OUT"
DEFAULT_OUT = "chainbounds-out"

EXPERIMENTS = ("multiplier", "multiplier_q_sweep", "psi2_multiplier", "quadratic", "logconcave",
               "subgaussian", "symmetrization", "tails", "bernoulli")


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int
    ensemble: str = "gaussian"
    n: int = 16
    m: int = 32
    class_file: str = ""
    class_seed: int = 0
    N: int = 512
    trials: int = 800
    multiplier: str = "independent"
    multiplier_law: str = "student(4)"
    theta: str = ""
    q: float = 4.0
    r: float = 2.0
    p: float = 8.0
    u: float = 8.0
    w: float = 2.0
    s0: str = "auto"
    beta: str = "auto"
    c0: float = 1.0
    target: float = experiments.COVERAGE_TARGET

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            typ = {"int": int, "float": float, "str": str}[f.type]
            try:
                setattr(self, f.name, typ(v))
            except (TypeError, ValueError):
                raise ConfigError(f"{f.name}: expected {f.type}, got {v!r}") from None

    def validate(self) -> "ExperimentConfig":
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment: must be one of {', '.join(EXPERIMENTS)}")
        if self.seed < 0 or self.seed >= 2 ** 64:
            raise ConfigError("seed: must be an unsigned 64-bit integer")
        if self.N < 1:
            raise ConfigError("N: must be >= 1")
        if self.trials < 2:
            raise ConfigError("trials: need at least 2")
        if self.n < 1 or self.m < 1:
            raise ConfigError("n, m: must be >= 1")
        if self.multiplier not in ("independent", "coordinate"):
            raise ConfigError("multiplier: must be independent or coordinate")
        for key in ("ensemble", "multiplier_law"):
            try:
                distributions.by_name(getattr(self, key))
            except ValueError as exc:
                raise ConfigError(f"{key}: {exc}") from None
        if self.q <= 2:
            raise ConfigError("q: must exceed 2")
        if self.u < 1 or self.w <= 0:
            raise ConfigError("u, w: need u >= 1 and w > 0")
        if not 0 < self.target < 1:
            raise ConfigError("target: must lie in (0, 1)")
        if self.s0 != "auto" and not self.s0.isdigit():
            raise ConfigError("s0: must be 'auto' or a nonnegative integer")
        if self.experiment == "tails":
            try:
                self.tail_params()
            except ValueError as exc:
                raise ConfigError(f"tails: {exc}") from None
        if self.class_file and not Path(self.class_file).is_file():
            raise ConfigError(f"class_file: {self.class_file} does not exist")
        return self

    def s0_value(self):
        return None if self.s0 == "auto" else int(self.s0)

    def tail_params(self) -> orderstats.TailParams:
        beta = None if self.beta == "auto" else float(self.beta)
        return orderstats.TailParams(q=self.q, r=self.r, p=self.p, beta=beta,
                                     u=max(self.u, 4.0), c0=self.c0)

    def to_dict(self) -> dict:
        return asdict(self)


def parse(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax: {exc}") from None
    if cp.sections() != [SECTION]:
        raise ConfigError(f"config must contain exactly one [{SECTION}] section")
    known = {f.name for f in fields(ExperimentConfig)}
    items = dict(cp[SECTION])
    extra = sorted(set(items) - known)
    if extra:
        raise ConfigError(f"unknown keys: {', '.join(extra)}")
    for key in ("experiment", "seed"):
        if key not in items:
            raise ConfigError(f"{key}: missing (mandatory)")
    return ExperimentConfig(**items)


def load(path) -> ExperimentConfig:
    try:
        return parse(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None


def serialize(cfg: ExperimentConfig) -> str:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp[SECTION] = {k: repr(v) if isinstance(v, float) else str(v) for k, v in cfg.to_dict().items()}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def default_out() -> Path:
    return Path(os.environ.get(OUT_ENV, DEFAULT_OUT))


def load_class(cfg: ExperimentConfig) -> np.ndarray:
    if cfg.class_file:
        T = np.atleast_2d(np.loadtxt(cfg.class_file, delimiter=",", ndmin=2))
        if T.shape[1] != cfg.n:
            raise ConfigError(f"class_file: rows have dimension {T.shape[1]}, n = {cfg.n}")
        return T
    return experiments.random_gaussian_class(cfg.m, cfg.n, cfg.class_seed).T


def _theta(cfg: ExperimentConfig) -> tuple:
    if not cfg.theta:
        return tuple([1.0 / math.sqrt(cfg.n)] * cfg.n)
    vals = tuple(float(x) for x in cfg.theta.split(","))
    if len(vals) != cfg.n:
        raise ConfigError(f"theta: expected {cfg.n} entries")
    return vals


@dataclass
class Outcome:
    rows: list
    summary: list
    passed: bool


def _coverage_outcome(rep: experiments.CoverageReport) -> Outcome:
    return Outcome(rep.trials, [rep.summary()], rep.passed())


def _split(cfg: ExperimentConfig) -> tuple[int, int]:
    return cfg.trials // 2, cfg.trials - cfg.trials // 2


def dispatch(cfg: ExperimentConfig, threads: int = 1) -> Outcome:
    """Run the named experiment; returns per-trial rows, summary rows and a verdict."""
    cfg.validate()
    name = cfg.experiment
    if name == "tails":
        return _tails(cfg)
    if name == "bernoulli":
        return _bernoulli(cfg)
    T = load_class(cfg)
    ens = processes.EnsembleSpec(cfg.ensemble, cfg.n)
    s0 = cfg.s0_value()
    common = dict(N=cfg.N, trials=_split(cfg), seed=cfg.seed, target=cfg.target, threads=threads)
    if name == "multiplier":
        mult = processes.MultiplierSpec(cfg.multiplier, cfg.multiplier_law,
                                        _theta(cfg) if cfg.multiplier == "coordinate" else None)
        return _coverage_outcome(experiments.multiplier_theorem_experiment(
            T, ens, mult, s0=s0, u=cfg.u, w=cfg.w, q=cfg.q, **common))
    if name == "multiplier_q_sweep":
        reps = experiments.multiplier_q_sweep(T, ens, s0=s0, u=cfg.u, w=cfg.w, **common)
        rows = [dict(t, q=rep.parameters["q"]) for rep in reps for t in rep.trials]
        return Outcome(rows, [rep.summary() for rep in reps], all(rep.passed() for rep in reps))
    if name == "psi2_multiplier":
        return _coverage_outcome(experiments.psi2_multiplier_experiment(
            T, ens, s0=s0, u=cfg.u, w=cfg.w, **common))
    if name == "quadratic":
        return _coverage_outcome(experiments.quadratic_theorem_experiment(
            T, None, ens, s0=s0, u=cfg.u, q=cfg.q, **common))
    if name == "logconcave":
        return _coverage_outcome(experiments.logconcave_quadratic_experiment(
            T, u=cfg.u, mc_samples=20_000, **common))
    if name == "subgaussian":
        rep = experiments.subgaussian_corollary_experiment(
            LinearClass(T, "gaussian"), u=cfg.u, N=cfg.N, trials=cfg.trials, seed=cfg.seed,
            s0=s0, mc_samples=20_000, threads=threads)
        rows = [{"scale": a, "median_sup": b, "lambda_tilde": c, "gaussian_width": d,
                 "gaussian_width_se": e, "constant": f}
                for a, b, c, d, e, f in zip(rep.scales, rep.medians, rep.lambda_tilde,
                                            rep.widths, rep.width_se, rep.constants)]
        summary = {"median_slope": rep.median_slope, "lambda_slope": rep.lambda_slope,
                   "s0": rep.s0, "u": rep.u, "N": rep.N, "trials": rep.trials, "seed": rep.seed}
        return Outcome(rows, [summary], rep.passed())
    if name == "symmetrization":
        rows = processes.symmetrization_check(T, ens, cfg.N, None, cfg.trials, cfg.seed)
        failed = sum(r["status"] == "fail" for r in rows)
        summary = {"rows": len(rows), "failed": failed,
                   "skipped": sum(r["status"] == "skipped" for r in rows), "N": cfg.N,
                   "trials": cfg.trials, "seed": cfg.seed}
        return Outcome(rows, [summary], failed == 0)
    raise ConfigError(f"experiment: unknown {name!r}")


def _tails(cfg: ExperimentConfig) -> Outcome:
    dist = distributions.by_name(cfg.ensemble if cfg.ensemble.startswith("pareto")
                                 or cfg.ensemble.startswith("student") else f"pareto({cfg.q:g})")
    params = cfg.tail_params()
    c1 = orderstats.tail_norm_quantile(dist, params, cfg.N, max(cfg.trials // 5, 1), cfg.seed, 0.5) / 2
    rows = orderstats.tail_check(dist, params, cfg.N, cfg.trials, np.geomspace(2, 8, 25), cfg.seed, c1)
    slope, points = orderstats.log_slope(rows, "V_lr")
    freqs = [r["frequency"] for r in rows if r["bound_name"] == "V_lr"]
    monotone = all(a >= b for a, b in zip(freqs, freqs[1:]))
    summary = {"slope": slope, "required": -0.7 * params.q, "observable_points": points,
               "monotone": monotone, "c1": c1, "j0": rows[0]["j0"], "law": dist.name,
               "N": cfg.N, "trials": cfg.trials, "seed": cfg.seed}
    ok = monotone and points >= 2 and slope <= -0.7 * params.q
    return Outcome(rows, [summary], ok)


def _bernoulli(cfg: ExperimentConfig) -> Outcome:
    N = min(cfg.N, 12)
    rng = stream(cfg.seed, "bernoulli:instance")
    V = rng.standard_normal((cfg.m, N))
    z = rng.standard_normal(N)
    rows = processes.bernoulli_agreement(V, z, cfg.trials, cfg.seed)
    ok = all(r["passed"] for r in rows)
    return Outcome(rows, [{"N": N, "m": cfg.m, "draws": cfg.trials, "seed": cfg.seed,
                           "in_band": sum(r["passed"] for r in rows), "levels": len(rows)}], ok)


def _atomic_write(path: Path, data: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _flat(row: dict) -> dict:
    out = {}
    for k, v in row.items():
        if isinstance(v, dict):
            out.update({f"{k}.{a}": b for a, b in v.items()})
        else:
            out[k] = v
    return out


def to_csv(rows: list[dict]) -> str:
    rows = [_flat(r) for r in rows]
    cols = list(dict.fromkeys(k for r in rows for k in r))
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    return buf.getvalue()


def to_jsonl(rows: list[dict]) -> str:
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in rows)


def run_experiment(cfg: ExperimentConfig, out: Path, threads: int = 1) -> dict:
    """Run and persist one experiment; returns the record."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    record = {"config": cfg.to_dict(), "version": __version__, "complete": False}
    try:
        outcome = dispatch(cfg, threads)
    except ConfigError:
        raise
    except Exception as exc:  # record the failure, then let the caller exit nonzero
        record.update(error=f"{type(exc).__name__}: {exc}", passed=False)
        _atomic_write(out / "record.json", json.dumps(record, indent=2, sort_keys=True) + "\n")
        raise
    _atomic_write(out / "trials.jsonl", to_jsonl(outcome.rows))
    _atomic_write(out / "summary.csv", to_csv(outcome.summary))
    record.update(complete=True, passed=outcome.passed, summary=outcome.summary,
                  files=["trials.jsonl", "summary.csv"])
    _atomic_write(out / "record.json", json.dumps(record, indent=2, sort_keys=True) + "\n")
    return record
