"""Fit-then-validate coverage experiments for the process bounds.

Every bound has the form ``sup <= c * base`` with an unspecified constant
``c``. Trials are split into a calibration block and a fresh block drawn
from disjoint per-trial streams. ``c`` is the smallest constant covering
``ceil(target * n_cal)`` calibration trials; the report gives the fraction
of fresh trials under ``c * base`` with a Wilson interval.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy import stats

from . import complexity, distributions, norms
from .complexity import ConfigError, LinearClass
from .orderstats import j_s_sequence, rearrange
from .projection import tight_instance
from .processes import (EnsembleSpec, MultiplierSpec, empirical_sup_of, evaluate,
                        multiplier_sup_of, product_sup_of, quadratic_sup_of, run_trials)
from .seeding import stream

COVERAGE_TARGET = 0.99
PILOT_FACTOR = 100


@dataclass
class TrialResult:
    experiment: str
    seed: int
    index: int
    phase: str
    N: int
    sup: float
    bound: float
    ratio: float
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class CoverageReport:
    experiment: str
    constant: float
    target: float
    n_calibration: int
    n_fresh: int
    covered: int
    coverage: float
    wilson_low: float
    wilson_high: float
    parameters: dict
    trials: list

    def passed(self, min_coverage: float = 0.95, min_wilson: float = 0.90) -> bool:
        return self.coverage >= min_coverage and self.wilson_low >= min_wilson

    def summary(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k not in ("trials", "parameters")}
        d.update(self.parameters)
        return d


def wilson_interval(k: int, n: int, confidence: float = 0.95) -> tuple[float, float]:
    ci = stats.binomtest(k, n).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def fit_constant(ratios, target: float = COVERAGE_TARGET) -> float:
    """Smallest c with ratio <= c on at least ceil(target * n) of the ratios."""
    r = np.sort(np.asarray(ratios, dtype=float))
    k = math.ceil(target * r.size)
    return float(r[max(k, 1) - 1])


def _ratio(sup: float, base: float) -> float:
    if base > 0:
        return sup / base
    return 0.0 if sup == 0 else math.inf


def coverage_report(name: str, results: list[TrialResult], n_cal: int, target: float,
                    parameters: dict) -> CoverageReport:
    cal = [t.ratio for t in results[:n_cal]]
    fresh = results[n_cal:]
    c = fit_constant(cal, target)
    covered = sum(t.ratio <= c for t in fresh)
    lo, hi = wilson_interval(covered, len(fresh))
    return CoverageReport(name, c, target, n_cal, len(fresh), covered, covered / len(fresh),
                          lo, hi, parameters, [t.to_dict() for t in results])


def _split(trials) -> tuple[int, int]:
    if isinstance(trials, int):
        return trials // 2, trials - trials // 2
    n_cal, n_fresh = trials
    if n_cal < 1 or n_fresh < 1:
        raise ConfigError("need at least one calibration and one fresh trial")
    return int(n_cal), int(n_fresh)


def _phase(k: int, n_cal: int) -> str:
    return "calibration" if k < n_cal else "fresh"


def lambda_ensemble(kind: str) -> str:
    """Graded-norm model used for Lambda-tilde under a coordinate law."""
    if kind in ("gaussian", "rademacher", "laplace"):
        return kind
    if kind == "exponential":
        return "laplace"
    raise ConfigError(f"no graded-norm model for ensemble {kind!r}")


def as_class(F, ens: EnsembleSpec) -> LinearClass:
    if not isinstance(F, LinearClass):
        F = LinearClass(F, lambda_ensemble(ens.kind))
    if F.T.shape[1] != ens.n:
        raise ConfigError(f"class vectors have dimension {F.T.shape[1]}, ensemble has {ens.n}")
    return F


def _resolve_s0(F: LinearClass, s0) -> int:
    return complexity.s0_heuristic(F, mc_samples=20_000) if s0 is None else int(s0)


def multiplier_cutoff(s: int, u: float, N: int, c0: float = 1.0) -> int:
    """min{ceil(c0 u^2 2^s / log(4 + eN/2^s)), N + 1}."""
    raw = c0 * u * u * 2.0 ** s / math.log(4.0 + math.e * N / 2.0 ** s)
    return min(math.ceil(raw), N + 1)


def multiplier_exponents(q: float) -> dict:
    r = min(0.5 + q / 4, 2.0)
    rc = r / (r - 1)
    return {"r": r, "r_conj": rc, "r1": 2 * rc, "q1": 4 * rc}


def _tail_diag(xi: np.ndarray, j: int, r: float) -> float:
    a = rearrange(xi)[j - 1:]
    return float(np.sum(a ** (2 * r)) ** (1 / (2 * r))) if a.size else 0.0


@lru_cache(maxsize=64)
def _pilot_lq(kind: str, n: int, key: bytes, shape: tuple, q: float, size: int) -> tuple:
    T = np.frombuffer(key).reshape(shape)
    X = EnsembleSpec(kind, n).draw(stream(0, f"pilot:{kind}"), size)
    return tuple(norms.empirical_lq(col, q) for col in (X @ T.T).T)


def lq_norms(T: np.ndarray, ens: EnsembleSpec, q: float, N: int) -> np.ndarray:
    """||<t, X>||_{L_q} per row: exact for gaussian X, else from a pilot sample."""
    T = np.atleast_2d(np.asarray(T, dtype=float))
    if ens.kind == "gaussian":
        return norms.gaussian_moment(q) * np.linalg.norm(T, axis=1)
    T = np.ascontiguousarray(T)
    return np.array(_pilot_lq(ens.kind, ens.n, T.tobytes(), T.shape, float(q), PILOT_FACTOR * N))


def multiplier_lq(mult: MultiplierSpec, ens: EnsembleSpec, q: float, N: int) -> float:
    if mult.kind == "independent":
        v = distributions.by_name(mult.law).lq(q)
        if not math.isfinite(v):
            raise ConfigError(f"{mult.law} has no finite L_{q:g} norm")
        return v
    return float(lq_norms(np.asarray(mult.theta, dtype=float), ens, q, N)[0])


def _multiplier_run(name: str, F: LinearClass, ens: EnsembleSpec, mult: MultiplierSpec,
                    s0: int, u: float, scale: float, q: float, N: int, trials, seed: int,
                    target: float, threads: int, extra: dict) -> CoverageReport:
    n_cal, n_fresh = _split(trials)
    lam = complexity.lambda_tilde(F, s0, u)
    base = scale * lam
    ex = multiplier_exponents(q)
    j_s0 = multiplier_cutoff(s0, u, N)
    means = mult.means(F.T)
    rn = math.sqrt(N)

    def one(k: int) -> TrialResult:
        rng = stream(seed, f"{name}:trial", k)
        X = ens.draw(rng, N)
        xi = mult.draw(rng, X)
        sup = rn * multiplier_sup_of(evaluate(F.T, X), xi, means)
        diag = {"xi_l2_normalized": float(np.linalg.norm(xi)) / rn,
                "xi_tail_normalized": N ** (1 / (2 * ex["r_conj"])) * _tail_diag(xi, j_s0, ex["r"]) / rn}
        return TrialResult(name, seed, k, _phase(k, n_cal), N, sup, base, _ratio(sup, base), diag)

    results = run_trials(one, n_cal + n_fresh, threads)
    params = {"lambda_tilde": lam, "s0": s0, "u": u, "q": q, "j_s0": j_s0, "base": base,
              "m": F.m, "n": ens.n, "N": N, "ensemble": ens.kind, "seed": seed, **ex, **extra}
    return coverage_report(name, results, n_cal, target, params)


def multiplier_theorem_experiment(F, ens: EnsembleSpec, mult: MultiplierSpec, s0=None,
                                  u: float = 8.0, w: float = 2.0, N: int = 512, trials=(400, 400),
                                  seed: int = 0, q: float = 4.0, target: float = COVERAGE_TARGET,
                                  threads: int = 1) -> CoverageReport:
    """sqrt(N) sup|mean(xi f) - E xi f| against c3 w u ||xi||_{L_q} Lambda-tilde."""
    F = as_class(F, ens)
    if q <= 2:
        raise ConfigError("q must exceed 2")
    s0 = _resolve_s0(F, s0)
    xi_q = multiplier_lq(mult, ens, q, N)
    return _multiplier_run("multiplier", F, ens, mult, s0, u, w * u * xi_q, q, N, trials, seed,
                           target, threads, {"w": w, "xi_lq": xi_q, "multiplier": mult.kind,
                                             "multiplier_law": mult.law})


def multiplier_q_sweep(F, ens: EnsembleSpec, qs=(3, 4, 6, 8), s0=None, u: float = 8.0,
                       w: float = 2.0, N: int = 512, trials=(400, 400), seed: int = 0,
                       target: float = COVERAGE_TARGET, threads: int = 1) -> list[CoverageReport]:
    """Fitted constant c3(q) for student multipliers with just over q moments.

    The constants are reported side by side; no trend in q is asserted.
    """
    F = as_class(F, ens)
    s0 = _resolve_s0(F, s0)
    return [multiplier_theorem_experiment(F, ens, MultiplierSpec("independent", f"student({q:g})"),
                                          s0=s0, u=u, w=w, N=N, trials=trials, seed=seed, q=q,
                                          target=target, threads=threads)
            for q in qs]


def psi2_multiplier_experiment(F, ens: EnsembleSpec, s0=None, u: float = 8.0, w: float = 2.0,
                               N: int = 512, trials=(400, 400), seed: int = 0,
                               target: float = COVERAGE_TARGET, threads: int = 1) -> CoverageReport:
    """Gaussian multiplier: bound c2 u w ||xi||_psi2 Lambda-tilde (sqrt(N)-normalised sup)."""
    F = as_class(F, ens)
    if u < 8:
        raise ConfigError("the psi_2 regime needs u >= 8")
    s0 = _resolve_s0(F, s0)
    psi2 = distributions.gaussian().psi2()
    mult = MultiplierSpec("independent", "gaussian")
    return _multiplier_run("psi2_multiplier", F, ens, mult, s0, u, w * u * psi2, 8.0, N, trials,
                           seed, target, threads, {"w": w, "xi_psi2": psi2})


def quadratic_theorem_experiment(F, H, ens: EnsembleSpec, s0=None, u: float = 8.0, q: float = 4.0,
                                 N: int = 512, trials=(400, 400), seed: int = 0,
                                 target: float = COVERAGE_TARGET, threads: int = 1) -> CoverageReport:
    """Unnormalised sup |sum (f h - E f h)| against
    u^2 L(H) L(F) + u sqrt(N) (d_q(F) L(H) + d_q(H) L(F)), L = Lambda-tilde."""
    F = as_class(F, ens)
    H = F if H is None else as_class(H, ens)
    if q <= 2:
        raise ConfigError("q must exceed 2")
    if u < max(8.0, math.sqrt(q)):
        raise ConfigError("u must be at least max(8, sqrt(q))")
    s0 = _resolve_s0(F, s0)
    lf, lh = complexity.lambda_tilde(F, s0, u), complexity.lambda_tilde(H, s0, u)
    dqf = float(lq_norms(F.T, ens, q, N).max())
    dqh = float(lq_norms(H.T, ens, q, N).max())
    rn = math.sqrt(N)
    base = u * u * lf * lh + u * rn * (dqf * lh + dqh * lf)
    diagonal = H is F
    n_cal, n_fresh = _split(trials)

    def one(k: int) -> TrialResult:
        X = ens.draw(stream(seed, "quadratic:trial", k), N)
        VF = evaluate(F.T, X)
        sup = N * (quadratic_sup_of(VF, F.T) if diagonal
                   else product_sup_of(VF, evaluate(H.T, X), F.T, H.T))
        return TrialResult("quadratic", seed, k, _phase(k, n_cal), N, sup, base, _ratio(sup, base))

    results = run_trials(one, n_cal + n_fresh, threads)
    params = {"lambda_tilde_F": lf, "lambda_tilde_H": lh, "d_q_F": dqf, "d_q_H": dqh, "s0": s0,
              "u": u, "q": q, "base": base, "m": F.m, "n": ens.n, "N": N, "ensemble": ens.kind,
              "seed": seed, "diagonal": diagonal}
    return coverage_report("quadratic", results, n_cal, target, params)


def logconcave_quadratic_experiment(T, u: float = 8.0, N: int = 512, trials=(400, 400),
                                    seed: int = 0, mc_samples: int = 100_000,
                                    target: float = COVERAGE_TARGET,
                                    threads: int = 1) -> CoverageReport:
    """Laplace X: sup_t |mean <X_i,t>^2 - |t|^2| against
    u^2 d_2(T) E(T) / sqrt(N) + u^4 E(T)^2 / N, E(T) the exponential mean width."""
    T = np.atleast_2d(np.asarray(T, dtype=float))
    ens = EnsembleSpec("laplace", T.shape[1])
    width, width_se = complexity.exp_mean_width(T, mc_samples, seed)
    d2 = float(np.linalg.norm(T, axis=1).max())
    base = u * u * d2 * width / math.sqrt(N) + u ** 4 * width ** 2 / N
    n_cal, n_fresh = _split(trials)

    def one(k: int) -> TrialResult:
        X = ens.draw(stream(seed, "logconcave:trial", k), N)
        sup = quadratic_sup_of(evaluate(T, X), T)
        return TrialResult("logconcave", seed, k, _phase(k, n_cal), N, sup, base, _ratio(sup, base))

    results = run_trials(one, n_cal + n_fresh, threads)
    params = {"exp_mean_width": width, "exp_mean_width_se": width_se, "d_2": d2, "u": u,
              "base": base, "m": T.shape[0], "n": T.shape[1], "N": N, "ensemble": "laplace",
              "seed": seed}
    return coverage_report("logconcave", results, n_cal, target, params)


@dataclass
class ScalingReport:
    scales: list
    medians: list
    median_slope: float
    lambda_tilde: list
    lambda_slope: float
    widths: list
    width_se: list
    constants: list
    s0: int
    u: float
    N: int
    trials: int
    seed: int

    def passed(self, lo: float = 0.9, hi: float = 1.1) -> bool:
        return lo <= self.median_slope <= hi and self.lambda_slope == 1.0

    def summary(self) -> dict:
        return asdict(self)


def _slope(x, y) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def _exact_slope(scales, values) -> float:
    """1.0 when values[i] / scales[i] agree to 1e-12, otherwise the fitted slope."""
    v = np.asarray(values) / np.asarray(scales, dtype=float)
    if np.all(np.abs(v - v[0]) <= 1e-12 * abs(v[0])):
        return 1.0
    return _slope(scales, values)


def subgaussian_corollary_experiment(F, u: float = 8.0, N: int = 512, trials: int = 200,
                                     seed: int = 0, scales=(1, 2, 4, 8), s0=None,
                                     mc_samples: int = 100_000, threads: int = 1) -> ScalingReport:
    """Median of sqrt(N) sup |mean f(X_i)| over the classes lambda F.

    Each scale uses its own trial streams. The fitted constant per scale is
    median / (u (E||G||_{lambda F} + 2^(s0/2) d_2(lambda F))).
    """
    if not isinstance(F, LinearClass):
        F = LinearClass(F, "gaussian")
    if F.ensemble != "gaussian":
        raise ConfigError("the subgaussian corollary experiment uses the gaussian ensemble")
    ens = EnsembleSpec("gaussian", F.T.shape[1])
    s0 = _resolve_s0(F, s0)
    rn = math.sqrt(N)
    meds, lams, widths, ses, consts = [], [], [], [], []
    for lam in scales:
        G = F.scaled(float(lam))

        def one(k: int, G=G, lam=lam) -> float:
            X = ens.draw(stream(seed, f"subgaussian:{lam:g}", k), N)
            return rn * empirical_sup_of(evaluate(G.T, X))

        sups = run_trials(one, trials, threads)
        med = float(np.median(sups))
        width, se = complexity.gaussian_width(G.T, mc_samples, seed)
        meds.append(med)
        lams.append(complexity.lambda_tilde(G, s0, u))
        widths.append(width)
        ses.append(se)
        consts.append(med / (u * (width + 2 ** (s0 / 2) * complexity.l2_diameter(G))))
    return ScalingReport(list(map(float, scales)), meds, _slope(scales, meds), lams,
                         _exact_slope(scales, lams), widths, ses, consts, s0, u, N, trials, seed)


def random_gaussian_class(m: int = 32, n: int = 16, seed: int = 0) -> LinearClass:
    """m standard gaussian points of R^n, the default class of the experiments."""
    return LinearClass(stream(seed, "class").standard_normal((m, n)), "gaussian")


def polytope_ratio(T, u: float = 4.0, mc_samples: int = 20_000, seed: int = 0) -> dict:
    """Lambda-tilde_{0,u} under the exponential surrogate over u E(T)."""
    F = LinearClass(T, "exponential")
    lam = complexity.lambda_tilde(F, 0, u)
    width, se = complexity.exp_mean_width(F.T, mc_samples, seed)
    return {"lambda_tilde": lam, "exp_mean_width": width, "exp_mean_width_se": se,
            "ratio": lam / (u * width)}


def projection_from_sample(T, ens: EnsembleSpec, N: int, seed: int, u: float = 4.0,
                           s0: int = 0, q: float = 4.0, r: float = 2.0, c0: float = 1.0):
    """Projected class P_sigma F with its greedy chain and equality-defined seminorms."""
    F = as_class(T, ens)
    _, seq = complexity.lambda_sequence(F, u)
    L = seq.s_max + 1
    pi = np.vstack([seq.pi(s) for s in range(L)] + [np.arange(F.m)])
    V = evaluate(F.T, ens.draw(stream(seed, "projection"), N)).T
    j = np.ones(L + 1, dtype=int)
    j[s0:] = j_s_sequence(u, s0, L, r, q, N, c0)
    return tight_instance(V, pi, s0, j)
