"""Acceptance checks, one function per criterion.

Each check returns a :class:`Verdict`. The CLI ``verify`` subcommand and
the acceptance test module both call :func:`run`.
"""
from __future__ import annotations

import math
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import chaining, complexity, distributions, experiments, norms, orderstats, processes
from . import projection as proj
from .seeding import stream


@dataclass
class Verdict:
    criterion: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        info = ", ".join(f"{k}={_fmt(v)}" for k, v in self.detail.items())
        return f"[{status}] criterion {self.criterion} {self.name}: {info}"


def _fmt(v) -> str:
    return f"{v:.4g}" if isinstance(v, float) else str(v)


def deterministic_inequalities(seed: int = 0) -> Verdict:
    rng = stream(seed, "verify:holder")
    holder_bad = 0
    for _ in range(10_000):
        N = int(rng.integers(1, 40))
        w = rng.standard_normal(N) * rng.exponential(1.0, N) ** 2
        v = rng.standard_normal(N) * rng.exponential(1.0, N) ** 2
        k = int(rng.integers(0, N + 1))
        r = float(rng.choice([4 / 3, 2.0, 4.0]))
        h = proj.holder_split(w, v, k, r)
        if not (proj._leq(h.head_exact, h.head_bound) and proj._leq(h.tail_exact, h.tail_bound)):
            holder_bad += 1
    rng = stream(seed, "verify:radius")
    radius_bad = assumption_bad = 0
    for _ in range(1000):
        pc_b, pc_a = _random_instance(rng)
        rb = proj.ell2_radius_bound(pc_b)
        radius_bad += not (rb.passed and rb.precondition)
        ok = proj.check_assumption_B(pc_b).passed
        ok &= all(proj.check_assumption_A(pc_a, p).passed for p in (1, 2))
        assumption_bad += not ok
    return Verdict(1, "deterministic inequality suite",
                   holder_bad == radius_bad == assumption_bad == 0,
                   {"holder_violations": holder_bad, "radius_violations": radius_bad,
                    "assumption_rejections": assumption_bad})


def _random_instance(rng: np.random.Generator):
    N = int(rng.integers(2, 33))
    m = int(rng.integers(1, 7))
    L = int(rng.integers(0, 5))
    s0 = int(rng.integers(0, L + 1))
    V = rng.standard_normal((m, N)) * rng.exponential(1.0, (m, N))
    pi = [rng.integers(0, m, size=m) for _ in range(L)] + [np.arange(m)]
    j = np.sort(rng.integers(1, N + 2, size=L + 1))
    return proj.tight_instance(V, pi, s0, j), proj.tight_instance(V, pi, s0, j, overlap=False)


def _random_space(rng: np.random.Generator, m: int) -> np.ndarray:
    pts = rng.standard_normal((m, int(rng.integers(1, 4))))
    return np.linalg.norm(pts[:, None] - pts[None], axis=-1)


def chaining_oracle(seed: int = 0) -> Verdict:
    rng = stream(seed, "verify:chaining")
    small_gap = 0.0
    for k in range(100):
        d = _random_space(rng, 1 + k % 3)
        for alpha in (1.0, 2.0):
            up, bf = chaining.gamma_upper(d, alpha), chaining.gamma_bruteforce(d, alpha)
            small_gap = max(small_gap, abs(up - bf) / max(bf, 1e-300))
    order_bad = 0
    for _ in range(100):
        d = _random_space(rng, 5)
        order_bad += chaining.gamma_upper(d) < chaining.gamma_bruteforce(d) * (1 - 1e-12)
    pair_bad = 0
    for _ in range(100):
        x = float(rng.exponential())
        d = np.array([[0.0, x], [x, 0.0]])
        pair_bad += chaining.gamma_upper(d) != x or chaining.gamma_bruteforce(d) != x
    return Verdict(2, "chaining oracle", small_gap <= 1e-12 and order_bad == 0 and pair_bad == 0,
                   {"max_rel_gap_small": small_gap, "upper_below_exact": order_bad,
                    "pair_mismatches": pair_bad})


def lambda_oracle(seed: int = 0) -> Verdict:
    rng = stream(seed, "verify:lambda")
    below = 0
    scale_err = 0.0
    for _ in range(50):
        F = complexity.LinearClass(rng.standard_normal((5, int(rng.integers(2, 9)))), "exponential")
        s0 = int(rng.integers(0, 2))
        up, bf = complexity.lambda_upper(F, s0), complexity.lambda_bruteforce(F, s0)
        below += up < bf * (1 - 1e-12)
        for lam in (2.0, 10.0):
            G = F.scaled(lam)
            for a, b in ((complexity.lambda_upper(G, s0), up), (complexity.lambda_bruteforce(G, s0), bf)):
                scale_err = max(scale_err, abs(a - lam * b) / max(lam * b, 1e-300))
    return Verdict(3, "lambda oracle", below == 0 and scale_err <= 1e-12,
                   {"upper_below_exact": below, "max_scaling_rel_err": scale_err})


GK_PS = (2, 4, 8, 16, 32, 64)


def gk_ratios(seed: int = 0, draws: int = 1_000_000, chunk: int = 50_000) -> np.ndarray:
    """Gluskin-Kwapien moment over the empirical L_p of <t, Y>, Y with Exp(1) coordinates."""
    out = []
    law = distributions.exponential(centered=False)
    for n in (2, 8, 32):
        t = stream(seed, "verify:gk_t", n).standard_normal((20, n))
        t /= np.linalg.norm(t, axis=1, keepdims=True)
        acc = np.zeros((20, len(GK_PS)))
        for c, start in enumerate(range(0, draws, chunk)):
            Y = law.sample(stream(seed, f"verify:gk:{n}", c), (min(chunk, draws - start), n))
            S = np.abs(Y @ t.T)
            for a, p in enumerate(GK_PS):
                acc[:, a] += np.sum(S ** p, axis=0)
        for i in range(20):
            for a, p in enumerate(GK_PS):
                out.append(norms.gk_moment(t[i], p) / (acc[i, a] / draws) ** (1 / p))
    return np.array(out)


LATALA_LAWS = {"exp^2": lambda: distributions.exponential(centered=False).power(2),
               "gaussian^2": lambda: distributions.gaussian().power(2),
               "|pareto(5)|": lambda: distributions.pareto(5).power(1)}


def latala_ratios(seed: int = 0, draws: int = 200_000) -> list[dict]:
    rows = []
    for name, make in LATALA_LAWS.items():
        W = make()
        for m in (1, 2, 4, 8, 16, 32, 64):
            for r in (1, 2, 4, 8, 16):
                if r >= W.tail_index:
                    continue
                mc = orderstats.sum_moment_mc(W, m, r, draws, seed)
                rhs = orderstats.latala_rhs(m, r, W.lq)
                rows.append({"law": name, "m": m, "r": r, "mc": mc, "formula": rhs, "ratio": mc / rhs})
    return rows


def moment_brackets(seed: int = 0) -> Verdict:
    gk = gk_ratios(seed)
    lat = np.array([r["ratio"] for r in latala_ratios(seed)])
    ok = bool(np.all((gk >= 1 / 8) & (gk <= 8)) and np.all((lat >= 1 / 8) & (lat <= 8)))
    return Verdict(4, "moment-formula brackets", ok,
                   {"gk_min": float(gk.min()), "gk_max": float(gk.max()),
                    "latala_min": float(lat.min()), "latala_max": float(lat.max())})


def bernoulli_agreement(seed: int = 0) -> Verdict:
    rng = stream(seed, "verify:bernoulli")
    bad = 0
    for k in range(10):
        V = rng.standard_normal((int(rng.integers(1, 9)), 10))
        z = rng.standard_normal(10)
        rows = processes.bernoulli_agreement(V, z, 100_000, seed + k)
        bad += sum(not r["passed"] for r in rows)
    return Verdict(5, "exhaustive Bernoulli agreement", bad == 0, {"out_of_band": bad, "checks": 30})


TAIL_GRID = tuple(np.geomspace(2.0, 8.0, 25))


def tail_slope(seed: int = 0, trials: int = 10_000) -> Verdict:
    dist = distributions.pareto(5)
    params = orderstats.TailParams(q=5, r=2, p=8)
    N = 2 ** 10
    # c1 puts the median of the held-out ratio at t = 2
    c1 = orderstats.tail_norm_quantile(dist, params, N, 2000, seed, 0.5) / 2.0
    rows = orderstats.tail_check(dist, params, N, trials, TAIL_GRID, seed, c1=c1)
    tail = [r for r in rows if r["bound_name"] == "V_lr"]
    freqs = [r["frequency"] for r in tail]
    monotone = all(a >= b for a, b in zip(freqs, freqs[1:]))
    slope, points = orderstats.log_slope(rows, "V_lr")
    ok = monotone and points >= 2 and slope <= -0.7 * params.q
    return Verdict(6, "order-statistics tail slope", ok,
                   {"slope": slope, "required": -0.7 * params.q, "observable_points": points,
                    "monotone": monotone, "c1": c1})


def coverage(seed: int = 0, threads: int = 1) -> Verdict:
    F = experiments.random_gaussian_class(32, 16, seed)
    ens = processes.EnsembleSpec("gaussian", 16)
    reports = {
        "multiplier": experiments.multiplier_theorem_experiment(
            F, ens, processes.MultiplierSpec("independent", "student(4)"), N=512,
            trials=(400, 400), seed=seed, q=4.0, threads=threads),
        "quadratic": experiments.quadratic_theorem_experiment(
            F, None, ens, N=512, trials=(400, 400), seed=seed, q=4.0, threads=threads),
        "psi2": experiments.psi2_multiplier_experiment(
            F, ens, N=512, trials=(400, 400), seed=seed, threads=threads),
    }
    detail = {}
    for k, r in reports.items():
        detail[f"{k}_coverage"] = r.coverage
        detail[f"{k}_wilson_low"] = r.wilson_low
    return Verdict(7, "fit-then-validate coverage", all(r.passed() for r in reports.values()), detail)


def scaling(seed: int = 0, threads: int = 1) -> Verdict:
    F = experiments.random_gaussian_class(32, 16, seed)
    rep = experiments.subgaussian_corollary_experiment(F, N=512, trials=200, seed=seed, threads=threads)
    return Verdict(8, "subgaussian scaling laws", rep.passed(),
                   {"median_slope": rep.median_slope, "lambda_slope": rep.lambda_slope})


def random_polytope(rng: np.random.Generator, m: int = 32, n: int = 16) -> np.ndarray:
    """Vertices with a random per-coordinate scale profile and sparsity."""
    scales = np.exp(rng.uniform(-1.5, 1.5, n))
    T = rng.standard_normal((m, n)) * scales
    return T * (rng.random((m, n)) < rng.uniform(0.3, 1.0))


def polytope_boundedness(seed: int = 0) -> Verdict:
    rng = stream(seed, "verify:polytope")
    ratios = []
    for k in range(50):
        T = random_polytope(rng)
        while not np.any(T):
            T = random_polytope(rng)
        ratios.append(experiments.polytope_ratio(T, seed=seed + k)["ratio"])
    ratios = np.array(ratios)
    spread = float(ratios.max() / ratios.min())
    return Verdict(9, "exponential mean-width boundedness", spread <= 20,
                   {"C": float(ratios.max()), "min_ratio": float(ratios.min()), "spread": spread})


def symmetrization(seed: int = 0) -> Verdict:
    F = experiments.random_gaussian_class(32, 16, seed)
    ens = processes.EnsembleSpec("gaussian", 16)
    failed = skipped = 0
    for N in (64, 256):
        rows = processes.symmetrization_check(F.T, ens, N, None, 10_000, seed)
        failed += sum(r["status"] == "fail" for r in rows)
        skipped += sum(r["status"] == "skipped" for r in rows)
    return Verdict(10, "symmetrization", failed == 0, {"failed_rows": failed, "skipped_rows": skipped})


def reproducibility(seed: int = 7) -> Verdict:
    from .harness import ExperimentConfig, run_experiment
    outputs = []
    with tempfile.TemporaryDirectory() as tmp:
        for name in ("multiplier", "quadratic", "symmetrization"):
            blobs = []
            for rep in range(2):
                cfg = ExperimentConfig(experiment=name, seed=seed, trials=40, N=128)
                out = Path(tmp) / f"{name}{rep}"
                run_experiment(cfg, out)
                blobs.append((out / "trials.jsonl").read_bytes())
            outputs.append(blobs[0] == blobs[1])
    return Verdict(11, "byte-identical reruns", all(outputs), {"experiments": len(outputs)})


CRITERIA: dict[int, Callable[..., Verdict]] = {
    1: deterministic_inequalities, 2: chaining_oracle, 3: lambda_oracle, 4: moment_brackets,
    5: bernoulli_agreement, 6: tail_slope, 7: coverage, 8: scaling, 9: polytope_boundedness,
    10: symmetrization, 11: reproducibility,
}

SUITES = {"all": tuple(CRITERIA), "deterministic": (1, 2, 3), "oracle": (2, 3, 5),
          "moments": (4,), "tails": (6,), "coverage": (7,), "scaling": (8, 9),
          "symmetrization": (10,), "reproducibility": (11,)}


def run_one(criterion: int, **kwargs) -> Verdict:
    fn = CRITERIA[criterion]
    t0 = time.perf_counter()
    accepted = fn.__code__.co_varnames[: fn.__code__.co_argcount]
    v = fn(**{k: x for k, x in kwargs.items() if k in accepted})
    v.seconds = time.perf_counter() - t0
    return v


def run(criteria=None, **kwargs) -> list[Verdict]:
    return [run_one(c, **kwargs) for c in (criteria or CRITERIA)]
