"""Monotone rearrangements and the head/tail split of i.i.d. samples.

The head ``U`` of a vector keeps its ``j - 1`` largest coordinates in
absolute value and the tail ``V`` keeps the rest. The cutoffs ``j_0`` and
``j_s`` are explicit formulas with a free constant ``c0`` (default 1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .distributions import Scalar
from .seeding import stream


def rearrange(z) -> np.ndarray:
    """|z| sorted nonincreasingly; ties keep their original order."""
    a = np.abs(np.asarray(z, dtype=float))
    return a[np.argsort(-a, kind="stable")]


@dataclass(frozen=True)
class TailParams:
    q: float
    r: float
    p: float
    beta: float | None = None
    u: float = 4.0
    c0: float = 1.0

    def __post_init__(self):
        if not self.q > 2:
            raise ValueError("q must exceed 2")
        if not 1 <= self.r < self.q:
            raise ValueError("need 1 <= r < q")
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if self.u < 4:
            raise ValueError("u must be >= 4")
        if self.c0 <= 0:
            raise ValueError("c0 must be positive")
        if self.beta is None:
            object.__setattr__(self, "beta", self.excess / 2)
        # beta = q/r - 1 would give alpha = 1
        if not 0 < self.beta < self.excess:
            raise ValueError("beta must lie in (0, q/r - 1)")

    @property
    def excess(self) -> float:
        return self.q / self.r - 1.0

    @property
    def rho(self) -> float:
        return 1.0 + self.beta

    @property
    def alpha(self) -> float:
        return self.rho * self.r / self.q


def _cutoff(level: float, excess: float, N: int, c0: float) -> int:
    raw = c0 * level / (excess * math.log(4.0 + math.e * N / level))
    return min(math.ceil(raw), N + 1)


def cutoff_j0(params: TailParams, N: int) -> int:
    """min{ceil(c0 p / ((q/r - 1) log(4 + eN/p))), N + 1} in double precision."""
    if N < 1:
        raise ValueError("N must be >= 1")
    return _cutoff(params.p, params.excess, N, params.c0)


def j_s_sequence(u: float, s0: int, s_max: int, r: float, q: float, N: int,
                 c0: float = 1.0) -> list[int]:
    """Cutoffs j_s for s = s0..s_max with level u^2 2^s, made nondecreasing."""
    if not 1 <= r < q:
        raise ValueError("need 1 <= r < q")
    out, run = [], 1
    for s in range(s0, s_max + 1):
        run = max(run, _cutoff(u * u * 2.0 ** s, q / r - 1.0, N, c0))
        out.append(run)
    return out


@dataclass(frozen=True)
class Decomposition:
    U: np.ndarray
    V: np.ndarray
    j: int
    support_U: np.ndarray
    support_V: np.ndarray


def decompose(z, j: int) -> Decomposition:
    """Split z into its j-1 largest coordinates (U) and the remainder (V)."""
    z = np.asarray(z, dtype=float)
    N = z.size
    if not 1 <= j <= N + 1:
        raise ValueError(f"cutoff must lie in [1, {N + 1}]")
    order = np.argsort(-np.abs(z), kind="stable")
    head = np.zeros(N, dtype=bool)
    head[order[: j - 1]] = True
    U = np.where(head, z, 0.0)
    V = np.where(head, 0.0, z)
    return Decomposition(U, V, j, np.flatnonzero(head & (z != 0)), np.flatnonzero(~head & (z != 0)))


def _trial_samples(dist: Scalar, N: int, trials: int, seed: int, label: str):
    for k in range(trials):
        yield dist.sample(stream(seed, label, k), N)


def tail_check(dist: Scalar, params: TailParams, N: int, trials: int, t_grid: Sequence[float],
               seed: int, c1: float = 1.0) -> list[dict]:
    """Exceedance frequencies of the head and tail bounds over a t-grid.

    Head bound: ||U||_2 > c1 t sqrt(2p) ||Z||_(2p).
    Tail bound: ||V||_r > c1 t ||Z||_{L_q} N^(1/r).
    """
    t_grid = np.asarray(sorted(t_grid), dtype=float)
    j0 = cutoff_j0(params, N)
    head_scale = c1 * math.sqrt(2 * params.p) * dist.graded(2 * params.p)
    tail_scale = c1 * dist.lq(params.q) * N ** (1.0 / params.r)
    head_norms = np.empty(trials)
    tail_norms = np.empty(trials)
    for k, z in enumerate(_trial_samples(dist, N, trials, seed, "tail_check")):
        a = rearrange(z)
        head_norms[k] = math.sqrt(float(np.sum(a[: j0 - 1] ** 2)))
        tail_norms[k] = float(np.sum(a[j0 - 1:] ** params.r)) ** (1.0 / params.r)
    rows = []
    for name, vals, scale in (("U_l2", head_norms, head_scale), ("V_lr", tail_norms, tail_scale)):
        for t in t_grid:
            hits = int(np.count_nonzero(vals > t * scale))
            rows.append({"t_or_w": float(t), "bound_name": name, "frequency": hits / trials,
                         "exceedances": hits, "trials": trials, "N": N, "q": params.q,
                         "r": params.r, "p": params.p, "j0": j0, "c1": c1, "law": dist.name})
    return rows


def tail_norm_quantile(dist: Scalar, params: TailParams, N: int, trials: int, seed: int,
                       level: float) -> float:
    """Quantile of ||V||_r / (||Z||_{L_q} N^(1/r)); used to fit c1 on held-out trials."""
    j0 = cutoff_j0(params, N)
    scale = dist.lq(params.q) * N ** (1.0 / params.r)
    vals = [float(np.sum(rearrange(z)[j0 - 1:] ** params.r)) ** (1.0 / params.r) / scale
            for z in _trial_samples(dist, N, trials, seed, "tail_calibration")]
    return float(np.quantile(vals, level))


def log_slope(rows: list[dict], bound_name: str, min_hits: int = 1) -> tuple[float, int]:
    """Least-squares slope of log frequency against log t on observable rows."""
    pts = [(r["t_or_w"], r["frequency"]) for r in rows
           if r["bound_name"] == bound_name and r["exceedances"] >= min_hits]
    if len(pts) < 2:
        return math.nan, len(pts)
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    return float(np.polyfit(x, y, 1)[0]), len(pts)


def latala_rhs(m: int, r: float, moment: Callable[[float], float], ratio: float = 1.02) -> float:
    """sup over max{1, r/m} <= s <= r of (r/s) (m/r)^(1/s) ||W||_{L_s}."""
    if m < 1 or r < 1:
        raise ValueError("need m >= 1 and r >= 1")
    lo = max(1.0, r / m)
    n = max(int(math.ceil(math.log(r / lo) / math.log(ratio))), 1) if r > lo else 0
    grid = np.unique(np.concatenate([lo * ratio ** np.arange(n + 1), [lo, r]]))
    grid = grid[(grid >= lo) & (grid <= r)]
    return max((r / s) * (m / r) ** (1.0 / s) * moment(s) for s in grid)


def sum_moment_mc(W: Scalar, m: int, r: float, draws: int, seed: int) -> float:
    """Monte Carlo ||W_1 + ... + W_m||_{L_r}."""
    rng = stream(seed, f"latala:{W.name}:{m}")
    sums = W.sample(rng, (draws, m)).sum(axis=1)
    return float(np.mean(sums ** r)) ** (1.0 / r)


def nu_sequence(j_list: Sequence[int], N: int, alpha: float) -> tuple[list[float], float, float]:
    """nu_k = (sum_{i=j_k}^{j_{k+1}-1} (eN/i)^alpha)^(1/2) for consecutive cutoffs.

    Returns the list, its sum, and the sum divided by sqrt(N).
    """
    if alpha >= 0.75:
        raise ValueError("alpha must be below 3/4")
    j_list = [int(j) for j in j_list]
    if any(not 1 <= j <= N + 1 for j in j_list):
        raise ValueError("cutoffs must lie in [1, N+1]")
    i = np.arange(1, N + 1, dtype=float)
    csum = np.concatenate([[0.0], np.cumsum((math.e * N / i) ** alpha)])
    nus = [math.sqrt(max(csum[b - 1] - csum[a - 1], 0.0)) if b > a else 0.0
           for a, b in zip(j_list[:-1], j_list[1:])]
    total = math.fsum(nus)
    return nus, total, total / math.sqrt(N)


def lq_vector_norm_check(dist: Scalar, q: float, N: int, trials: int, w_grid: Sequence[float],
                         seed: int) -> list[dict]:
    """Frequency of ||z||_2 > w ||xi||_{L_q} sqrt(N) for each w."""
    scale = dist.lq(q) * math.sqrt(N)
    vals = np.array([float(np.linalg.norm(z))
                     for z in _trial_samples(dist, N, trials, seed, "lq_vector")])
    rows = []
    for w in sorted(w_grid):
        hits = int(np.count_nonzero(vals > w * scale))
        rows.append({"t_or_w": float(w), "bound_name": "z_l2", "frequency": hits / trials,
                     "exceedances": hits, "trials": trials, "N": N, "q": q, "law": dist.name})
    return rows
