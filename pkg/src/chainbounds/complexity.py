"""Graded chaining functionals of finite classes of linear functionals.

For a class ``F_T = {<t, .> : t in T}`` the level-s distance is the graded
norm ``||<t - t', X>||_(u^2 2^s)``. The functional

    Lambda_{s0,u}(F) = inf sup_f sum_{s >= s0} 2^(s/2) ||f - pi_s f||_(u^2 2^s)

is bounded above by the greedy admissible sequence and computed exactly by
enumeration for m <= 6. ``lambda_tilde`` adds the starting-point term.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from . import chaining, norms
from .seeding import stream

ENSEMBLES = ("gaussian", "exponential", "laplace", "rademacher", "empirical")


class ConfigError(ValueError):
    """Raised when a parameter or class description is unusable."""


@dataclass(frozen=True)
class LinearClass:
    """Finite index set ``T`` (rows) plus the law of the random vector.

    ``gaussian`` and ``rademacher`` use the gaussian graded norm (exact for
    the former, a domination bound for the latter); ``exponential`` and
    ``laplace`` use the Gluskin-Kwapien surrogate; ``empirical`` evaluates
    graded norms on ``sample @ t``.
    """

    T: np.ndarray
    ensemble: str = "gaussian"
    sample: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        T = np.atleast_2d(np.asarray(self.T, dtype=float))
        if T.shape[0] < 1 or not np.all(np.isfinite(T)):
            raise ConfigError("class must contain at least one finite vector")
        object.__setattr__(self, "T", T)
        if self.ensemble not in ENSEMBLES:
            raise ConfigError(f"unsupported ensemble {self.ensemble!r}")
        if self.ensemble == "empirical":
            if self.sample is None:
                raise ConfigError("empirical ensemble needs a sample matrix")
            S = np.atleast_2d(np.asarray(self.sample, dtype=float))
            if S.shape[1] != T.shape[1]:
                raise ConfigError("sample and class dimensions differ")
            object.__setattr__(self, "sample", S)

    @property
    def m(self) -> int:
        return self.T.shape[0]

    def scaled(self, lam: float) -> "LinearClass":
        return LinearClass(lam * self.T, self.ensemble, self.sample)


@lru_cache(maxsize=None)
def _gaussian_graded_factor(p: float) -> float:
    # sup_{q <= p} mu_q / sqrt(q), mu_q the standard gaussian L_q norm
    if p < 2:
        return norms.gaussian_moment(1.0)
    prof = norms.profile_from_moments(norms.gaussian_moment, p)
    return norms.graded_norm(prof, p)


def graded_norms(F: LinearClass, vectors: np.ndarray, p: float) -> np.ndarray:
    """(p)-norms of the linear functionals indexed by the rows of ``vectors``."""
    vectors = np.atleast_2d(vectors)
    if F.ensemble in ("gaussian", "rademacher"):
        return _gaussian_graded_factor(float(p)) * np.linalg.norm(vectors, axis=1)
    if F.ensemble in ("exponential", "laplace"):
        if vectors.shape[1] == 0:
            return np.zeros(len(vectors))
        return (np.sqrt(p) * np.abs(vectors).max(axis=1)
                + np.linalg.norm(vectors, axis=1))
    evals = F.sample @ vectors.T
    try:
        return np.array([norms.graded_norm(norms.profile_from_sample(col, max(p, 2.0)), p)
                         for col in evals.T])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def level_distance(F: LinearClass, s: int, u: float) -> np.ndarray:
    """m x m matrix of (u^2 2^s)-distances between class members."""
    p = u * u * 2.0 ** s
    diffs = F.T[:, None, :] - F.T[None, :, :]
    d = graded_norms(F, diffs.reshape(-1, F.T.shape[1]), p).reshape(F.m, F.m)
    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    return d


def _check(s0: int, u: float) -> None:
    if s0 < 0 or int(s0) != s0:
        raise ConfigError("s0 must be a nonnegative integer")
    if u < 1:
        raise ConfigError("u must be >= 1")


def _levels(F: LinearClass, u: float) -> list[np.ndarray]:
    return [level_distance(F, s, u) for s in range(chaining.s_max_for(F.m) + 1)]


def lambda_sequence(F: LinearClass, u: float) -> tuple[list[np.ndarray], chaining.AdmissibleSequence]:
    dists = _levels(F, u)
    return dists, chaining.greedy_admissible(dists, 2.0, 0, level_distances=dists)


def lambda_upper(F: LinearClass, s0: int = 0, u: float = 4.0) -> float:
    """Greedy upper bound on Lambda_{s0,u}(F)."""
    _check(s0, u)
    if s0 > chaining.s_max_for(F.m):
        return 0.0
    dists, seq = lambda_sequence(F, u)
    return chaining.evaluate_gamma(dists, seq, 2.0, s0)


def lambda_tilde(F: LinearClass, s0: int = 0, u: float = 4.0) -> float:
    """Lambda_{s0,u}(F) + 2^(s0/2) sup_f ||pi_{s0} f||_(u^2 2^s0)."""
    _check(s0, u)
    dists, seq = lambda_sequence(F, u)
    lam = 0.0 if s0 > seq.s_max else chaining.evaluate_gamma(dists, seq, 2.0, s0)
    start = F.T[np.unique(seq.pi(s0))]
    head = graded_norms(F, start, u * u * 2.0 ** s0).max()
    return lam + 2.0 ** (s0 / 2) * float(head)


def lambda_bruteforce(F: LinearClass, s0: int = 0, u: float = 4.0) -> float:
    """Exact Lambda_{s0,u}(F) by enumeration of admissible sequences (m <= 6)."""
    _check(s0, u)
    if F.m > chaining.BRUTEFORCE_MAX_POINTS:
        raise ConfigError(f"brute force is limited to {chaining.BRUTEFORCE_MAX_POINTS} points")
    return chaining.gamma_bruteforce(_levels(F, u), 2.0, s0)


def _mc_sup_mean(T: np.ndarray, draw: Callable[[np.random.Generator, int], np.ndarray],
                 mc_samples: int, seed: int, label: str, chunk: int = 20000) -> tuple[float, float]:
    T = np.atleast_2d(np.asarray(T, dtype=float))
    sums, sq = [], []
    for c, start in enumerate(range(0, mc_samples, chunk)):
        rng = stream(seed, label, c)
        size = min(chunk, mc_samples - start)
        sup = (draw(rng, size) @ T.T).max(axis=1)
        sums.append(float(sup.sum()))
        sq.append(float((sup * sup).sum()))
    mean = math.fsum(sums) / mc_samples
    var = max(math.fsum(sq) / mc_samples - mean * mean, 0.0) * mc_samples / max(mc_samples - 1, 1)
    return mean, math.sqrt(var / mc_samples)


def gaussian_width(T, mc_samples: int = 100_000, seed: int = 0) -> tuple[float, float]:
    """Monte Carlo estimate and standard error of E sup_t <t, g>."""
    n = np.atleast_2d(T).shape[1]
    return _mc_sup_mean(T, lambda rng, k: rng.standard_normal((k, n)), mc_samples, seed, "gaussian_width")


def exp_mean_width(T, mc_samples: int = 100_000, seed: int = 0) -> tuple[float, float]:
    """Monte Carlo estimate of E sup_t <t, Y>, Y with i.i.d. Exp(1) coordinates."""
    n = np.atleast_2d(T).shape[1]
    return _mc_sup_mean(T, lambda rng, k: rng.standard_exponential((k, n)), mc_samples, seed, "exp_mean_width")


def l2_diameter(F: LinearClass) -> float:
    """sup_f ||f||_{L_2}."""
    if F.ensemble == "empirical":
        return float(np.sqrt(np.mean((F.sample @ F.T.T) ** 2, axis=0)).max())
    if F.ensemble == "exponential":
        # non-centred Exp(1) coordinates: E <t,Y>^2 = |t|^2 + (sum t)^2
        return float(np.sqrt((F.T ** 2).sum(axis=1) + F.T.sum(axis=1) ** 2).max())
    return float(np.linalg.norm(F.T, axis=1).max())


def s0_heuristic(F: LinearClass, mc_samples: int = 100_000, seed: int = 0) -> int:
    """Largest s0 >= 0 with E||G||_F >= 2^(s0/2) d_2(F); 0 if there is none."""
    width, _ = gaussian_width(F.T, mc_samples, seed)
    d2 = l2_diameter(F)
    if d2 == 0 or width < d2:
        return 0
    return int(math.floor(2 * math.log2(width / d2) + 1e-12))
