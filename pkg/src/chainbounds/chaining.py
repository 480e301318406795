"""Admissible sequences and gamma-type chaining functionals on finite spaces.

A space is an ``m x m`` symmetric, nonnegative matrix with zero diagonal.
The triangle inequality is not required, so seminorm distances work.
Wherever a function accepts ``dist`` it also accepts a list of matrices,
one per level ``s``, for chaining with scale-dependent distances.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

Distances = Union[np.ndarray, Sequence[np.ndarray], Callable[[int], np.ndarray]]

BRUTEFORCE_MAX_POINTS = 6


def level_budget(s: int) -> int:
    """Cardinality budget of level s: 1 at s = 0 and 2^(2^s) afterwards."""
    return 1 if s == 0 else 2 ** (2 ** s)


def s_max_for(m: int) -> int:
    """Least level whose budget covers all m points."""
    if m < 1:
        raise ValueError("space must contain at least one point")
    s = 0
    while level_budget(s) < m:
        s += 1
    return s


def validate_space(d) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] == 0:
        raise ValueError("distance matrix must be square and non-empty")
    if not np.all(np.isfinite(d)):
        raise ValueError("distance matrix has non-finite entries")
    if np.any(d < 0):
        raise ValueError("distances must be nonnegative")
    if np.any(np.diag(d) != 0):
        raise ValueError("distance matrix must have a zero diagonal")
    if not np.allclose(d, d.T, rtol=1e-12, atol=0.0):
        raise ValueError("distance matrix must be symmetric")
    return d


def _level_matrix(dist: Distances, s: int) -> np.ndarray:
    if callable(dist):
        return np.asarray(dist(s), dtype=float)
    if isinstance(dist, np.ndarray) and dist.ndim == 2:
        return dist
    dist = list(dist)
    return np.asarray(dist[min(s, len(dist) - 1)], dtype=float)


def _n_points(dist: Distances) -> int:
    return _level_matrix(dist, 0).shape[0]


@dataclass(frozen=True)
class AdmissibleSequence:
    """Levels ``T_0..T_L`` (sorted point indices) and nearest-point maps.

    ``maps[s, i]`` is the member of ``T_s`` assigned to point ``i``. Levels
    past ``L`` are taken to be the whole space.
    """

    levels: tuple
    maps: np.ndarray

    @property
    def s_max(self) -> int:
        return len(self.levels) - 1

    def pi(self, s: int) -> np.ndarray:
        if s > self.s_max:
            return np.arange(self.maps.shape[1])
        return self.maps[s]

    def validate(self, m: int) -> None:
        if self.maps.shape != (len(self.levels), m):
            raise ValueError("maps must have one row per level and one column per point")
        if len(self.levels[0]) != 1:
            raise ValueError("T_0 must be a singleton")
        for s, lev in enumerate(self.levels):
            if len(lev) > level_budget(s):
                raise ValueError(f"level {s} has {len(lev)} points, budget {level_budget(s)}")
            if not np.all(np.isin(self.maps[s], lev)):
                raise ValueError(f"map at level {s} leaves T_{s}")


def _nearest(d: np.ndarray, centers: np.ndarray) -> np.ndarray:
    # argmin returns the first minimiser; centers are sorted, so ties go
    # to the lowest point index
    return centers[np.argmin(d[:, centers], axis=1)]


def _farthest_first(d: np.ndarray, k: int) -> np.ndarray:
    m = d.shape[0]
    if k >= m:
        return np.arange(m)
    first = int(np.argmin(d.sum(axis=1)))
    chosen = [first]
    gap = d[first].copy()
    taken = np.zeros(m, dtype=bool)
    taken[first] = True
    for _ in range(k - 1):
        cand = np.where(taken, -np.inf, gap)
        nxt = int(np.argmax(cand))
        chosen.append(nxt)
        taken[nxt] = True
        gap = np.minimum(gap, d[nxt])
    return np.array(sorted(chosen))


def greedy_admissible(dist: Distances, alpha: float = 2.0, s0: int = 0,
                      level_distances: Distances | None = None) -> AdmissibleSequence:
    """Farthest-first admissible sequence, one independent traversal per level.

    Level 0 is the 1-median; level s keeps ``min(2^(2^s), m)`` centres chosen
    by farthest-first traversal under the level-s distance, started from
    that distance's 1-median. ``alpha`` and ``s0`` do not affect the
    construction and are accepted for symmetry with :func:`evaluate_gamma`.
    """
    fam = dist if level_distances is None else level_distances
    m = _n_points(fam)
    levels, maps = [], []
    for s in range(s_max_for(m) + 1):
        d = _level_matrix(fam, s)
        centers = _farthest_first(d, min(level_budget(s), m))
        levels.append(centers)
        maps.append(_nearest(d, centers))
    return AdmissibleSequence(tuple(levels), np.array(maps))


def chain_terms(dist: Distances, seq: AdmissibleSequence, alpha: float, s0: int) -> np.ndarray:
    """Per-point sums sum_{s >= s0} 2^(s/alpha) d_s(t, T_s)."""
    m = seq.maps.shape[1]
    total = np.zeros(m)
    for s in range(s0, seq.s_max + 1):
        d = _level_matrix(dist, s)
        total += 2.0 ** (s / alpha) * d[:, seq.levels[s]].min(axis=1)
    return total


def evaluate_gamma(dist: Distances, seq: AdmissibleSequence, alpha: float = 2.0, s0: int = 0) -> float:
    """sup_t sum_{s >= s0} 2^(s/alpha) d(t, T_s) for one admissible sequence."""
    if s0 < 0:
        raise ValueError("s0 must be nonnegative")
    if s0 > seq.s_max:
        warnings.warn(f"s0={s0} is past the last level {seq.s_max}; every term vanishes",
                      stacklevel=2)
        return 0.0
    return float(chain_terms(dist, seq, alpha, s0).max())


def gamma_upper(dist: Distances, alpha: float = 2.0, s0: int = 0) -> float:
    if not callable(dist) and isinstance(dist, np.ndarray):
        dist = validate_space(dist)
    seq = greedy_admissible(dist, alpha, s0)
    if s0 > seq.s_max:
        return 0.0
    return evaluate_gamma(dist, seq, alpha, s0)


def _subsets(m: int, max_size: int):
    for k in range(1, min(max_size, m) + 1):
        yield from itertools.combinations(range(m), k)


def gamma_bruteforce(dist: Distances, alpha: float = 2.0, s0: int = 0) -> float:
    """Exact infimum over all admissible sequences, by enumeration (m <= 6).

    Every nonempty subset within budget is tried at every level from s0 to
    s_max; levels are not required to be nested.
    """
    if not callable(dist) and isinstance(dist, np.ndarray):
        dist = validate_space(dist)
    m = _n_points(dist)
    if m > BRUTEFORCE_MAX_POINTS:
        raise ValueError(f"brute force is limited to {BRUTEFORCE_MAX_POINTS} points, got {m}")
    top = s_max_for(m)
    if s0 > top:
        return 0.0
    acc = np.zeros((1, m))
    for s in range(s0, top + 1):
        d = _level_matrix(dist, s)
        rows = np.array([d[:, list(sub)].min(axis=1) for sub in _subsets(m, level_budget(s))])
        acc = (acc[:, None, :] + 2.0 ** (s / alpha) * rows[None, :, :]).reshape(-1, m)
    return float(acc.max(axis=1).min())
