"""Simulators for empirical, multiplier, product and Bernoulli processes.

Classes are finite sets of linear functionals ``f_t = <t, .>`` given as the
rows of ``T``; X has i.i.d. mean-zero, unit-variance coordinates, so
``E f = 0`` and ``E f_t f_s = <t, s>``. All sups use the 1/N normalisation
of the empirical means; callers rescale.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from . import distributions
from .seeding import stream


@dataclass(frozen=True)
class EnsembleSpec:
    """Law of the coordinates of X and the dimension n."""

    kind: str
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be positive")
        distributions.by_name(self.kind)

    @property
    def law(self) -> distributions.Scalar:
        return distributions.by_name(self.kind)

    def draw(self, rng: np.random.Generator, N: int) -> np.ndarray:
        return self.law.sample(rng, (N, self.n))


@dataclass(frozen=True)
class MultiplierSpec:
    """``independent``: xi has law ``law`` and is independent of X.
    ``coordinate``: xi = <X, theta>."""

    kind: str = "independent"
    law: str = "gaussian"
    theta: tuple | None = None

    def __post_init__(self):
        if self.kind not in ("independent", "coordinate"):
            raise ValueError(f"unknown multiplier kind {self.kind!r}")
        if self.kind == "coordinate" and self.theta is None:
            raise ValueError("coordinate multiplier needs theta")
        if self.kind == "independent":
            distributions.by_name(self.law)

    def draw(self, rng: np.random.Generator, X: np.ndarray) -> np.ndarray:
        if self.kind == "coordinate":
            return (X @ np.atleast_2d(np.asarray(self.theta, dtype=float)).T)[:, 0]
        return distributions.by_name(self.law).sample(rng, X.shape[0])

    def means(self, T: np.ndarray) -> np.ndarray:
        """E xi f_t for every row t."""
        if self.kind == "coordinate":
            return np.sum(T * np.asarray(self.theta, dtype=float), axis=1)
        return np.zeros(len(T))


def _rows(T) -> np.ndarray:
    return np.atleast_2d(np.asarray(T, dtype=float))


def evaluate(T, X: np.ndarray) -> np.ndarray:
    """N x m matrix of f_t(X_i)."""
    return X @ _rows(T).T


def sample_projection(T, ens: EnsembleSpec, N: int, seed: int) -> np.ndarray:
    """(f(X_i))_{i <= N} for every f in the class, as an N x m matrix."""
    return evaluate(T, ens.draw(stream(seed, "projection"), N))


def empirical_sup_of(V: np.ndarray) -> float:
    return float(np.abs(V.mean(axis=0)).max())


def multiplier_sup_of(V: np.ndarray, xi: np.ndarray, means: np.ndarray) -> float:
    return float(np.abs((xi[:, None] * V).mean(axis=0) - means).max())


def product_sup_of(VF: np.ndarray, VH: np.ndarray, TF, TH) -> float:
    G = VF.T @ VH / VF.shape[0] - _rows(TF) @ _rows(TH).T
    return float(np.abs(G).max())


def quadratic_sup_of(V: np.ndarray, T) -> float:
    T = _rows(T)
    return float(np.abs((V * V).mean(axis=0) - np.sum(T * T, axis=1)).max())


def empirical_sup(T, ens: EnsembleSpec, N: int, seed: int) -> float:
    """sup_f |(1/N) sum f(X_i) - E f| with E f = 0."""
    return empirical_sup_of(sample_projection(T, ens, N, seed))


def multiplier_sup(T, ens: EnsembleSpec, mult: MultiplierSpec, N: int, seed: int) -> float:
    rng = stream(seed, "projection")
    X = ens.draw(rng, N)
    return multiplier_sup_of(evaluate(T, X), mult.draw(rng, X), mult.means(_rows(T)))


def product_sup(TF, TH, ens: EnsembleSpec, N: int, seed: int) -> float:
    X = ens.draw(stream(seed, "projection"), N)
    return product_sup_of(evaluate(TF, X), evaluate(TH, X), TF, TH)


def quadratic_sup(T, ens: EnsembleSpec, N: int, seed: int) -> float:
    return quadratic_sup_of(sample_projection(T, ens, N, seed), T)


def bernoulli_multiplier_sup(V, z, eps) -> np.ndarray | float:
    """sup_v |sum eps_i z_i v_i| for one sign vector or a stack of them."""
    V = _rows(V)
    eps = np.asarray(eps, dtype=float)
    out = np.abs(np.atleast_2d(eps) @ (V * np.asarray(z, dtype=float)).T).max(axis=1)
    return float(out[0]) if eps.ndim == 1 else out


def all_signs(N: int) -> np.ndarray:
    if N > 20:
        raise ValueError("exhaustive enumeration is limited to N <= 20")
    bits = (np.arange(2 ** N)[:, None] >> np.arange(N)[None, :]) & 1
    return 2.0 * bits - 1.0


def exhaustive_bernoulli_sups(V, z) -> np.ndarray:
    """Sup of the Bernoulli multiplier process at every sign vector."""
    return bernoulli_multiplier_sup(V, z, all_signs(np.asarray(z).size))


def exhaustive_bernoulli_quantiles(V, z, levels: Sequence[float] = (0.5, 0.9, 0.99)) -> np.ndarray:
    if np.asarray(z).size > 12:
        raise ValueError("exhaustive quantiles are limited to N <= 12")
    return np.quantile(exhaustive_bernoulli_sups(V, z), levels, method="inverted_cdf")


def bernoulli_agreement(V, z, draws: int, seed: int, levels: Sequence[float] = (0.5, 0.9, 0.99),
                        confidence: float = 0.99) -> list[dict]:
    """Monte Carlo quantiles against binomial bands of the exact law."""
    exact = exhaustive_bernoulli_sups(V, z)
    eps = 2.0 * stream(seed, "bernoulli").integers(0, 2, size=(draws, exact.size.bit_length() - 1)) - 1.0
    mc = bernoulli_multiplier_sup(V, z, eps)
    a = (1 - confidence) / 2
    rows = []
    for p in levels:
        lo = stats.binom.ppf(a, draws, p) / draws
        hi = min((stats.binom.ppf(1 - a, draws, p) + 1) / draws, 1.0)
        q_lo, q_hi = np.quantile(exact, [max(lo, 1e-12), hi], method="inverted_cdf")
        q_mc = float(np.quantile(mc, p, method="inverted_cdf"))
        rows.append({"level": p, "exact": float(np.quantile(exact, p, method="inverted_cdf")),
                     "mc": q_mc, "band_lo": float(q_lo), "band_hi": float(q_hi),
                     "passed": bool(q_lo <= q_mc <= q_hi)})
    return rows


def symmetrization_check(T, ens: EnsembleSpec, N: int, x_grid: Sequence[float] | None,
                         trials: int, seed: int) -> list[dict]:
    """Both sides of the in-probability symmetrization inequality.

    Per x: LHS = (1 - 4N sup var / x^2) Pr(sup |sum Z_f(i)| > x) and
    RHS = min(1, 2 Pr(sup |sum eps_i Z_f(i)| > x/4)); a row passes when
    LHS <= RHS + 3 joint standard errors. Rows with a nonpositive variance
    factor are vacuous and marked skipped.
    """
    T = _rows(T)
    raw = np.empty(trials)
    sym = np.empty(trials)
    for k in range(trials):
        rng = stream(seed, "symmetrization", k)
        V = evaluate(T, ens.draw(rng, N))
        eps = 2.0 * rng.integers(0, 2, size=N) - 1.0
        raw[k] = np.abs(V.sum(axis=0)).max()
        sym[k] = np.abs(eps @ V).max()
    sup_var = float(np.sum(T * T, axis=1).max())
    if x_grid is None:
        x_grid = np.linspace(0.5, 3.0, 8) * float(np.median(raw))
    rows = []
    for x in x_grid:
        factor = 1.0 - 4.0 * N * sup_var / x ** 2 if x > 0 else -math.inf
        p_l = float(np.mean(raw > x))
        p_r = float(np.mean(sym > x / 4))
        rhs = min(1.0, 2.0 * p_r)
        row = {"x": float(x), "factor": factor, "p_sup": p_l, "p_sym": p_r, "rhs": rhs,
               "trials": trials, "N": N}
        if factor <= 0:
            row.update(lhs=math.nan, joint_se=math.nan, status="skipped")
        else:
            lhs = factor * p_l
            se = math.sqrt(factor ** 2 * p_l * (1 - p_l) / trials + 4 * p_r * (1 - p_r) / trials)
            row.update(lhs=lhs, joint_se=se, status="pass" if lhs <= rhs + 3 * se else "fail")
        rows.append(row)
    return rows


def run_trials(fn: Callable[[int], dict], n: int, threads: int = 1, start: int = 0) -> list[dict]:
    """Apply ``fn`` to trial indices start..start+n-1, keeping index order."""
    idx = range(start, start + n)
    if threads <= 1:
        return [fn(k) for k in idx]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, idx))
