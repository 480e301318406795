"""Moment norms of scalar random variables.

Empirical and analytic L_q norms, the graded norm

    ||Z||_(p) = sup_{1 <= q <= p} ||Z||_{L_q} / sqrt(q),

a moment-based psi_alpha surrogate, and closed-form surrogates for linear
functionals of a vector with i.i.d. standard exponential coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import gammaln

DEFAULT_Q_CAP = 64.0
GRID_RATIO = 1.1


def _as_sample(values) -> np.ndarray:
    x = np.asarray(values, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("sample must contain at least one value")
    if not np.all(np.isfinite(x)):
        raise ValueError("sample contains non-finite values")
    return x


def empirical_lq(values, q: float, q_cap: float = DEFAULT_Q_CAP) -> float:
    """((1/N) sum |x_i|^q)^(1/q), computed after scaling by max |x_i|.

    Orders above ``q_cap`` are refused: the moment estimator is useless
    there at any realistic sample size.
    """
    if q < 1:
        raise ValueError(f"moment order must be >= 1, got {q}")
    if q > q_cap:
        raise ValueError(f"moment order {q} exceeds the configured cap {q_cap}")
    x = np.abs(_as_sample(values))
    top = x.max()
    if top == 0.0:
        return 0.0
    out = top * float(np.mean((x / top) ** q)) ** (1.0 / q)
    if not np.isfinite(out):
        raise OverflowError(f"L_{q} norm is not representable")
    return out


def gaussian_moment(q: float) -> float:
    """||g||_{L_q} for a standard gaussian g."""
    return float(np.sqrt(2.0) * np.exp((gammaln((q + 1) / 2) - 0.5 * np.log(np.pi)) / q))


def exponential_moment(q: float) -> float:
    """||y||_{L_q} for a standard exponential y, i.e. Gamma(q+1)^(1/q)."""
    return float(np.exp(gammaln(q + 1) / q))


def q_grid(p_max: float, ratio: float = GRID_RATIO, extra: Sequence[float] = ()) -> np.ndarray:
    """Geometric grid on [1, p_max] that always contains 1, 2 and p_max."""
    if p_max < 2:
        raise ValueError("p_max must be at least 2")
    if not 1.0 < ratio <= GRID_RATIO:
        raise ValueError(f"grid ratio must lie in (1, {GRID_RATIO}]")
    n = int(np.floor(np.log(p_max) / np.log(ratio))) + 1
    pts = ratio ** np.arange(n)
    pts = np.concatenate([pts, [1.0, 2.0, p_max], np.asarray(extra, dtype=float)])
    pts = pts[(pts >= 1.0) & (pts <= p_max)]
    return np.unique(pts)


@dataclass(frozen=True)
class GradedNormProfile:
    """L_q values of one random variable on a q-grid.

    ``lq_at`` evaluates the same L_q norm off the grid; it is used for the
    mandatory point q = p and for the local refinement of the supremum.
    """

    qs: np.ndarray
    lq: np.ndarray
    lq_at: Callable[[float], float]

    @property
    def p_max(self) -> float:
        return float(self.qs[-1])

    def graded(self, p: float) -> float:
        return graded_norm(self, p)


def profile_from_sample(values, p_max: float = 16.0, ratio: float = GRID_RATIO,
                        q_cap: float = DEFAULT_Q_CAP) -> GradedNormProfile:
    x = _as_sample(values)
    if p_max > q_cap:
        raise ValueError(f"p_max={p_max} exceeds the empirical moment cap {q_cap}")
    qs = q_grid(p_max, ratio)

    def lq_at(q: float) -> float:
        return empirical_lq(x, q, q_cap)

    return GradedNormProfile(qs, np.array([lq_at(q) for q in qs]), lq_at)


def profile_from_moments(lq_at: Callable[[float], float], p_max: float,
                         ratio: float = GRID_RATIO) -> GradedNormProfile:
    qs = q_grid(p_max, ratio)
    return GradedNormProfile(qs, np.array([lq_at(q) for q in qs]), lq_at)


def _sup_ratio(profile: GradedNormProfile, p: float, exponent: float) -> float:
    # max of L_q / q**exponent over grid points in [1, p] plus p itself,
    # then a bounded 1-d refinement between the neighbours of the best point
    mask = profile.qs <= p
    qs = profile.qs[mask]
    lq = profile.lq[mask]
    if qs[-1] != p:
        qs = np.append(qs, p)
        lq = np.append(lq, profile.lq_at(p))
    vals = lq / qs ** exponent
    k = int(np.argmax(vals))
    best = float(vals[k])
    if best == 0.0:
        return 0.0
    lo = qs[max(k - 1, 0)]
    hi = qs[min(k + 1, len(qs) - 1)]
    if hi > lo:
        res = minimize_scalar(lambda q: -profile.lq_at(q) / q ** exponent,
                              bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-10})
        best = max(best, float(-res.fun))
    return best


def graded_norm(profile: GradedNormProfile, p: float) -> float:
    """sup_{1 <= q <= p} L_q / sqrt(q) evaluated on the profile."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if p > profile.p_max * (1 + 1e-12):
        raise ValueError(f"p={p} exceeds the profile grid (p_max={profile.p_max})")
    return _sup_ratio(profile, min(p, profile.p_max), 0.5)


def psi_alpha_estimate(profile: GradedNormProfile, alpha: float) -> float:
    """Moment surrogate sup_q L_q / q^(1/alpha) over the whole grid.

    Equivalent to the Orlicz psi_alpha norm only up to absolute constants.
    """
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    if profile.p_max < 16:
        raise ValueError("psi_alpha estimate needs a grid reaching at least q = 16")
    return _sup_ratio(profile, profile.p_max, 1.0 / alpha)


def gk_moment(t, p: float) -> float:
    """p ||t||_inf + sqrt(p) ||t||_2, the two-sided size of ||<t,Y>||_{L_p}."""
    t = np.asarray(t, dtype=float)
    if p < 1:
        raise ValueError("p must be >= 1")
    if t.size == 0:
        return 0.0
    return float(p * np.max(np.abs(t)) + np.sqrt(p) * np.linalg.norm(t))


def graded_norm_exponential(t, p: float) -> float:
    """sqrt(p) ||t||_inf + ||t||_2, the (p)-norm surrogate of <t,Y>."""
    t = np.asarray(t, dtype=float)
    if p < 1:
        raise ValueError("p must be >= 1")
    if t.size == 0:
        return 0.0
    return float(np.sqrt(p) * np.max(np.abs(t)) + np.linalg.norm(t))
