"""Scalar laws with exact L_q norms.

Every law used as a coordinate of X or as a multiplier is mean zero with
unit variance, so a vector of i.i.d. copies is isotropic. The heavy-tailed
laws are indexed by the moment order ``q`` they must have: ``pareto(q)``
is a symmetric Pareto with tail index ``q + margin`` and ``student(q)`` a
Student t with ``q + margin`` degrees of freedom, so L_q is finite and
L_{q + margin} is not.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from . import norms

HEAVY_TAIL_MARGIN = 0.5


@dataclass(frozen=True)
class Scalar:
    name: str
    draw: Callable[[np.random.Generator, tuple], np.ndarray]
    moment: Callable[[float], float]
    tail_index: float = math.inf

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return self.draw(rng, size if isinstance(size, tuple) else (size,))

    def lq(self, q: float) -> float:
        if q >= self.tail_index:
            return math.inf
        return float(self.moment(q))

    def graded(self, p: float) -> float:
        """Exact (p)-norm, sup over q <= p of L_q / sqrt(q)."""
        if p >= self.tail_index:
            return math.inf
        return _graded_cached(self, float(p))

    def psi2(self) -> float:
        """Moment surrogate of the psi_2 norm (grid up to q = 64)."""
        return norms.psi_alpha_estimate(norms.profile_from_moments(self.lq, 64.0), 2.0)

    def power(self, k: float) -> "Scalar":
        """Law of |X|^k."""
        return Scalar(f"|{self.name}|^{k:g}",
                      lambda rng, size: np.abs(self.draw(rng, size)) ** k,
                      lambda q: self.lq(k * q) ** k,
                      self.tail_index / k)


@lru_cache(maxsize=256)
def _graded_cached(dist: Scalar, p: float) -> float:
    return norms.graded_norm(norms.profile_from_moments(dist.lq, max(p, 2.0)), p)


def gaussian() -> Scalar:
    return Scalar("gaussian", lambda rng, size: rng.standard_normal(size), norms.gaussian_moment)


def rademacher() -> Scalar:
    return Scalar("rademacher",
                  lambda rng, size: 2.0 * rng.integers(0, 2, size=size) - 1.0,
                  lambda q: 1.0)


def exponential(centered: bool = True) -> Scalar:
    """Exp(1) - 1 (centred, unit variance) or the raw Exp(1) law."""
    if not centered:
        return Scalar("exp", lambda rng, size: rng.standard_exponential(size),
                      norms.exponential_moment)
    return Scalar("exponential",
                  lambda rng, size: rng.standard_exponential(size) - 1.0,
                  _centered_exp_moment)


@lru_cache(maxsize=512)
def _centered_exp_moment(q: float) -> float:
    # E|Y-1|^q = int_0^1 (1-y)^q e^-y dy + e^-1 Gamma(q+1)
    head, _ = integrate.quad(lambda y: (1.0 - y) ** q * math.exp(-y), 0.0, 1.0)
    return (head + math.exp(gammaln(q + 1) - 1.0)) ** (1.0 / q)


def laplace() -> Scalar:
    b = 1.0 / math.sqrt(2.0)
    return Scalar("laplace", lambda rng, size: rng.laplace(0.0, b, size),
                  lambda q: b * math.exp(gammaln(q + 1) / q))


def pareto(q: float, margin: float = HEAVY_TAIL_MARGIN) -> Scalar:
    a = q + margin
    if a <= 2:
        raise ValueError("pareto needs q + margin > 2 for unit variance")
    sd = math.sqrt(a / (a - 2))

    def draw(rng, size):
        mag = (1.0 - rng.random(size)) ** (-1.0 / a)
        sign = 2.0 * rng.integers(0, 2, size=size) - 1.0
        return sign * mag / sd

    return Scalar(f"pareto({q:g})", draw, lambda s: (a / (a - s)) ** (1.0 / s) / sd, a)


def student(q: float, margin: float = HEAVY_TAIL_MARGIN) -> Scalar:
    nu = q + margin
    if nu <= 2:
        raise ValueError("student needs q + margin > 2 for unit variance")
    sd = math.sqrt(nu / (nu - 2))

    def moment(s):
        log_m = (0.5 * s * math.log(nu) + gammaln((s + 1) / 2) + gammaln((nu - s) / 2)
                 - 0.5 * math.log(math.pi) - gammaln(nu / 2))
        return math.exp(log_m / s) / sd

    return Scalar(f"student({q:g})", lambda rng, size: rng.standard_t(nu, size) / sd, moment, nu)


_FACTORIES = {"gaussian": gaussian, "rademacher": rademacher, "exponential": exponential,
              "laplace": laplace}
_PARAM = re.compile(r"^(pareto|student)\(\s*([0-9.eE+-]+)\s*\)$")


def by_name(name: str) -> Scalar:
    """``gaussian``, ``rademacher``, ``exponential``, ``laplace``,
    ``pareto(q)`` or ``student(q)``."""
    key = name.strip().lower()
    if key in _FACTORIES:
        return _FACTORIES[key]()
    m = _PARAM.match(key)
    if m is None:
        raise ValueError(f"unknown law {name!r}")
    q = float(m.group(2))
    if q <= 2:
        raise ValueError(f"{m.group(1)} needs q > 2")
    return (pareto if m.group(1) == "pareto" else student)(q)
