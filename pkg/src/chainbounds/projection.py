"""Deterministic chaining estimates for subsets V of R^N.

A :class:`ProjectedClass` carries a finite ``V`` (rows), a chain of
nearest-point maps ending in the identity, the cutoffs ``j_s`` and the
values of the seminorms that the structural assumptions compare against.
Seminorm values are supplied as tables, so the same checks serve any
choice of norms.

Indexing: levels run over ``s = 0..L``; ``pi[L]`` must be the identity so
that ``v = pi_{s0} v + sum_{s0 <= s < L} Delta_s v`` holds exactly.
``j`` and ``nu`` are full-length arrays indexed by ``s``; entries below
``s0`` are ignored, and ``j_{s0-1}`` is read as ``j_{s0}``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .orderstats import rearrange

REL_TOL = 1e-9


def _head(x: np.ndarray, j: int) -> float:
    a = rearrange(x)
    return math.sqrt(float(np.sum(a[: j - 1] ** 2)))


def _tail(x: np.ndarray, j: int, p: float) -> float:
    a = rearrange(x)[j - 1:]
    if a.size == 0:
        return 0.0
    top = a.max()
    if top == 0.0:
        return 0.0
    return float(top * np.sum((a / top) ** (2 * p)) ** (1.0 / (2 * p)))


def _block(x: np.ndarray, lo: int, hi: int) -> float:
    # coordinates lo..hi-1 (1-based) of the rearrangement
    a = rearrange(x)
    return math.sqrt(float(np.sum(a[lo - 1: hi - 1] ** 2))) if hi > lo else 0.0


def _leq(a: float, b: float) -> bool:
    return a <= b * (1 + REL_TOL) + 1e-300


@dataclass
class ProjectedClass:
    """V with an admissible chain and seminorm tables.

    ``pi``: (L+1, m) indices into V. ``pi_bracket[s, u]`` is
    ``||V[u]||_[s]`` and ``base[u]`` is ``||V[u]||``. ``delta_bracket`` and
    ``delta_base`` (shape (L, m)) hold ``||Delta_s v||_[s]`` and
    ``||Delta_s v||`` for each v.
    """

    V: np.ndarray
    pi: np.ndarray
    s0: int
    j: np.ndarray
    base: np.ndarray
    pi_bracket: np.ndarray
    delta_bracket: np.ndarray
    delta_base: np.ndarray
    nu: np.ndarray

    def __post_init__(self):
        self.V = np.atleast_2d(np.asarray(self.V, dtype=float))
        self.pi = np.atleast_2d(np.asarray(self.pi, dtype=int))
        self.j = np.asarray(self.j, dtype=int)
        for name in ("base", "pi_bracket", "delta_bracket", "delta_base", "nu"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        m, N = self.V.shape
        L = self.L
        if not np.array_equal(self.pi[L], np.arange(m)):
            raise ValueError("the last map must be the identity")
        if self.j.shape != (L + 1,) or self.nu.shape != (L + 1,):
            raise ValueError("j and nu need one entry per level")
        js = self.j[self.s0:]
        if np.any(np.diff(js) < 0) or js.min() < 1 or js.max() > N + 1:
            raise ValueError("j_s must be nondecreasing integers in [1, N+1]")
        if self.pi_bracket.shape != (L + 1, m) or self.base.shape != (m,):
            raise ValueError("seminorm tables have the wrong shape")
        if self.delta_bracket.shape != (L, m) or self.delta_base.shape != (L, m):
            raise ValueError("delta tables need shape (L, m)")
        if self.s0 > L:
            raise ValueError("s0 must not exceed the last level")

    @property
    def L(self) -> int:
        return self.pi.shape[0] - 1

    @property
    def N(self) -> int:
        return self.V.shape[1]

    def j_at(self, s: int) -> int:
        return int(self.j[max(s, self.s0)])

    def delta(self, s: int) -> np.ndarray:
        """Rows Delta_s v = pi_{s+1} v - pi_s v."""
        return self.V[self.pi[s + 1]] - self.V[self.pi[s]]

    def to_json(self) -> str:
        payload = {k: np.asarray(getattr(self, k)).tolist()
                   for k in ("V", "pi", "j", "base", "pi_bracket", "delta_bracket",
                             "delta_base", "nu")}
        payload["s0"] = self.s0
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ProjectedClass":
        d = json.loads(text)
        L = len(d["pi"]) - 1
        m = len(d["V"])
        d["delta_bracket"] = np.asarray(d["delta_bracket"], dtype=float).reshape(L, m)
        d["delta_base"] = np.asarray(d["delta_base"], dtype=float).reshape(L, m)
        return cls(**d)


def tight_instance(V, pi, s0: int, j: Sequence[int], ps: Sequence[float] = (1, 2),
                   overlap: bool = True) -> ProjectedClass:
    """Seminorm tables set to the smallest values the assumptions allow.

    Bracket values equal the head sums, base values the largest normalised
    tail sum over the requested ``ps`` (tails start at ``j_{s-1}`` when
    ``overlap`` is set, else at ``j_s``), and ``nu_s`` the largest block
    sum divided by d(V).
    """
    V = np.atleast_2d(np.asarray(V, dtype=float))
    pi = np.atleast_2d(np.asarray(pi, dtype=int))
    m, N = V.shape
    L = pi.shape[0] - 1
    j = np.asarray(j, dtype=int)
    if j.shape != (L + 1,):
        raise ValueError("j needs one entry per level")
    j = j.copy()
    j[:s0] = j[s0]

    def start(s):
        return int(j[max(s - 1, s0)] if overlap else j[max(s, s0)])

    def base_of(x, s):
        return max(_tail(x, start(s), p) / N ** (1 / (2 * p)) for p in ps)

    base = np.array([max(base_of(V[u], s) for s in range(s0, L + 1)) for u in range(m)])
    pi_bracket = np.zeros((L + 1, m))
    for s in range(L + 1):
        pi_bracket[s] = [_head(V[u], j[max(s, s0)]) for u in range(m)]
    delta_bracket = np.zeros((L, m))
    delta_base = np.zeros((L, m))
    for s in range(L):
        D = V[pi[s + 1]] - V[pi[s]]
        delta_bracket[s] = [_head(x, j[max(s, s0)]) for x in D]
        delta_base[s] = [base_of(x, s) for x in D]
    dV = float(base.max())
    nu = np.zeros(L + 1)
    for s in range(s0, L + 1):
        blk = max(_block(V[pi[s, v]], start(s), int(j[s])) for v in range(m))
        nu[s] = blk / dV if dV > 0 else 0.0
    return ProjectedClass(V, pi, s0, j, base, pi_bracket, delta_bracket, delta_base, nu)


class ProjectionComplexity(NamedTuple):
    Lambda_V: float
    Theta_V: float
    d_V: float
    s_1: int


def first_full_level(pc: ProjectedClass) -> int:
    """First s > s0 with j_s = N+1; the terminal level when the cutoffs never
    reach N+1 (past it every Delta_s vanishes); s0+1 if the chain has no
    level beyond s0."""
    for s in range(pc.s0 + 1, pc.L + 1):
        if pc.j[s] == pc.N + 1:
            return s
    return max(pc.L, pc.s0 + 1)


def projection_complexity(pc: ProjectedClass) -> ProjectionComplexity:
    s0 = pc.s0
    lam = np.array([pc.delta_bracket[s0:, v].sum() + pc.pi_bracket[s0, pc.pi[s0, v]]
                    for v in range(len(pc.V))])
    w = 2.0 ** (np.arange(s0, pc.L) / 2)
    theta = np.array([float(w @ pc.delta_base[s0:, v]) + 2.0 ** (s0 / 2) * pc.base[pc.pi[s0, v]]
                      for v in range(len(pc.V))])
    return ProjectionComplexity(float(lam.max()), float(theta.max()), float(pc.base.max()),
                                first_full_level(pc))


class AssumptionCheck(NamedTuple):
    passed: bool
    witness: dict | None


def _scan(pc: ProjectedClass, p: float, overlap: bool) -> AssumptionCheck:
    N = pc.N
    scale = N ** (1.0 / (2 * p))
    for s in range(pc.s0, pc.L + 1):
        js = pc.j_at(s)
        jt = pc.j_at(s - 1) if overlap else js
        D = pc.delta(s) if s < pc.L else np.zeros_like(pc.V)
        for v in range(len(pc.V)):
            u = int(pc.pi[s, v])
            checks = [("pi head", _head(pc.V[u], js), pc.pi_bracket[s, u]),
                      ("pi tail", _tail(pc.V[u], jt, p), pc.base[u] * scale)]
            if s < pc.L:
                checks += [("delta head", _head(D[v], js), pc.delta_bracket[s, v]),
                           ("delta tail", _tail(D[v], jt, p), pc.delta_base[s, v] * scale)]
            if overlap:
                checks.append(("pi block", _block(pc.V[u], jt, js), pc.base.max() * pc.nu[s]))
            for name, lhs, rhs in checks:
                if not _leq(lhs, rhs):
                    return AssumptionCheck(False, {"inequality": name, "s": s, "v": v, "p": p,
                                                   "lhs": lhs, "rhs": rhs})
    return AssumptionCheck(True, None)


def check_assumption_A(pc: ProjectedClass, p: float) -> AssumptionCheck:
    """Head sums below j_s and 2p-tails from j_s, for Delta_s v and pi_s v."""
    return _scan(pc, p, overlap=False)


def check_assumption_B(pc: ProjectedClass, ps: Sequence[float] = (1, 2)) -> AssumptionCheck:
    """Tails from j_{s-1} (with j_{s0-1} = j_{s0}) plus the nu_s block bound."""
    for p in ps:
        res = _scan(pc, p, overlap=True)
        if not res.passed:
            return res
    return AssumptionCheck(True, None)


class RadiusBound(NamedTuple):
    lhs: float
    rhs: float
    passed: bool
    precondition: bool


def ell2_radius_bound(pc: ProjectedClass) -> RadiusBound:
    """sup_v ||v||_2 against Lambda(V) + d(V) (sqrt(N) + sum_{s0 <= s < s1} nu_s)."""
    cx = projection_complexity(pc)
    lhs = float(np.linalg.norm(pc.V, axis=1).max())
    nu_sum = math.fsum(pc.nu[pc.s0: min(cx.s_1, pc.L + 1)])
    rhs = cx.Lambda_V + cx.d_V * (math.sqrt(pc.N) + nu_sum)
    pre = check_assumption_B(pc, ps=(1,)).passed
    return RadiusBound(lhs, rhs, _leq(lhs, rhs), pre)


class HolderSplit(NamedTuple):
    head_bound: float
    tail_bound: float
    head_exact: float
    tail_exact: float


def holder_split(w, v, k: int, r: float) -> HolderSplit:
    """Head/tail split of sum |w_i v_i| over I = top-k(|w|) U top-k(|v|).

    Bounds: head 2 ||w*_{<=k}||_2 ||v*_{<=k}||_2 and tail
    ||w*_{>k}||_{2r} ||v*_{>k}||_{2r'}; exact values are the sums over I
    and over its complement.
    """
    w = np.asarray(w, dtype=float)
    v = np.asarray(v, dtype=float)
    if w.shape != v.shape:
        raise ValueError("w and v must have the same length")
    if r <= 1:
        raise ValueError("r must exceed 1")
    N = w.size
    k = max(0, min(int(k), N))
    rc = r / (r - 1)
    I = np.zeros(N, dtype=bool)
    I[np.argsort(-np.abs(w), kind="stable")[:k]] = True
    I[np.argsort(-np.abs(v), kind="stable")[:k]] = True
    ws, vs = rearrange(w), rearrange(v)
    head = 2.0 * math.sqrt(float(np.sum(ws[:k] ** 2))) * math.sqrt(float(np.sum(vs[:k] ** 2)))
    tail = _lp(ws[k:], 2 * r) * _lp(vs[k:], 2 * rc)
    x = np.abs(w * v)
    return HolderSplit(head, tail, float(np.sum(x[I])), math.sqrt(float(np.sum(x[~I] ** 2))))


def _lp(a: np.ndarray, p: float) -> float:
    if a.size == 0:
        return 0.0
    top = a.max()
    if top == 0.0:
        return 0.0
    return float(top * np.sum((a / top) ** p) ** (1.0 / p))


def multiplier_bound_rhs(z, Lambda: float, Theta: float, j_s0: int, r: float, t: float) -> float:
    """2 ||z||_2 Lambda + t Theta N^(1/2r') (sum_{i >= j_s0} (z*_i)^(2r))^(1/2r)."""
    z = np.asarray(z, dtype=float)
    if r <= 1:
        raise ValueError("r must exceed 1")
    N = z.size
    rc = r / (r - 1)
    tail = _lp(rearrange(z)[j_s0 - 1:], 2 * r)
    return float(2.0 * np.linalg.norm(z) * Lambda + t * Theta * N ** (1.0 / (2 * rc)) * tail)


def product_bound_rhs(Lambda_V: float, Lambda_W: float, Theta_V: float, Theta_W: float,
                      d_V: float, d_W: float, N: int, t: float, c2: float = 1.0) -> float:
    rn = math.sqrt(N)
    return (c2 * (Lambda_V * Lambda_W + rn * (d_W * Lambda_V + d_V * Lambda_W))
            + c2 * t * rn * (d_W * Theta_V + d_V * Theta_W))
