import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from chainbounds import projection as proj
from chainbounds.seeding import stream


def _instance(seed, overlap=True):
    rng = stream(seed, "test:instance")
    N = int(rng.integers(2, 25))
    m = int(rng.integers(1, 6))
    L = int(rng.integers(0, 4))
    s0 = int(rng.integers(0, L + 1))
    V = rng.standard_normal((m, N)) * rng.exponential(1.0, (m, N))
    pi = [rng.integers(0, m, size=m) for _ in range(L)] + [np.arange(m)]
    j = np.sort(rng.integers(1, N + 2, size=L + 1))
    return proj.tight_instance(V, pi, s0, j, overlap=overlap)


seeds = st.integers(0, 2 ** 32)


@given(seeds)
def test_tight_instances_satisfy_both_assumptions(seed):
    b = _instance(seed)
    assert proj.check_assumption_B(b).passed
    a = _instance(seed, overlap=False)
    assert all(proj.check_assumption_A(a, p).passed for p in (1, 2))


@given(seeds)
def test_radius_bound_holds(seed):
    rb = proj.ell2_radius_bound(_instance(seed))
    assert rb.precondition and rb.passed
    assert rb.lhs <= rb.rhs * (1 + 1e-9)


def test_halved_seminorms_are_caught():
    V = np.array([[3.0, -1.0, 2.0, 0.5], [1.0, 1.0, -4.0, 0.0]])
    pc = proj.tight_instance(V, [[0, 0], [0, 1]], 0, [2, 3])
    pc.base = pc.base / 2
    res = proj.check_assumption_B(pc)
    assert not res.passed
    w = res.witness
    assert w["lhs"] > w["rhs"] and {"inequality", "s", "v", "p"} <= set(w)


def test_halved_brackets_fail_assumption_a():
    V = np.array([[3.0, -1.0, 2.0, 0.5]])
    pc = proj.tight_instance(V, [[0], [0]], 0, [2, 3], overlap=False)
    pc.pi_bracket = pc.pi_bracket / 2
    res = proj.check_assumption_A(pc, 1)
    assert not res.passed and res.witness["inequality"] == "pi head"


def test_singleton_and_zero_classes():
    pc = proj.tight_instance(np.array([[1.0, -2.0, 2.0]]), [[0]], 0, [1])
    cx = proj.projection_complexity(pc)
    assert cx.Lambda_V == 0.0 and cx.s_1 == 1
    assert cx.d_V == pytest.approx(max(math.sqrt(9 / 3), (33 / 3) ** 0.25))
    rb = proj.ell2_radius_bound(pc)
    assert rb.passed and rb.lhs == pytest.approx(3.0)
    z = proj.tight_instance(np.zeros((2, 5)), [[0, 0], [0, 1]], 0, [3, 6])
    assert proj.projection_complexity(z) == (0.0, 0.0, 0.0, 1)
    assert proj.ell2_radius_bound(z).passed


def test_first_full_level():
    V = np.ones((1, 3))
    assert proj.first_full_level(proj.tight_instance(V, [[0]] * 4, 0, [1, 2, 4, 4])) == 2
    assert proj.first_full_level(proj.tight_instance(V, [[0]] * 3, 0, [1, 2, 3])) == 2
    assert proj.first_full_level(proj.tight_instance(V, [[0]] * 2, 1, [1, 2])) == 2


def test_invalid_instances_rejected():
    V = np.ones((2, 3))
    with pytest.raises(ValueError):
        proj.tight_instance(V, [[0, 0], [1, 0]], 0, [1, 2])
    with pytest.raises(ValueError):
        proj.tight_instance(V, [[0, 0], [0, 1]], 0, [3, 2])
    with pytest.raises(ValueError):
        proj.tight_instance(V, [[0, 0], [0, 1]], 0, [1, 9])


@given(seeds)
def test_json_round_trip(seed):
    pc = _instance(seed)
    back = proj.ProjectedClass.from_json(pc.to_json())
    assert back.to_json() == pc.to_json()
    assert proj.projection_complexity(back) == proj.projection_complexity(pc)


def test_holder_examples():
    h = proj.holder_split([1.0, 1.0], [1.0, 1.0], 1, 2.0)
    assert h == (2.0, 1.0, 1.0, 1.0)
    h = proj.holder_split([1.0, 0.0], [0.0, 1.0], 1, 2.0)
    assert h.head_exact == 0.0 and h.tail_exact == 0.0 and h.head_bound == 2.0
    h = proj.holder_split([2.0, 3.0], [1.0, 5.0], 0, 4.0)
    assert h.head_bound == 0.0 and h.tail_exact == pytest.approx(math.hypot(2, 15))
    with pytest.raises(ValueError):
        proj.holder_split([1.0], [1.0, 2.0], 1, 2.0)
    with pytest.raises(ValueError):
        proj.holder_split([1.0], [1.0], 1, 1.0)


@given(st.integers(1, 30), st.data())
def test_holder_bounds(N, data):
    rng = stream(data.draw(seeds), "test:holder")
    w = rng.standard_normal(N) * rng.exponential(1.0, N) ** 2
    v = rng.standard_normal(N) * rng.exponential(1.0, N) ** 2
    k = data.draw(st.integers(0, N))
    r = data.draw(st.sampled_from([4 / 3, 2.0, 3.0, 8.0]))
    h = proj.holder_split(w, v, k, r)
    assert h.head_exact <= h.head_bound * (1 + 1e-12)
    assert h.tail_exact <= h.tail_bound * (1 + 1e-12)


def test_multiplier_rhs_example():
    rhs = proj.multiplier_bound_rhs([3.0, 4.0], 1.0, 1.0, 2, 2.0, 1.0)
    assert rhs == pytest.approx(10 + 3 * 2 ** 0.25)
    assert proj.multiplier_bound_rhs([3.0, 4.0], 1.0, 1.0, 3, 2.0, 5.0) == pytest.approx(10)


@given(st.floats(0.1, 10), st.floats(0.1, 10))
def test_rhs_scaling(lam, c2):
    z = np.array([1.0, -2.0, 0.5, 3.0])
    base = proj.multiplier_bound_rhs(z, 1.5, 0.7, 2, 2.0, 3.0)
    assert proj.multiplier_bound_rhs(lam * z, 1.5, 0.7, 2, 2.0, 3.0) == pytest.approx(lam * base)
    args = (1.0, 2.0, 0.5, 0.3, 0.8, 1.1)
    p1 = proj.product_bound_rhs(*args, 64, 2.0)
    assert proj.product_bound_rhs(*(lam * a for a in args), 64, 2.0) == pytest.approx(lam ** 2 * p1)
    assert proj.product_bound_rhs(*args, 64, 2.0, c2=c2) == pytest.approx(c2 * p1)
