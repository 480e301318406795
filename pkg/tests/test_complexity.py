import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from chainbounds import chaining, complexity, norms
from chainbounds.complexity import ConfigError, LinearClass

classes = arrays(np.float64, st.tuples(st.integers(1, 5), st.integers(1, 4)),
                 elements=st.floats(-5, 5, allow_nan=False))


def test_class_validation():
    with pytest.raises(ConfigError):
        LinearClass([[np.nan, 1.0]])
    with pytest.raises(ConfigError):
        LinearClass([[1.0]], "cauchy")
    with pytest.raises(ConfigError):
        LinearClass([[1.0]], "empirical")
    with pytest.raises(ConfigError):
        LinearClass([[1.0, 2.0]], "empirical", sample=np.ones((3, 3)))


@pytest.mark.parametrize("ens", ["gaussian", "exponential", "laplace", "rademacher"])
def test_singleton_class(ens):
    t = np.array([[1.0, -2.0, 0.5]])
    F = LinearClass(t, ens)
    assert complexity.lambda_upper(F, 0, 4) == 0.0
    assert complexity.lambda_bruteforce(F, 0, 4) == 0.0
    for s0 in (0, 1, 2):
        expect = 2 ** (s0 / 2) * complexity.graded_norms(F, t, 16 * 2 ** s0)[0]
        assert complexity.lambda_tilde(F, s0, 4) == pytest.approx(expect, rel=1e-14)


@pytest.mark.parametrize("u", [4.0, 8.0])
def test_two_point_exponential_class(u):
    t = np.array([0.3, -1.2, 0.7])
    F = LinearClass(np.vstack([np.zeros(3), t]), "exponential")
    # one surviving term: the (u^2)-distance between the two members
    expect = u * np.abs(t).max() + np.linalg.norm(t)
    assert complexity.lambda_upper(F, 0, u) == pytest.approx(expect, rel=1e-14)
    assert complexity.lambda_bruteforce(F, 0, u) == pytest.approx(expect, rel=1e-14)
    assert complexity.lambda_upper(F, 1, u) == 0.0


def test_gaussian_graded_factor_is_mean_abs():
    # mu_q / sqrt(q) decreases in q, so the sup sits at q = 1
    for p in (1, 4, 64, 1024):
        assert complexity._gaussian_graded_factor(float(p)) == pytest.approx(math.sqrt(2 / math.pi), rel=1e-12)


def test_empirical_ensemble_uses_sample():
    rng = np.random.default_rng(0)
    S = rng.choice([-1.0, 1.0], size=(5000, 3))
    F = LinearClass(np.eye(3), "empirical", sample=S)
    vals = complexity.graded_norms(F, np.eye(3), 8)
    assert np.allclose(vals, 1.0)


def test_empirical_refuses_out_of_range_orders():
    F = LinearClass(np.eye(2), "empirical", sample=np.ones((10, 2)))
    with pytest.raises(ConfigError):
        complexity.graded_norms(F, np.eye(2), 200.0)


@given(classes, st.sampled_from(["gaussian", "exponential"]), st.integers(0, 2))
def test_dominance_and_ordering(T, ens, s0):
    F = LinearClass(T, ens)
    up = complexity.lambda_upper(F, s0)
    assert up >= complexity.lambda_bruteforce(F, s0) - 1e-12
    assert complexity.lambda_tilde(F, s0) >= up >= 0


@given(classes, st.sampled_from([2.0, 10.0, 0.25]))
def test_linear_scaling(T, lam):
    F = LinearClass(T, "exponential")
    for fn in (complexity.lambda_upper, complexity.lambda_tilde, complexity.lambda_bruteforce):
        assert fn(F.scaled(lam), 0) == pytest.approx(lam * fn(F, 0), rel=1e-12, abs=1e-300)


@given(classes)
def test_l2_evaluation_below_lambda(T):
    F = LinearClass(T, "gaussian")
    dists, seq = complexity.lambda_sequence(F, 4.0)
    l2 = np.linalg.norm(F.T[:, None] - F.T[None], axis=-1) / math.sqrt(2)
    assert chaining.evaluate_gamma(l2, seq) <= chaining.evaluate_gamma(dists, seq) * (1 + 1e-12) + 1e-12


@given(classes)
def test_gaussian_sandwich_with_l2_gamma(T):
    F = LinearClass(T, "gaussian")
    lam = complexity.lambda_bruteforce(F)
    gam = chaining.gamma_bruteforce(np.linalg.norm(F.T[:, None] - F.T[None], axis=-1))
    if gam == 0:
        assert lam == 0
    else:
        assert 1 / 4 <= lam / gam <= 4


def test_gaussian_width_two_coordinates():
    est, se = complexity.gaussian_width(np.eye(2), 400_000, seed=1)
    assert abs(est - 1 / math.sqrt(math.pi)) <= 3 * se


def test_gaussian_width_symmetric_cross():
    n = 5
    T = np.vstack([np.eye(n), -np.eye(n)])
    est, se = complexity.gaussian_width(T, 200_000, seed=2)
    # oracle: independent Monte Carlo of E max_i |g_i|
    g = np.random.default_rng(99).standard_normal((1_000_000, n))
    oracle = np.abs(g).max(axis=1).mean()
    assert abs(est - oracle) <= 3 * se + 0.003


def test_widths_of_zero_and_scaling():
    assert complexity.gaussian_width(np.zeros((1, 3)), 1000)[0] == 0.0
    assert complexity.exp_mean_width(np.zeros((1, 3)), 1000)[0] == 0.0
    est, se = complexity.exp_mean_width(np.array([[1.0, 0.0]]), 200_000)
    assert abs(est - 1.0) <= 3 * se
    T = np.random.default_rng(3).standard_normal((6, 4))
    a, _ = complexity.exp_mean_width(T, 10_000, seed=5)
    b, _ = complexity.exp_mean_width(3 * T, 10_000, seed=5)
    assert b == pytest.approx(3 * a, rel=1e-12)


def test_s0_heuristic():
    assert complexity.s0_heuristic(LinearClass([[1.0, 0.0]])) == 0
    small = LinearClass(np.vstack([np.eye(8), -np.eye(8)]))
    big = LinearClass(np.vstack([np.eye(256), -np.eye(256)]))
    s_small = complexity.s0_heuristic(small, 20_000)
    s_big = complexity.s0_heuristic(big, 20_000)
    assert s_big > s_small >= 1
    width, _ = complexity.gaussian_width(big.T, 20_000)
    assert s_big == math.floor(2 * math.log2(width))


def test_l2_diameter_exponential_uses_raw_second_moment():
    F = LinearClass([[1.0, 1.0]], "exponential")
    assert complexity.l2_diameter(F) == pytest.approx(math.sqrt(2 + 4))


def test_lambda_rejects_bad_parameters():
    F = LinearClass(np.eye(2))
    with pytest.raises(ConfigError):
        complexity.lambda_upper(F, -1)
    with pytest.raises(ConfigError):
        complexity.lambda_upper(F, 0, 0.5)
    with pytest.raises(ConfigError):
        complexity.lambda_bruteforce(LinearClass(np.eye(7)))


def test_exponential_polytope_ratio_bounded():
    from chainbounds import experiments
    rng = np.random.default_rng(8)
    ratios = [experiments.polytope_ratio(rng.standard_normal((32, 16)) * rng.exponential(1, 16),
                                         mc_samples=5000)["ratio"] for _ in range(5)]
    assert max(ratios) / min(ratios) <= 20
    assert norms.gk_moment([1.0], 1) == 2.0
