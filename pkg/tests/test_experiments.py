import math

import numpy as np
import pytest

from chainbounds import experiments as E
from chainbounds.complexity import ConfigError, LinearClass
from chainbounds.processes import EnsembleSpec, MultiplierSpec

G = EnsembleSpec("gaussian", 6)


def small_class(m=8, seed=0):
    return E.random_gaussian_class(m, 6, seed)


def test_fit_constant_order_statistic():
    r = np.arange(1, 101, dtype=float)
    assert E.fit_constant(r, 0.99) == 99.0
    assert E.fit_constant(r, 1.0) == 100.0
    assert E.fit_constant([5.0], 0.5) == 5.0
    assert E.fit_constant(r[::-1], 0.5) == 50.0


def test_wilson_interval():
    lo, hi = E.wilson_interval(95, 100)
    assert lo < 0.95 < hi and 0.88 < lo < 0.89
    assert E.wilson_interval(0, 10)[0] == 0.0


def test_zero_class_is_always_covered():
    F = LinearClass(np.zeros((1, 6)), "gaussian")
    rep = E.multiplier_theorem_experiment(F, G, MultiplierSpec(law="student(4)"), s0=0, N=64,
                                          trials=(20, 20))
    assert rep.coverage == 1.0 and rep.constant == 0.0
    assert all(t["sup"] == 0.0 for t in rep.trials)


def test_coverage_report_fields():
    rep = E.multiplier_theorem_experiment(small_class(), G, MultiplierSpec(law="student(4)"), s0=1,
                                          N=64, trials=(50, 30), seed=3)
    assert (rep.n_calibration, rep.n_fresh) == (50, 30)
    assert [t["phase"] for t in rep.trials].count("fresh") == 30
    assert rep.wilson_low <= rep.coverage <= rep.wilson_high
    s = rep.summary()
    assert "trials" not in s and s["lambda_tilde"] > 0


def test_coordinate_coupled_multiplier_coverage():
    F = small_class()
    mult = MultiplierSpec("coordinate", theta=tuple(F.T[0] / np.linalg.norm(F.T[0])))
    rep = E.multiplier_theorem_experiment(F, G, mult, s0=1, N=128, trials=(300, 300), seed=1)
    assert rep.coverage >= 0.95 and rep.passed(0.95, 0.9)


def test_quadratic_and_logconcave_run():
    rep = E.quadratic_theorem_experiment(small_class(), None, G, s0=1, N=64, trials=(40, 40))
    assert rep.parameters["diagonal"] and rep.constant > 0
    rep = E.logconcave_quadratic_experiment(small_class().T, N=64, trials=(40, 40), mc_samples=2000)
    assert rep.parameters["ensemble"] == "laplace" and math.isfinite(rep.constant)


def test_scaling_slopes():
    rep = E.subgaussian_corollary_experiment(small_class(), N=64, trials=60, s0=1, mc_samples=2000)
    assert rep.lambda_slope == 1.0
    assert 0.9 <= rep.median_slope <= 1.1


def test_configuration_errors():
    with pytest.raises(ConfigError):
        E.lambda_ensemble("pareto(5)")
    with pytest.raises(ConfigError):
        E.as_class(small_class().T, EnsembleSpec("pareto(5)", 6))
    with pytest.raises(ConfigError):
        E.as_class(small_class().T, EnsembleSpec("gaussian", 5))
    with pytest.raises(ConfigError):
        E.psi2_multiplier_experiment(small_class(), G, u=4)
    with pytest.raises(ConfigError):
        E.quadratic_theorem_experiment(small_class(), None, G, q=2)
    with pytest.raises(ConfigError):
        E.multiplier_theorem_experiment(small_class(), G, MultiplierSpec(), trials=(0, 5))
    assert E.lambda_ensemble("exponential") == "laplace"


def test_multiplier_cutoff_and_exponents():
    assert E.multiplier_cutoff(0, 1.0, 10 ** 6) == 1
    assert E.multiplier_cutoff(20, 8.0, 1000) == 1001
    ex = E.multiplier_exponents(4.0)
    assert ex["r"] == pytest.approx(1.5)
    assert E.multiplier_exponents(100.0)["r"] == 2.0


def test_polytope_ratio_is_scale_free():
    T = small_class().T
    a = E.polytope_ratio(T, mc_samples=2000)
    b = E.polytope_ratio(3 * T, mc_samples=2000)
    assert a["ratio"] == pytest.approx(b["ratio"], rel=1e-9)


def test_multiplier_q_sweep_reports_each_q():
    reps = E.multiplier_q_sweep(small_class(), G, qs=(3, 6), s0=1, N=64, trials=(40, 40))
    assert [r.parameters["q"] for r in reps] == [3, 6]
    assert [r.parameters["multiplier_law"] for r in reps] == ["student(3)", "student(6)"]
    assert all(r.constant > 0 for r in reps)
