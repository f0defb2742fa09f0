import json
import math

import numpy as np
import pytest
from scipy.special import gammaln

import oracles
from qgevrey.exceptions import InsufficientDataError, NormalizationError
from qgevrey.fps import FormalSeries
from qgevrey.growth import (GrowthModel, PositiveSequence, fit_growth, is_lc, is_mg, membership,
                            parse_generator, preserves_q_and_gevrey_orders, preserves_q_gevrey_order,
                            q_gevrey_order)

P = np.arange(301, dtype=float)


def synthetic(logA, logB, alpha, s, q=2.0, n=301):
    p = np.arange(n, dtype=float)
    lv = logA + p * logB + alpha * gammaln(p + 1) + s * math.log(q) * p * (p - 1) / 2
    lv[0] = 0.0
    return PositiveSequence.custom(lv, "synthetic")


def test_sequence_validation():
    with pytest.raises(NormalizationError):
        PositiveSequence.custom([0.5, 1.0])
    with pytest.raises(ValueError):
        PositiveSequence.custom([0.0, math.nan])
    seq = PositiveSequence.generate("CENTRAL_BINOMIAL", 10)
    assert np.allclose(seq.values, [math.comb(2 * k, k) for k in range(10)])
    assert np.allclose(seq.reciprocal().log_values, -seq.log_values)
    with pytest.raises(ValueError):
        PositiveSequence.generate("NOPE")
    with pytest.raises(ValueError):
        PositiveSequence.generate("Q_FACTORIAL_INV")


def test_generators_against_direct_values():
    q = 2.0
    qf = PositiveSequence.generate("Q_FACTORIAL_INV", 20, q=q, s=2.0)
    assert qf.log_values[15] == pytest.approx(2 * oracles.log_q_factorial(15, 1 / q), rel=1e-13)
    assert PositiveSequence.generate("Q_FACTORIAL", 20, q=q).log_values[15] == pytest.approx(
        oracles.log_q_factorial(15, q), rel=1e-13)
    assert PositiveSequence.generate("GEOMETRIC", 5, A=3.0).values[4] == pytest.approx(81.0)
    assert PositiveSequence.generate("GAMMA_LINEAR", 5, s=2.0).values[3] == pytest.approx(math.gamma(7))


def test_json_round_trip(tmp_path):
    seq = PositiveSequence.generate("FACTORIAL_POW", 25, s=1.5)
    path = tmp_path / "seq.json"
    path.write_text(json.dumps(seq.to_json()))
    back = PositiveSequence.load(path)
    assert np.array_equal(back.log_values, seq.log_values)
    assert set(seq.to_json()) == {"name", "q", "generator", "log_values"}


def test_parse_generator():
    assert parse_generator("FACTORIAL_POW(2)") == ("FACTORIAL_POW", {"s": 2.0})
    assert parse_generator("GEOMETRIC(A=3)") == ("GEOMETRIC", {"A": 3.0})
    assert parse_generator("central_binomial") == ("CENTRAL_BINOMIAL", {})


def test_synthetic_recovery():
    fit = fit_growth(synthetic(0.0, math.log(2), 0.5, 1.0), 2.0)
    assert abs(fit.s - 1.0) <= 1e-3
    assert abs(fit.alpha - 0.5) <= 0.1
    assert abs(fit.logB - math.log(2)) <= 0.05
    assert abs(fit.logA) <= 0.5


def test_constant_sequence_is_exact_zero_model():
    fit = fit_growth(PositiveSequence.custom(np.zeros(100)), 2.0)
    for v in (fit.s, fit.alpha, fit.logB, fit.logA):
        assert abs(v) <= 1e-9


def test_fit_requires_data():
    with pytest.raises(InsufficientDataError):
        fit_growth(PositiveSequence.custom(np.zeros(10)), 2.0)


def test_sklearn_estimator():
    seq = synthetic(0.3, 0.7, 1.0, 0.5)
    X = P.reshape(-1, 1)
    y = seq.log_values
    model = GrowthModel(q=2.0).fit(X, y)
    assert model.s_ == pytest.approx(0.5, abs=1e-6)
    assert model.score(X[5:], y[5:]) > 0.999999
    assert np.allclose(model.predict(X[5:]), y[5:], atol=1e-6)
    assert GrowthModel(q=2.0, fix_s=0.5).get_params()["fix_s"] == 0.5


@pytest.mark.parametrize("gen,params,expected", [
    ("Q_GEVREY", {"s": 1.0}, 1.0),
    ("FACTORIAL_POW", {"s": 3.0}, 0.0),
    ("Q_FACTORIAL", {}, 1.0),
])
def test_q_gevrey_order_examples(gen, params, expected):
    seq = PositiveSequence.generate(gen, q=2.0, **params)
    tol = 1e-6 if gen == "Q_GEVREY" else 1e-3
    assert abs(q_gevrey_order(seq, 2.0) - expected) <= tol


def test_preserves_q_gevrey_order_examples():
    assert preserves_q_gevrey_order(PositiveSequence.generate("FACTORIAL_POW", s=2.0), 2.0)
    assert not preserves_q_gevrey_order(PositiveSequence.generate("Q_GEVREY", q=2.0, s=1.0), 2.0)
    assert preserves_q_gevrey_order(PositiveSequence.generate("GAMMA_LINEAR", s=1.0), 2.0)


def test_preserves_both_orders_examples():
    assert preserves_q_and_gevrey_orders(PositiveSequence.generate("Q_FACTORIAL_INV", q=2.0, s=1.0), 2.0)
    assert not preserves_q_and_gevrey_orders(PositiveSequence.generate("FACTORIAL_POW", s=1.0), 2.0)
    assert preserves_q_and_gevrey_orders(PositiveSequence.generate("GEOMETRIC", A=3.0), 2.0)
    assert preserves_q_and_gevrey_orders(PositiveSequence.generate("CENTRAL_BINOMIAL"), 2.0)


def test_membership_examples():
    p = np.arange(301)
    q, s = 2.0, 1.0
    u = FormalSeries.from_log(s * math.log(q) * p * (p - 1) / 2)
    ok, _ = membership(u, q, s, 0.0)
    assert ok
    u = FormalSeries.from_log(gammaln(p + 1))
    ok, _ = membership(u, q, 0.0, 1.0)
    assert ok
    u = FormalSeries.from_log(p * np.log(p + 1) ** 2 + s * math.log(q) * p * (p - 1) / 2)
    ok, fit = membership(u, q, s, residual_cap=1.0)
    assert not ok and fit.window_residual > 1.0


def test_mg_lc_against_brute_force():
    fact = PositiveSequence.generate("FACTORIAL_POW", 50, s=1.0)
    m = [math.factorial(k) for k in range(50)]
    assert is_lc(fact) == oracles.is_lc(m) is True
    assert is_mg(fact, 2.0) == oracles.is_mg(m, 2) is True
    qg = PositiveSequence.generate("Q_GEVREY", 60, q=2.0, s=1.0)
    mq = [2 ** (k * (k - 1) // 2) for k in range(60)]
    assert is_lc(qg) and oracles.is_lc(mq)
    for A in (2, 100, 10 ** 4):
        assert not is_mg(qg, float(A)) and not oracles.is_mg(mq, A)
    const = PositiveSequence.custom(np.zeros(30))
    assert is_lc(const) and is_mg(const, 1.0)
