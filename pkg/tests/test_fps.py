import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qgevrey.exceptions import DimensionError, NormalizationError
from qgevrey.fps import (FormalSeries, MomentBorelTransformer, QBorelTransformer, eval_partial,
                         eval_partial_array, formal_derivative, mborel, moment_derivative, qborel,
                         series_add, series_mul)
from qgevrey.growth import PositiveSequence
from qgevrey.xnum import LogComplex

# magnitudes kept well inside float range so products convert back to complex
coeff_lists = st.lists(st.one_of(st.just(0j), st.complex_numbers(min_magnitude=1e-6, max_magnitude=1e3,
                                                                allow_nan=False, allow_infinity=False)),
                       min_size=1, max_size=25)


def test_construction_and_access():
    u = FormalSeries.from_complex([1, -2j, 0, 3])
    assert u.order == 4 and u.dim == 1
    assert u.coeff(1).to_complex() == pytest.approx(-2j)
    assert u.coeff(2).is_zero
    assert np.allclose(u.to_complex(), [1, -2j, 0, 3])
    assert u.truncate(2).order == 2
    g = FormalSeries.geometric(5, 0.5)
    assert np.allclose(g.to_complex(), 0.5 ** np.arange(5))


def test_json_round_trip(tmp_path):
    u = FormalSeries.from_complex(np.array([[1, 2j], [0, -3]]))
    assert u.dim == 2
    path = tmp_path / "u.json"
    u.dump(path)
    obj = json.loads(path.read_text())
    assert obj["dim"] == 2 and obj["order"] == 2 and len(obj["coeffs"][0]) == 2
    assert FormalSeries.load(path) == u


def test_qborel_examples():
    c = FormalSeries.from_complex([2.5 - 1j])
    assert qborel(c, 2.0, 1.3) == c
    p = np.arange(40)
    for q, s in ((2.0, 1.0), (3.0, 0.5)):
        u = FormalSeries.from_log(s * math.log(q) * p * (p - 1) / 2)
        assert qborel(u, q, s).allclose(FormalSeries.geometric(40), 1e-12)


def test_mborel_examples():
    g = FormalSeries.geometric(30)
    fact = PositiveSequence.generate("FACTORIAL_POW", 30, s=1.0)
    ref = np.array([1 / math.factorial(k) for k in range(30)])
    assert np.allclose(mborel(g, fact).to_complex(), ref, rtol=1e-13)
    cb = PositiveSequence.generate("CENTRAL_BINOMIAL", 30)
    ref = np.array([1 / math.comb(2 * k, k) for k in range(30)])
    assert np.allclose(mborel(g, cb).to_complex(), ref, rtol=1e-13)
    with pytest.raises(NormalizationError):
        mborel(g, np.log(np.arange(1, 31, dtype=float)) + 1.0)


def test_moment_derivative_brute_force():
    rng = np.random.default_rng(4)
    c = rng.normal(size=10) + 1j * rng.normal(size=10)
    u = FormalSeries.from_complex(c)
    q = 2.0
    qf = PositiveSequence.generate("Q_FACTORIAL_INV", 12, q=q)
    lm = qf.log_values + np.array([math.lgamma(k + 1) for k in range(12)])
    m = np.exp(lm)
    got = moment_derivative(u, lm).to_complex()
    ref = [c[p + 1] * m[p + 1] / m[p] for p in range(9)]
    assert np.allclose(got[:9], ref, rtol=1e-13)
    # with m_p = p! the moment derivative is d/dz
    fact = PositiveSequence.generate("FACTORIAL_POW", 12, s=1.0)
    assert moment_derivative(u, fact).allclose(formal_derivative(u), 1e-12)


def test_arithmetic_examples():
    a = FormalSeries.from_complex([1, 1, 0])
    b = FormalSeries.from_complex([1, -1, 0])
    assert np.allclose((a * b).to_complex(), [1, 0, -1])
    assert np.allclose(series_add(a, b).to_complex(), [2, 0, 0])
    assert np.allclose(formal_derivative(FormalSeries.geometric(6)).to_complex(), np.arange(1, 6))
    with pytest.raises(DimensionError):
        series_add(a, FormalSeries.from_complex(np.ones((3, 2))))


def test_eval_partial():
    g = FormalSeries.geometric(40)
    v = eval_partial(g, 0.5, 30).to_complex()
    assert v == pytest.approx(2 - 2.0 ** -30, abs=1e-15)
    # N counts the highest power kept: N=30 keeps 31 terms
    assert eval_partial(g, 0.5, 0).to_complex() == 1
    lm, ph = eval_partial_array(g, np.log([0.5, 0.25]), np.zeros(2), 30)
    assert np.allclose(np.exp(lm), [2 - 2.0 ** -30, (1 - 0.25 ** 31) / 0.75], rtol=1e-15)


def test_huge_coefficients_stay_finite():
    p = np.arange(200)
    u = FormalSeries.from_log(math.log(2) * p * (p - 1) / 2)
    assert np.isfinite(u.log_mag).all() and u.log_mag[-1] > 1e4
    v = eval_partial(u, LogComplex(-50.0, 0.3), 150)
    assert math.isfinite(v.log_mag)


def test_transformers():
    us = [FormalSeries.from_complex([1, 2, 3, 4]), FormalSeries.geometric(4, 2.0)]
    t = QBorelTransformer(q=2.0, s=1.0).fit(us)
    back = t.inverse_transform(t.transform(us))
    assert all(a.allclose(b, 1e-12) for a, b in zip(us, back))
    cb = PositiveSequence.generate("CENTRAL_BINOMIAL", 10)
    mt = MomentBorelTransformer(m=cb).fit(us)
    back = mt.inverse_transform(mt.transform(us))
    assert all(a.allclose(b, 1e-12) for a, b in zip(us, back))


@settings(max_examples=100, deadline=None)
@given(coeff_lists, st.floats(1.1, 5.0), st.floats(-2.0, 2.0))
def test_qborel_inverse_property(c, q, s):
    u = FormalSeries.from_complex(c)
    assert qborel(qborel(u, q, s), q, -s).allclose(u, 1e-9)


@settings(max_examples=100, deadline=None)
@given(coeff_lists, coeff_lists)
def test_mul_matches_convolution(a, b):
    u, v = FormalSeries.from_complex(a), FormalSeries.from_complex(b)
    n = min(len(a), len(b))
    ref = np.convolve(np.array(a, complex), np.array(b, complex))[:n]
    got = (u * v).to_complex()
    scale = np.convolve(np.abs(a), np.abs(b))[:n] + 1e-300
    assert np.all(np.abs(got - ref) <= 1e-11 * scale + 1e-300)
