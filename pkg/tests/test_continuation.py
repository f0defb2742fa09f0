import cmath
import math

import numpy as np
import pytest

import oracles
from qgevrey.continuation import (HEURISTIC, RIGOROUS, SectorSampling, SurfacePoint,
                                  central_binomial_pair, geometric, growth_certificate_check,
                                  make_continuation, monomial, pade_coefficients, pade_continue,
                                  polynomial, q_exponential, q_factorial_series)
from qgevrey.exceptions import CutError, DegeneracyError, PoleError
from qgevrey.fps import FormalSeries, mborel
from qgevrey.growth import PositiveSequence
from qgevrey.theta import log_theta_series


def test_surface_point():
    pt = SurfacePoint.from_complex(-2.0, winding=1)
    assert pt.arg == pytest.approx(3 * math.pi) and pt.winding == 1
    assert pt.to_complex() == pytest.approx(-2.0)
    assert SurfacePoint.polar(2.0, 0.5).to_complex() == pytest.approx(cmath.rect(2.0, 0.5))


def test_geometric_examples():
    g = geometric()
    assert g.value(0) == 1
    assert g.value(-1) == pytest.approx(0.5)
    assert g.value(2j) == pytest.approx(0.2 + 0.4j, abs=1e-15)
    assert g.mode == RIGOROUS
    with pytest.raises(PoleError):
        g(1.0)
    # winding does not change a single-valued function
    assert g.value(SurfacePoint(math.log(2), math.pi / 2 + 2 * math.pi)) == pytest.approx(0.2 + 0.4j)


def test_q_exponential_examples():
    e = q_exponential(2.0)
    assert e.value(0) == 1
    assert e.value(0.5) == pytest.approx(oracles.qexp_series(0.5, 2.0, 61), rel=1e-10)
    assert e.value(-3 + 2j) == pytest.approx(oracles.qexp_product(-3 + 2j, 2.0), rel=1e-12)
    K = max(abs(e.value(-r)) for r in np.geomspace(1e-2, 1e4, 200))
    assert abs(e.value(-10)) <= K <= 1.0 + 1e-12
    with pytest.raises(PoleError):
        e(2.0)  # first pole q/(q-1)


def test_q_factorial_series_examples():
    f = q_factorial_series(2.0)
    assert f.value(0) == pytest.approx(1.0, abs=1e-14)
    assert f.value(-0.1) == pytest.approx(oracles.qfact_series(-0.1, 2.0, 81), rel=1e-10)
    assert f.value(0.25) == pytest.approx(oracles.qfact_series(0.25, 2.0, 200), rel=1e-8)
    with pytest.raises(PoleError):
        f(0.5)
    for z in (-5.0, 3 + 4j, 40j, 7.3):
        assert f.value(z) == pytest.approx(oracles.qfact_residue(z, 2.0), rel=1e-12)


def test_q_factorial_prefix_is_mborel_of_geometric():
    m = PositiveSequence.generate("Q_FACTORIAL_INV", 80, q=2.0)
    ref = mborel(FormalSeries.geometric(80), m.reciprocal())
    assert q_factorial_series(2.0).series_at_0 == ref


def test_central_binomial_examples():
    first, second = central_binomial_pair()
    assert first.value(0) == 1 and second.value(0) == 1
    assert first.value(0.1) == pytest.approx(1.290994448735806, rel=1e-14)
    assert first.value(-1) == pytest.approx(1 / math.sqrt(5), rel=1e-14)
    for t in (0.5, -3.0, 2j, 9 - 1j):
        assert second.value(t) == pytest.approx(oracles.central_binomial_second(t), rel=1e-12)
    with pytest.raises(CutError):
        first(1.0)


def test_pade_examples():
    p = pade_continue(FormalSeries.geometric(10), 0, 1)
    assert p.mode == HEURISTIC
    for t in (-1.0, 2j, 0.3):
        assert p.value(t) == pytest.approx(1 / (1 - t), rel=1e-14)
    second = central_binomial_pair()[1]
    p = pade_continue(second.series_at_0, 6, 6)
    rng = np.random.default_rng(0)
    for _ in range(50):
        t = 2 * math.sqrt(rng.uniform(1e-4, 1)) * cmath.exp(1j * rng.uniform(0.1, 2 * math.pi - 0.1))
        assert abs(p.value(t) - second.value(t)) <= 1e-6 * abs(second.value(t))
    e = q_exponential(2.0)
    p = pade_continue(e.series_at_0, 8, 8)
    for _ in range(50):
        z = 4 * math.sqrt(rng.uniform(1e-4, 1)) * cmath.exp(1j * rng.uniform(math.pi / 2, 3 * math.pi / 2))
        assert abs(p.value(z) - e.value(z)) <= 1e-6 * abs(e.value(z))


def test_pade_degeneracy_and_fallback():
    g = FormalSeries.geometric(20).to_complex()
    with pytest.raises(DegeneracyError):
        pade_coefficients(g, 6, 6)
    p = pade_continue(FormalSeries.geometric(20), 6, 6)
    assert p.meta["fallbacks"]
    assert p.value(-2.0) == pytest.approx(1 / 3, rel=1e-12)


def test_taylor_consistency():
    for f in (geometric(), q_exponential(2.0), q_factorial_series(2.0), *central_binomial_pair()):
        assert f.taylor_error() <= 1e-8


def test_growth_certificates():
    for s in (0.5, 1.0, 2.0):
        fit = growth_certificate_check(geometric(), 2.0, s)
        assert fit.passed and fit.alpha == 0.0
    fit = growth_certificate_check(q_factorial_series(2.0), 2.0, 1.0)
    assert fit.passed and fit.alpha <= 1.5


def _theta_log(q, s):
    sig2 = s * math.log(q)

    def ev(log_abs, arg):
        lm, ph, _, _ = log_theta_series(log_abs, arg, sig2)
        return lm, ph

    return ev


def test_theta_needs_its_own_scale():
    # theta grows like exp(log^2/(2 s log q)); sampled away from its zero spiral
    q, s = 2.0, 1.0
    samp = SectorSampling(directions=(math.pi / 2, 3 * math.pi / 2), r_min=1.0, r_max=1e6)
    f = _theta_log(q, s)
    assert growth_certificate_check(f, q, s, samp).passed
    assert not growth_certificate_check(f, q, 2 * s, samp).passed


def test_polynomial_and_factory():
    u = FormalSeries.from_complex([1, 0, 2])
    f = polynomial(u)
    assert f.value(3.0) == pytest.approx(19.0)
    assert f.certificate.alpha == 2
    assert monomial(3).value(2j) == pytest.approx(-8j)
    assert make_continuation("qexp", 2.0).kind == "qexp"
    with pytest.raises(ValueError):
        make_continuation("nope")
