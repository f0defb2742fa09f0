import cmath
import math

import numpy as np
import pytest

import oracles
from qgevrey.continuation import SurfacePoint, geometric, monomial, q_exponential
from qgevrey.exceptions import DomainError, GrowthError, InconsistentOracleError, InsufficientDataError
from qgevrey.fps import FormalSeries
from qgevrey.qlaplace import (RayDomain, Strategy, asymptotic_check, q_laplace, q_sum, ray_clearance,
                              validity_radius)


def qgevrey_series(q, s, order=40, extra=None):
    p = np.arange(order)
    lv = s * math.log(q) * p * (p - 1) / 2
    if extra is not None:
        lv = lv + extra[:order]
    return FormalSeries.from_log(lv)


def test_ray_clearance_examples():
    g = 0.7
    assert ray_clearance(2.0 * cmath.exp(1j * g), g) == 1.0
    assert ray_clearance(-2.0 * cmath.exp(1j * g), g) == pytest.approx(0.0, abs=1e-15)
    assert ray_clearance(2.0 * cmath.exp(1j * (g + math.pi / 2)), g) == 1.0
    for phi in (2.0, 2.8, -2.5):
        z = 1.3 * cmath.exp(1j * (g + phi))
        assert ray_clearance(z, g) == pytest.approx(oracles.ray_clearance(z, g, n=20001), abs=1e-3)


def test_validity_radius_examples():
    assert validity_radius(-1.0, 2.0, 1.0) == 1.0
    assert validity_radius(0.0, 2.0, 1.0) == pytest.approx(0.5)  # 2**-(1*(0+1))
    assert validity_radius(0.5, 2.0, 2.0) == pytest.approx(0.125)
    with pytest.raises(DomainError):
        validity_radius(0.0, 1.0, 1.0)


def test_domain_validation():
    with pytest.raises(DomainError):
        RayDomain(math.pi, 0.0)
    with pytest.raises(DomainError):
        RayDomain(math.pi, 0.1, 2.0, -1.0)
    dom = RayDomain(math.pi, 0.1)
    assert dom.contains(-1.0 + 0j) and not dom.contains(1.0 + 0j)
    with pytest.raises(DomainError):
        q_laplace(geometric(), dom, 1.0)


def test_moment_identity_single():
    dom = RayDomain(math.pi, 0.05, 2.0, 1.0)
    z = 0.1 * cmath.exp(1j * math.pi)
    v, info = q_laplace(monomial(5), dom, z, full_output=True)
    ref = z ** 5 * 2.0 ** 10
    assert abs(v.to_complex() - ref) <= 1e-6 * abs(ref)
    assert info["levels"] >= 2 and info["nodes"] > 0


@pytest.mark.parametrize("q,s", [(2.0, 0.5), (3.0, 1.0), (1.5, 2.0)])
def test_moment_identity_grid(q, s):
    dom = RayDomain(math.pi, 0.05, q, s)
    for p in (0, 1, 4, 10):
        for z in (0.5 * cmath.exp(1j * (math.pi + 0.4)), 2.0 * cmath.exp(1j * (math.pi - 0.8))):
            got = q_laplace(monomial(p, q), dom, z).to_complex()
            ref = z ** p * q ** (s * p * (p - 1) / 2)
            assert abs(got - ref) <= 1e-8 * abs(ref)


def test_path_independence_on_the_log_surface():
    # the same point reached on a neighbouring sheet through a rotated ray
    f = geometric()
    z = SurfacePoint(math.log(0.05), math.pi + 0.3)
    a = q_laplace(f, RayDomain(math.pi, 0.05), z).to_complex()
    b = q_laplace(f, RayDomain(math.pi + 0.5, 0.05), z).to_complex()
    assert abs(a - b) <= 1e-10 * abs(a)


def test_geometric_limit_at_zero():
    v = q_laplace(geometric(), RayDomain(math.pi, 0.05), -1e-3, tol=1e-8).to_complex()
    assert abs(v - 1) < 5e-3


def test_growth_preconditions():
    e = q_exponential(2.0)
    f = monomial(2)
    from dataclasses import replace
    f.certificate = replace(f.certificate, s=0.5)
    with pytest.raises(GrowthError):
        q_laplace(f, RayDomain(math.pi, 0.05, 2.0, 1.0), -0.1)
    with pytest.raises(GrowthError):
        q_laplace(e, RayDomain(0.1, 0.05, 2.0, 1.0), 1j)


def test_strategy_parse():
    assert Strategy.parse("PADE(8,6)") == Strategy("PADE", None, 8, 6)
    assert Strategy.parse("CLOSED_FORM(qfact)").tag == "qfact"
    assert Strategy.parse("geometric").kind == "CLOSED_FORM"


def test_q_sum_geometric_pair():
    u = qgevrey_series(2.0, 1.0)
    sf = q_sum(u, 2.0, 1.0)
    assert sf.continuation.kind == "geometric"
    assert abs(sf(-1e-3).to_complex() - 1) < 5e-3
    assert abs(sf(-1e-2).to_complex() - oracles_partial(u, -1e-2, 3)) < 1e-5


def oracles_partial(u, z, N):
    c = u.to_complex()
    return sum(c[p] * z ** p for p in range(N + 1))


def test_q_sum_qfact_pipeline():
    q, s = 2.0, 1.0
    extra = np.array([oracles.log_q_factorial(p, 1 / q) for p in range(40)])
    u = qgevrey_series(q, s, 40, extra)
    sf = q_sum(u, q, s, strategy="CLOSED_FORM(qfact)")
    z = 0.01 * cmath.exp(1j * (math.pi + 0.2))
    f = sf(z).to_complex()
    c = u.to_complex()
    # remainders track the first omitted term
    for N in range(1, 7):
        assert abs(f - oracles_partial(u, z, N)) <= 3 * abs(c[N + 1] * z ** (N + 1))


def test_q_sum_prefix_mismatch():
    with pytest.raises(InconsistentOracleError):
        q_sum(qgevrey_series(2.0, 1.0), 2.0, 1.0, strategy="CLOSED_FORM(qfact)")


def test_q_sum_constant_series():
    u = FormalSeries.from_complex([3.0] + [0.0] * 9)
    sf = q_sum(u, 2.0, 1.0, strategy="CLOSED_FORM(polynomial)")
    for z in (-0.01, 0.05j, -0.2 + 0.1j):
        assert sf(z).to_complex() == pytest.approx(3.0, rel=1e-9)


def test_asymptotic_check_polynomial_self_test():
    u = FormalSeries.from_complex([1.0, -2.0, 0.5, 0, 0, 0, 0, 0])
    zs = [0.05 * cmath.exp(1j * a) for a in np.linspace(2.5, 3.8, 5)]
    vals = [1 - 2 * z + 0.5 * z ** 2 for z in zs]
    v = asymptotic_check(zs, u, 2.0, 1.0, 6, values=vals)
    assert v.passed and v.n_skipped >= 4 * 5


def test_asymptotic_check_pipeline_and_failures():
    u = qgevrey_series(2.0, 1.0)
    sf = q_sum(u, 2.0, 1.0)
    rows = sf.sample(np.geomspace(0.01, 0.1, 4), math.pi + np.linspace(-0.9, 0.9, 5))
    v = asymptotic_check(rows, u, 2.0, 1.0, 12)
    assert v.passed and math.isfinite(v.logA)
    # 1/(1-z) against the same coefficients: the mismatch at p=2 leaves R_N ~ z**2, so the
    # fitted log A grows like log(1/|z|) and exceeds the cap once the grid reaches |z| = 1e-3
    wide = sf.sample(np.geomspace(1e-3, 0.1, 5), math.pi + np.linspace(-0.9, 0.9, 5))
    assert asymptotic_check(wide, u, 2.0, 1.0, 12).passed
    pts = [r["abs"] * cmath.exp(1j * r["arg"]) for r in wide]
    bad = asymptotic_check(pts, u, 2.0, 1.0, 12, values=[1 / (1 - z) for z in pts])
    assert not bad.passed and bad.logA > 4
    shuffled = FormalSeries.from_complex(np.random.default_rng(0).permutation(u.to_complex()[:13]).tolist() + [0] * 27)
    assert not asymptotic_check(rows, shuffled, 2.0, 1.0, 12).passed
    with pytest.raises(InsufficientDataError):
        asymptotic_check([], u, 2.0, 1.0, 5)
    with pytest.raises(ValueError):
        asymptotic_check(rows, u, 2.0, 1.0, 40)
