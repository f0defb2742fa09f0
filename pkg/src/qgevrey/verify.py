"""Self-check suites run by ``qgevrey verify``.

Each suite compares library output with an independent computation
(direct float products, mpmath at high precision, or algebraic
identities) and reports the measured error per identity.
"""
from __future__ import annotations

import math
import time

import mpmath
import numpy as np

from .config import Config
from .continuation import (central_binomial_pair, geometric, monomial, pade_continue,
                           q_exponential, q_factorial_series)
from .fps import FormalSeries, eval_partial_array, mborel, qborel
from .growth import PositiveSequence, fit_growth, preserves_q_and_gevrey_orders, preserves_q_gevrey_order
from .qcore import q_factorial_limit_residual, q_factorial_logs, q_number, q_pochhammer
from .qlaplace import RayDomain, q_laplace
from .theta import (ThetaParams, calibrate_lower_bound, log_theta_product, log_theta_series,
                    spiral_clearance_array, theta_eval)


def _check(name, error, threshold, **extra):
    error = float(error)
    return {"name": name, "error": error, "threshold": threshold,
            "passed": bool(np.isfinite(error) and error <= threshold), **extra}


def suite_qcore(cfg: Config):
    out = []
    worst = 0.0
    for q in (1.5, 2.0, 3.0):
        a = np.array(q_factorial_logs(60, q))
        b = np.array(q_factorial_logs(60, 1.0 / q))
        p = np.arange(61)
        worst = max(worst, float(np.max(np.abs(a - b - p * (p - 1) / 2 * math.log(q)))))
    out.append(_check("factorial inversion, p<=60", worst, 1e-11))

    with mpmath.workdps(60):
        q = mpmath.mpf(2)
        ref = mpmath.qp(1 / q, 1 / q)
        direct = mpmath.fprod([(q ** k - 1) / (q - 1) for k in range(1, 61)])
        lhs = direct * (q - 1) ** 60 / q ** (60 * 61 // 2)
        exact = float(abs(lhs - ref))
    res = q_factorial_limit_residual(60, 2.0)
    out.append(_check("limit formula, n=60, q=2", res, 1e-12, exact=exact))

    worst = 0.0
    for q in (0.5, 1.5, 2.0, 3.0):
        for lam in (0.3, 1.0, 2.5, 7.0):
            lhs = q_number(lam, q)
            rhs = q ** (lam - 1) * q_number(lam, 1.0 / q)
            worst = max(worst, abs(lhs - rhs) / abs(lhs))
    out.append(_check("q-number inversion", worst, 1e-13))

    worst = 0.0
    for q in (1.5, 2.0, 3.0):
        for a in (0.3, -0.7 + 0.2j, 2.5j):
            got = q_pochhammer(a, q, tol=1e-14).to_complex()
            with mpmath.workdps(40):
                ref = complex(mpmath.qp(mpmath.mpc(a), 1 / mpmath.mpf(q)))
            worst = max(worst, abs(got - ref) / abs(ref))
    out.append(_check("infinite q-shift factorial vs mpmath", worst, 1e-12))
    return out


def _theta_points(rng, sig2, n, clearance=0.05):
    L, A = [], []
    while len(L) < n:
        lr = rng.uniform(math.log(0.1), math.log(10.0), 4 * n)
        ar = rng.uniform(-math.pi, math.pi, lr.size)
        ok = spiral_clearance_array(lr, ar, sig2) > clearance
        L.extend(lr[ok])
        A.extend(ar[ok])
    return np.array(L[:n]), np.array(A[:n])


def suite_theta(cfg: Config):
    out = []
    rng = np.random.default_rng(1)
    for s in (0.5, 1.0, 2.0):
        par = ThetaParams(2.0, s, cfg.theta_tol)
        sig2 = par.sigma2
        L, A = _theta_points(rng, sig2, 200)
        m1, p1, _, _ = log_theta_series(L, A, sig2, par.tol)
        m2, p2, _ = log_theta_product(L, A, sig2, par.tol)
        rel = np.abs(np.expm1(m2 - m1 + 1j * (p2 - p1)))
        out.append(_check(f"series vs product, s={s}", np.max(rel), 1e-10))

        ms, ps, _, _ = log_theta_series(L + sig2, A, sig2, par.tol)
        # theta(q^s z) = q^s z theta(z)
        rel = np.abs(np.expm1(ms - (m1 + sig2 + L) + 1j * (ps - p1 - A)))
        out.append(_check(f"functional equation, s={s}", np.max(rel), 1e-10))

        # |theta| relative to its largest term on a ring of radius 1e-9 |z0| around each zero
        k = np.arange(-10, 11)[:, None]
        ring = np.exp(2j * np.pi * np.arange(8) / 8)[None, :]
        zr = -(2.0 ** (k * s)) * (1 + 1e-9 * ring)
        lm, _, scale, _ = log_theta_series(np.log(np.abs(zr)), np.angle(zr), sig2, 1e-30)
        at_zero = [theta_eval(-(2.0 ** (kk * s)), par).log_mag for kk in range(-10, 11)]
        out.append(_check(f"zeros on the spiral, |k|<=10, s={s}", np.max(np.exp(lm - scale)), 1e-8,
                          exact_zero_flagged=bool(np.all(np.isneginf(at_zero)))))

        cert = calibrate_lower_bound(par, 0.1, 500)
        out.append(_check(f"lower bound constant >= 1e-3, s={s}", 1e-3 / cert.C, 1.0, C=cert.C))
    return out


def suite_laplace(cfg: Config):
    out = []
    worst = 0.0
    zs = [r * np.exp(1j * (math.pi + a)) for r, a in
          zip((0.3, 0.7, 1.0, 1.6, 2.5), (-0.6, -0.3, 0.0, 0.3, 0.6))]
    for q in (2.0, 3.0):
        for s in (0.5, 1.0):
            dom = RayDomain(math.pi, cfg.delta, q, s)
            for p in range(11):
                f = monomial(p, q)
                for z in zs:
                    got = q_laplace(f, dom, z, cfg.tol).to_complex()
                    ref = z ** p * q ** (s * p * (p - 1) / 2)
                    worst = max(worst, abs(got - ref) / abs(ref))
    out.append(_check("moment identity, p<=10", worst, 1e-6))
    return out


def suite_fps(cfg: Config):
    rng = np.random.default_rng(2)
    c = rng.normal(size=30) + 1j * rng.normal(size=30)
    u = FormalSeries.from_complex(c)
    back = qborel(qborel(u, 2.0, 1.0), 2.0, -1.0).to_complex()
    out = [_check("qborel inverse", np.max(np.abs(back - c) / np.abs(c)), 1e-12)]
    seq = PositiveSequence.generate("CENTRAL_BINOMIAL", 30)
    back = mborel(mborel(u, seq), seq.reciprocal()).to_complex()
    out.append(_check("mborel inverse", np.max(np.abs(back - c) / np.abs(c)), 1e-12))
    g = FormalSeries.geometric(31)
    lm, ph = eval_partial_array(g, np.array([math.log(0.5)]), np.array([0.0]), 29)
    out.append(_check("geometric partial sum", abs(math.exp(lm[0]) - (2 - 2.0 ** -29)), 1e-14))
    return out


def suite_growth(cfg: Config):
    p = np.arange(301)
    lm = np.array([0.0] + [0.5 * math.lgamma(k + 1) + k * math.log(2) + math.log(2) * k * (k - 1) / 2
                           for k in p[1:]])
    fit = fit_growth(PositiveSequence("synthetic", lm), 2.0)
    out = [_check("recover log B", abs(fit.logB - math.log(2)), 0.05),
           _check("recover alpha", abs(fit.alpha - 0.5), 0.1),
           _check("recover s", abs(fit.s - 1.0), 1e-3)]
    s2 = PositiveSequence.generate("FACTORIAL_POW", s=2.0)
    qf = PositiveSequence.generate("Q_FACTORIAL_INV", q=2.0, s=1.0)
    table = [("p!^2 keeps q-Gevrey order", preserves_q_gevrey_order(s2, 2.0), True),
             ("p!^2 keeps both orders", preserves_q_and_gevrey_orders(s2, 2.0), False),
             ("[p]_{1/2}! keeps q-Gevrey order", preserves_q_gevrey_order(qf, 2.0), True),
             ("[p]_{1/2}! keeps both orders", preserves_q_and_gevrey_orders(qf, 2.0), True)]
    out.extend(_check(n, 0.0 if got == exp else 1.0, 0.0, got=bool(got)) for n, got, exp in table)
    return out


def suite_continuation(cfg: Config):
    out = []
    rng = np.random.default_rng(3)
    r = 0.25 * np.sqrt(rng.uniform(0, 1, 100))
    a = rng.uniform(0.2, 2 * math.pi - 0.2, 100)
    f = q_factorial_series(2.0)
    lm, ph = f.evaluate_log(np.log(r), a)
    sm, sp = eval_partial_array(f.series_at_0.truncate(80), np.log(r), a, 79)
    out.append(_check("qfact residue series vs partial sums", np.max(np.abs(
        np.exp(lm + 1j * ph) - np.exp(sm + 1j * sp))), 1e-8))
    e = q_exponential(2.0)
    r1 = np.sqrt(rng.uniform(0, 1, 100))
    lm, ph = e.evaluate_log(np.log(r1), a)
    sm, sp = eval_partial_array(e.series_at_0, np.log(r1), a, e.series_at_0.order - 1)
    out.append(_check("q-exponential product vs series", np.max(np.abs(
        np.exp(lm + 1j * ph) - np.exp(sm + 1j * sp)) / np.exp(sm)), 1e-10))
    rays = np.log(np.geomspace(1e-3, 1e4, 300))
    lm, _ = e.evaluate_log(rays, np.full_like(rays, math.pi))
    out.append(_check("q-exponential bounded on the negative axis", np.max(lm), 0.0))
    first, second = central_binomial_pair(q=2.0)
    worst = 0.0
    for fn, rad in ((first, 0.25), (second, 4.0)):
        rr = 0.5 * rad * np.sqrt(rng.uniform(0, 1, 100))
        lm, ph = fn.evaluate_log(np.log(rr), a)
        sm, sp = eval_partial_array(fn.series_at_0, np.log(rr), a, fn.series_at_0.order - 1)
        worst = max(worst, float(np.max(np.abs(np.exp(lm + 1j * ph) - np.exp(sm + 1j * sp)))))
    out.append(_check("central binomial pair vs series", worst, 1e-8))
    rp = 2.0 * np.sqrt(rng.uniform(0.001, 1, 200))
    pade = pade_continue(second.series_at_0, 6, 6, 2.0)
    lm, ph = pade.evaluate_log(np.log(rp), np.resize(a, 200))
    lr, pr = second.evaluate_log(np.log(rp), np.resize(a, 200))
    out.append(_check("Pade(6,6) vs arcsin form, |t|<=2",
                      np.max(np.abs(np.expm1(lm - lr + 1j * (ph - pr)))), 1e-6))
    g = geometric(1.0)
    out.append(_check("geometric closed form at 2i", abs(g.value(2j) - (0.2 + 0.4j)), 1e-15))
    return out


def suite_classify(cfg: Config):
    from .classify import preserves_q_gevrey_asymptotics
    out = []
    for gen, params, mode in (("Q_FACTORIAL_INV", {"q": 2.0}, "RIGOROUS"),
                              ("CENTRAL_BINOMIAL", {}, "RIGOROUS"),
                              ("GEOMETRIC", {"A": 3.0}, "RIGOROUS")):
        v = preserves_q_gevrey_asymptotics(PositiveSequence.generate(gen, **params), 2.0)
        ok = v.passed and v.mode == mode
        out.append(_check(f"{gen} preserves q-Gevrey asymptotics", 0.0 if ok else 1.0, 0.0,
                          mode=v.mode))
    return out


SUITES = {
    "qcore": suite_qcore,
    "theta": suite_theta,
    "laplace": suite_laplace,
    "fps": suite_fps,
    "growth": suite_growth,
    "continuation": suite_continuation,
    "classify": suite_classify,
}


def run_suite(name: str, cfg: Config = None) -> dict:
    """Run one suite (or ``"all"``) and return a JSON-ready report."""
    cfg = cfg or Config()
    names = list(SUITES) if name == "all" else [name]
    for n in names:
        if n not in SUITES:
            raise KeyError(f"unknown suite {n!r}; choose from {sorted(SUITES)} or 'all'")
    checks = []
    t0 = time.perf_counter()
    for n in names:
        for c in SUITES[n](cfg):
            checks.append({"suite": n, **c})
    return {"suite": name, "passed": all(c["passed"] for c in checks), "checks": checks,
            "seconds": time.perf_counter() - t0, "config": cfg.to_json()}
