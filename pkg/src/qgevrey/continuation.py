"""Analytic continuations of the test functions, with growth certificates.

Each :class:`ContinuableFunction` couples a vectorised log-domain
evaluator with its Taylor prefix at 0 and a sampled certificate of
q-exponential growth. Both are checked when the object is built.

Points carry an unbounded argument (:class:`SurfacePoint`). A point with
argument ``theta`` is reached by turning at small radius and then moving
radially out; every registered function is analytic on the small disc and
none of its singularities lies off the positive real axis, so values depend
only on the projected point and winding never changes them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .exceptions import CutError, DegeneracyError, DimensionError, GrowthError, PoleError
from .fps import FormalSeries, eval_partial_array
from .qcore import check_q, q_factorial_logs, q_pochhammer_real_log
from .xnum import LogComplex, logsumexp_complex

RIGOROUS = "RIGOROUS"
HEURISTIC = "HEURISTIC"
PADE = "PADE"

#: relative distance below which a point counts as sitting on a pole
POLE_RTOL = 1e-10
DEFAULT_ALPHA_CAP = 4.0
TAYLOR_RTOL = 1e-8


@dataclass(frozen=True)
class SurfacePoint:
    """Point on the Riemann surface of the logarithm."""

    log_mag: float
    arg: float = 0.0

    def __post_init__(self):
        if math.isnan(self.log_mag) or self.log_mag == math.inf or not math.isfinite(self.arg):
            raise ValueError(f"invalid surface point ({self.log_mag}, {self.arg})")

    @classmethod
    def from_complex(cls, z: complex, winding: int = 0) -> "SurfacePoint":
        z = complex(z)
        if z == 0:
            return cls(-math.inf, 0.0)
        return cls(math.log(abs(z)), math.atan2(z.imag, z.real) + 2 * math.pi * winding)

    @classmethod
    def polar(cls, r: float, theta: float) -> "SurfacePoint":
        return cls(math.log(r) if r > 0 else -math.inf, theta)

    def to_logcomplex(self) -> LogComplex:
        return LogComplex(self.log_mag, self.arg)

    def to_complex(self) -> complex:
        return self.to_logcomplex().to_complex()

    @property
    def winding(self) -> int:
        # sheet k holds arg in (-pi + 2 pi k, pi + 2 pi k]
        return int(math.ceil((self.arg - math.pi) / (2 * math.pi)))


def _as_point(z) -> SurfacePoint:
    if isinstance(z, SurfacePoint):
        return z
    if isinstance(z, LogComplex):
        return SurfacePoint(z.log_mag, z.phase)
    return SurfacePoint.from_complex(z)


def _angle_from_zero(arg):
    # angular distance of arg from the positive real axis, in [0, pi]
    return np.abs(np.angle(np.exp(1j * np.asarray(arg, dtype=float))))


def _log1m_exp(lw):
    """``log(1 - exp(lw))`` for complex ``lw``; the imaginary part is defined mod 2 pi."""
    lw = np.asarray(lw, dtype=complex)
    small = lw.real < 0
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        near = np.log1p(-np.exp(np.where(small, lw, 0)))
        # |w| >= 1: log(1 - w) = log(-w) + log1p(-1/w)
        far = lw + 1j * np.pi + np.log1p(-np.exp(-np.where(small, 0, lw)))
    out = np.where(small, near, far)
    return np.where(np.isneginf(lw.real), 0.0 + 0.0j, out)


# excluded sets -----------------------------------------------------------

@dataclass(frozen=True)
class ExcludedRay:
    """The ray ``{r e^{i direction}: r >= start}``."""

    start: float
    direction: float = 0.0
    kind: str = "cut"

    def min_modulus(self) -> float:
        return self.start

    def hits(self, log_abs, arg) -> np.ndarray:
        on_dir = np.abs(np.angle(np.exp(1j * (np.asarray(arg) - self.direction)))) <= 1e-12
        return on_dir & (np.asarray(log_abs) >= math.log(self.start) - POLE_RTOL)

    def describe(self) -> dict:
        return {"type": "ray", "start": self.start, "direction": self.direction, "kind": self.kind}


@dataclass(frozen=True)
class PoleSet:
    """Poles ``first * ratio**k`` on a ray (``ratio > 1``), or a finite list."""

    first: Optional[float] = None
    ratio: Optional[float] = None
    direction: float = 0.0
    points: tuple = ()

    def min_modulus(self) -> float:
        mods = [abs(p) for p in self.points]
        if self.first is not None:
            mods.append(self.first)
        return min(mods) if mods else math.inf

    def hits(self, log_abs, arg) -> np.ndarray:
        log_abs = np.asarray(log_abs, dtype=float)
        arg = np.asarray(arg, dtype=float)
        out = np.zeros(np.broadcast(log_abs, arg).shape, dtype=bool)
        if self.first is not None:
            k = np.round((log_abs - math.log(self.first)) / math.log(self.ratio))
            k = np.maximum(k, 0)
            lp = math.log(self.first) + k * math.log(self.ratio)
            d = np.abs(1 - np.exp(lp - log_abs + 1j * (self.direction - arg)))
            out |= d <= POLE_RTOL
        with np.errstate(under="ignore", over="ignore"):
            z = np.exp(np.minimum(log_abs, 700) + 1j * arg)
        for p in self.points:
            out |= np.abs(z - p) <= POLE_RTOL * max(abs(p), 1e-300)
        return out

    def describe(self) -> dict:
        d = {"type": "poles", "direction": self.direction}
        if self.first is not None:
            d.update(first=self.first, ratio=self.ratio)
        if self.points:
            d["points"] = [[complex(p).real, complex(p).imag] for p in self.points]
        return d


# certificates --------------------------------------------------------------

@dataclass(frozen=True)
class SectorSampling:
    """Points on sectors ``|arg z - theta| <= half_opening`` and radii in ``[r_min, r_max]``."""

    directions: tuple = (math.pi / 3, 2 * math.pi / 3, math.pi, 4 * math.pi / 3, 5 * math.pi / 3)
    half_opening: float = 0.2
    r_min: float = 1e-2
    r_max: float = 1e6
    n_radii: int = 41
    n_angles: int = 3

    def points(self):
        """``(log_abs, arg)`` arrays."""
        lr = np.linspace(math.log(self.r_min), math.log(self.r_max), self.n_radii)
        offs = np.linspace(-self.half_opening, self.half_opening, self.n_angles)
        args = np.concatenate([d + offs for d in self.directions])
        L, A = np.meshgrid(lr, args, indexing="ij")
        return L.ravel(), A.ravel()

    def min_angle(self) -> float:
        return float(np.min(_angle_from_zero(np.concatenate(
            [d + np.linspace(-self.half_opening, self.half_opening, self.n_angles) for d in self.directions]))))

    def shifted(self) -> "SectorSampling":
        """A second, interleaved point set used for re-checking certificates."""
        return SectorSampling(self.directions, 0.9 * self.half_opening, self.r_min * 1.37,
                              self.r_max, self.n_radii + 6, self.n_angles + 2)


@dataclass(frozen=True)
class GrowthCertificate:
    """``|f(z)| <= C exp(log(|z|+h)**2 / (2 s log q)) (|z|+h)**alpha``.

    ``s = inf`` drops the quadratic term (polynomial growth). The bound is
    claimed for ``|z| >= r_min`` with ``arg z`` at least ``phi0`` away from
    the positive real axis.
    """

    C: float
    h: float
    alpha: float
    s: float
    q: float
    phi0: float
    r_min: float = 0.0
    rigorous: bool = True

    def log_bound(self, log_abs) -> np.ndarray:
        ell = np.log(np.exp(np.asarray(log_abs, dtype=float)) + self.h)
        quad = 0.0 if math.isinf(self.s) else ell ** 2 / (2 * self.s * math.log(self.q))
        return math.log(self.C) + quad + self.alpha * ell

    def to_json(self) -> dict:
        return {"C": self.C, "h": self.h, "alpha": self.alpha,
                "s": "inf" if math.isinf(self.s) else self.s, "q": self.q, "phi0": self.phi0,
                "r_min": self.r_min, "rigorous": self.rigorous}


@dataclass(frozen=True)
class CertificateFit:
    C: float
    h: float
    alpha: float
    s: float
    passed: bool
    worst_point: Optional[tuple] = None
    n_samples: int = 0

    def to_json(self) -> dict:
        return {"C": self.C, "h": self.h, "alpha": self.alpha,
                "s": "inf" if math.isinf(self.s) else self.s, "pass": self.passed,
                "worst_point": self.worst_point, "n_samples": self.n_samples}


def _fit_certificate(log_f, log_abs, q, s, h=1.0, alpha_cap=DEFAULT_ALPHA_CAP) -> CertificateFit:
    # near samples (|z| <= 1) anchor C, far samples then give the smallest alpha
    ok = np.isfinite(log_f) | np.isneginf(log_f)
    if not np.all(ok):
        return CertificateFit(math.inf, h, math.inf, s, False, None, log_f.size)
    keep = np.isfinite(log_f)
    log_f, log_abs = log_f[keep], log_abs[keep]
    if log_f.size == 0:
        return CertificateFit(1.0, h, 0.0, s, True, None, 0)
    ell = np.log(np.exp(log_abs) + h)
    quad = 0.0 if math.isinf(s) else ell ** 2 / (2 * s * math.log(q))
    g = log_f - quad
    near = log_abs <= 0.0
    log_c_near = float(np.max(g[near])) if np.any(near) else float(np.min(g))
    far = ~near
    # decay does not earn a negative exponent: alpha >= 0
    alpha = max(0.0, float(np.max((g[far] - log_c_near) / ell[far]))) if np.any(far) else 0.0
    logC = float(np.max(g - alpha * ell))
    worst = int(np.argmax(g - alpha * ell))
    passed = math.isfinite(alpha) and math.isfinite(logC) and alpha <= alpha_cap
    return CertificateFit(math.exp(min(logC, 700.0)), h, alpha, s, passed,
                          (float(log_abs[worst]),), int(log_f.size))


# the function object ---------------------------------------------------------

class ContinuableFunction:
    """Analytic continuation with Taylor prefix and growth certificate.

    Parameters
    ----------
    log_evaluator : callable
        ``(log_abs, arg) -> (log_mag, phase)`` on numpy arrays; poles may
        come back as ``+inf``.
    series_at_0 : FormalSeries
        Taylor prefix at the origin (dim 1).
    excluded : list
        :class:`ExcludedRay` / :class:`PoleSet` descriptors.
    certificate : GrowthCertificate or None
        Fitted on ``sampling`` when not given.
    """

    def __init__(self, log_evaluator: Callable, series_at_0: FormalSeries, excluded, kind: str,
                 q: float = 2.0, certificate: Optional[GrowthCertificate] = None,
                 mode: str = RIGOROUS, sampling: Optional[SectorSampling] = None,
                 taylor_radius: Optional[float] = None, meta: Optional[dict] = None,
                 check: bool = True):
        if series_at_0.dim != 1:
            raise DimensionError("continuations are scalar (dim 1)")
        self._log_eval = log_evaluator
        self.series_at_0 = series_at_0
        self.excluded = list(excluded)
        self.kind = kind
        self.q = check_q(q, require_gt1=True)
        self.mode = mode
        self.sampling = sampling or SectorSampling()
        self.meta = dict(meta or {})
        dist = min((e.min_modulus() for e in self.excluded), default=math.inf)
        self.taylor_radius = taylor_radius if taylor_radius is not None else 0.5 * min(dist, 1.0)
        if certificate is None:
            fit = self.fit_certificate(math.inf, self.sampling)
            if not fit.passed:
                raise GrowthError(f"no polynomial growth certificate for {kind}: alpha={fit.alpha}")
            certificate = GrowthCertificate(2.0 * fit.C, fit.h, fit.alpha, math.inf, self.q,
                                            self.sampling.min_angle(), 0.0, mode == RIGOROUS)
        self.certificate = certificate
        if check:
            self.check_invariants()

    # evaluation ------------------------------------------------------------
    def evaluate_log(self, log_abs, arg):
        """Vectorised log-domain values ``(log_mag, phase)``."""
        log_abs = np.asarray(log_abs, dtype=float)
        arg = np.broadcast_to(np.asarray(arg, dtype=float), log_abs.shape)
        return self._log_eval(log_abs, arg)

    def _check_excluded(self, log_abs, arg):
        for e in self.excluded:
            if np.any(e.hits(log_abs, arg)):
                err = CutError if isinstance(e, ExcludedRay) and e.kind == "cut" else PoleError
                raise err(f"{self.kind}: point (log|z|={float(np.max(log_abs))}, arg={float(np.max(arg))}) "
                          f"lies on {e.describe()}")

    def __call__(self, z) -> LogComplex:
        pt = _as_point(z)
        la, ar = np.array([pt.log_mag]), np.array([pt.arg])
        self._check_excluded(la, ar)
        lm, ph = self.evaluate_log(la, ar)
        if not np.isfinite(lm[0]) and lm[0] != -np.inf:
            raise PoleError(f"{self.kind}: non-finite value at {pt}")
        return LogComplex(float(lm[0]), float(ph[0]))

    def value(self, z) -> complex:
        return self(z).to_complex()

    # invariants ---------------------------------------------------------
    def taylor_error(self, n_points: int = 16) -> float:
        """Largest relative gap between evaluator and Taylor prefix on ``|z| = taylor_radius`` and half of it."""
        N = self.series_at_0.order - 1
        args = np.linspace(-math.pi, math.pi, n_points, endpoint=False) + 0.5 / n_points
        r = min(self.taylor_radius, self._tail_radius())
        rad = np.array([0.5 * r, r])
        L, A = np.meshgrid(np.log(rad), args, indexing="ij")
        L, A = L.ravel(), A.ravel()
        lm, ph = self.evaluate_log(L, A)
        sm, sp = eval_partial_array(self.series_at_0, L, A, N)
        scale = np.maximum(lm, sm)
        diff = np.abs(np.exp(lm - scale + 1j * ph) - np.exp(sm - scale + 1j * sp))
        return float(np.max(diff))

    def _tail_radius(self, eps: float = 1e-11) -> float:
        # radius where the last prefix terms drop below eps, so truncation
        # of the prefix itself cannot mask a disagreement
        lm = self.series_at_0.log_mag[:, 0]
        ks = [k for k in range(max(1, lm.size - 3), lm.size) if np.isfinite(lm[k])]
        if not ks:
            return math.inf
        return float(min(math.exp((math.log(eps) - lm[k]) / k) for k in ks))

    def fit_certificate(self, s: float, sampling: SectorSampling, alpha_cap=DEFAULT_ALPHA_CAP):
        L, A = sampling.points()
        lm, _ = self.evaluate_log(L, A)
        return _fit_certificate(np.asarray(lm, dtype=float), L, self.q, s, 1.0, alpha_cap)

    def certificate_excess(self, sampling: Optional[SectorSampling] = None) -> float:
        """``max(log|f| - log bound)`` over a sample set inside the certified domain."""
        sampling = sampling or self.sampling.shifted()
        L, A = sampling.points()
        keep = (_angle_from_zero(A) >= self.certificate.phi0 - 1e-12) & (L >= math.log(max(self.certificate.r_min, 1e-300)))
        lm, _ = self.evaluate_log(L[keep], A[keep])
        if np.any(np.isnan(lm)) or np.any(lm == np.inf):
            return math.inf
        return float(np.max(lm - self.certificate.log_bound(L[keep])))

    def check_invariants(self):
        err = self.taylor_error()
        if not err <= TAYLOR_RTOL:
            raise ValueError(f"{self.kind}: evaluator and Taylor prefix differ by {err:.3g}")
        ex = self.certificate_excess()
        if not ex <= 1e-9:
            raise GrowthError(f"{self.kind}: certificate violated by log-excess {ex:.3g}")

    def describe(self) -> dict:
        return {"kind": self.kind, "mode": self.mode, "q": self.q,
                "excluded": [e.describe() for e in self.excluded],
                "certificate": self.certificate.to_json(), "taylor_radius": self.taylor_radius,
                **self.meta}

    def __repr__(self):
        return f"ContinuableFunction(kind={self.kind!r}, mode={self.mode})"


def growth_certificate_check(f, q, s: float, samples: Optional[SectorSampling] = None,
                             alpha_cap: float = DEFAULT_ALPHA_CAP) -> CertificateFit:
    """Fit ``(C, h=1, alpha)`` of the q-exponential growth bound on sampled points.

    ``f`` is a :class:`ContinuableFunction` or any ``(log_abs, arg) ->
    (log_mag, phase)`` callable. ``alpha`` is the smallest exponent keeping
    the far samples under the level set by the near samples; the verdict is
    ``alpha <= alpha_cap``.
    """
    q = check_q(q, require_gt1=True)
    samples = samples or SectorSampling()
    L, A = samples.points()
    ev = f.evaluate_log if isinstance(f, ContinuableFunction) else f
    lm, _ = ev(L, A)
    return _fit_certificate(np.asarray(lm, dtype=float), L, q, s, 1.0, alpha_cap)


# registered closed forms -----------------------------------------------------

def geometric(scale: float = 1.0, order: int = 60, q: float = 2.0) -> ContinuableFunction:
    """``1 / (1 - scale t)``, cut along ``[1/scale, inf)``."""
    c = float(scale)
    if not c > 0:
        raise ValueError("scale must be positive")
    lc = math.log(c)

    def ev(log_abs, arg):
        out = -_log1m_exp(log_abs + lc + 1j * arg)
        return out.real, np.angle(np.exp(1j * out.imag))

    series = FormalSeries(np.arange(order) * lc)
    phi0 = SectorSampling().min_angle()
    # |1 - w| >= sin(phi) once |arg w| >= phi, phi <= pi/2
    cert = GrowthCertificate(1.0 / math.sin(min(phi0, math.pi / 2)), 1.0, 0.0, math.inf, q, phi0)
    return ContinuableFunction(ev, series, [ExcludedRay(1.0 / c, 0.0, "cut")], "geometric", q,
                               cert, RIGOROUS, meta={"scale": c})


def q_exponential(q, order: int = 80) -> ContinuableFunction:
    """``e_{1/q}(z) = 1 / ((1 - 1/q) z; 1/q)_inf``, poles at ``q**(k+1)/(q-1)``."""
    q = check_q(q, require_gt1=True)
    lq = math.log(q)
    la = math.log1p(-1.0 / q)

    def ev(log_abs, arg, tol=1e-17):
        top = float(np.max(np.where(np.isfinite(log_abs), log_abs, -np.inf), initial=0.0))
        n = max(1, int(math.ceil((max(top + la, 0.0) + math.log(1.0 / tol) + 2.0) / lq)) + 2)
        p = np.arange(n)
        lw = (log_abs + la + 1j * arg)[..., None] - p * lq
        tot = -np.sum(_log1m_exp(lw), axis=-1)
        return tot.real, np.angle(np.exp(1j * tot.imag))

    series = FormalSeries(-np.array(q_factorial_logs(order - 1, 1.0 / q)))
    return ContinuableFunction(ev, series, [PoleSet(q / (q - 1.0), q)], "qexp", q, None, RIGOROUS,
                               meta={"poles": "q**(k+1)/(q-1), k >= 0"})


def q_factorial_series(q, order: int = 80, tol: float = 1e-17) -> ContinuableFunction:
    """Continuation of ``sum [p]_{1/q}! t**p`` by its residue series.

    ``f(z) = sum_p w_p / (1 - q z / ((q-1) q**p))`` with
    ``w_p = (1/q;1/q)_inf / (1/q;1/q)_p * q**-p``; poles at ``(q-1) q**(p-1)``.
    """
    q = check_q(q, require_gt1=True)
    lq = math.log(q)
    lc = lq - math.log(q - 1.0)
    log_inf = q_pochhammer_real_log(1.0 / q, q)

    def weights(n):
        # log (1/q;1/q)_p by cumulative log1p, then the residue weights
        k = np.arange(n)
        steps = np.log1p(-(q ** -(k + 1.0)))
        log_poch = np.concatenate([[0.0], np.cumsum(steps)[:-1]])
        return log_inf - log_poch - k * lq

    def ev(log_abs, arg):
        top = float(np.max(np.where(np.isfinite(log_abs), log_abs, -np.inf), initial=0.0))
        n = int(math.ceil((max(top + lc, 0.0) + math.log(1.0 / tol) + 5.0) / lq)) + 5
        p = np.arange(n)
        lw = (log_abs + lc + 1j * arg)[..., None] - p * lq
        terms = weights(n) - _log1m_exp(lw)
        lm, ph, _ = logsumexp_complex(terms.real, terms.imag, axis=-1, rtol=0.0)
        return lm, ph

    series = FormalSeries(np.array(q_factorial_logs(order - 1, 1.0 / q)))
    return ContinuableFunction(ev, series, [PoleSet((q - 1.0) / q, q)], "qfact", q, None, RIGOROUS,
                               meta={"poles": "(q-1) q**(p-1), p >= 0"})


def _central_logs(order):
    from scipy.special import gammaln

    p = np.arange(order, dtype=float)
    return gammaln(2 * p + 1) - 2 * gammaln(p + 1)


def central_binomial_pair(order: int = 60, q: float = 2.0):
    """``(1 - 4t)**-1/2`` and the arcsin closed form of ``sum p!**2/(2p)! t**p``.

    The first is cut along ``[1/4, inf)``, the second along ``[4, inf)``;
    principal branches throughout.
    """
    def ev_first(log_abs, arg):
        # principal log(1 - 4t) before halving
        lg = _log1m_exp(log_abs + math.log(4.0) + 1j * arg)
        lg = lg.real + 1j * np.angle(np.exp(1j * lg.imag))
        out = -0.5 * lg
        return out.real, out.imag

    def ev_second(log_abs, arg):
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            t = np.exp(log_abs + 1j * arg)
            rt = np.exp(0.5 * (log_abs + 1j * np.angle(np.exp(1j * arg))))
            val = 4.0 / (4.0 - t) + 4.0 * rt * np.arcsin(rt / 2.0) / (4.0 - t) ** 1.5
            val = np.where(np.isneginf(log_abs), 1.0 + 0j, val)
            return np.log(np.abs(val)), np.angle(val)

    lv = _central_logs(order)
    first = ContinuableFunction(ev_first, FormalSeries(lv), [ExcludedRay(0.25, 0.0, "cut")],
                                "cbinom", q, None, RIGOROUS)
    second = ContinuableFunction(ev_second, FormalSeries(-lv), [ExcludedRay(4.0, 0.0, "cut")],
                                 "cbinom_inv", q, None, RIGOROUS)
    return first, second


def monomial(p: int, q: float = 2.0, order: int = 20) -> ContinuableFunction:
    """``u**p``; entire, polynomial growth with ``alpha = p``."""
    p = int(p)
    if p < 0:
        raise ValueError("p must be non-negative")
    lm = np.full(max(order, p + 1), -np.inf)
    lm[p] = 0.0

    def ev(log_abs, arg):
        if p == 0:
            return np.zeros_like(log_abs), np.zeros_like(log_abs)
        return p * log_abs, np.angle(np.exp(1j * p * arg))

    cert = GrowthCertificate(1.0, 1.0, float(p), math.inf, q, 0.0)
    return ContinuableFunction(ev, FormalSeries(lm), [], f"monomial({p})", q, cert, RIGOROUS,
                               taylor_radius=0.5, meta={"p": p})


def polynomial(u: FormalSeries, q: float = 2.0) -> ContinuableFunction:
    """The finitely supported series ``u`` as an entire function.

    ``|P(z)| <= sum |c_k| (|z| + 1)**deg`` gives the certificate directly.
    """
    if u.dim != 1:
        raise DimensionError("polynomial continuation needs a scalar series")
    lm = u.log_mag[:, 0]
    nz = np.nonzero(np.isfinite(lm))[0]
    deg = int(nz.max()) if nz.size else 0
    coef = u.truncate(deg + 1).to_complex()

    def ev(log_abs, arg):
        out = _poly_log_eval(coef, log_abs, arg)
        return out.real, np.angle(np.exp(1j * out.imag))

    C = float(np.sum(np.abs(coef))) or 1.0
    cert = GrowthCertificate(C, 1.0, float(deg), math.inf, q, 0.0)
    return ContinuableFunction(ev, u, [], "polynomial", q, cert, RIGOROUS, taylor_radius=0.5,
                               meta={"degree": deg})


def linear_combination(terms, q: float = 2.0) -> ContinuableFunction:
    """``sum c_i f_i`` for ``(c_i, f_i)`` pairs; certificate refitted."""
    terms = [(complex(c), f) for c, f in terms]
    order = min(f.series_at_0.order for _, f in terms)

    def ev(log_abs, arg):
        parts_m, parts_p = [], []
        for c, f in terms:
            lm, ph = f.evaluate_log(log_abs, arg)
            parts_m.append(lm + (math.log(abs(c)) if c != 0 else -np.inf))
            parts_p.append(ph + np.angle(c))
        lm, ph, _ = logsumexp_complex(np.stack(parts_m), np.stack(parts_p), axis=0, rtol=0.0)
        return lm, ph

    coeffs = sum(c * f.series_at_0.truncate(order).to_complex() for c, f in terms)
    excluded = [e for _, f in terms for e in f.excluded]
    mode = RIGOROUS if all(f.mode == RIGOROUS for _, f in terms) else HEURISTIC
    radius = min(f.taylor_radius for _, f in terms)
    return ContinuableFunction(ev, FormalSeries.from_complex(coeffs), excluded, "combination", q,
                               None, mode, taylor_radius=radius)


# Pade ----------------------------------------------------------------------

def _radius_estimate(c):
    # root-test estimate of the convergence radius from the tail of the prefix
    a = np.abs(c)
    k = np.nonzero(a)[0]
    k = k[k >= max(1, len(c) // 2)]
    if k.size == 0:
        return 1.0
    r = np.exp(-np.log(a[k]) / k)
    return float(np.clip(np.median(r), 1e-8, 1e8))


def pade_coefficients(c, num_deg: int, den_deg: int, cond_max: float = 1e12):
    """Numerator and denominator coefficients (``b_0 = 1``) of the ``[L/M]`` approximant."""
    c = np.asarray(c, dtype=complex)
    L, M = int(num_deg), int(den_deg)
    if L + M + 1 > c.size:
        raise ValueError(f"need {L + M + 1} coefficients, have {c.size}")
    if M == 0:
        return c[: L + 1].copy(), np.ones(1, dtype=complex)
    # Toeplitz system sum_{j=1..M} b_j c_{k-j} = -c_k, k = L+1..L+M
    ext = np.concatenate([np.zeros(M, dtype=complex), c])
    rows = np.array([[ext[M + k - j] for j in range(1, M + 1)] for k in range(L + 1, L + M + 1)])
    rhs = -c[L + 1: L + M + 1]
    if not np.all(np.isfinite(rows)):
        raise DegeneracyError("non-finite Pade system")
    cond = np.linalg.cond(rows) if rows.size else 1.0
    if not cond < cond_max:
        raise DegeneracyError(f"Pade system singular or ill-conditioned (cond={cond:.3g})")
    b = np.concatenate([[1.0], np.linalg.solve(rows, rhs)])
    a = np.array([sum(b[j] * c[k - j] for j in range(min(k, M) + 1)) for k in range(L + 1)])
    return a, b


def _poly_log_eval(coef, log_abs, arg):
    # log of sum coef_k w^k, with the large-|w| branch done on 1/w
    deg = len(coef) - 1
    w_big = log_abs > 0
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        w = np.exp(np.where(w_big, -log_abs, log_abs) + 1j * np.where(w_big, -arg, arg))
        small = np.polyval(coef[::-1], w)
        big = np.polyval(coef, w)
    with np.errstate(divide="ignore"):
        ls = np.log(np.abs(small)) + 1j * np.angle(small)
        lb = np.log(np.abs(big)) + 1j * np.angle(big) + deg * (log_abs + 1j * arg)
    return np.where(w_big, lb, ls)


def pade_continue(u: FormalSeries, num_deg: int, den_deg: int, q: float = 2.0,
                  sampling: Optional[SectorSampling] = None) -> ContinuableFunction:
    """Rational continuation of a Taylor prefix (HEURISTIC).

    The variable is rescaled by the estimated convergence radius before
    solving; an ill-conditioned system drops the denominator degree by one
    until it solves.
    """
    if u.dim != 1:
        raise DimensionError("Pade continuation needs a scalar series")
    if num_deg + den_deg + 1 > u.order:
        raise ValueError(f"num_deg + den_deg + 1 = {num_deg + den_deg + 1} exceeds order {u.order}")
    lm = u.log_mag[:, 0]
    finite = np.isfinite(lm)
    rho = _radius_estimate(np.where(finite, np.exp(np.clip(lm, -700, 700)), 0.0)) if np.any(finite) else 1.0
    p = np.arange(u.order)
    scaled = u.scaled(p * math.log(rho)).to_complex()
    M = int(den_deg)
    tried = []
    while True:
        try:
            a, b = pade_coefficients(scaled, num_deg, M)
            break
        except DegeneracyError as e:
            tried.append((M, str(e)))
            if M == 0:
                raise
            M -= 1
    # trim numerically vanishing top coefficients so degrees reflect the rational function
    while b.size > 1 and abs(b[-1]) < 1e-13 * np.max(np.abs(b)):
        b = b[:-1]
    while a.size > 1 and abs(a[-1]) < 1e-13 * np.max(np.abs(a)):
        a = a[:-1]
    poles = tuple(complex(r) * rho for r in np.roots(b[::-1])) if b.size > 1 else ()
    lrho = math.log(rho)

    def ev(log_abs, arg):
        la = log_abs - lrho
        num = _poly_log_eval(a, la, arg)
        den = _poly_log_eval(b, la, arg)
        out = num - den
        lm_ = np.where(np.isfinite(den.real), out.real, np.inf)
        return lm_, np.angle(np.exp(1j * out.imag))

    dist = min((abs(z) for z in poles), default=math.inf)
    radius = 0.25 * min(dist, rho, 1.0)
    meta = {"num_deg": int(a.size - 1), "den_deg": int(b.size - 1), "requested": [num_deg, den_deg],
            "fallbacks": tried, "rescale": rho, "poles": [[z.real, z.imag] for z in poles]}
    return ContinuableFunction(ev, u, [PoleSet(points=poles)],
                               PADE, q, None, HEURISTIC, sampling, taylor_radius=radius, meta=meta)


REGISTRY = ("geometric", "qexp", "qfact", "cbinom", "cbinom_inv", "polynomial", "pade")


def make_continuation(kind: str, q: float = 2.0, series: Optional[FormalSeries] = None,
                      num_deg: int = 6, den_deg: int = 6, scale: float = 1.0) -> ContinuableFunction:
    """Factory used by the CLI and the summation pipeline."""
    kind = kind.lower()
    if kind == "geometric":
        return geometric(scale, q=q)
    if kind == "qexp":
        return q_exponential(q)
    if kind == "qfact":
        return q_factorial_series(q)
    if kind == "cbinom":
        return central_binomial_pair(q=q)[0]
    if kind == "cbinom_inv":
        return central_binomial_pair(q=q)[1]
    if kind == "polynomial":
        if series is None:
            raise ValueError("polynomial needs a series")
        return polynomial(series, q)
    if kind == "pade":
        if series is None:
            raise ValueError("pade needs a series")
        return pade_continue(series, num_deg, den_deg, q)
    raise ValueError(f"unknown continuation kind {kind!r}")


__all__ = [
    "SurfacePoint", "ContinuableFunction", "ExcludedRay", "PoleSet", "SectorSampling",
    "GrowthCertificate", "CertificateFit", "growth_certificate_check", "geometric",
    "q_exponential", "q_factorial_series", "central_binomial_pair", "monomial",
    "polynomial", "linear_combination", "pade_continue", "pade_coefficients", "make_continuation",
    "RIGOROUS", "HEURISTIC", "PADE", "REGISTRY",
]
