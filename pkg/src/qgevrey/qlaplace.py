"""Numerical q-Laplace transform along a ray and the summation pipeline.

With ``u = exp(x + i gamma)`` the transform becomes

    L(f)(z) = (1 / (s log q)) * int f(e^{x+i gamma}) / theta(e^{x+i gamma} / z) dx

and the theta denominator makes the integrand Gaussian-like in ``x``
around ``log|z|``. The composite trapezoid rule is spectrally accurate for
such integrands; the window is widened until both ends are negligible and
the step is halved until two successive sums agree.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .continuation import (ContinuableFunction, SurfacePoint, _angle_from_zero, _as_point,
                           make_continuation, pade_continue)
from .exceptions import (DomainError, GrowthError, InconsistentOracleError,
                         InsufficientDataError, QuadratureError)
from .fps import FormalSeries, qborel
from .qcore import check_q
from .theta import log_theta_series, spiral_clearance_array
from .xnum import LogComplex, logsumexp_complex, wrap_phase

MAX_LEVELS = 12
MAX_EXTENSIONS = 60
DEFAULT_DELTA = 0.05
DEFAULT_HALF_OPENING = 0.8 * math.pi


@dataclass(frozen=True)
class RayDomain:
    gamma: float
    delta: float = DEFAULT_DELTA
    q: float = 2.0
    s: float = 1.0

    def __post_init__(self):
        check_q(self.q, require_gt1=True)
        if not 0 < self.delta < 1:
            raise DomainError(f"delta must lie in (0, 1), got {self.delta}")
        if not self.s > 0:
            raise DomainError(f"s must be positive, got {self.s}")
        if not math.isfinite(self.gamma):
            raise DomainError("gamma must be finite")

    @property
    def sigma2(self) -> float:
        return self.s * math.log(self.q)

    def contains(self, z) -> bool:
        return ray_clearance(z, self.gamma) > self.delta


def ray_clearance(z, gamma: float) -> float:
    """``inf_{r >= 0} |z + r e^{i gamma}| / |z|``.

    With ``w = e^{-i gamma} z / |z|`` this is 1 when ``Re w >= 0`` and
    ``|Im w|`` otherwise.
    """
    pt = _as_point(z)
    if pt.log_mag == -math.inf:
        raise DomainError("ray clearance undefined at z = 0")
    phi = pt.arg - gamma
    if math.cos(phi) >= 0:
        return 1.0
    return abs(math.sin(phi))


def validity_radius(alpha: float, q, s: float) -> float:
    """``q**(-s (alpha + 1))``: radius on which the sum is bounded."""
    q = check_q(q, require_gt1=True)
    return math.exp(-s * (alpha + 1.0) * math.log(q))


def _log_integrand(f: ContinuableFunction, x, gamma, L, argz, sigma2, theta_tol):
    fm, fp = f.evaluate_log(x, np.full_like(x, gamma))
    tm, tp, _, _ = log_theta_series(x - L, gamma - argz, sigma2, theta_tol)
    with np.errstate(invalid="ignore"):
        lm = fm - tm
    lm = np.where(np.isneginf(fm), -np.inf, lm)
    return lm, fp - tp


def q_laplace(f: ContinuableFunction, dom: RayDomain, z, tol: float = 1e-10,
              full_output: bool = False):
    """q-Laplace transform of order ``1/s`` of ``f`` along direction ``dom.gamma`` at ``z``.

    Raises DomainError when ``z`` is not in the clearance domain,
    GrowthError when the certificate is weaker than order ``1/s`` or does
    not cover the direction, QuadratureError when refinement stalls.
    """
    pt = _as_point(z)
    if pt.log_mag == -math.inf:
        raise DomainError("z = 0 is not an admissible point")
    clr = ray_clearance(pt, dom.gamma)
    if not clr > dom.delta:
        raise DomainError(f"ray clearance {clr:.3g} <= delta={dom.delta}")
    cert = f.certificate
    if cert.s < dom.s:
        raise GrowthError(f"certificate order 1/{cert.s} weaker than required 1/{dom.s}")
    if _angle_from_zero(dom.gamma) < cert.phi0 - 1e-12:
        raise GrowthError(f"direction {dom.gamma} outside the certified sector (phi0={cert.phi0:.3g})")
    if not tol > 0:
        raise ValueError("tol must be positive")
    sig2 = dom.sigma2
    L, argz = pt.log_mag, pt.arg
    theta_tol = min(1e-14, tol * 1e-3)

    def g(x):
        return _log_integrand(f, x, dom.gamma, L, argz, sig2, theta_tol)

    # window: Gaussian half-width from tol, then widened until the ends are negligible
    sig = math.sqrt(sig2)
    W = math.sqrt(2.0 * sig2 * (math.log(1.0 / tol) + 10.0 + abs(cert.alpha)))
    centre = L - 0.5 * sig2
    h = 0.5 * sig
    lo, hi = centre - W, centre + W
    probe = np.linspace(lo, hi, 64)
    pm, _ = g(probe)
    if not np.any(np.isfinite(pm)):
        raise QuadratureError("integrand vanishes or is undefined on the whole window")
    peak = float(np.max(pm))
    cut = peak + math.log(tol) - 8.0
    ext = 0
    while True:
        em, _ = g(np.array([lo, hi]))
        grow_lo, grow_hi = em[0] > cut, em[1] > cut
        if not (grow_lo or grow_hi):
            break
        ext += 1
        if ext > MAX_EXTENSIONS or np.any(np.isnan(em)):
            raise QuadratureError(f"integrand tails do not decay (log ends {em.tolist()}); "
                                  "|z| may exceed the validity radius")
        if grow_lo:
            lo -= 0.5 * W
        if grow_hi:
            hi += 0.5 * W
        peak = max(peak, float(np.max(em)))
        cut = peak + math.log(tol) - 8.0

    # nested trapezoid grids anchored at the centre
    k_lo = math.floor((lo - centre) / h)
    k_hi = math.ceil((hi - centre) / h)
    x = centre + h * np.arange(k_lo, k_hi + 1)
    lm, ph = g(x)
    lm, ph = _guard_nodes(lm, ph, x, g, h, L, dom, argz)
    S_m, S_p, _ = logsumexp_complex(lm, ph, axis=-1, rtol=0.0)
    S_m, S_p = float(S_m), float(S_p)
    T_prev = LogComplex(S_m + math.log(h), S_p)
    nodes = x.size
    converged = False
    diff = math.inf
    level = 0
    for level in range(1, MAX_LEVELS + 1):
        h_new = h / 2.0
        xm = x[:-1] + h_new
        mm, mp = g(xm)
        mm, mp = _guard_nodes(mm, mp, xm, g, h_new, L, dom, argz)
        mid_m, mid_p, _ = logsumexp_complex(mm, mp, axis=-1, rtol=0.0)
        # running node sum gains the midpoints; T = h_new * S
        sm, sp, _ = logsumexp_complex(np.array([S_m, float(mid_m)]),
                                      np.array([S_p, float(mid_p)]), axis=-1, rtol=0.0)
        S_m, S_p = float(sm), float(sp)
        T = LogComplex(S_m + math.log(h_new), S_p)
        x = np.sort(np.concatenate([x, xm]))
        nodes += xm.size
        h = h_new
        diff = _rel_diff(T, T_prev)
        T_prev = T
        if level >= 2 and diff <= tol:
            converged = True
            break
    if not converged:
        raise QuadratureError(f"trapezoid refinement did not settle after {MAX_LEVELS} halvings "
                              f"(last relative change {diff:.3g})")
    val = LogComplex(T.log_mag - math.log(sig2), T.phase)
    if full_output:
        info = {"window": (lo, hi), "half_width": W, "step": h, "nodes": int(nodes),
                "levels": level, "extensions": ext, "last_change": diff, "clearance": clr}
        return val, info
    return val


def _rel_diff(a: LogComplex, b: LogComplex) -> float:
    if a.is_zero and b.is_zero:
        return 0.0
    top = max(a.log_mag, b.log_mag)
    wa = np.exp(a.log_mag - top + 1j * a.phase)
    wb = np.exp(b.log_mag - top + 1j * b.phase)
    return float(abs(wa - wb) / max(abs(wa), 1e-300))


def _guard_nodes(lm, ph, x, g, h, L, dom, argz):
    # nodes close to the zero spiral of theta(u/z) are shifted by half a step
    clear = spiral_clearance_array(x - L, np.full_like(x, dom.gamma - argz), dom.sigma2)
    bad = (clear < 0.5 * dom.delta) | np.isnan(lm) | (lm == np.inf)
    if not np.any(bad):
        return lm, ph
    if np.all(bad):
        raise QuadratureError("every quadrature node sits on the theta zero spiral")
    warnings.warn(f"{int(bad.sum())} quadrature node(s) shifted off the theta zero spiral", RuntimeWarning)
    xs = x[bad] + 0.5 * h
    sm, sp = g(xs)
    if np.any(~np.isfinite(sm) & ~np.isneginf(sm)):
        raise QuadratureError("shifted quadrature nodes still hit a singularity")
    lm = lm.copy()
    ph = ph.copy()
    lm[bad], ph[bad] = sm, sp
    return lm, ph


# summation pipeline -----------------------------------------------------

@dataclass(frozen=True)
class Strategy:
    """``CLOSED_FORM`` with a registered tag, or ``PADE`` with degrees."""

    kind: str = "CLOSED_FORM"
    tag: Optional[str] = "geometric"
    num_deg: int = 6
    den_deg: int = 6
    scale: float = 1.0

    @classmethod
    def parse(cls, text: str) -> "Strategy":
        t = text.strip()
        if t.upper().startswith("PADE"):
            inner = t[4:].strip("() ")
            if inner:
                a, b = (int(v) for v in inner.split(","))
                return cls("PADE", None, a, b)
            return cls("PADE", None)
        if t.upper().startswith("CLOSED_FORM"):
            t = t[len("CLOSED_FORM"):].strip("() ")
        return cls("CLOSED_FORM", t.lower() or "geometric")


CLOSED_FORM = "CLOSED_FORM"
PADE = "PADE"


def _check_prefix(b: FormalSeries, f: ContinuableFunction, rtol: float = 1e-8):
    n = min(b.order, f.series_at_0.order)
    ref = f.series_at_0.truncate(n)
    got = b.truncate(n)
    za, zb = got.log_mag == -np.inf, ref.log_mag == -np.inf
    if np.any(za != zb):
        raise InconsistentOracleError("zero pattern of the Borel prefix differs from the continuation")
    nz = ~za
    dm = np.abs(got.log_mag[nz] - ref.log_mag[nz])
    dp = np.abs(np.angle(np.exp(1j * (got.phase[nz] - ref.phase[nz]))))
    worst = float(max(dm.max(initial=0.0), dp.max(initial=0.0)))
    if worst > rtol:
        raise InconsistentOracleError(f"Borel prefix and {f.kind} Taylor prefix differ by {worst:.3g} (log)")
    return worst


class SectorialFunction:
    """The q-sum of a series on a sector, evaluated on demand by quadrature."""

    def __init__(self, continuation: ContinuableFunction, q, s, gammas: Sequence[float],
                 delta=DEFAULT_DELTA, half_opening=DEFAULT_HALF_OPENING, tol=1e-10,
                 series: Optional[FormalSeries] = None, prefix_error: float = 0.0):
        self.continuation = continuation
        self.q = check_q(q, require_gt1=True)
        self.s = float(s)
        self.gammas = tuple(float(g) for g in gammas)
        self.delta = delta
        self.half_opening = half_opening
        self.tol = tol
        self.series = series
        self.prefix_error = prefix_error
        self.radius = validity_radius(continuation.certificate.alpha, q, s)

    @property
    def gamma(self) -> float:
        return self.gammas[0]

    def domain(self, gamma: float) -> RayDomain:
        return RayDomain(gamma, self.delta, self.q, self.s)

    def pick_gamma(self, pt: SurfacePoint) -> float:
        # the sweep direction closest to arg z on the surface
        return min(self.gammas, key=lambda g: abs(pt.arg - g))

    def __call__(self, z, full_output: bool = False):
        pt = _as_point(z)
        if not isinstance(z, SurfacePoint):
            # a plain number carries no sheet: take the lift nearest the main direction
            pt = SurfacePoint(pt.log_mag, self.gamma + wrap_phase(pt.arg - self.gamma))
        g = self.pick_gamma(pt)
        if abs(pt.arg - g) >= self.half_opening:
            raise DomainError(f"arg z = {pt.arg:.3f} outside the sector around gamma = {g:.3f}")
        return q_laplace(self.continuation, self.domain(g), pt, self.tol, full_output)

    def default_grid(self, n_radii: int = 8, n_args: int = 7, r_max: Optional[float] = None,
                     r_min: Optional[float] = None):
        r_max = min(self.radius, r_max or self.radius) * 0.999
        r_min = r_min or r_max * 1e-2
        radii = np.geomspace(r_min, r_max, n_radii)
        args = self.gamma + np.linspace(-self.half_opening, self.half_opening, n_args + 2)[1:-1]
        return radii, args

    def sample(self, radii=None, args=None):
        """Evaluate on a polar grid; inadmissible points are skipped.

        Returns a list of dicts ``{"abs", "arg", "value", "nodes"}``.
        """
        if radii is None or args is None:
            r0, a0 = self.default_grid()
            radii = r0 if radii is None else radii
            args = a0 if args is None else args
        out = []
        for r in np.atleast_1d(radii):
            if r > self.radius:
                continue
            for a in np.atleast_1d(args):
                pt = SurfacePoint(math.log(r), float(a))
                g = self.pick_gamma(pt)
                if abs(pt.arg - g) >= self.half_opening or ray_clearance(pt, g) <= self.delta:
                    continue
                val, info = self(pt, full_output=True)
                out.append({"abs": float(r), "arg": float(a), "value": val, "nodes": info["nodes"]})
        return out


def q_sum(u: FormalSeries, q, s: float, gamma: float = math.pi, strategy="CLOSED_FORM(geometric)",
          delta: float = DEFAULT_DELTA, half_opening: float = DEFAULT_HALF_OPENING,
          tol: float = 1e-10, sweep: Sequence[float] = ()) -> SectorialFunction:
    """q-Borel transform ``u``, continue it, and wrap its q-Laplace transform.

    ``strategy`` is a :class:`Strategy` or a string such as
    ``"CLOSED_FORM(qfact)"`` or ``"PADE(6,6)"``. ``sweep`` adds further
    directions (on the surface of the logarithm) used for points far from
    ``gamma``.
    """
    q = check_q(q, require_gt1=True)
    st = Strategy.parse(strategy) if isinstance(strategy, str) else strategy
    b = qborel(u, q, s)
    if st.kind == PADE:
        cont = pade_continue(b, st.num_deg, st.den_deg, q)
        if min((abs(complex(*p)) for p in cont.meta["poles"]), default=math.inf) < 1e-3:
            raise InconsistentOracleError("Pade continuation has a pole next to the origin")
    else:
        cont = make_continuation(st.tag, q, series=b, scale=st.scale)
    err = _check_prefix(b, cont)
    return SectorialFunction(cont, q, s, (gamma, *sweep), delta, half_opening, tol, u, err)


# asymptotic expansions -------------------------------------------------

@dataclass(frozen=True)
class AsymptoticVerdict:
    C: float
    A: float
    passed: bool
    worst_index: int
    worst_point: Optional[SurfacePoint]
    logC: float = 0.0
    logA: float = 0.0
    n_pairs: int = 0
    n_skipped: int = 0
    log_A_cap: float = 3.0
    profile: tuple = field(default=())

    def to_json(self) -> dict:
        wp = None if self.worst_point is None else [self.worst_point.log_mag, self.worst_point.arg]
        return {"C": self.C, "A": self.A, "pass": self.passed, "worst_index": self.worst_index,
                "worst_point": wp, "logC": self.logC, "logA": self.logA, "n_pairs": self.n_pairs,
                "n_skipped": self.n_skipped, "log_A_cap": self.log_A_cap,
                "profile": [None if not math.isfinite(v) else v for v in self.profile]}


def _to_points_values(samples, values=None):
    if values is None:
        # list of sample dicts from SectorialFunction.sample, or (z, f) pairs
        pts, vals = [], []
        for rec in samples:
            if isinstance(rec, dict):
                pts.append(SurfacePoint(math.log(rec["abs"]), rec["arg"]))
                vals.append(rec["value"])
            else:
                z, v = rec
                pts.append(_as_point(z))
                vals.append(v)
    else:
        pts = [_as_point(z) for z in samples]
        vals = list(values)
    vals = [v if isinstance(v, LogComplex) else LogComplex.from_complex(complex(v)) for v in vals]
    return pts, vals


def asymptotic_check(samples, coeffs: FormalSeries, q, s: float, N_max: int, values=None,
                     log_A_cap: float = 3.0, f_rtol: float = 1e-10) -> AsymptoticVerdict:
    """Fit the smallest ``(C, A)`` with ``|R_N(z)| <= C A**N q**(s N(N-1)/2) |z|**(N+1)``.

    ``R_N = f - sum_{p<=N} c_p z**p`` over every sample and ``N <= N_max``.
    ``logC`` is the worst ``N = 0`` level and ``logA`` the largest average
    growth per index beyond it. Remainders below ten times the evaluation
    noise (``f_rtol |f|`` plus rounding in the partial sum) carry no
    information and are skipped.
    """
    q = check_q(q)
    pts, vals = _to_points_values(samples, values)
    if not pts:
        raise InsufficientDataError("asymptotic_check needs at least one sample")
    if coeffs.dim != 1:
        raise ValueError("asymptotic_check expects a scalar series")
    if not 0 <= N_max < coeffs.order:
        raise ValueError(f"need 0 <= N_max < order={coeffs.order}")
    if any(p.log_mag == -math.inf for p in pts):
        raise DomainError("samples must avoid z = 0")
    c = coeffs.to_complex()
    lq = math.log(q)
    D = np.full(N_max + 1, -np.inf)
    arg_worst = np.zeros(N_max + 1, dtype=int)
    n_pairs = n_skip = 0
    for i, (pt, fv) in enumerate(zip(pts, vals)):
        z = pt.to_complex()
        f = fv.to_complex()
        partial = 0j
        mag = 0.0
        for N in range(N_max + 1):
            term = c[N] * z ** N
            partial += term
            mag += abs(term)
            R = f - partial
            noise = f_rtol * abs(f) + 4e-16 * (mag + abs(f)) * (N + 1)
            n_pairs += 1
            if abs(R) <= 10.0 * noise:
                n_skip += 1
                continue
            d = math.log(abs(R)) - s * lq * N * (N - 1) / 2.0 - (N + 1) * pt.log_mag
            if d > D[N]:
                D[N] = d
                arg_worst[N] = i
    if not np.any(np.isfinite(D)):
        return AsymptoticVerdict(0.0, 1.0, True, 0, None, -math.inf, 0.0, n_pairs, n_skip,
                                 log_A_cap, tuple(D.tolist()))
    # anchor at the first informative index, then the steepest average climb
    n0 = int(np.argmax(np.isfinite(D)))
    logC = float(D[n0])
    logA = 0.0
    worst = n0
    for N in range(n0 + 1, N_max + 1):
        if np.isfinite(D[N]):
            slope = (D[N] - logC) / (N - n0)
            if slope > logA or worst == n0:
                logA, worst = float(slope), N
    logA = max(logA, 0.0) if worst == n0 else logA
    if n0 > 0:
        # bound must also cover N = n0 from index 0: C A**n0 >= exp(D[n0])
        logC = logC - n0 * logA
    passed = bool(math.isfinite(logA) and logA <= log_A_cap)
    return AsymptoticVerdict(math.exp(min(logC, 700.0)), math.exp(min(logA, 700.0)), passed, worst,
                             pts[int(arg_worst[worst])], logC, logA, n_pairs, n_skip, log_A_cap,
                             tuple(D.tolist()))


__all__ = [
    "RayDomain", "ray_clearance", "q_laplace", "validity_radius", "Strategy", "SectorialFunction",
    "q_sum", "asymptotic_check", "AsymptoticVerdict", "CLOSED_FORM", "PADE",
]
