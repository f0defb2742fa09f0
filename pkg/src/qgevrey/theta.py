"""Jacobi theta function of base ``q**s`` and its zero spiral.

``theta(z) = sum_{p in Z} q**(-s*p*(p-1)/2) * z**p`` with zeros exactly at
``-q**(k*s)``. Terms are Gaussian in ``p`` around ``log|z| / (s log q) + 1/2``,
so the bilateral series is summed over a window centred there.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError
from .qcore import check_q
from .xnum import LogComplex, Number, as_logcomplex

SERIES = "series"
PRODUCT = "product"


@dataclass(frozen=True)
class ThetaParams:
    q: float
    s: float = 1.0
    tol: float = 1e-12

    def __post_init__(self):
        check_q(self.q, require_gt1=True)
        if not self.s > 0:
            raise DomainError(f"s must be positive, got {self.s}")
        if not self.tol > 0:
            raise DomainError(f"tol must be positive, got {self.tol}")

    @property
    def sigma2(self) -> float:
        """``s * log q``; the variance of the Gaussian term profile."""
        return self.s * math.log(self.q)


_TWO_PI_LD = 2 * np.arccos(np.longdouble(-1))


def _half_window(sigma2: float, tol: float) -> int:
    # terms k steps from the peak are ~exp(-sigma2 k^2 / 2) relative to it
    return int(math.ceil(math.sqrt(2.0 * (math.log(1.0 / tol) + 5.0) / sigma2))) + 2


def log_theta_series(log_abs, arg, sigma2: float, tol: float = 1e-12):
    """Vectorised series evaluation in log domain.

    Returns ``(log_mag, phase, log_scale, half_window)``; ``log_scale`` is
    the log of the largest term. Values below ``tol`` times the largest term
    come back as ``-inf``.

    Terms are formed and summed in extended precision: for small ``s log q``
    and ``arg z`` near pi neighbouring terms nearly cancel, and the sum can
    be six orders below its largest term.
    """
    log_abs = np.atleast_1d(np.asarray(log_abs, dtype=float))
    arg = np.broadcast_to(np.asarray(arg, dtype=float), log_abs.shape)
    half = _half_window(sigma2, tol)
    centre = np.round(log_abs / sigma2 + 0.5)
    p = (centre[..., None] + np.arange(-half, half + 1)).astype(np.longdouble)
    L = log_abs.astype(np.longdouble)[..., None]
    a = arg.astype(np.longdouble)[..., None]
    expo = -0.5 * np.longdouble(sigma2) * p * (p - 1) + p * L
    ph = np.fmod(p * a, _TWO_PI_LD)
    scale = np.max(expo, axis=-1, keepdims=True)
    mag = np.exp(expo - scale)
    re = np.sum(mag * np.cos(ph), axis=-1)
    im = np.sum(mag * np.sin(ph), axis=-1)
    aw = np.hypot(re, im).astype(float)
    scale = scale[..., 0].astype(float)
    zero = aw < tol
    with np.errstate(divide="ignore"):
        lm = np.where(zero, -np.inf, scale + np.log(np.where(zero, 1.0, aw)))
    phase = np.where(zero, 0.0, np.arctan2(im, re).astype(float))
    return lm, phase, scale, half


def _log1p_exp(a):
    # log(1 + exp(a)) up to 2 pi i, for complex a of any size
    big = a.real > 0
    with np.errstate(over="ignore", invalid="ignore"):
        return np.where(big, a + np.log1p(np.exp(-np.where(big, a, 0))),
                        np.log1p(np.exp(np.where(big, 0, a))))


def log_theta_product(log_abs, arg, sigma2: float, tol: float = 1e-12):
    """Triple-product evaluation; returns ``(log_mag, phase, n_factors)``."""
    log_abs = np.atleast_1d(np.asarray(log_abs, dtype=float))
    arg = np.broadcast_to(np.asarray(arg, dtype=float), log_abs.shape)
    top = float(np.max(np.abs(log_abs)))
    n = int(math.ceil((top + math.log(1.0 / tol) + 2.0) / sigma2)) + 2
    p = np.arange(n)
    # log(1 + z q^{-ps}) and log(1 + 1/(z q^{s(p+1)})), both in log-stable form
    lz = (log_abs + 1j * arg)[..., None]
    total = np.sum(_log1p_exp(lz - p * sigma2) + _log1p_exp(-lz - (p + 1) * sigma2), axis=-1)
    total = total + np.sum(np.log1p(-np.exp(-(p + 1) * sigma2)))
    return total.real, np.angle(np.exp(1j * total.imag)), n


def theta_eval(z: Number, params: ThetaParams, method: str = SERIES, full_output: bool = False):
    """Evaluate ``theta_{q^s}(z)`` for ``z != 0``.

    Near-zero results (below ``tol`` times the largest series term) are
    returned as exact zero and flagged in the info dict.
    """
    z = as_logcomplex(z)
    if z.is_zero:
        raise DomainError("theta is not defined at z = 0")
    sig2 = params.sigma2
    lm_s, ph_s, scale, half = log_theta_series(z.log_mag, z.phase, sig2, params.tol)
    info = {"method": method, "log_scale": float(scale[0]), "half_window": half,
            "centre": int(round(z.log_mag / sig2 + 0.5))}
    if not np.isfinite(lm_s[0]):
        info["near_zero"] = True
        val = LogComplex(-math.inf)
    elif method == SERIES:
        info["near_zero"] = False
        val = LogComplex(float(lm_s[0]), float(ph_s[0]))
    elif method == PRODUCT:
        lm, ph, n = log_theta_product(z.log_mag, z.phase, sig2, params.tol)
        info["near_zero"] = False
        info["factors"] = n
        val = LogComplex(float(lm[0]), float(ph[0]))
    else:
        raise ValueError(f"unknown method {method!r}")
    return (val, info) if full_output else val


def spiral_clearance(z: Number, params: ThetaParams) -> float:
    """``inf_k |1 + z / q**(k*s)|`` over all integers ``k``.

    The limit ``k -> +inf`` contributes 1; only the finitely many ``k`` with
    ``|k s log q - log|z|| <= 2 s log q + 2`` can do better.
    """
    z = as_logcomplex(z)
    if z.is_zero:
        raise DomainError("spiral clearance undefined at z = 0")
    sig2 = params.sigma2
    width = 2.0 * sig2 + 2.0
    k_lo = math.floor((z.log_mag - width) / sig2)
    k_hi = math.ceil((z.log_mag + width) / sig2)
    k = np.arange(k_lo, k_hi + 1)
    w = np.exp(z.log_mag - k * sig2 + 1j * z.phase)
    return float(min(1.0, np.min(np.abs(1.0 + w))))


def spiral_clearance_array(log_abs, arg, sigma2: float) -> np.ndarray:
    """Vectorised :func:`spiral_clearance` (same window rule)."""
    log_abs = np.asarray(log_abs, dtype=float)
    arg = np.broadcast_to(np.asarray(arg, dtype=float), log_abs.shape)
    reach = int(math.ceil((2.0 * sigma2 + 2.0) / sigma2)) + 1
    k0 = np.round(log_abs / sigma2)
    k = k0[..., None] + np.arange(-reach, reach + 1)
    w = np.exp(log_abs[..., None] - k * sigma2 + 1j * arg[..., None])
    return np.minimum(1.0, np.min(np.abs(1.0 + w), axis=-1))


def theta_lower_bound(z: Number, params: ThetaParams, delta: float, C: float) -> float:
    """Log of ``C * delta * exp(log(|z|)**2 / (2 s log q)) * |z|**0.5``."""
    if not (delta > 0 and C > 0):
        raise DomainError("delta and C must be positive")
    z = as_logcomplex(z)
    L = z.log_mag
    return math.log(C * delta) + L * L / (2.0 * params.sigma2) + 0.5 * L


@dataclass(frozen=True)
class LowerBoundCertificate:
    """Empirical constant for the theta lower bound at one ``(q, s, delta)``."""

    q: float
    s: float
    delta: float
    C: float
    n_samples: int
    log_radius: tuple = field(default=(-7.0, 7.0))


def calibrate_lower_bound(params: ThetaParams, delta: float, n_samples: int = 500,
                          log_radius=(-7.0, 7.0), seed: int = 0) -> LowerBoundCertificate:
    """Largest ``C`` for which the lower bound holds on random clearance-respecting points."""
    rng = np.random.default_rng(seed)
    logs, args = [], []
    while len(logs) < n_samples:
        L = rng.uniform(*log_radius, size=4 * n_samples)
        a = rng.uniform(-math.pi, math.pi, size=L.size)
        ok = spiral_clearance_array(L, a, params.sigma2) > delta
        logs.extend(L[ok])
        args.extend(a[ok])
    L = np.array(logs[:n_samples])
    a = np.array(args[:n_samples])
    lm, _, _, _ = log_theta_series(L, a, params.sigma2, params.tol)
    log_ratio = lm - (math.log(delta) + L * L / (2.0 * params.sigma2) + 0.5 * L)
    return LowerBoundCertificate(params.q, params.s, delta, float(np.exp(np.min(log_ratio))),
                                 n_samples, tuple(log_radius))
