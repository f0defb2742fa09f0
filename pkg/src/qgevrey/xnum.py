"""Log-domain complex scalars.

A :class:`LogComplex` stores ``log|z|`` and ``arg z`` separately so that
quantities of size ``q**(s*p*(p-1)/2)`` survive long after a float64
would overflow. Zero is ``(-inf, 0.0)``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from .exceptions import UnderflowError

TWO_PI = 2.0 * math.pi
NEG_INF = -math.inf

#: relative size below which an addition is treated as total cancellation
CANCEL_RTOL = 1e-13
#: |log_mag| bound for conversion to ordinary floats
FLOAT_LOG_LIMIT = 700.0


def wrap_phase(phi: float) -> float:
    """Reduce an angle to (-pi, pi]."""
    r = math.remainder(phi, TWO_PI)
    if r <= -math.pi:
        r += TWO_PI
    return r


@dataclass(frozen=True, slots=True)
class LogComplex:
    """Complex number ``exp(log_mag) * exp(1j * phase)``."""

    log_mag: float
    phase: float = 0.0

    def __post_init__(self):
        lm = float(self.log_mag)
        if math.isnan(lm) or lm == math.inf:
            raise ValueError(f"log_mag must be finite or -inf, got {lm}")
        ph = float(self.phase)
        if math.isnan(ph) or math.isinf(ph):
            raise ValueError(f"phase must be finite, got {ph}")
        if lm == NEG_INF:
            ph = 0.0
        else:
            ph = wrap_phase(ph)
        object.__setattr__(self, "log_mag", lm)
        object.__setattr__(self, "phase", ph)

    # construction / conversion -------------------------------------------
    @classmethod
    def from_complex(cls, z: complex) -> "LogComplex":
        return lc_from_complex(z)

    def to_complex(self) -> complex:
        return lc_to_complex(self)

    @property
    def is_zero(self) -> bool:
        return self.log_mag == NEG_INF

    def to_json(self) -> dict:
        lm = "-inf" if self.is_zero else self.log_mag
        return {"log_mag": lm, "phase": self.phase}

    @classmethod
    def from_json(cls, obj: dict) -> "LogComplex":
        lm = obj["log_mag"]
        lm = NEG_INF if lm in ("-inf", "-Infinity") else float(lm)
        return cls(lm, float(obj.get("phase", 0.0)))

    # arithmetic ------------------------------------------------------------
    def __mul__(self, other):
        return lc_mul(self, as_logcomplex(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return lc_mul(self, lc_inv(as_logcomplex(other)))

    def __rtruediv__(self, other):
        return lc_mul(as_logcomplex(other), lc_inv(self))

    def __add__(self, other):
        return lc_add(self, as_logcomplex(other))

    __radd__ = __add__

    def __neg__(self):
        if self.is_zero:
            return self
        return LogComplex(self.log_mag, self.phase + math.pi)

    def __sub__(self, other):
        return lc_add(self, -as_logcomplex(other))

    def __rsub__(self, other):
        return lc_add(as_logcomplex(other), -self)

    def __pow__(self, n: int):
        return lc_pow_int(self, n)

    def __abs__(self) -> float:
        return math.exp(self.log_mag)

    def conjugate(self) -> "LogComplex":
        return LogComplex(self.log_mag, -self.phase)


ZERO = LogComplex(NEG_INF, 0.0)
ONE = LogComplex(0.0, 0.0)

Number = Union[LogComplex, complex, float, int]


def as_logcomplex(x: Number) -> LogComplex:
    if isinstance(x, LogComplex):
        return x
    return lc_from_complex(complex(x))


def lc_from_complex(z: complex) -> LogComplex:
    z = complex(z)
    if z == 0:
        return ZERO
    if not cmath.isfinite(z):
        raise ValueError(f"cannot represent non-finite value {z}")
    return LogComplex(math.log(abs(z)), cmath.phase(z))


def lc_to_complex(a: LogComplex) -> complex:
    """Convert to a Python complex; raises outside the float range."""
    if a.is_zero:
        return 0j
    if a.log_mag >= FLOAT_LOG_LIMIT:
        raise OverflowError(f"log_mag={a.log_mag} overflows float64")
    if a.log_mag <= -FLOAT_LOG_LIMIT:
        raise UnderflowError(f"log_mag={a.log_mag} underflows float64")
    return cmath.rect(math.exp(a.log_mag), a.phase)


def lc_mul(a: LogComplex, b: LogComplex) -> LogComplex:
    if a.is_zero or b.is_zero:
        return ZERO
    return LogComplex(a.log_mag + b.log_mag, a.phase + b.phase)


def lc_inv(a: LogComplex) -> LogComplex:
    if a.is_zero:
        raise ZeroDivisionError("inverse of zero")
    return LogComplex(-a.log_mag, -a.phase)


def lc_add(a: LogComplex, b: LogComplex) -> LogComplex:
    """Sum with the larger magnitude factored out.

    Results smaller than ``CANCEL_RTOL`` times the larger operand are
    returned as canonical zero.
    """
    if a.is_zero:
        return b
    if b.is_zero:
        return a
    if b.log_mag > a.log_mag:
        a, b = b, a
    w = cmath.rect(1.0, a.phase) + cmath.rect(math.exp(b.log_mag - a.log_mag), b.phase)
    aw = abs(w)
    if aw < CANCEL_RTOL:
        return ZERO
    return LogComplex(a.log_mag + math.log(aw), cmath.phase(w))


def lc_pow_int(a: LogComplex, n: int) -> LogComplex:
    n = int(n)
    if n == 0:
        return ONE
    if a.is_zero:
        if n < 0:
            raise ZeroDivisionError("zero to a negative power")
        return ZERO
    return LogComplex(n * a.log_mag, n * a.phase)


def lc_sum(terms: Iterable[LogComplex]) -> LogComplex:
    """Add terms in descending-magnitude order via :func:`lc_add`."""
    out = ZERO
    for t in sorted(terms, key=lambda t: t.log_mag, reverse=True):
        out = lc_add(out, t)
    return out


# vectorised helpers used by the numerical modules ---------------------------

def logsumexp_complex(log_mag, phase, axis=-1, rtol=CANCEL_RTOL):
    """Sum ``exp(log_mag + 1j*phase)`` along ``axis`` without overflow.

    Returns ``(log_mag, phase, log_scale)`` arrays where ``log_scale`` is the
    log of the largest term. Sums below ``rtol * exp(log_scale)`` come back
    as ``-inf`` (exact zero).
    """
    log_mag = np.asarray(log_mag, dtype=float)
    phase = np.asarray(phase, dtype=float)
    log_mag, phase = np.broadcast_arrays(log_mag, phase)
    scale = np.max(log_mag, axis=axis, keepdims=True)
    safe = np.where(np.isfinite(scale), scale, 0.0)
    with np.errstate(invalid="ignore"):
        w = np.sum(np.exp(log_mag - safe + 1j * phase), axis=axis)
    scale = np.squeeze(scale, axis=axis)
    safe = np.squeeze(safe, axis=axis)
    aw = np.abs(w)
    zero = (aw < rtol) | ~np.isfinite(scale)
    with np.errstate(divide="ignore"):
        out_mag = np.where(zero, -np.inf, safe + np.log(np.where(zero, 1.0, aw)))
    out_phase = np.where(zero, 0.0, np.angle(w))
    return out_mag, out_phase, scale


def to_complex_array(log_mag, phase) -> np.ndarray:
    """Vectorised :func:`lc_to_complex` with the same range checks."""
    log_mag = np.asarray(log_mag, dtype=float)
    finite = np.isfinite(log_mag)
    if np.any(log_mag[finite] >= FLOAT_LOG_LIMIT):
        raise OverflowError("log_mag overflows float64")
    if np.any(log_mag[finite] <= -FLOAT_LOG_LIMIT):
        raise UnderflowError("log_mag underflows float64")
    with np.errstate(under="ignore"):
        return np.where(finite, np.exp(np.where(finite, log_mag, 0.0)), 0.0) * np.exp(1j * np.asarray(phase))
