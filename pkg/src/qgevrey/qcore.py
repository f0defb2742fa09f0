"""q-numbers, q-factorials and q-shift factorials.

Every factorial-scale quantity is returned as a natural log; ``[200]_2!``
is far outside the float64 range.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .exceptions import DomainError
from .xnum import ONE, ZERO, LogComplex, Number, as_logcomplex, lc_add, lc_mul

INFINITY = math.inf


@dataclass(frozen=True)
class QBase:
    """A base ``q > 0`` with ``q != 1``."""

    q: float

    def __post_init__(self):
        check_q(self.q)

    def __float__(self):
        return float(self.q)

    @property
    def log_q(self) -> float:
        return math.log(self.q)

    def inverse(self) -> "QBase":
        return QBase(1.0 / self.q)


def check_q(q, require_gt1: bool = False) -> float:
    """Validate a base and return it as a float."""
    q = float(q)
    if not math.isfinite(q) or q <= 0 or q == 1.0:
        raise DomainError(f"q must be positive and different from 1, got {q}")
    if require_gt1 and q <= 1:
        raise DomainError(f"q > 1 required, got {q}")
    return q


def q_number(lam: float, q) -> float:
    """``[lam]_q = (q**lam - 1) / (q - 1)``."""
    q = check_q(q)
    return math.expm1(lam * math.log(q)) / (q - 1.0)


def _log_q_number_int(k: int, q: float) -> float:
    # log([k]_q) for integer k >= 1, computed without cancellation
    if q > 1:
        return k * math.log(q) + math.log1p(-(q ** -k)) - math.log(q - 1.0)
    return math.log1p(-(q ** k)) - math.log1p(-q)


def q_factorial_log(n: int, q) -> float:
    """Natural log of ``[n]_q! = [1]_q [2]_q ... [n]_q``."""
    q = check_q(q)
    n = int(n)
    if n < 0:
        raise DomainError(f"n must be non-negative, got {n}")
    return math.fsum(_log_q_number_int(k, q) for k in range(1, n + 1))


def q_factorial_logs(n_max: int, q) -> list[float]:
    """``[log [p]_q! for p in 0..n_max]`` by cumulative summation."""
    q = check_q(q)
    out = [0.0]
    terms = []
    for k in range(1, int(n_max) + 1):
        terms.append(_log_q_number_int(k, q))
        out.append(math.fsum(terms))
    return out


def _tail_index(log_abs_a: float, q: float, tol: float) -> int:
    # smallest P with |a| q^-P <= 1/2 and |a| q^-P / (q - 1) <= tol / 2;
    # then |log prod_{p>=P}(1 - a q^-p)| <= 2 |a| q^-P / (q - 1) <= tol
    if log_abs_a == -math.inf:
        return 0
    log_q = math.log(q)
    bound = math.log(2.0) + log_abs_a + max(0.0, -math.log((q - 1.0) * tol))
    return max(0, math.ceil(bound / log_q))


def q_pochhammer(a: Number, q, n=INFINITY, tol: float = 1e-14, full_output: bool = False):
    """The q-shift factorial ``(a; 1/q)_n = prod_{p<n} (1 - a / q**p)``, ``q > 1``.

    ``n`` may be ``math.inf``; the product is then truncated at the first
    index ``P`` where the geometric tail bound guarantees relative error
    below ``tol``. With ``full_output`` a dict holding ``P`` is returned as
    well.
    """
    q = check_q(q, require_gt1=True)
    a = as_logcomplex(a)
    if n != INFINITY:
        n = int(n)
        if n < 0:
            raise DomainError(f"n must be non-negative, got {n}")
        n_terms = n
        info = {"terms": n_terms, "truncated": False}
    else:
        if not (tol > 0 and math.isfinite(tol)):
            raise DomainError(f"tol must be positive, got {tol}")
        n_terms = _tail_index(a.log_mag, q, tol)
        info = {"terms": n_terms, "truncated": True, "tol": tol}
    log_q = math.log(q)
    out = ONE
    for p in range(n_terms):
        w = ZERO if a.is_zero else LogComplex(a.log_mag - p * log_q, a.phase + math.pi)
        factor = lc_add(ONE, w)
        out = lc_mul(out, factor)
        if out.is_zero:
            break
    return (out, info) if full_output else out


def q_pochhammer_real_log(a: float, q: float, n=INFINITY, tol: float = 1e-16) -> float:
    """``log (a; 1/q)_n`` for real ``0 <= a < 1``; fast path used internally."""
    if n == INFINITY:
        n = _tail_index(math.log(a) if a > 0 else -math.inf, q, tol)
    return math.fsum(math.log1p(-a * q ** -p) for p in range(int(n)))


def q_factorial_limit_residual(n: int, q) -> float:
    """``|[n]_q! (q-1)**n / q**(n(n+1)/2) - (1/q; 1/q)_inf|`` for ``q > 1``.

    The ratio equals ``prod_{k<=n} (1 - q**-k)`` term by term, and the
    difference is ``ratio * |1 - prod_{k>n} (1 - q**-k)|``; both are formed
    from ``log1p`` so the residual keeps full relative precision even when
    it is far below machine epsilon.
    """
    q = check_q(q, require_gt1=True)
    n = int(n)
    if n < 1:
        raise DomainError(f"n >= 1 required, got {n}")
    log_ratio = math.fsum(math.log1p(-(q ** -k)) for k in range(1, n + 1))
    # (q^{-n-1}; 1/q)_inf, the missing tail of the infinite product
    log_tail = q_pochhammer_real_log(q ** -(n + 1), q)
    return math.exp(log_ratio) * abs(math.expm1(log_tail))
