"""Truncated formal power series with log-domain coefficients.

Coefficients are vectors in C^dim (Euclidean norm), stored as two
``(order, dim)`` arrays of log-magnitudes and phases. All Borel-type
operators are diagonal scalings and therefore exact in log domain.
"""
from __future__ import annotations

import json
import math
from typing import Callable, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import DimensionError, EmptySeriesError, NormalizationError
from .qcore import check_q
from .xnum import (LogComplex, Number, ZERO, as_logcomplex, logsumexp_complex, lc_sum,
                   to_complex_array, wrap_phase)


class FormalSeries:
    """``sum_p c_p t**p`` truncated to ``order`` coefficients.

    Parameters
    ----------
    log_mag, phase : array_like, shape (order,) or (order, dim)
        ``-inf`` in ``log_mag`` encodes a zero coefficient entry.
    """

    __slots__ = ("_log_mag", "_phase")

    def __init__(self, log_mag, phase=None):
        lm = np.array(log_mag, dtype=float)
        if lm.ndim == 1:
            lm = lm[:, None]
        if lm.ndim != 2 or lm.shape[1] < 1:
            raise DimensionError(f"coefficients must be (order, dim), got shape {lm.shape}")
        if phase is None:
            ph = np.zeros_like(lm)
        else:
            ph = np.array(phase, dtype=float).reshape(lm.shape)
        if np.any(np.isnan(lm)) or np.any(lm == np.inf) or not np.all(np.isfinite(ph)):
            raise ValueError("coefficients must be finite or canonical zero")
        zero = lm == -np.inf
        ph = np.where(zero, 0.0, np.remainder(ph + math.pi, 2 * math.pi) - math.pi)
        ph = np.where((ph == -math.pi) & ~zero, math.pi, ph)
        lm.setflags(write=False)
        ph.setflags(write=False)
        self._log_mag = lm
        self._phase = ph

    # constructors ----------------------------------------------------------
    @classmethod
    def from_complex(cls, coeffs) -> "FormalSeries":
        c = np.asarray(coeffs, dtype=complex)
        with np.errstate(divide="ignore"):
            return cls(np.log(np.abs(c)), np.angle(c))

    @classmethod
    def from_log(cls, log_values, phase=None) -> "FormalSeries":
        """Series with positive real (or given-phase) coefficients ``exp(log_values)``."""
        return cls(log_values, phase)

    @classmethod
    def from_rule(cls, rule: Callable[[int], float], order: int) -> "FormalSeries":
        """Positive coefficients with ``log c_p = rule(p)``."""
        return cls([rule(p) for p in range(order)])

    @classmethod
    def geometric(cls, order: int, ratio: Number = 1.0) -> "FormalSeries":
        r = as_logcomplex(ratio)
        p = np.arange(order)
        if r.is_zero:
            lm = np.full(order, -np.inf)
            lm[0] = 0.0
            return cls(lm)
        return cls(p * r.log_mag, p * r.phase)

    @classmethod
    def from_logcomplex(cls, coeffs: Sequence) -> "FormalSeries":
        """From a list of LogComplex (dim 1) or of lists of LogComplex (dim n)."""
        rows = [[c] if isinstance(c, LogComplex) else list(c) for c in coeffs]
        lm = [[c.log_mag for c in row] for row in rows]
        ph = [[c.phase for c in row] for row in rows]
        return cls(lm, ph)

    # shape -------------------------------------------------------------------
    @property
    def order(self) -> int:
        return self._log_mag.shape[0]

    @property
    def dim(self) -> int:
        return self._log_mag.shape[1]

    @property
    def log_mag(self) -> np.ndarray:
        return self._log_mag

    @property
    def phase(self) -> np.ndarray:
        return self._phase

    def __len__(self):
        return self.order

    def coeff(self, p: int):
        """Coefficient ``p`` as a LogComplex (dim 1) or tuple of them."""
        row = tuple(LogComplex(a, b) for a, b in zip(self._log_mag[p], self._phase[p]))
        return row[0] if self.dim == 1 else row

    @property
    def coeffs(self) -> list:
        return [self.coeff(p) for p in range(self.order)]

    def norm_log(self) -> np.ndarray:
        """``log ||c_p||`` (Euclidean over the dim axis)."""
        if self.dim == 1:
            return self._log_mag[:, 0].copy()
        with np.errstate(divide="ignore"):
            top = np.max(self._log_mag, axis=1)
            safe = np.where(np.isfinite(top), top, 0.0)
            s = np.sum(np.exp(2 * (self._log_mag - safe[:, None])), axis=1)
            return np.where(np.isfinite(top), safe + 0.5 * np.log(s), -np.inf)

    def to_complex(self) -> np.ndarray:
        """Coefficients as complex array of shape (order,) or (order, dim)."""
        c = to_complex_array(self._log_mag, self._phase)
        return c[:, 0] if self.dim == 1 else c

    def truncate(self, order: int) -> "FormalSeries":
        if order > self.order:
            raise ValueError(f"cannot extend order {self.order} to {order}")
        return FormalSeries(self._log_mag[:order], self._phase[:order])

    def scaled(self, log_scale) -> "FormalSeries":
        """Multiply coefficient ``p`` by ``exp(log_scale[p])`` (real, per index)."""
        ls = np.asarray(log_scale, dtype=float)[: self.order, None]
        return FormalSeries(self._log_mag + ls, self._phase)

    def allclose(self, other: "FormalSeries", atol: float = 1e-12) -> bool:
        """Log-domain comparison: equal zeros, log-magnitudes and phases within ``atol``."""
        if self.order != other.order or self.dim != other.dim:
            return False
        za = self._log_mag == -np.inf
        zb = other._log_mag == -np.inf
        if np.any(za != zb):
            return False
        nz = ~za
        dm = np.abs(self._log_mag[nz] - other._log_mag[nz])
        dp = np.abs(np.angle(np.exp(1j * (self._phase[nz] - other._phase[nz]))))
        return bool(np.all(dm <= atol) and np.all(dp <= atol))

    def __eq__(self, other):
        if not isinstance(other, FormalSeries):
            return NotImplemented
        return (self._log_mag.shape == other._log_mag.shape
                and np.array_equal(self._log_mag, other._log_mag)
                and np.array_equal(self._phase, other._phase))

    __hash__ = None

    def __repr__(self):
        return f"FormalSeries(order={self.order}, dim={self.dim})"

    def __add__(self, other):
        return series_add(self, other)

    def __mul__(self, other):
        return series_mul(self, other)

    # serialisation -------------------------------------------------------
    def to_json(self) -> dict:
        rows = []
        for p in range(self.order):
            rows.append([LogComplex(a, b).to_json() for a, b in zip(self._log_mag[p], self._phase[p])])
        return {"dim": self.dim, "order": self.order, "coeffs": rows}

    @classmethod
    def from_json(cls, obj: dict) -> "FormalSeries":
        rows = obj["coeffs"]
        dim, order = int(obj["dim"]), int(obj["order"])
        if len(rows) != order or any(len(r) != dim for r in rows):
            raise DimensionError("coefficient table does not match declared order/dim")
        coeffs = [[LogComplex.from_json(c) for c in r] for r in rows]
        return cls.from_logcomplex(coeffs)

    def dump(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def load(cls, path) -> "FormalSeries":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


# Borel-type operators ------------------------------------------------------

def qgevrey_log_weights(order: int, q, s: float) -> np.ndarray:
    """``s * log q * p(p-1)/2`` for ``p < order``."""
    p = np.arange(order, dtype=float)
    return s * math.log(check_q(q)) * p * (p - 1.0) / 2.0


def qborel(u: FormalSeries, q, s: float) -> FormalSeries:
    """Formal q-Borel transform of order ``s``: ``c_p -> c_p / q**(s p(p-1)/2)``.

    Negative ``s`` gives the inverse transform.
    """
    return u.scaled(-qgevrey_log_weights(u.order, q, s))


def _moment_logs(m, order: int) -> np.ndarray:
    lv = np.asarray(getattr(m, "log_values", m), dtype=float)
    if lv.ndim != 1 or lv.size < order:
        raise ValueError(f"sequence has {lv.size} terms, {order} needed")
    lv = lv[:order]
    if not np.all(np.isfinite(lv)):
        raise ValueError("sequence terms must be strictly positive and finite")
    if order and abs(lv[0]) > 1e-12:
        raise NormalizationError(f"m_0 must be 1, got exp({lv[0]})")
    return lv


def mborel(u: FormalSeries, m) -> FormalSeries:
    """Formal moment Borel operator: ``c_p -> c_p / m_p``.

    ``m`` is a :class:`~qgevrey.growth.PositiveSequence` or an array of
    ``log m_p`` with ``m_0 = 1``.
    """
    return u.scaled(-_moment_logs(m, u.order))


def moment_derivative(u: FormalSeries, m) -> FormalSeries:
    """Moment derivative: coefficient ``p`` becomes ``c_{p+1} m_{p+1} / m_p``."""
    if u.order < 1:
        raise EmptySeriesError("moment derivative of an empty series")
    lv = _moment_logs(m, u.order)
    shift = lv[1:] - lv[:-1]
    return FormalSeries(u.log_mag[1:] + shift[:, None], u.phase[1:])


def formal_derivative(u: FormalSeries) -> FormalSeries:
    if u.order < 1:
        raise EmptySeriesError("derivative of an empty series")
    k = np.log(np.arange(1, u.order, dtype=float))
    return FormalSeries(u.log_mag[1:] + k[:, None], u.phase[1:])


def _check_dims(u: FormalSeries, v: FormalSeries):
    if u.dim != v.dim:
        raise DimensionError(f"dim mismatch: {u.dim} vs {v.dim}")


def series_add(u: FormalSeries, v: FormalSeries) -> FormalSeries:
    """Termwise sum, truncated to the shorter order."""
    _check_dims(u, v)
    n = min(u.order, v.order)
    lm = np.stack([u.log_mag[:n], v.log_mag[:n]])
    ph = np.stack([u.phase[:n], v.phase[:n]])
    out_m, out_p, _ = logsumexp_complex(lm, ph, axis=0)
    return FormalSeries(out_m, out_p)


def series_mul(u: FormalSeries, v: FormalSeries) -> FormalSeries:
    """Cauchy product truncated to the shorter order.

    Vector coefficients multiply componentwise.
    """
    _check_dims(u, v)
    n = min(u.order, v.order)
    out_m = np.empty((n, u.dim))
    out_p = np.empty((n, u.dim))
    for p in range(n):
        lm = u.log_mag[: p + 1] + v.log_mag[p::-1]
        ph = u.phase[: p + 1] + v.phase[p::-1]
        out_m[p], out_p[p], _ = logsumexp_complex(lm, ph, axis=0)
    return FormalSeries(out_m, out_p)


def eval_partial(u: FormalSeries, z: Number, N: int):
    """``sum_{p<=N} c_p z**p`` added in descending-magnitude order."""
    if not 0 <= N < u.order:
        raise ValueError(f"need 0 <= N < order={u.order}, got {N}")
    z = as_logcomplex(z)
    out = []
    for j in range(u.dim):
        terms = []
        for p in range(N + 1):
            if u.log_mag[p, j] == -np.inf or (z.is_zero and p > 0):
                continue
            zp = 0.0 if p == 0 else p * z.log_mag
            terms.append(LogComplex(u.log_mag[p, j] + zp, u.phase[p, j] + p * z.phase))
        out.append(lc_sum(terms) if terms else ZERO)
    return out[0] if u.dim == 1 else tuple(out)


def eval_partial_array(u: FormalSeries, log_abs, arg, N: int):
    """Vectorised partial sums at many points (dim 1); returns complex-safe logs."""
    log_abs = np.asarray(log_abs, dtype=float)
    arg = np.asarray(arg, dtype=float)
    p = np.arange(N + 1)
    lm = u.log_mag[: N + 1, 0] + p * log_abs[..., None]
    ph = u.phase[: N + 1, 0] + p * arg[..., None]
    lm = np.where(np.isnan(lm), -np.inf, lm)
    out_m, out_p, _ = logsumexp_complex(lm, ph, axis=-1, rtol=0.0)
    return out_m, out_p


# estimator-style wrappers -------------------------------------------------

class QBorelTransformer(TransformerMixin, BaseEstimator):
    """q-Borel transform of order ``s`` as a stateless transformer over series."""

    def __init__(self, q=2.0, s=1.0):
        self.q = q
        self.s = s

    def fit(self, X, y=None):
        check_q(self.q)
        return self

    def transform(self, X):
        return [qborel(u, self.q, self.s) for u in X]

    def inverse_transform(self, X):
        return [qborel(u, self.q, -self.s) for u in X]


class MomentBorelTransformer(TransformerMixin, BaseEstimator):
    """Moment Borel operator for a fixed normalized sequence ``m``."""

    def __init__(self, m=None):
        self.m = m

    def fit(self, X, y=None):
        if self.m is None:
            raise ValueError("m must be given")
        self.log_m_ = np.asarray(getattr(self.m, "log_values", self.m), dtype=float)
        return self

    def transform(self, X):
        return [mborel(u, self.log_m_) for u in X]

    def inverse_transform(self, X):
        return [mborel(u, -self.log_m_) for u in X]


__all__ = [
    "FormalSeries", "qborel", "mborel", "moment_derivative", "formal_derivative",
    "series_add", "series_mul", "eval_partial", "eval_partial_array", "qgevrey_log_weights",
    "QBorelTransformer", "MomentBorelTransformer", "wrap_phase",
]
