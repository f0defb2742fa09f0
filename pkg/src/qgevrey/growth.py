"""Growth-model fitting and sequence classifiers.

All fits use the four-term log model

    log m_p = logA + p logB + alpha log p! + s log q p(p-1)/2

by least squares over a window that skips the first few indices. Verdicts
compare the window residual (sup-norm, log units) with a cap; the cap is a
desk-scale stand-in for an asymptotic bound, which no finite prefix can
decide.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import gammaln
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import InsufficientDataError, NormalizationError
from .qcore import check_q, q_factorial_logs
from .validation import check_index_array, check_log_values, check_positive

MIN_TERMS = 20
WINDOW_START = 5
RESIDUAL_CAP = 0.5
TOL_S = 1e-3
ALPHA_TOL = 0.05

GENERATORS = ("Q_FACTORIAL_INV", "Q_FACTORIAL", "FACTORIAL_POW", "GEOMETRIC",
              "CENTRAL_BINOMIAL", "GAMMA_LINEAR", "Q_GEVREY", "CUSTOM")


# sequences -------------------------------------------------------------------

@dataclass(frozen=True)
class PositiveSequence:
    """Positive sequence ``m_p`` stored as ``log m_p`` for ``p = 0..P``."""

    name: str
    log_values: np.ndarray
    generator: Optional[str] = None
    params: dict = field(default_factory=dict)
    q: Optional[float] = None

    def __post_init__(self):
        lv = check_log_values(self.log_values)
        if abs(lv[0]) > 1e-12:
            raise NormalizationError(f"m_0 must be 1 (log 0), got log m_0 = {lv[0]}")
        lv = lv.copy()
        lv.setflags(write=False)
        object.__setattr__(self, "log_values", lv)

    def __len__(self):
        return self.log_values.size

    @property
    def values(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_values)

    def reciprocal(self) -> "PositiveSequence":
        """``m**-1``, the termwise reciprocal."""
        return PositiveSequence(f"1/({self.name})", -self.log_values, self.generator and "CUSTOM",
                                dict(self.params), self.q)

    def truncate(self, n: int) -> "PositiveSequence":
        return PositiveSequence(self.name, self.log_values[:n], self.generator, dict(self.params), self.q)

    @classmethod
    def custom(cls, log_values, name: str = "custom", q=None) -> "PositiveSequence":
        return cls(name, np.asarray(log_values, dtype=float), "CUSTOM", {}, q)

    @classmethod
    def from_rule(cls, rule, n_terms: int, name: str = "custom", q=None) -> "PositiveSequence":
        """``log m_p = rule(p)`` for ``p < n_terms``."""
        return cls.custom([rule(p) for p in range(n_terms)], name, q)

    @classmethod
    def generate(cls, generator: str, n_terms: int = 301, q=None, **params) -> "PositiveSequence":
        """Named sequence families.

        ``Q_FACTORIAL_INV`` is ``[p]_{1/q}!**s``, ``Q_FACTORIAL`` is ``[p]_q!``,
        ``FACTORIAL_POW`` is ``p!**s``, ``GEOMETRIC`` is ``A**p``,
        ``CENTRAL_BINOMIAL`` is ``(2p)!/p!**2``, ``GAMMA_LINEAR`` is
        ``Gamma(1+s p)`` and ``Q_GEVREY`` is ``q**(s p(p-1)/2)``.
        """
        g = generator.upper()
        p = np.arange(n_terms, dtype=float)
        s = float(params.get("s", 1.0))
        if g in ("Q_FACTORIAL_INV", "Q_FACTORIAL", "Q_GEVREY"):
            if q is None:
                raise ValueError(f"{g} needs q")
            q = check_q(q, require_gt1=True)
        if g == "Q_FACTORIAL_INV":
            lv = s * np.array(q_factorial_logs(n_terms - 1, 1.0 / q))
        elif g == "Q_FACTORIAL":
            lv = np.array(q_factorial_logs(n_terms - 1, q))
        elif g == "FACTORIAL_POW":
            lv = s * gammaln(p + 1)
        elif g == "GEOMETRIC":
            A = check_positive(params.get("A", 1.0), "A")
            lv = p * math.log(A)
        elif g == "CENTRAL_BINOMIAL":
            lv = gammaln(2 * p + 1) - 2 * gammaln(p + 1)
        elif g == "GAMMA_LINEAR":
            check_positive(s, "s")
            lv = gammaln(1 + s * p)
        elif g == "Q_GEVREY":
            lv = s * math.log(q) * p * (p - 1) / 2
        else:
            raise ValueError(f"unknown generator {generator!r}")
        return cls(_generator_label(g, params), lv, g, dict(params), q)

    # serialisation -----------------------------------------------------
    def to_json(self) -> dict:
        return {"name": self.name, "q": self.q, "generator": self.generator,
                "log_values": [float(v) for v in self.log_values]}

    @classmethod
    def from_json(cls, obj: dict) -> "PositiveSequence":
        q = obj.get("q")
        return cls(str(obj.get("name", "sequence")), np.asarray(obj["log_values"], dtype=float),
                   obj.get("generator"), {}, None if q is None else float(q))

    @classmethod
    def load(cls, path) -> "PositiveSequence":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def _generator_label(g, params):
    if not params:
        return g
    inner = ",".join(f"{k}={v}" for k, v in sorted(params.items()))
    return f"{g}({inner})"


_GEN_RE = re.compile(r"^\s*([A-Za-z_]+)\s*(?:\((.*)\))?\s*$")


def parse_generator(text: str) -> tuple[str, dict]:
    """``"FACTORIAL_POW(2)"`` or ``"GEOMETRIC(A=3)"`` -> (name, params)."""
    m = _GEN_RE.match(text)
    if not m:
        raise ValueError(f"cannot parse generator {text!r}")
    name = m.group(1).upper()
    if name not in GENERATORS or name == "CUSTOM":
        raise ValueError(f"unknown generator {name!r}")
    params = {}
    if m.group(2):
        for i, tok in enumerate(t.strip() for t in m.group(2).split(",") if t.strip()):
            if "=" in tok:
                k, v = tok.split("=", 1)
                params[k.strip()] = float(v)
            else:
                params["A" if name == "GEOMETRIC" else "s"] = float(tok)
    return name, params


# fitting -----------------------------------------------------------------

@dataclass(frozen=True)
class GrowthFit:
    logA: float
    logB: float
    alpha: float
    s: float
    max_residual: float
    window_residual: float
    fit_window: tuple
    q: float
    fixed: dict = field(default_factory=dict)
    residual_quantiles: dict = field(default_factory=dict)
    beta: float = 0.0

    def predict(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        coef = np.array([self.logA, self.logB, self.alpha, self.s, self.beta])
        return _design(p, self.q, True) @ coef

    def to_json(self) -> dict:
        return {"logA": self.logA, "logB": self.logB, "alpha": self.alpha, "s": self.s,
                "max_residual": self.max_residual, "window_residual": self.window_residual,
                "fit_window": list(self.fit_window), "q": self.q, "fixed": dict(self.fixed),
                "residual_quantiles": dict(self.residual_quantiles), "beta": self.beta}


def _design(p, q, prefactor=False):
    cols = [np.ones_like(p), p, gammaln(p + 1), math.log(q) * p * (p - 1) / 2]
    if prefactor:
        cols.append(np.log1p(p))
    return np.column_stack(cols)


def _as_logs(seq) -> np.ndarray:
    if hasattr(seq, "norm_log"):          # FormalSeries
        return seq.norm_log()
    return np.asarray(getattr(seq, "log_values", seq), dtype=float)


class GrowthModel(RegressorMixin, BaseEstimator):
    """Least-squares growth model ``y = logA + p logB + alpha log p! + s log q p(p-1)/2``.

    ``X`` holds indices ``p``, ``y`` the logs ``log m_p``. Parameters given
    through ``fix_s`` / ``fix_alpha`` are held at those values. With
    ``prefactor`` an extra ``beta log(p+1)`` term is fitted; a polynomial
    factor changes neither order. After ``fit`` the coefficients are
    ``logA_``, ``logB_``, ``alpha_``, ``s_`` and ``beta_``.
    """

    def __init__(self, q=2.0, fix_s=None, fix_alpha=None, window_start=WINDOW_START,
                 prefactor=False):
        self.q = q
        self.fix_s = fix_s
        self.fix_alpha = fix_alpha
        self.window_start = window_start
        self.prefactor = prefactor

    def fit(self, X, y):
        q = check_q(self.q)
        p = check_index_array(X)
        y = np.asarray(y, dtype=float)
        if y.shape != p.shape:
            raise ValueError(f"X and y lengths differ: {p.shape} vs {y.shape}")
        keep = np.isfinite(y)
        if np.any(np.isnan(y)) or np.any(y == np.inf):
            raise ValueError("y must be finite logs or -inf (zero terms)")
        if keep.sum() < MIN_TERMS:
            raise InsufficientDataError(f"need at least {MIN_TERMS} non-zero terms, got {keep.sum()}")
        win = keep & (p >= self.window_start)
        if p[win].size == 0 or p[win].max() < 10:
            raise InsufficientDataError("fit window must reach p >= 10")
        D = _design(p, q, self.prefactor)
        theta = np.full(D.shape[1], np.nan)
        if self.fix_alpha is not None:
            theta[2] = float(self.fix_alpha)
        if self.fix_s is not None:
            theta[3] = float(self.fix_s)
        free = np.isnan(theta)
        fixed_part = D[:, ~free] @ theta[~free] if np.any(~free) else np.zeros_like(p)
        A = D[win][:, free]
        if win.sum() <= free.sum():
            raise InsufficientDataError("fit window is under-determined")
        # column scaling keeps the p**2 column from swamping the others
        scale = np.linalg.norm(A, axis=0)
        scale[scale == 0] = 1.0
        sol, *_ = np.linalg.lstsq(A / scale, y[win] - fixed_part[win], rcond=None)
        theta[free] = sol / scale
        self.coef_ = theta
        self.logA_, self.logB_, self.alpha_, self.s_ = (float(v) for v in theta[:4])
        self.beta_ = float(theta[4]) if self.prefactor else 0.0
        resid = np.abs(y[keep] - (D[keep] @ theta))
        self.max_residual_ = float(resid.max())
        self.window_residual_ = float(np.abs(y[win] - D[win] @ theta).max())
        self.fit_window_ = (int(p[win].min()), int(p[win].max()))
        self.residual_quantiles_ = {str(k): float(np.quantile(resid, k)) for k in (0.5, 0.9, 0.99)}
        return self

    def predict(self, X):
        check_is_fitted(self)
        p = check_index_array(X)
        return _design(p, check_q(self.q), self.prefactor) @ self.coef_

    def to_fit(self) -> GrowthFit:
        check_is_fitted(self)
        fixed = {k: v for k, v in (("s", self.fix_s), ("alpha", self.fix_alpha)) if v is not None}
        return GrowthFit(self.logA_, self.logB_, self.alpha_, self.s_, self.max_residual_,
                         self.window_residual_, self.fit_window_, float(self.q), fixed,
                         self.residual_quantiles_, self.beta_)


def fit_growth(seq, q, fix_s=None, fix_alpha=None, window_start: int = WINDOW_START,
               prefactor: bool = False) -> GrowthFit:
    """Fit the growth model to a sequence, series, or array of logs.

    ``-inf`` entries (zero coefficients) are left out of the fit.
    """
    y = _as_logs(seq)
    p = np.arange(y.size)
    model = GrowthModel(q=q, fix_s=fix_s, fix_alpha=fix_alpha, window_start=window_start,
                        prefactor=prefactor)
    return model.fit(p, y).to_fit()


# classifiers ---------------------------------------------------------------

def membership(u, q, s1: float, s2: Optional[float] = None, residual_cap: float = RESIDUAL_CAP,
               tol_s: float = TOL_S):
    """Desk-scale membership of ``u`` in the spaces with bound ``A B**p p!**s2 q**(s1 p(p-1)/2)``.

    Returns ``(verdict, fit)``. The pinned fit (``s = s1`` and, if given,
    ``alpha = s2``) decides first. Because the spaces are nested, a series
    whose free fit lands strictly below ``s1``, or at ``s1`` with
    ``alpha <= s2``, is also a member.
    """
    y = _as_logs(u)
    if np.count_nonzero(np.isfinite(y)) < MIN_TERMS:
        raise InsufficientDataError(f"need at least {MIN_TERMS} non-zero coefficients")
    pinned = fit_growth(y, q, fix_s=s1, fix_alpha=s2)
    if pinned.window_residual <= residual_cap:
        return True, pinned
    at_s1 = fit_growth(y, q, fix_s=s1)
    if at_s1.window_residual <= residual_cap and (s2 is None or at_s1.alpha <= s2 + ALPHA_TOL):
        return True, at_s1
    free = fit_growth(y, q)
    if free.window_residual <= residual_cap and free.s < s1 - tol_s:
        return True, free
    return False, pinned


def q_gevrey_order(seq, q) -> float:
    """Fitted ``s`` of the free growth model."""
    return fit_growth(seq, q).s


def preserves_q_gevrey_order(seq, q, tol_s: float = TOL_S, residual_cap: float = RESIDUAL_CAP) -> bool:
    """Sequence of q-Gevrey order 0: fitted ``s`` near 0 and an ``s = 0`` fit within the cap."""
    if abs(q_gevrey_order(seq, q)) > tol_s:
        return False
    return fit_growth(seq, q, fix_s=0.0).window_residual <= residual_cap


def preserves_q_and_gevrey_orders(seq, q=2.0, residual_cap: float = RESIDUAL_CAP) -> bool:
    """Null Gevrey order: ``a**p <= m_p <= A**p`` up to the residual cap.

    The fit carries a ``p**beta`` prefactor, which sits between two
    geometric sequences and so must not count against the verdict.
    """
    fit = fit_growth(seq, q, fix_s=0.0, fix_alpha=0.0, prefactor=True)
    return fit.window_residual <= residual_cap


def is_mg(seq, A: float, prefix: Optional[int] = None, slack: float = 1e-12) -> bool:
    """``M_{n+m} <= A**(n+m) M_n M_m`` for all ``n + m < prefix``."""
    lv = _as_logs(seq)
    n = lv.size if prefix is None else int(prefix)
    if n > lv.size:
        raise ValueError(f"prefix {n} exceeds available length {lv.size}")
    lv = lv[:n]
    logA = math.log(check_positive(A, "A"))
    i = np.arange(n)
    I, J = np.meshgrid(i, i, indexing="ij")
    ok = I + J < n
    lhs = lv[np.where(ok, I + J, 0)]
    rhs = (I + J) * logA + lv[I] + lv[J]
    return bool(np.all((lhs <= rhs + slack * (1 + np.abs(rhs)))[ok]))


def is_lc(seq, prefix: Optional[int] = None, slack: float = 1e-12) -> bool:
    """``M_n**2 <= M_{n-1} M_{n+1}`` for ``1 <= n < prefix - 1``."""
    lv = _as_logs(seq)
    n = lv.size if prefix is None else int(prefix)
    if n > lv.size:
        raise ValueError(f"prefix {n} exceeds available length {lv.size}")
    lv = lv[:n]
    if n < 3:
        return True
    lhs = 2 * lv[1:-1]
    rhs = lv[:-2] + lv[2:]
    return bool(np.all(lhs <= rhs + slack * (1 + np.abs(rhs))))


__all__ = [
    "PositiveSequence", "GrowthFit", "GrowthModel", "fit_growth", "membership", "q_gevrey_order",
    "preserves_q_gevrey_order", "preserves_q_and_gevrey_orders", "is_mg", "is_lc",
    "parse_generator", "GENERATORS", "RESIDUAL_CAP", "TOL_S",
]
