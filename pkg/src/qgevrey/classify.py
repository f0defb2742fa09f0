"""Whether a sequence preserves q-Gevrey asymptotic expansions, and the full verdict report.

The test is carried by two convergent series, ``sum t**p / m_p`` and
``sum m_p t**p``. Each must continue to every sector avoiding the positive
real axis with q-exponential growth. A registered closed form gives an
exact continuation (RIGOROUS); anything else falls back to a Pade
approximant with a sampled certificate (HEURISTIC).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .continuation import (HEURISTIC, RIGOROUS, DEFAULT_ALPHA_CAP, SectorSampling,
                           central_binomial_pair, geometric, growth_certificate_check,
                           pade_continue, q_exponential, q_factorial_series)
from .continuation import _central_logs
from .exceptions import DegeneracyError, GrowthError
from .fps import FormalSeries, mborel
from .growth import (RESIDUAL_CAP, TOL_S, PositiveSequence, fit_growth,
                     preserves_q_and_gevrey_orders, preserves_q_gevrey_order)
from .qcore import check_q, q_factorial_logs
from .validation import check_sequence_list

S_VALUES = (0.5, 1.0, 2.0)
TEST_ORDER = 60
MATCH_ATOL = 1e-10


@dataclass
class AsymptoticsVerdict:
    passed: bool
    mode: str
    reason: str
    continuations: tuple = ()
    certificates: list = field(default_factory=list)

    @property
    def summability(self) -> Optional[bool]:
        """Preserving q-Gevrey expansions implies preserving summability; otherwise unknown."""
        return True if self.passed else None

    def to_json(self) -> dict:
        return {"pass": self.passed, "mode": self.mode, "reason": self.reason,
                "continuations": list(self.continuations), "certificates": self.certificates}


def borel_test_series(seq: PositiveSequence, order: int = TEST_ORDER):
    """``(B_m(sum t**p), B_{1/m}(sum t**p))`` truncated to ``order`` terms."""
    order = min(order, len(seq))
    g = FormalSeries.geometric(order)
    return mborel(g, seq), mborel(g, seq.reciprocal())


def _candidates(q, order):
    # (tag, log-coefficients, factory); geometric is matched separately
    cand = [("qexp", -np.array(q_factorial_logs(order - 1, 1.0 / q)), lambda: q_exponential(q)),
            ("qfact", np.array(q_factorial_logs(order - 1, 1.0 / q)), lambda: q_factorial_series(q)),
            ("cbinom", _central_logs(order), lambda: central_binomial_pair(q=q)[0]),
            ("cbinom_inv", -_central_logs(order), lambda: central_binomial_pair(q=q)[1])]
    return cand


def match_closed_form(b: FormalSeries, q):
    """Registered continuation whose Taylor prefix equals ``b``, or None."""
    lm = b.log_mag[:, 0]
    if b.dim != 1 or not np.all(np.isfinite(lm)) or np.any(b.phase != 0):
        return None
    p = np.arange(lm.size)
    c = lm[1] if lm.size > 1 else 0.0
    if np.max(np.abs(lm - p * c)) <= MATCH_ATOL * (1 + abs(c) * lm.size):
        return geometric(math.exp(c), q=q)
    for tag, ref, make in _candidates(q, lm.size):
        if np.max(np.abs(lm - ref)) <= MATCH_ATOL * (1 + np.max(np.abs(ref))):
            return make()
    return None


def _continue(b: FormalSeries, q, num_deg=6, den_deg=6, sampling=None):
    f = match_closed_form(b, q)
    if f is not None:
        return f
    return pade_continue(b, num_deg, den_deg, q, sampling)


def preserves_q_gevrey_asymptotics(seq: PositiveSequence, q, s_values: Sequence[float] = S_VALUES,
                                   sampling: Optional[SectorSampling] = None,
                                   residual_cap: float = RESIDUAL_CAP,
                                   alpha_cap: float = DEFAULT_ALPHA_CAP) -> AsymptoticsVerdict:
    """Check the two-series criterion for every ``s`` in ``s_values`` on sampled sectors."""
    q = check_q(q, require_gt1=True)
    sampling = sampling or SectorSampling()
    if not preserves_q_and_gevrey_orders(seq, q, residual_cap):
        return AsymptoticsVerdict(False, HEURISTIC, "test series do not both converge "
                                  "(sequence is not of null Gevrey order)")
    b_m, b_inv = borel_test_series(seq)
    fs = []
    for b in (b_m, b_inv):
        try:
            fs.append(_continue(b, q, sampling=sampling))
        except (DegeneracyError, GrowthError, ValueError) as e:
            return AsymptoticsVerdict(False, HEURISTIC, f"no continuation found: {e}")
    mode = RIGOROUS if all(f.mode == RIGOROUS for f in fs) else HEURISTIC
    certs = []
    ok = True
    for name, f in zip(("B_m", "B_inv_m"), fs):
        for s in s_values:
            fit = growth_certificate_check(f, q, s, sampling, alpha_cap)
            certs.append({"series": name, "kind": f.kind, "s": s, **fit.to_json()})
            ok &= fit.passed
    reason = "both continuations have q-exponential growth" if ok else "a growth certificate failed"
    return AsymptoticsVerdict(bool(ok), mode, reason, tuple(f.kind for f in fs), certs)


def classify(seq: PositiveSequence, q, tol_s: float = TOL_S, residual_cap: float = RESIDUAL_CAP,
             s_values: Sequence[float] = S_VALUES) -> dict:
    """Every predicate for one sequence, as a JSON-ready dict."""
    q = check_q(q, require_gt1=True)
    fit = fit_growth(seq, q)
    asym = preserves_q_gevrey_asymptotics(seq, q, s_values, residual_cap=residual_cap)
    return {
        "sequence": seq.name,
        "q": q,
        "growth_fit": fit.to_json(),
        "preserves_q_gevrey_order": preserves_q_gevrey_order(seq, q, tol_s, residual_cap),
        "preserves_q_and_gevrey_orders": preserves_q_and_gevrey_orders(seq, q, residual_cap),
        "preserves_q_gevrey_asymptotics": asym.passed,
        "mode": asym.mode,
        "asymptotics": asym.to_json(),
        "preserves_summability": asym.summability,
    }


CRITERIA = ("q_gevrey_order", "q_and_gevrey_orders", "q_gevrey_asymptotics")


class PreservationClassifier(ClassifierMixin, BaseEstimator):
    """Estimator wrapper: predict whether each sequence preserves the chosen property.

    ``fit`` only validates parameters; the decision rules have no learned
    state.
    """

    def __init__(self, q=2.0, criterion="q_gevrey_asymptotics", tol_s=TOL_S,
                 residual_cap=RESIDUAL_CAP):
        self.q = q
        self.criterion = criterion
        self.tol_s = tol_s
        self.residual_cap = residual_cap

    def fit(self, X=None, y=None):
        check_q(self.q, require_gt1=True)
        if self.criterion not in CRITERIA:
            raise ValueError(f"criterion must be one of {CRITERIA}, got {self.criterion!r}")
        self.classes_ = np.array([False, True])
        return self

    def _decide(self, seq):
        if self.criterion == "q_gevrey_order":
            return preserves_q_gevrey_order(seq, self.q, self.tol_s, self.residual_cap)
        if self.criterion == "q_and_gevrey_orders":
            return preserves_q_and_gevrey_orders(seq, self.q, self.residual_cap)
        return preserves_q_gevrey_asymptotics(seq, self.q, residual_cap=self.residual_cap).passed

    def predict(self, X):
        if not hasattr(self, "classes_"):
            self.fit()
        return np.array([bool(self._decide(s)) for s in check_sequence_list(X)])


__all__ = ["AsymptoticsVerdict", "preserves_q_gevrey_asymptotics", "classify", "borel_test_series",
           "match_closed_form", "PreservationClassifier", "S_VALUES"]
