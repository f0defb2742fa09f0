import math

import numpy as np
import pytest
from sklearn.base import clone

from qgevrey.classify import (PreservationClassifier, borel_test_series, classify, match_closed_form,
                              preserves_q_gevrey_asymptotics)
from qgevrey.continuation import HEURISTIC, RIGOROUS
from qgevrey.fps import FormalSeries
from qgevrey.growth import PositiveSequence


@pytest.mark.parametrize("gen,params", [("Q_FACTORIAL_INV", {"q": 2.0}), ("CENTRAL_BINOMIAL", {}),
                                        ("GEOMETRIC", {"A": 3.0})])
def test_registered_examples_are_rigorous(gen, params):
    v = preserves_q_gevrey_asymptotics(PositiveSequence.generate(gen, **params), 2.0)
    assert v.passed and v.mode == RIGOROUS
    assert v.summability is True
    assert len(v.certificates) == 6 and all(c["pass"] for c in v.certificates)


def test_closed_form_matching():
    seq = PositiveSequence.generate("Q_FACTORIAL_INV", q=2.0)
    b_m, b_inv = borel_test_series(seq)
    assert match_closed_form(b_m, 2.0).kind == "qexp"
    assert match_closed_form(b_inv, 2.0).kind == "qfact"
    assert match_closed_form(FormalSeries.geometric(30, 0.25), 2.0).kind == "geometric"
    assert match_closed_form(FormalSeries.from_complex(1.0 / np.arange(1, 31)), 2.0) is None


def test_factorial_powers_fail_the_gate():
    v = preserves_q_gevrey_asymptotics(PositiveSequence.generate("FACTORIAL_POW", s=2.0), 2.0)
    assert not v.passed and v.summability is None


def test_unregistered_sequence_is_heuristic():
    v = preserves_q_gevrey_asymptotics(PositiveSequence.generate("Q_FACTORIAL_INV", q=2.0, s=2.0), 2.0)
    assert v.mode == HEURISTIC
    assert v.continuations == ("PADE", "PADE")


def test_report_fields():
    r = classify(PositiveSequence.generate("CENTRAL_BINOMIAL"), 2.0)
    assert {"growth_fit", "preserves_q_gevrey_order", "preserves_q_and_gevrey_orders",
            "preserves_q_gevrey_asymptotics", "mode", "preserves_summability"} <= set(r)
    assert r["preserves_q_gevrey_asymptotics"] and r["mode"] == RIGOROUS


def test_estimator_wrapper():
    seqs = [PositiveSequence.generate("FACTORIAL_POW", s=2.0),
            PositiveSequence.generate("Q_FACTORIAL_INV", q=2.0, s=1.0)]
    clf = PreservationClassifier(q=2.0, criterion="q_and_gevrey_orders").fit(seqs)
    assert list(clf.predict(seqs)) == [False, True]
    assert list(clone(clf).set_params(criterion="q_gevrey_order").predict(seqs)) == [True, True]
    with pytest.raises(ValueError):
        PreservationClassifier(criterion="nope").fit()
