import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from attclx.errors import LengthMismatch, ZeroTruthValue
from attclx.metrics import evaluate


def test_three_term_case():
    m = evaluate([2.0, 2.0, 2.0], [1.0, 2.0, 3.0])
    assert m["mae"] == 2 / 3
    assert m["mse"] == 2 / 3
    assert m["rmse"] == math.sqrt(2 / 3)
    assert m["mape"] == pytest.approx(4 / 9, abs=1e-15)


def test_second_three_term_case():
    # errors 1, -2, 0.5 against truth 4, 5, 10
    m = evaluate([5.0, 3.0, 10.5], [4.0, 5.0, 10.0])
    assert m["mae"] == pytest.approx(3.5 / 3, abs=1e-15)
    assert m["rmse"] == pytest.approx(math.sqrt(5.25 / 3), abs=1e-15)
    assert m["mape"] == pytest.approx((0.25 + 0.4 + 0.05) / 3, abs=1e-15)


def test_perfect_prediction():
    y = np.array([1.5, 2.5, 7.0, 3.0])
    m = evaluate(y, y)
    assert m["mae"] == m["rmse"] == m["mape"] == 0.0
    assert m["r2_standard"] == 1.0 and m["r2_paper"] == 1.0


def test_mean_predictor():
    y = np.array([1.0, 2.0, 3.0, 6.0])
    m = evaluate(np.full(4, y.mean()), y)
    assert m["r2_standard"] == 0.0 and m["r2_paper"] == 0.0


def test_errors():
    with pytest.raises(LengthMismatch):
        evaluate([1.0, 2.0], [1.0, 2.0, 3.0])
    with pytest.raises(LengthMismatch):
        evaluate([1.0], [1.0])
    with pytest.raises(ZeroTruthValue):
        evaluate([1.0, 2.0], [0.0, 2.0])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.floats(0.1, 100), st.floats(0.1, 100)), min_size=2, max_size=50))
def test_metric_relations(pairs):
    pred, truth = map(np.array, zip(*pairs))
    m = evaluate(pred, truth)
    assert m["rmse"] >= m["mae"] - 1e-12
    assert m["rmse"] ** 2 == pytest.approx(m["mse"], rel=1e-12)
    if np.ptp(truth) > 0:
        assert m["r2_standard"] <= 1.0 + 1e-12
        assert m["r2_paper"] >= 0.0
