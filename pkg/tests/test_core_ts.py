import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from attclx.core_ts import OhlcvBar, Series, align_and_validate, make_windows
from attclx.errors import DuplicateDate, EmptyInput, InvalidBar, LengthMismatch


def bar(day, close=10.0, **kw):
    fields = dict(open=close, high=close * 1.01, low=close * 0.99, close=close, volume=100.0, amount=1000.0)
    fields.update(kw)
    return OhlcvBar(dt.date(2020, 1, day), **fields)


def test_bars_sorted_ascending():
    frame = align_and_validate([bar(3, 12.0), bar(1, 10.0), bar(2, 11.0)])
    assert len(frame) == 3
    assert list(frame.close) == [10.0, 11.0, 12.0]
    assert np.all(np.diff(frame.dates.astype("int64")) > 0)


def test_duplicate_date_rejected():
    with pytest.raises(DuplicateDate):
        align_and_validate([bar(1), bar(1, 11.0)])


def test_low_above_high_rejected():
    with pytest.raises(InvalidBar) as info:
        align_and_validate([bar(1), bar(2, low=20.0, high=11.0)])
    assert info.value.index == 1


@pytest.mark.parametrize("kw", [{"volume": -1.0}, {"amount": -5.0}, {"open": 0.0}, {"close": float("nan")}])
def test_bar_invariants(kw):
    with pytest.raises(InvalidBar):
        align_and_validate([bar(1, **kw)])


def test_empty_input():
    with pytest.raises(EmptyInput):
        align_and_validate([])


def test_arrays_are_read_only():
    frame = align_and_validate([bar(1), bar(2)])
    with pytest.raises(ValueError):
        frame.close[0] = 1.0


def test_series_rejects_non_finite_and_unsorted_dates():
    with pytest.raises(ValueError):
        Series([1.0, np.inf])
    with pytest.raises(ValueError):
        Series([1.0, 2.0], np.array(["2020-01-02", "2020-01-01"], dtype="datetime64[D]"))


def test_close_round_trip(stand_in):
    close = stand_in.close_series()
    assert Series(close.values).with_dates(stand_in.dates) == close
    assert stand_in.with_close(close) == stand_in


def test_window_targets_follow_window():
    values = np.arange(20.0).reshape(10, 2)
    ds = make_windows(values, values[:, 0], lookback=3)
    assert len(ds) == 7
    assert ds.inputs.shape == (7, 3, 2)
    np.testing.assert_array_equal(ds.inputs[0], values[0:3])
    assert ds.targets[0] == values[3, 0]
    np.testing.assert_array_equal(ds.target_index, np.arange(3, 10))


def test_window_length_mismatch():
    with pytest.raises(LengthMismatch):
        make_windows(np.zeros((5, 2)), np.zeros(4), 2)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(2, 200), lookback=st.integers(1, 50))
def test_window_count(n, lookback):
    if n <= lookback:
        return
    ds = make_windows(np.zeros((n, 3)), np.arange(n, dtype=float), lookback)
    assert len(ds) == n - lookback
    assert np.all(ds.targets == ds.target_index)
