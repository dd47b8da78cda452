import dataclasses

import numpy as np
import pytest

from attclx import arima
from attclx.core_ts import FeatureMatrix, Series, make_windows
from attclx.errors import SplitOutOfRange, StageError, ZeroRange
from attclx.gbt import GbtParams
from attclx.io import gen_synthetic
from attclx.nn import TrainConfig
from attclx.pipeline import (FEATURE_COLUMNS, VARIANTS, NetConfig, PipelineConfig, ablate, build_features,
                             fit_pipeline, normalize, resolve_split, run, split_train_test)

TINY = PipelineConfig(
    train=TrainConfig(epochs=2, batch_size=16, heads=2, lookback=10),
    gbt=GbtParams(n_rounds=10, max_depth=3),
    net=NetConfig(d_model=8, hidden=8, layers=2),
    split=0.8,
)


@pytest.fixture(scope="module")
def frame():
    return gen_synthetic("sine_plus_noise", 300, 3, {"ar": 0.5, "noise": 0.5})


def test_normalize_endpoints_and_inverse():
    fm = FeatureMatrix(np.array([[2.0], [4.0], [6.0], [9.0]]), ("x",))
    scaled, params = normalize(fm, 3)
    np.testing.assert_allclose(scaled.values[:3, 0], [0.0, 0.5, 1.0])
    assert scaled.values[3, 0] > 1.0
    np.testing.assert_allclose(params.inverse(scaled.values), fm.values, rtol=0, atol=1e-12)


def test_zero_range_column():
    fm = FeatureMatrix(np.array([[1.0, 3.0], [2.0, 3.0], [3.0, 3.0]]), ("a", "b"))
    with pytest.raises(ZeroRange) as info:
        normalize(fm, 3)
    assert info.value.column == "b"


def test_features(frame):
    model = arima.fit(frame.close[:200])
    feats = build_features(frame, model)
    assert feats.columns == FEATURE_COLUMNS
    assert feats.n_rows == len(frame)
    np.testing.assert_array_equal(feats.column("arima_fitted") + feats.column("arima_residual"), frame.close)


def test_resolve_split(frame):
    assert resolve_split(0.5, frame.dates) == 150
    assert resolve_split(120, frame.dates) == 120
    day = frame.dates[77].item().strftime("%Y%m%d")
    assert resolve_split(day, frame.dates) == 77
    for bad in (0, 300, 1.5, "19990101", "notadate"):
        with pytest.raises(SplitOutOfRange):
            resolve_split(bad, frame.dates)


def test_split_partition():
    values = np.arange(200.0).reshape(100, 2)
    ds = make_windows(values, values[:, 0], 5)
    train, test = split_train_test(ds, 60)
    assert len(train) + len(test) == len(ds)
    assert train.target_index.max() < 60 <= test.target_index.min()
    with pytest.raises(SplitOutOfRange):
        split_train_test(ds, 0)


def test_ninety_five_percent_split():
    ds = make_windows(np.zeros((3700, 8)), np.zeros(3700), 20)
    train, test = split_train_test(ds, 3520)
    assert (len(train), len(test)) == (3500, 180)


def test_window_then_split_commutes():
    rng = np.random.default_rng(0)
    values, target = rng.standard_normal((80, 3)), rng.standard_normal(80)
    train, _ = split_train_test(make_windows(values, target, 6), 50)
    direct = make_windows(values[:50], target[:50], 6)
    np.testing.assert_array_equal(train.inputs, direct.inputs)
    np.testing.assert_array_equal(train.targets, direct.targets)


def test_no_leakage(frame):
    fitted, split = fit_pipeline(TINY, frame, "arima_only")
    close = frame.close.copy()
    close[split + 5] *= 1.5
    other = frame.with_close(Series(close))
    again, _ = fit_pipeline(TINY, other, "arima_only")
    assert again.ar_model.to_dict() == fitted.ar_model.to_dict()
    assert np.array_equal(again.norm.mins, fitted.norm.mins)
    assert np.array_equal(again.norm.maxs, fitted.norm.maxs)


def test_arima_only_predictions_are_fitted_values(frame):
    fitted, split = fit_pipeline(TINY, frame, "arima_only")
    idx, truth, pred = fitted.predict_frame(frame, split)
    ref, _ = arima.fitted_and_residuals(fitted.ar_model, frame.close)
    np.testing.assert_array_equal(pred, ref.values[idx])
    np.testing.assert_array_equal(truth, frame.close[idx])


@pytest.mark.parametrize("variant", VARIANTS)
def test_every_variant_runs(frame, variant):
    report = run(dataclasses.replace(TINY, variant=variant), frame)
    res = report.results[variant]
    assert res.truth.size == report.n_test == 60
    assert np.all(np.isfinite(res.prediction))
    assert report.notes["arima_features"] == "causal_one_step"


@pytest.mark.parametrize("option", [{"finetune_input": "prediction_summary"}, {"residual_target": True}])
def test_alternative_modes(frame, option):
    report = run(dataclasses.replace(TINY, **option), frame)
    assert np.isfinite(report.results[TINY.variant].metrics["rmse"])


def test_run_deterministic(frame):
    a, b = run(TINY, frame), run(TINY, frame)
    ra, rb = a.results[TINY.variant], b.results[TINY.variant]
    assert ra.metrics == rb.metrics
    assert ra.loss_history == rb.loss_history
    assert np.array_equal(ra.prediction, rb.prediction)
    assert a.data_fingerprint == b.data_fingerprint


def test_ablate_seeds_follow_variant_index(frame):
    report = ablate(dataclasses.replace(TINY, seed=7), frame, variants=("arima_only", "bilstm"))
    assert report.results["bilstm"].seed == 7 + VARIANTS.index("bilstm")


def test_ablate_worker_count_does_not_change_results(frame):
    variants = ("arima_only", "xgb_only", "cnn_bilstm_xgb")
    serial = ablate(TINY, frame, variants=variants)
    pooled = ablate(TINY, frame, variants=variants, jobs=2)
    for v in variants:
        assert np.array_equal(serial.results[v].prediction, pooled.results[v].prediction)


def test_stage_errors_are_wrapped(frame):
    flat = dataclasses.replace(frame, volume=np.full(len(frame), 5.0))
    with pytest.raises(StageError) as info:
        fit_pipeline(TINY, flat)
    assert info.value.stage == "normalize"
    assert isinstance(info.value.cause, ZeroRange)


def test_config_validation():
    with pytest.raises(ValueError):
        PipelineConfig(variant="transformer")
    with pytest.raises(ValueError):
        PipelineConfig(finetune_input="raw")
