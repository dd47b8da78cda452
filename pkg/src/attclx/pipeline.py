"""End-to-end forecaster: ARIMA features, normalisation, windowing, neural
pretraining, boosted-tree fine-tuning and evaluation.

Train/test discipline: the ARIMA coefficients and the min-max statistics are
computed from rows before the split only. ARIMA features are causal one-step
values on every row (each uses only earlier prices), so test rows carry no
information from their own or later closes.
"""
from __future__ import annotations

import datetime as dt
import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np

from . import arima, gbt
from .arima import ArimaSpec, ArModel
from .core_ts import FeatureMatrix, OhlcvFrame, WindowedDataset, make_windows
from .errors import AttclxError, LengthMismatch, SplitOutOfRange, StageError, ZeroRange
from .gbt import GbtEnsemble, GbtParams
from .io import frame_fingerprint
from .metrics import evaluate
from .nn import ModelConfig, Seq2SeqModel, TrainConfig, train

log = logging.getLogger(__name__)

VARIANTS = (
    "arima_only", "xgb_only", "sl_lstm", "ml_lstm", "bilstm",
    "bilstm_xgb", "cnn_bilstm_xgb", "acnn_bilstm_xgb",
)
FEATURE_COLUMNS = ("open", "high", "low", "close", "volume", "amount", "arima_fitted", "arima_residual")
FINETUNE_INPUTS = ("decoder_features", "prediction_summary")
ARIMA_FEATURE_MODE = "causal_one_step"

# variant -> (encoder, layers override, bidirectional, boosted fine-tuning)
_VARIANT_NET = {
    "sl_lstm": ("none", 1, False, False),
    "ml_lstm": ("none", None, False, False),
    "bilstm": ("none", None, True, False),
    "bilstm_xgb": ("none", None, True, True),
    "cnn_bilstm_xgb": ("cnn", None, True, True),
    "acnn_bilstm_xgb": ("acnn", None, True, True),
}


@dataclass(frozen=True)
class NetConfig:
    d_model: int = 64
    hidden: int = 64
    layers: int = 5
    conv_widths: tuple = (3,)
    causal: bool = False

    def __post_init__(self):
        object.__setattr__(self, "conv_widths", tuple(int(w) for w in self.conv_widths))


@dataclass(frozen=True)
class PipelineConfig:
    arima: ArimaSpec = field(default_factory=ArimaSpec)
    train: TrainConfig = field(default_factory=TrainConfig)
    gbt: GbtParams = field(default_factory=GbtParams)
    net: NetConfig = field(default_factory=NetConfig)
    split: Union[int, float, str] = 0.95
    target: str = "close_next_day"
    variant: str = "acnn_bilstm_xgb"
    seed: int = 0
    finetune_input: str = "decoder_features"
    residual_target: bool = False

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.target != "close_next_day":
            raise ValueError("the only supported target is close_next_day")
        if self.finetune_input not in FINETUNE_INPUTS:
            raise ValueError(f"finetune_input must be one of {FINETUNE_INPUTS}")


# ---------------------------------------------------------------- stages

def resolve_split(split, dates: np.ndarray) -> int:
    """Row index of the first test row.

    ``split`` may be a row index (int), a train fraction (float in (0, 1)),
    or a date ('YYYYMMDD' or 'YYYY-MM-DD'); a date splits before the first
    row on or after it.
    """
    n = dates.size
    if isinstance(split, (bool, np.bool_)):
        raise SplitOutOfRange(f"invalid split {split!r}")
    if isinstance(split, (int, np.integer)):
        idx = int(split)
    elif isinstance(split, float):
        if not 0.0 < split < 1.0:
            raise SplitOutOfRange(f"fractional split must lie in (0, 1), got {split}")
        idx = int(round(split * n))
    else:
        text = str(split).replace("-", "")
        try:
            day = dt.date(int(text[:4]), int(text[4:6]), int(text[6:8]))
        except ValueError:
            raise SplitOutOfRange(f"cannot read split {split!r} as a date") from None
        idx = int(np.searchsorted(dates, np.datetime64(day, "D"), side="left"))
    if not 0 < idx < n:
        raise SplitOutOfRange(f"split index {idx} outside (0, {n})")
    return idx


def build_features(frame: OhlcvFrame, model: ArModel) -> FeatureMatrix:
    """Six market columns plus the causal ARIMA fitted value and residual."""
    fitted, resid = arima.fitted_and_residuals(model, frame.close)
    if len(fitted) != len(frame):
        raise LengthMismatch("ARIMA output length differs from the frame")
    values = np.column_stack([
        frame.open, frame.high, frame.low, frame.close, frame.volume, frame.amount,
        fitted.values, resid.values,
    ])
    return FeatureMatrix(values, FEATURE_COLUMNS, frame.dates)


@dataclass(frozen=True, eq=False)
class NormParams:
    columns: tuple
    mins: np.ndarray
    maxs: np.ndarray

    def transform(self, values: np.ndarray) -> np.ndarray:
        return (np.asarray(values) - self.mins) / (self.maxs - self.mins)

    def inverse(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values) * (self.maxs - self.mins) + self.mins

    def column_range(self, name: str) -> tuple[float, float]:
        k = self.columns.index(name)
        return float(self.mins[k]), float(self.maxs[k])

    def transform_column(self, values, name: str) -> np.ndarray:
        lo, hi = self.column_range(name)
        return (np.asarray(values, dtype=np.float64) - lo) / (hi - lo)

    def inverse_column(self, values, name: str) -> np.ndarray:
        lo, hi = self.column_range(name)
        return np.asarray(values, dtype=np.float64) * (hi - lo) + lo


def normalize(features: FeatureMatrix, train_rows: int) -> tuple[FeatureMatrix, NormParams]:
    """Min-max scale every column with statistics from the first ``train_rows`` rows.

    Later rows may fall outside [0, 1]; they are not clipped.
    """
    if not 0 < train_rows <= features.n_rows:
        raise SplitOutOfRange(f"train span {train_rows} outside (0, {features.n_rows}]")
    span = features.values[:train_rows]
    mins, maxs = span.min(axis=0), span.max(axis=0)
    for name, lo, hi in zip(features.columns, mins, maxs):
        if hi == lo:
            raise ZeroRange(name)
    params = NormParams(features.columns, mins, maxs)
    return FeatureMatrix(params.transform(features.values), features.columns, features.dates), params


def split_train_test(dataset: WindowedDataset, split_point: int):
    """Windows whose target row precedes ``split_point`` train; the rest test."""
    is_train = dataset.target_index < split_point
    if not is_train.any() or is_train.all():
        raise SplitOutOfRange(f"split point {split_point} leaves an empty train or test set")
    return dataset.subset(is_train), dataset.subset(~is_train)


# ---------------------------------------------------------------- fitted pipeline

def model_config_for(variant: str, cfg: PipelineConfig, n_features: int) -> ModelConfig:
    encoder, layers, bidirectional, _ = _VARIANT_NET[variant]
    return ModelConfig(
        n_features=n_features, d_model=cfg.net.d_model, heads=cfg.train.heads, hidden=cfg.net.hidden,
        layers=layers or cfg.net.layers, bidirectional=bidirectional, encoder=encoder,
        conv_widths=cfg.net.conv_widths, causal=cfg.net.causal,
    )


def uses_network(variant: str) -> bool:
    return variant in _VARIANT_NET


def uses_boosting(variant: str) -> bool:
    return variant == "xgb_only" or (variant in _VARIANT_NET and _VARIANT_NET[variant][3])


@dataclass
class FittedPipeline:
    """Everything needed to turn raw bars into forecasts for one variant."""

    config: PipelineConfig
    variant: str
    seed: int
    ar_model: ArModel
    norm: NormParams
    network: Optional[Seq2SeqModel] = None
    booster: Optional[GbtEnsemble] = None
    loss_history: list = field(default_factory=list)

    @property
    def lookback(self) -> int:
        return self.config.train.lookback

    def windows(self, frame: OhlcvFrame) -> tuple[WindowedDataset, FeatureMatrix]:
        feats = build_features(frame, self.ar_model)
        scaled = FeatureMatrix(self.norm.transform(feats.values), feats.columns, feats.dates)
        target = self._encode_target(frame.close, feats.column("arima_fitted"))
        return make_windows(scaled.values, target, self.lookback), feats

    def _encode_target(self, close, fitted):
        if self.config.residual_target:
            lo, hi = self.norm.column_range("close")
            return (np.asarray(close) - np.asarray(fitted)) / (hi - lo)
        return self.norm.transform_column(close, "close")

    def _decode_target(self, values, fitted_at_target):
        if self.config.residual_target:
            lo, hi = self.norm.column_range("close")
            return np.asarray(fitted_at_target) + np.asarray(values) * (hi - lo)
        return self.norm.inverse_column(values, "close")

    def _boost_inputs(self, ds: WindowedDataset) -> np.ndarray:
        if self.variant == "xgb_only":
            return ds.inputs.reshape(len(ds), -1)
        pred, feats = self.network.predict(ds.inputs)
        if self.config.finetune_input == "decoder_features":
            return feats
        return np.column_stack([pred, ds.inputs[:, -1, :]])

    def predict_scaled(self, ds: WindowedDataset) -> np.ndarray:
        if self.variant == "arima_only":
            raise ValueError("arima_only predicts directly in price units")
        if self.booster is not None:
            return self.booster.predict(self._boost_inputs(ds))
        return self.network.predict(ds.inputs)[0]

    def predict_frame(self, frame: OhlcvFrame, start: int = 0):
        """Forecasts in price units for every window whose target row is >= ``start``.

        Returns (target row indices, truth, prediction).
        """
        ds, feats = self.windows(frame)
        ds = ds.subset(ds.target_index >= start)
        fitted = feats.column("arima_fitted")[ds.target_index]
        truth = frame.close[ds.target_index]
        if self.variant == "arima_only":
            return ds.target_index, truth, fitted.copy()
        return ds.target_index, truth, self._decode_target(self.predict_scaled(ds), fitted)


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except AttclxError as exc:
        raise StageError(name, exc) from exc


def fit_pipeline(config: PipelineConfig, frame: OhlcvFrame, variant: Optional[str] = None,
                 seed: Optional[int] = None) -> tuple[FittedPipeline, int]:
    """Fit ARIMA, scaling, network and booster on the train span. Returns (fitted, split row)."""
    variant = variant or config.variant
    seed = config.seed if seed is None else seed
    split = _stage("split", resolve_split, config.split, frame.dates)
    ar_model = _stage("arima", arima.fit, frame.close[:split], config.arima)
    feats = _stage("features", build_features, frame, ar_model)
    _, norm = _stage("normalize", normalize, feats, split)
    fitted = FittedPipeline(config, variant, seed, ar_model, norm)
    if variant == "arima_only":
        return fitted, split
    ds, _ = _stage("window", fitted.windows, frame)
    train_ds, _ = _stage("split", split_train_test, ds, split)
    if uses_network(variant):
        mcfg = model_config_for(variant, config, ds.n_features)
        net = Seq2SeqModel.init(mcfg, seed)
        tcfg = replace(config.train, seed=seed)
        net, history = _stage("pretrain", train, net, train_ds, tcfg)
        fitted.network = net
        fitted.loss_history = list(history)
    if uses_boosting(variant):
        X = _stage("finetune", fitted._boost_inputs, train_ds)
        fitted.booster = _stage("finetune", gbt.fit, X, train_ds.targets, config.gbt)
    return fitted, split


# ---------------------------------------------------------------- runs

@dataclass
class VariantResult:
    variant: str
    seed: int
    metrics: dict
    loss_history: list
    dates: np.ndarray
    truth: np.ndarray
    prediction: np.ndarray


@dataclass
class RunReport:
    config: PipelineConfig
    data_fingerprint: str
    results: dict = field(default_factory=dict)
    started: str = ""
    finished: str = ""
    n_train: int = 0
    n_test: int = 0
    notes: dict = field(default_factory=lambda: {"arima_features": ARIMA_FEATURE_MODE})


def _now() -> str:
    return dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds")


def run_variant(config: PipelineConfig, frame: OhlcvFrame, variant: str, seed: int):
    fitted, split = fit_pipeline(config, frame, variant, seed)
    idx, truth, pred = _stage("predict", fitted.predict_frame, frame, split)
    metrics = _stage("evaluate", evaluate, pred, truth)
    return VariantResult(variant, seed, metrics, fitted.loss_history, frame.dates[idx], truth, pred), fitted, split


def run(config: PipelineConfig, frame: OhlcvFrame, fingerprint: Optional[str] = None) -> RunReport:
    """Execute ``config.variant`` and evaluate it on the test span."""
    report = RunReport(config, fingerprint or frame_fingerprint(frame), started=_now())
    res, _, split = run_variant(config, frame, config.variant, config.seed)
    report.results[config.variant] = res
    report.n_test = int(res.truth.size)
    report.n_train = split - config.train.lookback
    report.finished = _now()
    return report


def _ablate_one(args):
    config, frame, variant, seed = args
    return run_variant(config, frame, variant, seed)[0]


def ablate(config: PipelineConfig, frame: OhlcvFrame, variants: Sequence[str] = VARIANTS,
           fingerprint: Optional[str] = None, jobs: int = 1) -> RunReport:
    """Run every variant; variant i uses seed ``config.seed + i`` (i from the full list)."""
    report = RunReport(config, fingerprint or frame_fingerprint(frame), started=_now())
    tasks = [(config, frame, v, config.seed + VARIANTS.index(v)) for v in variants]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_ablate_one, tasks))
    else:
        results = [_ablate_one(t) for t in tasks]
    for res in results:
        report.results[res.variant] = res
    split = resolve_split(config.split, frame.dates)
    report.n_train = split - config.train.lookback
    report.n_test = len(frame) - split
    report.finished = _now()
    return report
