"""Daily price forecasting with ARIMA features, an attention-CNN encoder,
a bidirectional LSTM decoder and boosted-tree fine-tuning."""
from .core_ts import FeatureMatrix, OhlcvBar, OhlcvFrame, Series, WindowedDataset, align_and_validate, make_windows
from .io import gen_synthetic, load_ohlcv_csv, save_ohlcv_csv
from .metrics import evaluate
from .pipeline import VARIANTS, PipelineConfig, ablate, fit_pipeline, run
from .stats import acf, adf_test, pacf

__version__ = "0.1.0"
