"""The encoder-decoder pretraining network."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .. import autodiff as ad
from ..autodiff import Tensor
from ..errors import ShapeMismatch
from .layers import AcnnEncoder, LstmDecoder, uniform_init

ENCODERS = ("acnn", "cnn", "none")


@dataclass(frozen=True)
class ModelConfig:
    n_features: int = 8
    d_model: int = 64
    heads: int = 4
    hidden: int = 64
    layers: int = 5
    bidirectional: bool = True
    encoder: str = "acnn"
    conv_widths: tuple = (3,)
    causal: bool = False

    def __post_init__(self):
        if self.encoder not in ENCODERS:
            raise ValueError(f"encoder must be one of {ENCODERS}, got {self.encoder!r}")
        if min(self.n_features, self.d_model, self.heads, self.hidden, self.layers) < 1:
            raise ValueError("model dimensions must be positive")
        object.__setattr__(self, "conv_widths", tuple(self.conv_widths))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["conv_widths"] = list(self.conv_widths)
        return d


@dataclass
class Seq2SeqModel:
    config: ModelConfig
    encoder: Optional[AcnnEncoder]
    decoder: LstmDecoder
    head_w: Tensor
    head_b: Tensor

    @classmethod
    def init(cls, config: ModelConfig, seed: int = 0) -> "Seq2SeqModel":
        rng = np.random.default_rng(seed)
        encoder = None
        width = config.n_features
        if config.encoder != "none":
            encoder = AcnnEncoder.init(
                rng, config.n_features, config.d_model, config.heads, config.conv_widths,
                config.causal, attention=config.encoder == "acnn",
            )
            width = config.d_model
        decoder = LstmDecoder.init(rng, width, config.hidden, config.layers, config.bidirectional)
        fw = decoder.feature_width
        return cls(config, encoder, decoder, uniform_init(rng, (fw, 1), fw), uniform_init(rng, (1,), fw))

    @property
    def feature_width(self) -> int:
        return self.decoder.feature_width

    def parameters(self) -> dict:
        """Named trainable tensors, in a fixed order."""
        out = {}
        if self.encoder is not None:
            out.update(self.encoder.parameters("encoder"))
        out.update(self.decoder.parameters("decoder"))
        out["head.w"] = self.head_w
        out["head.b"] = self.head_b
        return out

    def encode(self, window, train: bool = False, rng=None, dropout: float = 0.0) -> Tensor:
        window = window if isinstance(window, Tensor) else Tensor(window)
        if window.shape[-1] != self.config.n_features:
            raise ShapeMismatch("encode", window.shape, ("lookback", self.config.n_features))
        if self.encoder is None:
            return window
        return self.encoder(window, train, rng, dropout)

    def decode(self, context: Tensor, train: bool = False, rng=None, dropout: float = 0.0):
        """Returns (prediction (B,), features (B, feature_width))."""
        squeeze = context.ndim == 2
        if squeeze:
            context = ad.reshape(context, (1,) + context.shape)
        feats = self.decoder(context, train, rng, dropout)
        pred = ad.reshape(ad.add(feats @ self.head_w, self.head_b), (feats.shape[0],))
        if squeeze:
            return ad.reshape(pred, ()), ad.reshape(feats, (feats.shape[1],))
        return pred, feats

    def forward(self, windows, train: bool = False, rng=None, dropout: float = 0.0):
        """Windows (B, lookback, features) or a single (lookback, features) window."""
        ctx = self.encode(windows, train, rng, dropout)
        return self.decode(ctx, train, rng, dropout)

    def predict(self, windows: np.ndarray, batch_size: int = 256):
        """Eval-mode predictions and decoder features as plain arrays."""
        windows = np.asarray(windows, dtype=np.float64)
        preds, feats = [], []
        for start in range(0, windows.shape[0], batch_size):
            p, f = self.forward(windows[start : start + batch_size])
            preds.append(p.data)
            feats.append(f.data)
        if not preds:
            return np.zeros(0), np.zeros((0, self.feature_width))
        return np.concatenate(preds), np.concatenate(feats)

    def state_dict(self) -> dict:
        return {k: v.data.copy() for k, v in self.parameters().items()}

    def load_state_dict(self, state: dict):
        params = self.parameters()
        if set(params) != set(state):
            missing = sorted(set(params) ^ set(state))
            raise KeyError(f"parameter names differ: {missing[:5]}")
        for k, p in params.items():
            arr = np.asarray(state[k], dtype=np.float64)
            if arr.shape != p.shape:
                raise ShapeMismatch(f"load {k}", arr.shape, p.shape)
            p.data = arr.copy()
