"""Encoder and decoder building blocks."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .. import autodiff as ad
from ..autodiff import Tensor
from ..errors import ShapeMismatch
from .attention import AttentionHead, multi_head_self_attention


def uniform_init(rng: np.random.Generator, shape, fan_in: int) -> Tensor:
    bound = 1.0 / np.sqrt(fan_in)
    return Tensor(rng.uniform(-bound, bound, size=shape), requires_grad=True)


@dataclass
class MultiScaleConv:
    """Same-padded 1-D convs of several widths whose outputs are concatenated."""

    kernels: list
    biases: list

    @classmethod
    def init(cls, rng, channels: int, widths: Sequence[int]) -> "MultiScaleConv":
        if channels % len(widths):
            raise ValueError(f"{channels} channels cannot be split across {len(widths)} kernel widths")
        cout = channels // len(widths)
        kernels = [uniform_init(rng, (k, channels, cout), k * channels) for k in widths]
        biases = [uniform_init(rng, (cout,), k * channels) for k in widths]
        return cls(kernels, biases)

    def __call__(self, x: Tensor) -> Tensor:
        outs = [ad.conv1d(x, k, b) for k, b in zip(self.kernels, self.biases)]
        return outs[0] if len(outs) == 1 else ad.concat(outs, axis=-1)

    def parameters(self, prefix: str) -> dict:
        out = {}
        for i, (k, b) in enumerate(zip(self.kernels, self.biases)):
            out[f"{prefix}.kernel{i}"] = k
            out[f"{prefix}.bias{i}"] = b
        return out


@dataclass
class AcnnEncoder:
    """Input projection plus a residual self-attention term, then a residual conv block.

    The window is projected to d_model by ``w_in``/``b_in``; multi-head
    self-attention (projected by ``w_out``) is added on top. With ``heads``
    empty the attention term vanishes and the block is a plain CNN encoder.
    """

    heads: list
    w_out: Optional[Tensor]
    w_in: Optional[Tensor]
    b_in: Optional[Tensor]
    conv1: MultiScaleConv
    conv2: MultiScaleConv
    causal: bool = False

    @classmethod
    def init(cls, rng, d_in: int, d_model: int, n_heads: int, conv_widths=(3,), causal=False,
             attention: bool = True) -> "AcnnEncoder":
        heads, w_out = [], None
        w_in = uniform_init(rng, (d_in, d_model), d_in)
        b_in = uniform_init(rng, (d_model,), d_in)
        if attention:
            if d_model % n_heads:
                raise ValueError(f"d_model={d_model} is not divisible by {n_heads} heads")
            dh = d_model // n_heads
            heads = [
                AttentionHead(*(uniform_init(rng, (d_in, dh), d_in) for _ in range(3)))
                for _ in range(n_heads)
            ]
            w_out = uniform_init(rng, (d_model, d_model), d_model)
        conv1 = MultiScaleConv.init(rng, d_model, conv_widths)
        conv2 = MultiScaleConv.init(rng, d_model, conv_widths)
        return cls(heads, w_out, w_in, b_in, conv1, conv2, causal)

    @property
    def d_in(self) -> int:
        return self.w_in.shape[0]

    @property
    def d_model(self) -> int:
        return self.w_in.shape[1]

    def __call__(self, window: Tensor, train: bool = False, rng=None, dropout: float = 0.0) -> Tensor:
        if window.shape[-1] != self.d_in:
            raise ShapeMismatch("encode", window.shape, ("...", "lookback", self.d_in))
        h = window @ self.w_in + self.b_in
        if self.heads:
            h = h + multi_head_self_attention(window, self.heads, self.causal) @ self.w_out
        h = ad.add(h, self.conv2(ad.relu(self.conv1(h))))
        return ad.dropout(h, dropout, rng, train)

    def parameters(self, prefix: str = "encoder") -> dict:
        out = {}
        for i, head in enumerate(self.heads):
            out.update(head.parameters(f"{prefix}.head{i}"))
        out[f"{prefix}.w_in"] = self.w_in
        out[f"{prefix}.b_in"] = self.b_in
        if self.heads:
            out[f"{prefix}.w_out"] = self.w_out
        out.update(self.conv1.parameters(f"{prefix}.conv1"))
        out.update(self.conv2.parameters(f"{prefix}.conv2"))
        return out


@dataclass
class LstmCell:
    """Gate blocks in ``w``, ``u``, ``b`` are ordered [input, forget, output, candidate]."""

    w: Tensor
    u: Tensor
    b: Tensor

    @classmethod
    def init(cls, rng, d_in: int, hidden: int) -> "LstmCell":
        w = uniform_init(rng, (d_in, 4 * hidden), d_in)
        u = uniform_init(rng, (hidden, 4 * hidden), hidden)
        b = uniform_init(rng, (4 * hidden,), hidden)
        b.data[hidden : 2 * hidden] = 1.0
        return cls(w, u, b)

    @property
    def hidden(self) -> int:
        return self.u.shape[0]

    def step(self, xw_t: Tensor, h: Tensor, c: Tensor):
        """One update given the precomputed input projection x_t W + b."""
        H = self.hidden
        z = ad.add(xw_t, h @ self.u)
        sig = ad.sigmoid(z[..., : 3 * H])
        i, f, o = sig[..., :H], sig[..., H : 2 * H], sig[..., 2 * H :]
        g = ad.tanh(z[..., 3 * H :])
        c = ad.add(ad.mul(f, c), ad.mul(i, g))
        h = ad.mul(o, ad.tanh(c))
        return h, c

    def run(self, x: Tensor, reverse: bool = False, fused: bool = True):
        """Run over (B, T, d_in); returns (hidden states (B, T, H) in time order, final h).

        ``fused=False`` builds the per-step graph from primitive ops instead
        of the single recorded ``lstm_sequence`` op; both compute the same
        values and gradients.
        """
        if fused:
            seq = ad.lstm_sequence(x, self.w, self.u, self.b, reverse)
            return seq, seq[:, 0] if reverse else seq[:, -1]
        B, T, _ = x.shape
        H = self.hidden
        xw = ad.add(x @ self.w, self.b)
        h = Tensor(np.zeros((B, H)))
        c = Tensor(np.zeros((B, H)))
        steps = range(T - 1, -1, -1) if reverse else range(T)
        outs = [None] * T
        for t in steps:
            h, c = self.step(xw[:, t], h, c)
            outs[t] = h
        return ad.stack(outs, axis=1), h

    def parameters(self, prefix: str) -> dict:
        return {f"{prefix}.w": self.w, f"{prefix}.u": self.u, f"{prefix}.b": self.b}


@dataclass
class LstmDecoder:
    """Stack of (optionally bidirectional) LSTM layers.

    Each layer feeds its per-step outputs (forward || backward) to the next.
    The feature vector is the top layer's final forward hidden state,
    concatenated with its final backward hidden state when bidirectional.
    """

    forward_cells: list
    backward_cells: list = field(default_factory=list)
    fused: bool = True

    @classmethod
    def init(cls, rng, d_in: int, hidden: int, layers: int, bidirectional: bool = True) -> "LstmDecoder":
        fwd, bwd = [], []
        width = d_in
        for _ in range(layers):
            fwd.append(LstmCell.init(rng, width, hidden))
            if bidirectional:
                bwd.append(LstmCell.init(rng, width, hidden))
            width = hidden * (2 if bidirectional else 1)
        return cls(fwd, bwd)

    @property
    def bidirectional(self) -> bool:
        return bool(self.backward_cells)

    @property
    def d_in(self) -> int:
        return self.forward_cells[0].w.shape[0]

    @property
    def feature_width(self) -> int:
        return self.forward_cells[-1].hidden * (2 if self.bidirectional else 1)

    def __call__(self, context: Tensor, train: bool = False, rng=None, dropout: float = 0.0) -> Tensor:
        if context.ndim != 3 or context.shape[-1] != self.d_in:
            raise ShapeMismatch("decode", context.shape, ("B", "lookback", self.d_in))
        x = context
        n = len(self.forward_cells)
        for li in range(n):
            seq_f, last_f = self.forward_cells[li].run(x, fused=self.fused)
            if self.bidirectional:
                seq_b, last_b = self.backward_cells[li].run(x, reverse=True, fused=self.fused)
                if li == n - 1:
                    return ad.concat([last_f, last_b], axis=-1)
                x = ad.concat([seq_f, seq_b], axis=-1)
            else:
                if li == n - 1:
                    return last_f
                x = seq_f
            x = ad.dropout(x, dropout, rng, train)

    def parameters(self, prefix: str = "decoder") -> dict:
        out = {}
        for i, cell in enumerate(self.forward_cells):
            out.update(cell.parameters(f"{prefix}.layer{i}.fwd"))
        for i, cell in enumerate(self.backward_cells):
            out.update(cell.parameters(f"{prefix}.layer{i}.bwd"))
        return out
