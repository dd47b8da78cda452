"""Scaled dot-product and multi-head self-attention.

Vectors are stored as rows: Q is (..., N_q, d), K is (..., N, d), V is
(..., N, d_v). For a single query q the output is sum_i alpha_i v_i with
alpha = softmax(k_i . q / sqrt(d)); stacking queries as rows gives
softmax(Q K^T / sqrt(d)) V, the row-major form of V softmax(K^T Q / sqrt(d)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .. import autodiff as ad
from ..autodiff import Tensor
from ..errors import ShapeMismatch


def causal_mask(n: int) -> np.ndarray:
    """Additive mask hiding keys after each query position."""
    m = np.zeros((n, n))
    m[np.triu_indices(n, 1)] = -1e30
    return m


def attention_weights(Q: Tensor, K: Tensor, mask: Optional[np.ndarray] = None) -> Tensor:
    """Row i holds the softmax distribution of query i over all keys."""
    if Q.shape[-1] != K.shape[-1]:
        raise ShapeMismatch("scaled_dot_attention", K.shape, ("...", Q.shape[-1]))
    d = Q.shape[-1]
    scores = ad.scale(ad.matmul(Q, ad.swap_last(K)), 1.0 / math.sqrt(d))
    if mask is not None:
        scores = ad.add(scores, mask)
    return ad.softmax(scores, axis=-1)


def scaled_dot_attention(Q, K, V, mask: Optional[np.ndarray] = None) -> Tensor:
    Q, K, V = (x if isinstance(x, Tensor) else Tensor(x) for x in (Q, K, V))
    if K.shape[-2] != V.shape[-2]:
        raise ShapeMismatch("scaled_dot_attention", V.shape, ("...", K.shape[-2], V.shape[-1]))
    return ad.matmul(attention_weights(Q, K, mask), V)


@dataclass
class AttentionHead:
    w_q: Tensor
    w_k: Tensor
    w_v: Tensor

    def __post_init__(self):
        d_in = self.w_q.shape[0]
        if self.w_k.shape[0] != d_in or self.w_v.shape[0] != d_in:
            raise ShapeMismatch("AttentionHead", (self.w_k.shape, self.w_v.shape), (d_in, "d_head"))
        if self.w_q.shape != self.w_k.shape:
            raise ShapeMismatch("AttentionHead", self.w_k.shape, self.w_q.shape)

    @property
    def d_head(self) -> int:
        return self.w_v.shape[1]

    def __call__(self, X: Tensor, mask=None) -> Tensor:
        return scaled_dot_attention(X @ self.w_q, X @ self.w_k, X @ self.w_v, mask)

    def parameters(self, prefix: str) -> dict:
        return {f"{prefix}.w_q": self.w_q, f"{prefix}.w_k": self.w_k, f"{prefix}.w_v": self.w_v}


def multi_head_self_attention(X, heads: Sequence[AttentionHead], causal: bool = False) -> Tensor:
    """Concatenate each head's self-attention output along the feature axis.

    X is (T, d_in) or (B, T, d_in); output width is the sum of head widths.
    """
    X = X if isinstance(X, Tensor) else Tensor(X)
    if X.ndim < 2 or X.shape[-1] != heads[0].w_q.shape[0]:
        raise ShapeMismatch("multi_head_self_attention", X.shape, ("...", "T", heads[0].w_q.shape[0]))
    mask = causal_mask(X.shape[-2]) if causal else None
    outs = [h(X, mask) for h in heads]
    return outs[0] if len(outs) == 1 else ad.concat(outs, axis=-1)
