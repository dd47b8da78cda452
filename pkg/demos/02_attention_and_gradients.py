"""
Attention by hand, gradients by tape
====================================

The encoder's attention is a softmax-weighted average of value rows. Here it
is checked against a loop, and the whole network's gradient is checked
against finite differences.
"""

import numpy as np
from attclx.autodiff import gradcheck, mse_loss
from attclx.nn import ModelConfig, Seq2SeqModel, scaled_dot_attention

rng = np.random.default_rng(0)
Q, K, V = rng.standard_normal((3, 4)), rng.standard_normal((5, 4)), rng.standard_normal((5, 2))

scores = Q @ K.T / np.sqrt(4)
w = np.exp(scores - scores.max(axis=1, keepdims=True))
w /= w.sum(axis=1, keepdims=True)
print("row weights sum to", w.sum(axis=1))
print("max gap vs library:", np.abs(w @ V - scaled_dot_attention(Q, K, V).data).max())

# A tiny encoder-decoder: window of 4 days, 2 features
cfg = ModelConfig(n_features=2, d_model=4, heads=2, hidden=3, layers=1, encoder="acnn")
model = Seq2SeqModel.init(cfg, seed=0)
x, y = rng.standard_normal((3, 4, 2)), rng.standard_normal(3)
params = list(model.parameters().values())
print("parameters:", sum(p.data.size for p in params))

err = gradcheck(lambda: mse_loss(model.forward(x)[0], y), params, h=1e-5)
print(f"worst relative gradient error: {err:.2e}")
