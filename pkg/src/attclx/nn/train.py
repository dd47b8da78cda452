"""Mini-batch training of a Seq2SeqModel on squared error."""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np

from .. import autodiff as ad
from ..core_ts import WindowedDataset
from ..errors import EmptyDataset, NonFiniteValue
from .model import Seq2SeqModel
from .optim import AdamState, adam_step, clip_grad_norm

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    batch_size: int = 32
    learning_rate: float = 0.01
    dropout: float = 0.3
    lookback: int = 20
    heads: int = 4
    seed: int = 0
    clip_norm: float = 1.0

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1 or self.heads < 1 or self.lookback < 1:
            raise ValueError("epochs, batch_size, heads and lookback must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


def train(model: Seq2SeqModel, data: WindowedDataset, cfg: TrainConfig):
    """Fit ``model`` in place with Adam; returns (model, per-epoch mean loss).

    Batches are reshuffled every epoch from a generator seeded by
    ``cfg.seed``; dropout masks come from a second, independent stream.
    """
    n = len(data)
    if n == 0:
        raise EmptyDataset("no training windows")
    order_rng, drop_rng = (np.random.default_rng(s) for s in np.random.SeedSequence(cfg.seed).spawn(2))
    params = model.parameters()
    by_id = {id(p): name for name, p in params.items()}
    state = AdamState()
    history = []
    tape = ad.Tape()
    for epoch in range(cfg.epochs):
        perm = order_rng.permutation(n)
        total = 0.0
        for bi, start in enumerate(range(0, n, cfg.batch_size)):
            idx = perm[start : start + cfg.batch_size]
            tape.reset()
            try:
                with tape:
                    pred, _ = model.forward(data.inputs[idx], True, drop_rng, cfg.dropout)
                    loss = ad.mse_loss(pred, data.targets[idx])
            except NonFiniteValue as exc:
                raise NonFiniteValue(exc.op, f"epoch {epoch}, batch {bi}") from exc
            raw = tape.backward(loss)
            grads = {by_id[id(t)]: g for t, g in raw.items() if id(t) in by_id}
            clip_grad_norm(grads, cfg.clip_norm)
            adam_step(params, grads, state, cfg.learning_rate)
            total += float(loss.data) * idx.size
        history.append(total / n)
        log.debug("epoch %d loss %.6g", epoch, history[-1])
    return model, history
