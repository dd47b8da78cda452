"""Versioned single-file checkpoints for a fitted pipeline.

The container is a NumPy ``.npz`` archive. ``__meta__`` holds a JSON
document (format version, config, variant, seed, ARIMA model, loss
history); network parameters are stored under ``net/<name>``, the boosted
ensemble under ``gbt/<field>`` and the scaling statistics under ``norm/``.
Arrays are stored raw, so a round trip is bit-exact.
"""
from __future__ import annotations

import json

import numpy as np

from .arima import ArModel
from .config import build_config, config_to_settings
from .errors import CheckpointError
from .gbt import GbtEnsemble
from .nn import Seq2SeqModel
from .pipeline import FittedPipeline, NormParams, model_config_for

FORMAT_VERSION = 1


def save_checkpoint(fitted: FittedPipeline, path) -> None:
    meta = {
        "format_version": FORMAT_VERSION,
        "variant": fitted.variant,
        "seed": fitted.seed,
        "config": config_to_settings(fitted.config),
        "arima": fitted.ar_model.to_dict(),
        "norm_columns": list(fitted.norm.columns),
        "loss_history": [float(v) for v in fitted.loss_history],
        "has_network": fitted.network is not None,
        "has_booster": fitted.booster is not None,
    }
    arrays = {
        "__meta__": np.array(json.dumps(meta, sort_keys=True)),
        "norm/mins": fitted.norm.mins,
        "norm/maxs": fitted.norm.maxs,
    }
    if fitted.network is not None:
        arrays.update({f"net/{k}": v for k, v in fitted.network.state_dict().items()})
    if fitted.booster is not None:
        arrays.update({f"gbt/{k}": v for k, v in fitted.booster.to_arrays().items()})
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_checkpoint(path) -> FittedPipeline:
    try:
        with np.load(path, allow_pickle=False) as archive:
            arrays = {k: archive[k] for k in archive.files}
    except (OSError, ValueError) as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from None
    if "__meta__" not in arrays:
        raise CheckpointError(f"{path} has no metadata entry")
    meta = json.loads(str(arrays["__meta__"]))
    if meta.get("format_version") != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint format {meta.get('format_version')!r}")
    config = build_config(meta["config"])
    norm = NormParams(tuple(meta["norm_columns"]), arrays["norm/mins"], arrays["norm/maxs"])
    fitted = FittedPipeline(config, meta["variant"], int(meta["seed"]), ArModel.from_dict(meta["arima"]), norm,
                            loss_history=list(meta["loss_history"]))
    try:
        if meta["has_network"]:
            mcfg = model_config_for(fitted.variant, config, len(norm.columns))
            net = Seq2SeqModel.init(mcfg, fitted.seed)
            net.load_state_dict({k[4:]: v for k, v in arrays.items() if k.startswith("net/")})
            fitted.network = net
        if meta["has_booster"]:
            gbt_arrays = {k[4:]: v for k, v in arrays.items() if k.startswith("gbt/")}
            fitted.booster = GbtEnsemble.from_arrays(gbt_arrays, config.gbt)
    except (KeyError, ValueError) as exc:
        raise CheckpointError(f"checkpoint {path} is inconsistent: {exc}") from None
    return fitted
