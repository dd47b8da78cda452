import dataclasses

import numpy as np
import pytest

from attclx.checkpoint import load_checkpoint, save_checkpoint
from attclx.errors import CheckpointError
from attclx.io import gen_synthetic
from attclx.pipeline import fit_pipeline

from test_pipeline import TINY


@pytest.fixture(scope="module")
def frame():
    return gen_synthetic("random_walk", 250, 1, {"start": 50.0})


@pytest.mark.parametrize("variant", ["acnn_bilstm_xgb", "bilstm", "xgb_only", "arima_only"])
def test_round_trip_bit_exact(tmp_path, frame, variant):
    fitted, split = fit_pipeline(dataclasses.replace(TINY, variant=variant), frame)
    path = tmp_path / "m.npz"
    save_checkpoint(fitted, path)
    loaded = load_checkpoint(path)
    assert loaded.config == fitted.config
    assert loaded.loss_history == fitted.loss_history
    a = fitted.predict_frame(frame, split)
    b = loaded.predict_frame(frame, split)
    for x, y in zip(a, b):
        assert np.array_equal(x, y)


def test_bad_files(tmp_path):
    p = tmp_path / "junk.npz"
    p.write_bytes(b"not a checkpoint")
    with pytest.raises(CheckpointError):
        load_checkpoint(p)
    np.savez(tmp_path / "empty.npz", x=np.zeros(1))
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "empty.npz")
