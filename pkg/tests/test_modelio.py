"""Flat-text model files: lossless round trips and strict parsing."""

import numpy as np
import pytest

from kffnn.ffnn import FfnnModel, ffnn_init
from kffnn.linalg import Rng
from kffnn.lstm import lstm_init
from kffnn.modelio import load_model, save_model
from kffnn.rnn import rnn_init


def assert_same_weights(a, b):
    wa, wb = a.weights(), b.weights()
    assert [n for n, _ in wa] == [n for n, _ in wb]
    for (_, x), (_, y) in zip(wa, wb):
        assert np.array_equal(x, y)


@pytest.mark.parametrize("builder", [
    lambda: ffnn_init(5, 3, Rng(1), lam=1.25, output_activation="sigmoid"),
    lambda: rnn_init(4, 2, Rng(2), lam=0.75),
    lambda: lstm_init(3, 2, Rng(3)),
    lambda: lstm_init(3, 2, Rng(4), bidirectional=True),
])
def test_round_trip(tmp_path, builder):
    model = builder()
    path = tmp_path / "model.txt"
    save_model(model, path)
    back = load_model(path)
    assert type(back) is type(model)
    assert back.output_activation == model.output_activation
    assert_same_weights(model, back)
    if hasattr(model, "lam"):
        assert back.lam == model.lam


def test_awkward_values_survive(tmp_path):
    m = FfnnModel(np.array([[1.0 / 3.0, 1e-300], [-1e17, 5e-324]]),
                  np.array([[0.1], [-0.30000000000000004]]), 1.0, "linear")
    path = tmp_path / "model.txt"
    save_model(m, path)
    assert_same_weights(m, load_model(path))


def test_bad_header_rejected(tmp_path):
    path = tmp_path / "model.txt"
    path.write_text("convnet 3 2 linear\n")
    with pytest.raises(ValueError, match="unknown model kind"):
        load_model(path)


def test_truncated_block_rejected(tmp_path):
    m = ffnn_init(3, 2, Rng(5))
    path = tmp_path / "model.txt"
    save_model(m, path)
    lines = path.read_text().splitlines()
    path.write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(ValueError):
        load_model(path)

def test_wrong_block_name_rejected(tmp_path):
    m = ffnn_init(3, 2, Rng(5))
    path = tmp_path / "model.txt"
    save_model(m, path)
    path.write_text(path.read_text().replace("w_ho", "w_oh"))
    with pytest.raises(ValueError, match="w_ho"):
        load_model(path)


def test_missing_file_raises():
    with pytest.raises(OSError):
        load_model("/nonexistent/model.txt")


def test_empty_file_rejected(tmp_path):
    path = tmp_path / "model.txt"
    path.write_text("")
    with pytest.raises(ValueError, match="empty"):
        load_model(path)
