"""Simple recurrent network trained with backpropagation through time.

The hidden layer feeds back into itself through w_hh; the single scalar
output is read from the final hidden state only, so the error enters the
backward pass at t = T and flows backwards through the recurrence.  The
initial hidden state h^0 is the zero vector.  Sequences of different
lengths train natively, clip by clip, with no padding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .errors import TrainingDivergedError
from .ffnn import TrainConfig, _ACT_CODE, _check_activation, _init_matrix
from .linalg import Rng


@dataclass
class RnnModel:
    """w_ih is (d_in, hidden), w_hh (hidden, hidden), w_ho (hidden, 1)."""

    w_ih: np.ndarray
    w_hh: np.ndarray
    w_ho: np.ndarray
    lam: float = 1.0
    output_activation: str = "linear"

    def __post_init__(self):
        self.w_ih = np.ascontiguousarray(self.w_ih, dtype=np.float64)
        self.w_hh = np.ascontiguousarray(self.w_hh, dtype=np.float64)
        self.w_ho = np.ascontiguousarray(self.w_ho, dtype=np.float64)
        nh = self.w_ih.shape[1] if self.w_ih.ndim == 2 else -1
        if (self.w_hh.shape != (nh, nh) or self.w_ho.shape != (nh, 1)):
            raise ValueError(
                f"RnnModel: inconsistent shapes {self.w_ih.shape}, "
                f"{self.w_hh.shape}, {self.w_ho.shape}"
            )
        if self.lam <= 0.0:
            raise ValueError("RnnModel: lam must be positive")
        _check_activation(self.output_activation)

    @property
    def d_in(self) -> int:
        return self.w_ih.shape[0]

    @property
    def hidden(self) -> int:
        return self.w_ih.shape[1]

    def weights(self):
        return [("w_ih", self.w_ih), ("w_hh", self.w_hh), ("w_ho", self.w_ho)]

    def copy(self) -> "RnnModel":
        return RnnModel(self.w_ih.copy(), self.w_hh.copy(), self.w_ho.copy(),
                        self.lam, self.output_activation)


@dataclass
class RnnTrace:
    """Forward-pass record: inputs (T, d_in), hidden_states (T, hidden), output."""

    inputs: np.ndarray
    hidden_states: np.ndarray
    output: float


def rnn_init(d_in: int, hidden: int, rng: Rng, lam: float = 1.0,
             output_activation: str = "linear",
             init_range: float | None = None) -> RnnModel:
    """Fresh model; draws w_ih then w_ho then w_hh, so an FFNN initialised
    from the same seed gets identical shared layers."""
    w_ih = _init_matrix(rng, d_in, hidden, init_range)
    w_ho = _init_matrix(rng, hidden, 1, init_range)
    w_hh = _init_matrix(rng, hidden, hidden, init_range)
    return RnnModel(w_ih, w_hh, w_ho, lam, output_activation)


def _as_sequence(model, seq) -> np.ndarray:
    seq = np.ascontiguousarray(seq, dtype=np.float64)
    if seq.ndim != 2 or seq.shape[0] < 1:
        raise ValueError("sequence must be a nonempty (T, d_in) array")
    if seq.shape[1] != model.d_in:
        raise ValueError(
            f"sequence features have dim {seq.shape[1]}, model expects {model.d_in}"
        )
    return seq


def rnn_forward(model: RnnModel, seq) -> RnnTrace:
    """Run the recurrence over seq (T, d_in); output reads h^T only."""
    seq = _as_sequence(model, seq)
    hs = np.empty((seq.shape[0], model.hidden))
    act = _ACT_CODE[model.output_activation]
    o = K.rnn_forward_kernel(model.w_ih, model.w_hh, model.w_ho,
                             model.lam, act, seq, hs)
    return RnnTrace(inputs=seq, hidden_states=hs, output=float(o))


def rnn_bptt(model: RnnModel, seq, target: float):
    """Exact gradients of (output - target)^2 via BPTT.

    Returns (grad_ih, grad_hh, grad_ho).  grad_ih sums contributions over
    t = 1..T; grad_hh over t = 2..T (step 1 has no feedback input).
    """
    seq = _as_sequence(model, seq)
    gih = np.empty_like(model.w_ih)
    ghh = np.empty_like(model.w_hh)
    gho = np.empty_like(model.w_ho)
    hs = np.empty((seq.shape[0], model.hidden))
    delta = np.empty(model.hidden)
    delta_prev = np.empty(model.hidden)
    act = _ACT_CODE[model.output_activation]
    K.rnn_bptt_kernel(model.w_ih, model.w_hh, model.w_ho, model.lam, act,
                      seq, float(target), gih, ghh, gho, hs, delta, delta_prev)
    return gih, ghh, gho


def _flatten_clips(clips):
    """Pack [(seq, target), ...] into one (sum T, d) array plus index arrays."""
    if len(clips) == 0:
        raise ValueError("training dataset is empty")
    seqs = []
    targets = []
    for seq, target in clips:
        seq = np.ascontiguousarray(seq, dtype=np.float64)
        if seq.ndim != 2 or seq.shape[0] < 1:
            raise ValueError("every clip must be a nonempty (T, d_in) array")
        seqs.append(seq)
        targets.append(float(target))
    d = seqs[0].shape[1]
    if any(s.shape[1] != d for s in seqs):
        raise ValueError("clips must share one feature dimension")
    lengths = np.asarray([s.shape[0] for s in seqs], dtype=np.int64)
    offsets = np.zeros(len(seqs), dtype=np.int64)
    offsets[1:] = np.cumsum(lengths)[:-1]
    flat = np.ascontiguousarray(np.concatenate(seqs, axis=0))
    return flat, offsets, lengths, np.asarray(targets)


def rnn_train(clips, cfg: TrainConfig, history: list | None = None) -> RnnModel:
    """Train on [(sequence, target), ...] with per-clip BPTT updates."""
    flat, offsets, lengths, targets = _flatten_clips(clips)
    rng = Rng(cfg.seed)
    model = rnn_init(flat.shape[1], cfg.hidden, rng, cfg.lam,
                     cfg.output_activation, cfg.init_range)
    act = _ACT_CODE[model.output_activation]
    gih = np.empty_like(model.w_ih)
    ghh = np.empty_like(model.w_hh)
    gho = np.empty_like(model.w_ho)
    hs = np.empty((int(lengths.max()), model.hidden))
    delta = np.empty(model.hidden)
    delta_prev = np.empty(model.hidden)
    cap = cfg.grad_clip if cfg.grad_clip is not None else 0.0
    order = list(range(len(clips)))
    for epoch in range(cfg.epochs):
        if cfg.shuffle_each_epoch:
            rng.shuffle(order)
        order_arr = np.asarray(order, dtype=np.int64)
        K.rnn_epoch_kernel(model.w_ih, model.w_hh, model.w_ho, model.lam, act,
                           flat, offsets, lengths, targets, order_arr,
                           cfg.eta, cap, gih, ghh, gho, hs, delta, delta_prev)
        if not all(np.isfinite(w).all() for _, w in model.weights()):
            raise TrainingDivergedError(
                f"non-finite weights after epoch {epoch + 1}; "
                f"eta={cfg.eta} is likely too large for this data"
            )
        if history is not None:
            history.append(float(K.rnn_mean_loss_kernel(
                model.w_ih, model.w_hh, model.w_ho, model.lam, act,
                flat, offsets, lengths, targets, hs)))
    return model


def rnn_dataset_loss(model: RnnModel, clips) -> float:
    """Mean squared loss of `model` over [(sequence, target), ...]."""
    flat, offsets, lengths, targets = _flatten_clips(clips)
    if flat.shape[1] != model.d_in:
        raise ValueError("feature dimension does not match the model")
    hs = np.empty((int(lengths.max()), model.hidden))
    act = _ACT_CODE[model.output_activation]
    return float(K.rnn_mean_loss_kernel(model.w_ih, model.w_hh, model.w_ho,
                                        model.lam, act, flat, offsets, lengths,
                                        targets, hs))
