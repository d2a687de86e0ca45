"""Feed-forward network with one sigmoid hidden layer and a scalar output.

Training is plain per-sample steepest descent on the squared error
(o - target)^2: for every pair the exact gradient is computed and the
weights move by -eta * grad.  No momentum, no mini-batches, no
regularisation.  The same network doubles as the k-FFNN: the knowledge
infusion happens entirely in the training targets, not in the
architecture.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .errors import TrainingDivergedError
from .linalg import Rng

ACTIVATIONS = ("linear", "sigmoid")

_ACT_CODE = {"linear": K.ACT_LINEAR, "sigmoid": K.ACT_SIGMOID}


def _check_activation(name: str) -> int:
    if name not in _ACT_CODE:
        raise ValueError(f"unknown output activation {name!r}, expected one of {ACTIVATIONS}")
    return _ACT_CODE[name]


@dataclass
class FfnnModel:
    """Weights of a d_in -> hidden -> 1 network.

    w_ih is (d_in, hidden), w_ho is (hidden, 1); `lam` is the sigmoid
    steepness shared by the hidden layer and (when used) the output unit.
    """

    w_ih: np.ndarray
    w_ho: np.ndarray
    lam: float = 1.0
    output_activation: str = "linear"

    def __post_init__(self):
        self.w_ih = np.ascontiguousarray(self.w_ih, dtype=np.float64)
        self.w_ho = np.ascontiguousarray(self.w_ho, dtype=np.float64)
        if self.w_ih.ndim != 2 or self.w_ho.ndim != 2 or self.w_ho.shape[1] != 1:
            raise ValueError("FfnnModel: w_ih must be (d_in, hidden), w_ho (hidden, 1)")
        if self.w_ih.shape[1] != self.w_ho.shape[0]:
            raise ValueError(
                f"FfnnModel: hidden size mismatch {self.w_ih.shape} vs {self.w_ho.shape}"
            )
        if self.lam <= 0.0:
            raise ValueError("FfnnModel: lam must be positive")
        _check_activation(self.output_activation)

    @property
    def d_in(self) -> int:
        return self.w_ih.shape[0]

    @property
    def hidden(self) -> int:
        return self.w_ih.shape[1]

    def weights(self):
        """Named weight arrays, in serialisation order."""
        return [("w_ih", self.w_ih), ("w_ho", self.w_ho)]

    def copy(self) -> "FfnnModel":
        return FfnnModel(self.w_ih.copy(), self.w_ho.copy(),
                         self.lam, self.output_activation)


@dataclass
class TrainConfig:
    """Hyperparameters shared by all trainers.

    `init_range` of None means per-matrix uniform[-r, r] with r = 1/sqrt(fan_in);
    a float uses that half-width for every matrix.  `grad_clip` caps the
    max-abs entry of each per-update gradient (recurrent trainers only);
    None disables it.
    """

    eta: float = 0.01
    epochs: int = 200
    lam: float = 1.0
    seed: int = 0
    init_range: float | None = None
    shuffle_each_epoch: bool = True
    hidden: int = 21
    output_activation: str = "linear"
    grad_clip: float | None = None

    def __post_init__(self):
        if self.eta <= 0.0:
            raise ValueError("TrainConfig: eta must be positive")
        if self.epochs < 1:
            raise ValueError("TrainConfig: epochs must be >= 1")
        if self.lam <= 0.0:
            raise ValueError("TrainConfig: lam must be positive")
        if self.init_range is not None and self.init_range <= 0.0:
            raise ValueError("TrainConfig: init_range must be positive")
        if self.hidden < 1:
            raise ValueError("TrainConfig: hidden must be >= 1")
        if self.grad_clip is not None and self.grad_clip <= 0.0:
            raise ValueError("TrainConfig: grad_clip must be positive")
        _check_activation(self.output_activation)


def _init_matrix(rng: Rng, rows: int, cols: int, init_range: float | None) -> np.ndarray:
    r = init_range if init_range is not None else 1.0 / math.sqrt(rows)
    return rng.uniform_matrix(rows, cols, -r, r)


def ffnn_init(d_in: int, hidden: int, rng: Rng, lam: float = 1.0,
              output_activation: str = "linear",
              init_range: float | None = None) -> FfnnModel:
    """Fresh model with uniform[-r, r] weights, drawn w_ih first then w_ho."""
    w_ih = _init_matrix(rng, d_in, hidden, init_range)
    w_ho = _init_matrix(rng, hidden, 1, init_range)
    return FfnnModel(w_ih, w_ho, lam, output_activation)


def _as_input(model, g) -> np.ndarray:
    g = np.ascontiguousarray(g, dtype=np.float64)
    if g.ndim != 1 or g.shape[0] != model.d_in:
        raise ValueError(
            f"input has shape {g.shape}, model expects a vector of length {model.d_in}"
        )
    return g


def ffnn_forward(model: FfnnModel, g) -> tuple[np.ndarray, float]:
    """Forward pass; returns (hidden activations, scalar output)."""
    g = _as_input(model, g)
    h = np.empty(model.hidden)
    act = _ACT_CODE[model.output_activation]
    o = K.ffnn_forward_kernel(model.w_ih, model.w_ho, model.lam, act, g, h)
    return h, float(o)


def ffnn_loss(output: float, target: float) -> float:
    """Squared error (output - target)^2."""
    if not (math.isfinite(output) and math.isfinite(target)):
        raise ValueError("ffnn_loss: output and target must be finite")
    e = output - target
    return e * e


def ffnn_backward(model: FfnnModel, g, target: float) -> tuple[np.ndarray, np.ndarray]:
    """Exact gradients of ffnn_loss w.r.t. (w_ih, w_ho) for one sample."""
    g = _as_input(model, g)
    gih = np.empty_like(model.w_ih)
    gho = np.empty_like(model.w_ho)
    h = np.empty(model.hidden)
    act = _ACT_CODE[model.output_activation]
    K.ffnn_backward_kernel(model.w_ih, model.w_ho, model.lam, act, g,
                           float(target), gih, gho, h)
    return gih, gho


def _stack_pairs(pairs) -> tuple[np.ndarray, np.ndarray]:
    if len(pairs) == 0:
        raise ValueError("training dataset is empty")
    xs = np.ascontiguousarray([np.asarray(g, dtype=np.float64) for g, _ in pairs])
    if xs.ndim != 2:
        raise ValueError("training inputs must share one feature dimension")
    ys = np.asarray([float(t) for _, t in pairs])
    return xs, ys


def ffnn_train(pairs, cfg: TrainConfig, history: list | None = None) -> FfnnModel:
    """Train a fresh network on (input vector, target) pairs.

    Deterministic given cfg.seed: the seed fixes the initial weights and
    the per-epoch sample order.  If `history` is given, the mean training
    loss is appended after every epoch.
    """
    xs, ys = _stack_pairs(pairs)
    rng = Rng(cfg.seed)
    model = ffnn_init(xs.shape[1], cfg.hidden, rng, cfg.lam,
                      cfg.output_activation, cfg.init_range)
    act = _ACT_CODE[model.output_activation]
    gih = np.empty_like(model.w_ih)
    gho = np.empty_like(model.w_ho)
    h = np.empty(model.hidden)
    order = list(range(xs.shape[0]))
    for epoch in range(cfg.epochs):
        if cfg.shuffle_each_epoch:
            rng.shuffle(order)
        order_arr = np.asarray(order, dtype=np.int64)
        K.ffnn_epoch_kernel(model.w_ih, model.w_ho, model.lam, act,
                            xs, ys, order_arr, cfg.eta, gih, gho, h)
        if not (np.isfinite(model.w_ih).all() and np.isfinite(model.w_ho).all()):
            raise TrainingDivergedError(
                f"non-finite weights after epoch {epoch + 1}; "
                f"eta={cfg.eta} is likely too large for this data"
            )
        if history is not None:
            history.append(float(K.ffnn_mean_loss_kernel(
                model.w_ih, model.w_ho, model.lam, act, xs, ys, h)))
    return model


def ffnn_dataset_loss(model: FfnnModel, pairs) -> float:
    """Mean squared training loss of `model` over the pairs."""
    xs, ys = _stack_pairs(pairs)
    if xs.shape[1] != model.d_in:
        raise ValueError("feature dimension does not match the model")
    h = np.empty(model.hidden)
    act = _ACT_CODE[model.output_activation]
    return float(K.ffnn_mean_loss_kernel(model.w_ih, model.w_ho, model.lam,
                                         act, xs, ys, h))
