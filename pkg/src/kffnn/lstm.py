"""LSTM and bidirectional-LSTM baselines, conventional single-layer form.

One cell per direction (input/forget/output/candidate gates, sigmoid gates,
tanh candidate and cell output), a scalar projection on top, and the same
end-of-sequence output semantics as the simple RNN: the error arrives only
at the final step.  The bidirectional variant runs a second cell over the
reversed sequence and feeds the concatenation [h_fw at t=T, h_bw at t=1]
to the projection.  Gate biases start at zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .errors import TrainingDivergedError
from .ffnn import TrainConfig, _check_activation, _init_matrix
from .linalg import Rng

_GATE_ORDER = ("i", "f", "o", "c")


@dataclass
class LstmCell:
    """Gate weights: w_x* (d_in, hidden), w_h* (hidden, hidden), b_* (hidden,)."""

    w_xi: np.ndarray
    w_hi: np.ndarray
    b_i: np.ndarray
    w_xf: np.ndarray
    w_hf: np.ndarray
    b_f: np.ndarray
    w_xo: np.ndarray
    w_ho: np.ndarray
    b_o: np.ndarray
    w_xc: np.ndarray
    w_hc: np.ndarray
    b_c: np.ndarray

    def __post_init__(self):
        for name, arr in self.weights():
            setattr(self, name, np.ascontiguousarray(arr, dtype=np.float64))
        d, nh = self.w_xi.shape
        for g in _GATE_ORDER:
            if (getattr(self, f"w_x{g}").shape != (d, nh)
                    or getattr(self, f"w_h{g}").shape != (nh, nh)
                    or getattr(self, f"b_{g}").shape != (nh,)):
                raise ValueError("LstmCell: inconsistent gate shapes")

    @property
    def d_in(self) -> int:
        return self.w_xi.shape[0]

    @property
    def hidden(self) -> int:
        return self.w_xi.shape[1]

    def weights(self):
        out = []
        for g in _GATE_ORDER:
            out.append((f"w_x{g}", getattr(self, f"w_x{g}")))
            out.append((f"w_h{g}", getattr(self, f"w_h{g}")))
            out.append((f"b_{g}", getattr(self, f"b_{g}")))
        return out

    def copy(self) -> "LstmCell":
        return LstmCell(*[arr.copy() for _, arr in self.weights()])


@dataclass
class LstmModel:
    """Forward cell, optional backward cell, and the output projection.

    w_out is (hidden, 1) for a forward-only model and (2 * hidden, 1) for a
    bidirectional one.
    """

    cell_fw: LstmCell
    cell_bw: LstmCell | None
    w_out: np.ndarray
    output_activation: str = "linear"

    def __post_init__(self):
        self.w_out = np.ascontiguousarray(self.w_out, dtype=np.float64)
        nh = self.cell_fw.hidden
        expected = 2 * nh if self.cell_bw is not None else nh
        if self.w_out.shape != (expected, 1):
            raise ValueError(
                f"LstmModel: w_out must be ({expected}, 1), got {self.w_out.shape}"
            )
        if self.cell_bw is not None and (
                self.cell_bw.d_in != self.cell_fw.d_in
                or self.cell_bw.hidden != nh):
            raise ValueError("LstmModel: direction cells disagree on shapes")
        _check_activation(self.output_activation)

    @property
    def bidirectional(self) -> bool:
        return self.cell_bw is not None

    @property
    def d_in(self) -> int:
        return self.cell_fw.d_in

    @property
    def hidden(self) -> int:
        return self.cell_fw.hidden

    def weights(self):
        out = [(f"fw.{n}", a) for n, a in self.cell_fw.weights()]
        if self.cell_bw is not None:
            out += [(f"bw.{n}", a) for n, a in self.cell_bw.weights()]
        out.append(("w_out", self.w_out))
        return out

    def copy(self) -> "LstmModel":
        return LstmModel(self.cell_fw.copy(),
                         self.cell_bw.copy() if self.cell_bw else None,
                         self.w_out.copy(), self.output_activation)


@dataclass
class LstmTrace:
    """hidden_fw/hidden_bw are (T, hidden); hidden_bw follows the backward
    cell's own processing order (its last row summarises original t = 1)."""

    inputs: np.ndarray
    hidden_fw: np.ndarray
    hidden_bw: np.ndarray | None
    output: float


def _init_cell(d_in: int, hidden: int, rng: Rng, init_range: float | None) -> LstmCell:
    arrs = []
    for _ in _GATE_ORDER:
        arrs.append(_init_matrix(rng, d_in, hidden, init_range))
        arrs.append(_init_matrix(rng, hidden, hidden, init_range))
        arrs.append(np.zeros(hidden))
    # constructor order is per-gate triplets (w_x, w_h, b) for i, f, o, c
    return LstmCell(*arrs)


def lstm_init(d_in: int, hidden: int, rng: Rng, bidirectional: bool = False,
              output_activation: str = "linear",
              init_range: float | None = None) -> LstmModel:
    cell_fw = _init_cell(d_in, hidden, rng, init_range)
    cell_bw = _init_cell(d_in, hidden, rng, init_range) if bidirectional else None
    w_out = _init_matrix(rng, 2 * hidden if bidirectional else hidden, 1, init_range)
    return LstmModel(cell_fw, cell_bw, w_out, output_activation)


def _as_sequence(model, seq) -> np.ndarray:
    seq = np.ascontiguousarray(seq, dtype=np.float64)
    if seq.ndim != 2 or seq.shape[0] < 1:
        raise ValueError("sequence must be a nonempty (T, d_in) array")
    if seq.shape[1] != model.d_in:
        raise ValueError(
            f"sequence features have dim {seq.shape[1]}, model expects {model.d_in}"
        )
    return seq


def _cell_caches(t_len: int, nh: int):
    return tuple(np.empty((t_len, nh)) for _ in range(6))  # ig, fg, og, gg, cs, hs


def _run_cell(cell: LstmCell, seq: np.ndarray):
    ig, fg, og, gg, cs, hs = _cell_caches(seq.shape[0], cell.hidden)
    K.lstm_cell_forward_kernel(cell.w_xi, cell.w_hi, cell.b_i,
                               cell.w_xf, cell.w_hf, cell.b_f,
                               cell.w_xo, cell.w_ho, cell.b_o,
                               cell.w_xc, cell.w_hc, cell.b_c,
                               seq, ig, fg, og, gg, cs, hs)
    return ig, fg, og, gg, cs, hs


def _forward_state(model: LstmModel, seq: np.ndarray):
    caches_fw = _run_cell(model.cell_fw, seq)
    caches_bw = None
    seq_rev = None
    if model.bidirectional:
        seq_rev = np.ascontiguousarray(seq[::-1])
        caches_bw = _run_cell(model.cell_bw, seq_rev)
        summary = np.concatenate([caches_fw[5][-1], caches_bw[5][-1]])
    else:
        summary = caches_fw[5][-1]
    z = float(summary @ model.w_out[:, 0])
    if model.output_activation == "sigmoid":
        o = float(K._sig(z))
    else:
        o = z
    return caches_fw, caches_bw, seq_rev, summary, o


def lstm_forward(model: LstmModel, seq) -> LstmTrace:
    seq = _as_sequence(model, seq)
    caches_fw, caches_bw, _, _, o = _forward_state(model, seq)
    return LstmTrace(inputs=seq, hidden_fw=caches_fw[5],
                     hidden_bw=caches_bw[5] if caches_bw else None,
                     output=o)


def _cell_backward(cell: LstmCell, seq: np.ndarray, caches, dh_last: np.ndarray):
    ig, fg, og, gg, cs, hs = caches
    nh = cell.hidden
    grads = [np.empty_like(arr) for _, arr in cell.weights()]
    bufs = [np.empty(nh) for _ in range(6)]  # dh, dc, dai, daf, dao, dac
    (g_xi, g_hi, g_bi, g_xf, g_hf, g_bf,
     g_xo, g_ho, g_bo, g_xc, g_hc, g_bc) = grads
    K.lstm_cell_backward_kernel(cell.w_hi, cell.w_hf, cell.w_ho, cell.w_hc,
                                seq, ig, fg, og, gg, cs, hs, dh_last,
                                g_xi, g_hi, g_bi, g_xf, g_hf, g_bf,
                                g_xo, g_ho, g_bo, g_xc, g_hc, g_bc,
                                *bufs)
    return grads


def lstm_backward(model: LstmModel, seq, target: float) -> dict[str, np.ndarray]:
    """Exact gradients of (output - target)^2, keyed like model.weights()."""
    seq = _as_sequence(model, seq)
    caches_fw, caches_bw, seq_rev, summary, o = _forward_state(model, seq)
    dout = 2.0 * (o - float(target))
    if model.output_activation == "sigmoid":
        dout *= o * (1.0 - o)
    nh = model.hidden
    grads: dict[str, np.ndarray] = {}
    grads["w_out"] = (dout * summary).reshape(-1, 1)
    dh_fw = dout * model.w_out[:nh, 0]
    for (name, _), g in zip(model.cell_fw.weights(),
                            _cell_backward(model.cell_fw, seq, caches_fw, dh_fw)):
        grads[f"fw.{name}"] = g
    if model.bidirectional:
        dh_bw = dout * model.w_out[nh:, 0]
        for (name, _), g in zip(model.cell_bw.weights(),
                                _cell_backward(model.cell_bw, seq_rev,
                                               caches_bw, dh_bw)):
            grads[f"bw.{name}"] = g
    return grads


def _train(clips, cfg: TrainConfig, bidirectional: bool,
           history: list | None) -> LstmModel:
    if len(clips) == 0:
        raise ValueError("training dataset is empty")
    seqs = [np.ascontiguousarray(s, dtype=np.float64) for s, _ in clips]
    targets = [float(t) for _, t in clips]
    if any(s.ndim != 2 or s.shape[0] < 1 for s in seqs):
        raise ValueError("every clip must be a nonempty (T, d_in) array")
    d = seqs[0].shape[1]
    if any(s.shape[1] != d for s in seqs):
        raise ValueError("clips must share one feature dimension")
    rng = Rng(cfg.seed)
    model = lstm_init(d, cfg.hidden, rng, bidirectional,
                      cfg.output_activation, cfg.init_range)
    order = list(range(len(clips)))
    for epoch in range(cfg.epochs):
        if cfg.shuffle_each_epoch:
            rng.shuffle(order)
        for ci in order:
            grads = lstm_backward(model, seqs[ci], targets[ci])
            scale = cfg.eta
            if cfg.grad_clip is not None:
                m = max(float(np.max(np.abs(g))) for g in grads.values())
                if m > cfg.grad_clip:
                    scale = cfg.eta * cfg.grad_clip / m
            for name, arr in model.weights():
                arr -= scale * grads[name]
        if not all(np.isfinite(arr).all() for _, arr in model.weights()):
            raise TrainingDivergedError(
                f"non-finite weights after epoch {epoch + 1}; "
                f"eta={cfg.eta} is likely too large for this data"
            )
        if history is not None:
            total = 0.0
            for seq, target in zip(seqs, targets):
                e = lstm_forward(model, seq).output - target
                total += e * e
            history.append(total / len(seqs))
    return model


def lstm_train(clips, cfg: TrainConfig, history: list | None = None) -> LstmModel:
    """Train a forward-only LSTM on [(sequence, target), ...]."""
    return _train(clips, cfg, bidirectional=False, history=history)


def blstm_forward(model: LstmModel, seq) -> LstmTrace:
    if not model.bidirectional:
        raise ValueError("blstm_forward needs a bidirectional model")
    return lstm_forward(model, seq)


def blstm_train(clips, cfg: TrainConfig, history: list | None = None) -> LstmModel:
    """Train a bidirectional LSTM on [(sequence, target), ...]."""
    return _train(clips, cfg, bidirectional=True, history=history)
