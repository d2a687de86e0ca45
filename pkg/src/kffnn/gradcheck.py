"""Finite-difference validation of every analytic gradient in the package.

Central differences (L(w + h) - L(w - h)) / 2h are compared entry by entry
against the backward passes.  A partial derivative passes when it is within
1e-5 relative OR 1e-8 absolute of the finite difference; the dual rule is
needed because relative error is meaningless near zero-gradient weights.

Also home to an independent tied-weight unrolled forward pass used to
cross-check the BPTT gradients against an explicitly unrolled network.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ffnn import FfnnModel, ffnn_backward, ffnn_forward, ffnn_loss
from .linalg import Rng
from .lstm import lstm_backward, lstm_forward, lstm_init
from .rnn import RnnModel, rnn_bptt, rnn_forward

DEFAULT_STEP = 1e-6
DEFAULT_RTOL = 1e-5
DEFAULT_ATOL = 1e-8

CHECK_KINDS = ("ffnn", "rnn", "lstm", "blstm")


@dataclass
class GradReport:
    kind: str
    trials: int
    n_partials: int
    max_rel_err: float
    max_abs_err: float
    worst_weight: tuple[str, int, int]
    passed: bool

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        name, row, col = self.worst_weight
        return (f"gradcheck {self.kind}: {status} "
                f"({self.trials} trials, {self.n_partials} partials, "
                f"max_rel={self.max_rel_err:.3e}, max_abs={self.max_abs_err:.3e}, "
                f"worst={name}[{row},{col}])")


def fd_gradient(loss_fn, params, step: float = DEFAULT_STEP) -> dict[str, np.ndarray]:
    """Central-difference gradients of loss_fn() w.r.t. named weight arrays.

    `params` is a sequence of (name, array); the arrays are perturbed in
    place and restored to their exact original values afterwards.
    """
    if step <= 0.0:
        raise ValueError("fd step must be positive")
    grads = {}
    for name, arr in params:
        g = np.empty_like(arr)
        flat = arr.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.shape[0]):
            orig = flat[i]
            flat[i] = orig + step
            lp = float(loss_fn())
            flat[i] = orig - step
            lm = float(loss_fn())
            flat[i] = orig
            if not (math.isfinite(lp) and math.isfinite(lm)):
                raise ValueError(
                    f"non-finite loss while perturbing {name}[{i}]"
                )
            gflat[i] = (lp - lm) / (2.0 * step)
        grads[name] = g
    return grads


def compare_grads(analytic: dict[str, np.ndarray], fd: dict[str, np.ndarray],
                  rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL):
    """Dual-threshold comparison over every partial.

    Returns (max_rel_err, max_abs_err, worst_weight, worst_score,
    n_partials, passed).  A partial passes when its violation score
    min(abs_err/atol, rel_err/rtol) is <= 1; the worst weight is the entry
    with the largest score.
    """
    if set(analytic) != set(fd):
        raise ValueError("gradient dictionaries disagree on weight names")
    max_rel = 0.0
    max_abs = 0.0
    worst = ("", 0, 0)
    worst_score = -1.0
    count = 0
    for name in analytic:
        a = analytic[name]
        f = fd[name]
        if a.shape != f.shape:
            raise ValueError(f"gradient shape mismatch for {name}")
        a2 = a if a.ndim == 2 else a.reshape(-1, 1)
        f2 = f if f.ndim == 2 else f.reshape(-1, 1)
        for r in range(a2.shape[0]):
            for c in range(a2.shape[1]):
                count += 1
                abs_err = abs(a2[r, c] - f2[r, c])
                scale = max(abs(a2[r, c]), abs(f2[r, c]))
                rel_err = abs_err / scale if scale > 0.0 else 0.0
                max_abs = max(max_abs, abs_err)
                max_rel = max(max_rel, rel_err)
                score = min(abs_err / atol, rel_err / rtol)
                if score > worst_score:
                    worst_score = score
                    worst = (name, r, c)
    return max_rel, max_abs, worst, worst_score, count, worst_score <= 1.0


def _random_ffnn(rng: Rng, trial: int):
    d, nh = (21, 21) if trial % 2 == 0 else (4, 2)
    act = "linear" if rng.below(2) == 0 else "sigmoid"
    lam = rng.uniform(0.5, 2.0)
    model = FfnnModel(rng.uniform_matrix(d, nh, -0.5, 0.5),
                      rng.uniform_matrix(nh, 1, -0.5, 0.5), lam, act)
    g = np.asarray([rng.uniform(-1.0, 1.0) for _ in range(d)])
    target = rng.uniform(0.0, 1.0)
    loss = lambda: ffnn_loss(ffnn_forward(model, g)[1], target)
    grads = lambda: dict(zip(("w_ih", "w_ho"), ffnn_backward(model, g, target)))
    return model, loss, grads


def _random_rnn(rng: Rng, trial: int, t_max: int = 12):
    d, nh = (21, 21) if trial % 2 == 0 else (4, 2)
    act = "linear" if rng.below(2) == 0 else "sigmoid"
    lam = rng.uniform(0.5, 2.0)
    model = RnnModel(rng.uniform_matrix(d, nh, -0.5, 0.5),
                     rng.uniform_matrix(nh, nh, -0.5, 0.5),
                     rng.uniform_matrix(nh, 1, -0.5, 0.5), lam, act)
    t_len = 1 + rng.below(t_max)
    seq = rng.uniform_matrix(t_len, d, -1.0, 1.0)
    target = rng.uniform(0.0, 1.0)
    loss = lambda: ffnn_loss(rnn_forward(model, seq).output, target)
    grads = lambda: dict(zip(("w_ih", "w_hh", "w_ho"),
                             rnn_bptt(model, seq, target)))
    return model, loss, grads


def _random_lstm(rng: Rng, trial: int, bidirectional: bool):
    d, nh = 5, 4
    act = "linear" if rng.below(2) == 0 else "sigmoid"
    model = lstm_init(d, nh, rng, bidirectional, act, init_range=0.5)
    t_len = 1 + rng.below(6)
    seq = rng.uniform_matrix(t_len, d, -1.0, 1.0)
    target = rng.uniform(0.0, 1.0)
    loss = lambda: ffnn_loss(lstm_forward(model, seq).output, target)
    grads = lambda: lstm_backward(model, seq, target)
    return model, loss, grads


def check(kind: str, trials: int = 100, seed: int = 1,
          step: float = DEFAULT_STEP, rtol: float = DEFAULT_RTOL,
          atol: float = DEFAULT_ATOL) -> GradReport:
    """Compare analytic and finite-difference gradients on random instances.

    Failures are reported in the GradReport, not raised.
    """
    if kind not in CHECK_KINDS:
        raise ValueError(f"unknown model kind {kind!r}, expected one of {CHECK_KINDS}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = Rng(seed)
    max_rel = 0.0
    max_abs = 0.0
    worst = ("", 0, 0)
    worst_margin = -1.0
    total = 0
    passed = True
    for trial in range(trials):
        if kind == "ffnn":
            model, loss, grads = _random_ffnn(rng, trial)
        elif kind == "rnn":
            model, loss, grads = _random_rnn(rng, trial)
        else:
            model, loss, grads = _random_lstm(rng, trial, kind == "blstm")
        analytic = grads()
        fd = fd_gradient(loss, model.weights(), step)
        rel, ab, w, score, n, ok = compare_grads(analytic, fd, rtol, atol)
        total += n
        if rel > max_rel:
            max_rel = rel
        if ab > max_abs:
            max_abs = ab
        if score > worst_margin:
            worst_margin = score
            worst = w
        passed = passed and ok
    return GradReport(kind=kind, trials=trials, n_partials=total,
                      max_rel_err=max_rel, max_abs_err=max_abs,
                      worst_weight=worst, passed=passed)


def unrolled_rnn_loss(w_ih, w_hh, w_ho, seq, target: float,
                      lam: float = 1.0, activation: str = "linear") -> float:
    """Squared-error loss of the recurrence written as an explicitly
    unrolled feed-forward network with tied weights.

    Layer t consumes the concatenation [g_t, h_{t-1}] through the stacked
    weight block [w_ih; w_hh].  Implemented independently of the recurrent
    kernels so it can serve as an oracle for them.
    """
    w_ih = np.asarray(w_ih, dtype=np.float64)
    w_hh = np.asarray(w_hh, dtype=np.float64)
    w_ho = np.asarray(w_ho, dtype=np.float64)
    stacked = np.vstack([w_ih, w_hh])
    h = np.zeros(w_hh.shape[0])
    for x in np.asarray(seq, dtype=np.float64):
        z = np.concatenate([x, h]) @ stacked
        h = 1.0 / (1.0 + np.exp(-lam * z))
    z_out = float(h @ w_ho[:, 0])
    if activation == "sigmoid":
        o = 1.0 / (1.0 + math.exp(-lam * z_out)) if z_out >= 0 else \
            math.exp(lam * z_out) / (1.0 + math.exp(lam * z_out))
    else:
        o = z_out
    e = o - float(target)
    return e * e
