"""Clip-level evaluation: mean squared error and Pearson correlation.

Every system is scored on one prediction per clip.  Recurrent models emit
that prediction directly from the sequence; k-FFNN systems emit one value
per segment and the clip value is recovered by inverse-envelope
reconstruction.  A Pearson coefficient over a zero-variance argument is
reported as None (undefined) rather than NaN.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .ffnn import ffnn_forward
from .knowledge import Envelope, reconstruct_clip
from .lstm import lstm_forward
from .rnn import rnn_forward

MODEL_KINDS = ("ffnn", "rnn", "lstm", "blstm")

CSV_HEADER = "system,train_size,seed,mse,pcc,n_test"


def _fmt(x) -> str:
    if x is None:
        return "NA"
    x = float(x)
    if math.isnan(x):
        return "NA"
    return repr(x)


@dataclass
class EvalReport:
    """One evaluation cell; serialises to a fixed-format CSV row."""

    system: str
    train_size: int
    seed: int
    mse: float
    pcc: float | None
    n_test: int

    def csv_row(self) -> str:
        return (f"{self.system},{self.train_size},{self.seed},"
                f"{_fmt(self.mse)},{_fmt(self.pcc)},{self.n_test}")


def mse(pred, truth) -> float:
    """Mean squared error; lower is better."""
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(truth, dtype=np.float64)
    if p.shape != t.shape or p.ndim != 1:
        raise ValueError(f"mse: shape mismatch {p.shape} vs {t.shape}")
    if p.shape[0] == 0:
        raise ValueError("mse: empty inputs")
    return float(np.mean((p - t) ** 2))


def pcc(pred, truth) -> float | None:
    """Sample Pearson correlation; None when either side has zero variance."""
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(truth, dtype=np.float64)
    if p.shape != t.shape or p.ndim != 1:
        raise ValueError(f"pcc: shape mismatch {p.shape} vs {t.shape}")
    if p.shape[0] < 2:
        raise ValueError("pcc: need at least two points")
    dp = p - p.mean()
    dt = t - t.mean()
    denom = math.sqrt(float(dp @ dp)) * math.sqrt(float(dt @ dt))
    if denom == 0.0:
        return None
    return float(dp @ dt) / denom


def predict_clip(kind: str, model, clip, env: Envelope | None = None,
                 epsilon: float = 1e-9) -> float:
    """One clip-level prediction from a trained model."""
    if kind == "ffnn":
        if env is None:
            raise ValueError(
                "clip-level evaluation of an ffnn needs the envelope used in training"
            )
        outs = [ffnn_forward(model, seg.features)[1] for seg in clip.segments]
        return reconstruct_clip(outs, env, epsilon)
    if kind == "rnn":
        return rnn_forward(model, clip.feature_matrix()).output
    if kind in ("lstm", "blstm"):
        return lstm_forward(model, clip.feature_matrix()).output
    raise ValueError(f"unknown model kind {kind!r}, expected one of {MODEL_KINDS}")


def predict_clips(kind: str, model, ds: Dataset, env: Envelope | None = None,
                  epsilon: float = 1e-9) -> np.ndarray:
    """Predictions for every clip, in dataset order."""
    return np.asarray([predict_clip(kind, model, c, env, epsilon)
                       for c in ds.clips])


def evaluate_clip_level(kind: str, model, test: Dataset,
                        env: Envelope | None = None, epsilon: float = 1e-9,
                        system: str | None = None, train_size: int = 0,
                        seed: int = 0) -> EvalReport:
    """Score a model on a test set; returns mse/pcc over all clips."""
    if len(test.clips) == 0:
        raise ValueError("test set is empty")
    preds = predict_clips(kind, model, test, env, epsilon)
    truth = test.labels()
    return EvalReport(
        system=system if system is not None else kind,
        train_size=train_size,
        seed=seed,
        mse=mse(preds, truth),
        pcc=pcc(preds, truth) if len(preds) >= 2 else None,
        n_test=len(preds),
    )
