"""Temporal-knowledge envelopes, label infusion, and clip reconstruction.

A clip carries one scalar label v for its whole n-segment duration.  The
envelope f(1..n) encodes how strongly each segment is believed to express
that label (fade-in at the start, fade-out at the end), and the k-FFNN
training data assigns segment i the scaled target f(i) * v.  At prediction
time the per-segment outputs are mapped back through 1/f(i) and averaged
to recover a single clip-level value.

Built-in envelope families (values at the first/last two positions, 1.0
in the interior; they need n >= 4):

    fn1: 0.75, 0.9, 1, ..., 1, 0.9, 0.75
    fn2: 0.3,  0.6, 1, ..., 1, 0.6, 0.3
    fn3: 0.1,  0.2, 1, ..., 1, 0.2, 0.1

`constant` is all ones (plain FFNN targets) and `linear` is the ramp
f(i) = (i - 1) / (n - 1), which is 0 at the first segment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ENVELOPE_KINDS = ("constant", "fn1", "fn2", "fn3", "linear", "custom")

_EDGE_SHAPES = {
    "fn1": (0.75, 0.9),
    "fn2": (0.3, 0.6),
    "fn3": (0.1, 0.2),
}


@dataclass(frozen=True)
class Envelope:
    """A scale function over segment positions 1..n.

    For the built-in kinds `values` is None and f(i) is computed from the
    clip length; a `custom` envelope carries its explicit values and only
    applies to clips of exactly that length.
    """

    kind: str
    values: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in ENVELOPE_KINDS:
            raise ValueError(f"unknown envelope kind {self.kind!r}")
        if self.kind == "custom":
            if not self.values:
                raise ValueError("custom envelope needs explicit values")
            if any(not math.isfinite(v) for v in self.values):
                raise ValueError("custom envelope values must be finite")
        elif self.values is not None:
            raise ValueError(f"{self.kind} envelope takes no explicit values")

    @classmethod
    def from_name(cls, name: str) -> "Envelope":
        return cls(name.lower())

    @classmethod
    def custom(cls, values) -> "Envelope":
        return cls("custom", tuple(float(v) for v in values))


def envelope_eval(env: Envelope, i: int, n: int) -> float:
    """f(i) for segment position i (1-based) in a clip of n segments."""
    if n < 1:
        raise ValueError(f"envelope_eval: need n >= 1, got {n}")
    if not 1 <= i <= n:
        raise ValueError(f"envelope_eval: index {i} out of range 1..{n}")
    kind = env.kind
    if kind == "constant":
        return 1.0
    if kind == "linear":
        if n < 2:
            raise ValueError("linear envelope needs n >= 2")
        return (i - 1) / (n - 1)
    if kind == "custom":
        if len(env.values) != n:
            raise ValueError(
                f"custom envelope has {len(env.values)} values but the clip has {n} segments"
            )
        return env.values[i - 1]
    edge, inner = _EDGE_SHAPES[kind]
    if n < 4:
        raise ValueError(f"{kind} envelope needs n >= 4, got {n}")
    if i == 1 or i == n:
        return edge
    if i == 2 or i == n - 1:
        return inner
    return 1.0


def envelope_values(env: Envelope, n: int) -> list[float]:
    """The full list [f(1), ..., f(n)]."""
    return [envelope_eval(env, i, n) for i in range(1, n + 1)]


def infuse_labels(clip, env: Envelope) -> list[tuple[np.ndarray, float]]:
    """Per-segment training pairs (features, f(i) * v) in temporal order."""
    if not math.isfinite(clip.label):
        raise ValueError(f"clip {clip.id!r} has a non-finite label")
    n = len(clip.segments)
    if n < 1:
        raise ValueError(f"clip {clip.id!r} has no segments")
    fs = envelope_values(env, n)
    return [(seg.features, fs[i] * clip.label)
            for i, seg in enumerate(clip.segments)]


def reconstruct_clip(predictions, env: Envelope, epsilon: float = 1e-9,
                     mode: str = "mean") -> float:
    """Recover the clip-level value from per-segment predictions.

    Each prediction is divided by its f(i); segments with f(i) <= epsilon
    are excluded (the linear envelope has f(1) = 0).  The default combines
    the rescaled values by their mean, which inverts infuse_labels exactly;
    mode="sum" instead returns their plain sum (non-default, kept for
    literal comparison against the summed formulation).
    """
    if epsilon < 0.0:
        raise ValueError("epsilon must be >= 0")
    if mode not in ("mean", "sum"):
        raise ValueError(f"unknown reconstruction mode {mode!r}")
    preds = [float(p) for p in predictions]
    n = len(preds)
    if n < 1:
        raise ValueError("no predictions to reconstruct from")
    fs = envelope_values(env, n)
    scaled = [p / f for p, f in zip(preds, fs) if f > epsilon]
    if not scaled:
        raise ValueError(
            "degenerate envelope: every segment fell at or below epsilon"
        )
    total = sum(scaled)
    return total if mode == "sum" else total / len(scaled)


def load_envelope_file(path) -> Envelope:
    """Custom envelope from a one-line text file of whitespace-separated reals."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    tokens = text.split()
    if not tokens:
        raise ValueError(f"{path}: empty envelope file")
    try:
        values = [float(tok) for tok in tokens]
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None
    return Envelope.custom(values)
