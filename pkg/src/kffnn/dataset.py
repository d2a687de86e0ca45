"""Synthetic fade-envelope clips, train/test splitting, and JSONL storage.

Each clip is an 8-12 segment sequence of d-dimensional feature vectors with
one scalar label in [0, 5].  The generator builds clips whose per-segment
evidence follows a chosen envelope: segment i of a clip with latent label v
gets features f(i) * v * u + noise, where u is a clip-specific random unit
direction drawn near the positive diagonal: u = normalise(1 + |z_1..d|)
with z standard normals.  Positive, diagonally concentrated directions
model energy-like acoustic features whose magnitudes scale consistently
with the label; a matched envelope therefore constitutes genuinely correct
temporal knowledge about the data, and a mismatched one is genuinely wrong
knowledge.

Draw order per clip (one shared RNG, documented for reproducibility):
label, segment count n, the d normals of the direction u, then n * d noise
normals in segment-major order.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import DatasetFormatError
from .knowledge import Envelope, envelope_values
from .linalg import Rng

LABEL_MODES = ("uniform", "skewed")


@dataclass
class Segment:
    """One 1-second slice: `index` is the 1-based position within its clip."""

    index: int
    features: np.ndarray


@dataclass
class Clip:
    id: str
    label: float
    segments: list[Segment]

    @property
    def n(self) -> int:
        return len(self.segments)

    def feature_matrix(self) -> np.ndarray:
        """Segments stacked as an (n, d) array in temporal order."""
        return np.ascontiguousarray([s.features for s in self.segments])


@dataclass
class Dataset:
    clips: list[Clip]
    feature_dim: int
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.clips)

    def labels(self) -> np.ndarray:
        return np.asarray([c.label for c in self.clips])


def _draw_label(rng: Rng, mode: str) -> float:
    if mode == "uniform":
        return rng.uniform(0.0, 5.0)
    # skewed: mass concentrated near 1.5, like the arousal annotations
    z = rng.normal(1.5, 0.75)
    return min(max(z, 0.0), 5.0)


def generate_synthetic(count: int, n_range: tuple[int, int] = (8, 12),
                       d: int = 21, env: Envelope | None = None,
                       noise_sigma: float = 0.1, seed: int = 0,
                       label_mode: str = "uniform") -> Dataset:
    """Deterministic synthetic dataset of `count` labelled clips.

    `env` is the generating envelope (recorded in meta as the a priori
    knowledge the data actually obeys); defaults to fn1.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if d < 1:
        raise ValueError(f"feature dimension must be >= 1, got {d}")
    if noise_sigma < 0.0:
        raise ValueError(f"noise_sigma must be >= 0, got {noise_sigma}")
    n_lo, n_hi = int(n_range[0]), int(n_range[1])
    if not 1 <= n_lo <= n_hi:
        raise ValueError(f"bad n_range {n_range}")
    if label_mode not in LABEL_MODES:
        raise ValueError(f"unknown label_mode {label_mode!r}")
    if env is None:
        env = Envelope("fn1")

    rng = Rng(seed)
    clips = []
    for ci in range(count):
        label = _draw_label(rng, label_mode)
        n = n_lo + rng.below(n_hi - n_lo + 1)
        fs = envelope_values(env, n)
        direction = np.asarray([1.0 + abs(rng.normal()) for _ in range(d)])
        direction /= math.sqrt(float(direction @ direction))
        segments = []
        for i in range(1, n + 1):
            base = fs[i - 1] * label * direction
            if noise_sigma > 0.0:
                noise = np.asarray([rng.normal(0.0, noise_sigma) for _ in range(d)])
                feats = base + noise
            else:
                feats = base.copy()
            segments.append(Segment(index=i, features=feats))
        clips.append(Clip(id=f"c{ci:05d}", label=label, segments=segments))
    meta = {
        "count": count,
        "d": d,
        "envelope": env.kind,
        "label_mode": label_mode,
        "n_range": [n_lo, n_hi],
        "noise_sigma": noise_sigma,
        "seed": seed,
    }
    return Dataset(clips=clips, feature_dim=d, meta=meta)


def split(ds: Dataset, train_sizes, test_fraction: float = 0.1,
          seed: int = 0) -> list[tuple[Dataset, Dataset]]:
    """One fixed held-out test set plus nested training subsets.

    The clip order is shuffled once with the given seed; the first
    round(test_fraction * total) clips become the test set and each
    training set takes the first `size` clips of the remaining pool, so
    smaller training sets are subsets of larger ones.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    sizes = [int(s) for s in train_sizes]
    if not sizes or any(s < 1 for s in sizes):
        raise ValueError("train_sizes must be nonempty positive counts")
    total = len(ds.clips)
    n_test = int(round(test_fraction * total))
    n_test = max(1, n_test)
    if max(sizes) + n_test > total:
        raise ValueError(
            f"largest train size {max(sizes)} plus test count {n_test} "
            f"exceeds the {total} available clips"
        )
    order = list(range(total))
    Rng(seed).shuffle(order)
    test_clips = [ds.clips[i] for i in order[:n_test]]
    pool = [ds.clips[i] for i in order[n_test:]]
    test_ds = Dataset(clips=test_clips, feature_dim=ds.feature_dim,
                      meta=dict(ds.meta))
    out = []
    for size in sizes:
        train_ds = Dataset(clips=pool[:size], feature_dim=ds.feature_dim,
                           meta=dict(ds.meta))
        out.append((train_ds, test_ds))
    return out


def _meta_path(path) -> str:
    return str(path) + ".meta.json"


def save_jsonl(ds: Dataset, path) -> None:
    """One clip per line: {"id", "label", "segments": [[d floats], ...]}.

    Floats use shortest round-trip decimal encoding, so reloading is
    lossless.  When the dataset carries meta, a sidecar <path>.meta.json
    records the generation parameters.
    """
    with open(path, "w", encoding="utf-8") as fh:
        for clip in ds.clips:
            rec = {
                "id": clip.id,
                "label": float(clip.label),
                "segments": [[float(x) for x in seg.features]
                             for seg in clip.segments],
            }
            fh.write(json.dumps(rec, separators=(",", ":")) + "\n")
    if ds.meta:
        with open(_meta_path(path), "w", encoding="utf-8") as fh:
            json.dump(ds.meta, fh, sort_keys=True, indent=2)
            fh.write("\n")


def load_jsonl(path) -> Dataset:
    """Inverse of save_jsonl; parse errors name the offending line."""
    clips = []
    feature_dim = None
    seen_ids = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetFormatError(f"{path}:{lineno}: invalid JSON ({exc.msg})")
            try:
                cid = rec["id"]
                label = float(rec["label"])
                seg_rows = rec["segments"]
            except (KeyError, TypeError, ValueError) as exc:
                raise DatasetFormatError(
                    f"{path}:{lineno}: expected id/label/segments ({exc})"
                )
            if not math.isfinite(label):
                raise DatasetFormatError(f"{path}:{lineno}: non-finite label")
            if not isinstance(seg_rows, list) or not seg_rows:
                raise DatasetFormatError(f"{path}:{lineno}: clip has no segments")
            if cid in seen_ids:
                raise DatasetFormatError(f"{path}:{lineno}: duplicate clip id {cid!r}")
            seen_ids.add(cid)
            segments = []
            for i, row in enumerate(seg_rows, start=1):
                feats = np.asarray(row, dtype=np.float64)
                if feats.ndim != 1 or feats.shape[0] < 1:
                    raise DatasetFormatError(
                        f"{path}:{lineno}: segment {i} is not a flat feature list"
                    )
                if feature_dim is None:
                    feature_dim = feats.shape[0]
                elif feats.shape[0] != feature_dim:
                    raise DatasetFormatError(
                        f"{path}:{lineno}: segment {i} has {feats.shape[0]} features, "
                        f"expected {feature_dim}"
                    )
                if not np.isfinite(feats).all():
                    raise DatasetFormatError(
                        f"{path}:{lineno}: segment {i} has non-finite features"
                    )
                segments.append(Segment(index=i, features=feats))
            clips.append(Clip(id=str(cid), label=label, segments=segments))
    if not clips:
        raise DatasetFormatError(f"{path}: no clips found")
    meta = {}
    if os.path.exists(_meta_path(path)):
        with open(_meta_path(path), "r", encoding="utf-8") as fh:
            meta = json.load(fh)
    return Dataset(clips=clips, feature_dim=feature_dim, meta=meta)
