"""Experiment orchestration: the training-size sweep over all systems.

A sweep trains every configured system at every training-set size for
every seed, evaluates clip-level MSE/PCC on one fixed held-out test set,
and writes a results CSV (one row per system/size/seed cell) plus a
per-size aggregate of seed medians.  Output depends only on the config
contents: rows are emitted sorted by (system, size, seed) and contain no
paths or timestamps, so identical configs produce identical CSV bodies.
"""

from __future__ import annotations

import json
import statistics
import sys
from dataclasses import dataclass, field, asdict
from pathlib import Path

from .dataset import Dataset, generate_synthetic, load_jsonl, split
from .errors import TrainingDivergedError
from .ffnn import TrainConfig, ffnn_train
from .knowledge import Envelope, infuse_labels
from .lstm import blstm_train, lstm_train
from .metrics import CSV_HEADER, EvalReport, evaluate_clip_level, _fmt
from .rnn import rnn_train

# system name -> (model kind, training/reconstruction envelope)
SYSTEMS = {
    "kffnn-fn1": ("ffnn", "fn1"),
    "kffnn-fn2": ("ffnn", "fn2"),
    "kffnn-fn3": ("ffnn", "fn3"),
    "kffnn-linear": ("ffnn", "linear"),
    "ffnn": ("ffnn", "constant"),
    "rnn": ("rnn", None),
    "lstm": ("lstm", None),
    "blstm": ("blstm", None),
}

AGGREGATE_HEADER = "system,train_size,n_seeds,n_ok,median_mse,median_pcc"


@dataclass
class ExperimentConfig:
    """Sweep definition; serialisable to/from a single JSON document."""

    dataset: str | None = None          # path to a JSONL dataset
    generate: dict | None = None        # or generate_synthetic parameters
    systems: list[str] = field(default_factory=lambda: [
        "kffnn-fn1", "kffnn-fn2", "kffnn-fn3", "ffnn", "rnn", "lstm", "blstm"])
    train_sizes: list[int] = field(default_factory=lambda: [200, 500, 1000, 2000])
    seeds: list[int] = field(default_factory=lambda: list(range(1, 11)))
    eta: float = 0.01
    epochs: int = 200
    hidden: int = 21
    lam: float = 1.0
    init_range: float | None = None
    shuffle_each_epoch: bool = True
    grad_clip: float | None = None
    output_activation: str = "linear"
    test_fraction: float = 0.1
    split_seed: int = 1234
    epsilon: float = 1e-9
    output_dir: str = "results"

    def __post_init__(self):
        if not self.systems:
            raise ValueError("config needs at least one system")
        unknown = [s for s in self.systems if s not in SYSTEMS]
        if unknown:
            raise ValueError(f"unknown systems {unknown}; known: {sorted(SYSTEMS)}")
        if not self.train_sizes:
            raise ValueError("config needs at least one training size")
        if not self.seeds:
            raise ValueError("config needs at least one seed")
        if self.dataset is None and self.generate is None:
            raise ValueError("config needs either a dataset path or generate params")

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config fields {sorted(unknown)}")
        return cls(**raw)

    def to_dict(self) -> dict:
        return asdict(self)


def _load_dataset(cfg: ExperimentConfig) -> Dataset:
    if cfg.dataset is not None:
        return load_jsonl(cfg.dataset)
    params = dict(cfg.generate)
    if "envelope" in params:
        params["env"] = Envelope.from_name(params.pop("envelope"))
    if "n_min" in params or "n_max" in params:
        params["n_range"] = (params.pop("n_min", 8), params.pop("n_max", 12))
    return generate_synthetic(**params)


def _train_config(cfg: ExperimentConfig, seed: int) -> TrainConfig:
    return TrainConfig(eta=cfg.eta, epochs=cfg.epochs, lam=cfg.lam, seed=seed,
                       init_range=cfg.init_range,
                       shuffle_each_epoch=cfg.shuffle_each_epoch,
                       hidden=cfg.hidden,
                       output_activation=cfg.output_activation,
                       grad_clip=cfg.grad_clip)


def train_system(system: str, train_ds: Dataset, tc: TrainConfig):
    """Train one system on a training dataset; returns (kind, model, envelope)."""
    kind, env_name = SYSTEMS[system]
    env = Envelope.from_name(env_name) if env_name else None
    if kind == "ffnn":
        pairs = []
        for clip in train_ds.clips:
            pairs.extend(infuse_labels(clip, env))
        model = ffnn_train(pairs, tc)
    else:
        clips = [(c.feature_matrix(), c.label) for c in train_ds.clips]
        trainer = {"rnn": rnn_train, "lstm": lstm_train, "blstm": blstm_train}[kind]
        model = trainer(clips, tc)
    return kind, model, env


def run_sweep(cfg: ExperimentConfig, progress=None) -> list[EvalReport]:
    """Run all (system, size, seed) cells and write the output files.

    Training divergence in one cell is recorded as an NA row and the sweep
    continues.  `progress` is an optional callable fed one line per cell.
    """
    say = progress if progress is not None else (lambda msg: print(msg, file=sys.stderr))
    ds = _load_dataset(cfg)
    sizes = sorted(set(int(s) for s in cfg.train_sizes))
    splits = dict(zip(sizes, split(ds, sizes, cfg.test_fraction, cfg.split_seed)))
    rows: list[EvalReport] = []
    for system in sorted(cfg.systems):
        for size in sizes:
            train_ds, test_ds = splits[size]
            for seed in sorted(cfg.seeds):
                tc = _train_config(cfg, seed)
                try:
                    kind, model, env = train_system(system, train_ds, tc)
                    rep = evaluate_clip_level(kind, model, test_ds, env,
                                              cfg.epsilon, system=system,
                                              train_size=size, seed=seed)
                except TrainingDivergedError as exc:
                    say(f"[sweep] {system} size={size} seed={seed} DIVERGED: {exc}")
                    rep = EvalReport(system=system, train_size=size, seed=seed,
                                     mse=float("nan"), pcc=None,
                                     n_test=len(test_ds.clips))
                else:
                    say(f"[sweep] {system} size={size} seed={seed} "
                        f"mse={rep.mse:.4f} pcc={_fmt(rep.pcc)}")
                rows.append(rep)
    _write_outputs(cfg, rows)
    return rows


def aggregate_rows(rows: list[EvalReport]) -> list[str]:
    """Seed-median table, one line per (system, size); derived from rows only."""
    cells: dict[tuple[str, int], list[EvalReport]] = {}
    for r in rows:
        cells.setdefault((r.system, r.train_size), []).append(r)
    lines = []
    for (system, size) in sorted(cells):
        group = cells[(system, size)]
        mses = [r.mse for r in group if r.mse == r.mse]  # drop NaN (diverged)
        pccs = [r.pcc for r in group if r.pcc is not None]
        med_mse = _fmt(statistics.median(mses)) if mses else "NA"
        med_pcc = _fmt(statistics.median(pccs)) if pccs else "NA"
        lines.append(f"{system},{size},{len(group)},{len(mses)},{med_mse},{med_pcc}")
    return lines


def median_mse(rows: list[EvalReport], system: str, size: int) -> float:
    """Median over seeds of the clip-level MSE for one (system, size) cell."""
    vals = [r.mse for r in rows
            if r.system == system and r.train_size == size and r.mse == r.mse]
    if not vals:
        raise ValueError(f"no finished rows for {system} at size {size}")
    return statistics.median(vals)


def _write_outputs(cfg: ExperimentConfig, rows: list[EvalReport]) -> None:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "results.csv", "w", encoding="utf-8") as fh:
        fh.write(CSV_HEADER + "\n")
        for r in rows:
            fh.write(r.csv_row() + "\n")
    with open(out / "aggregate.csv", "w", encoding="utf-8") as fh:
        fh.write(AGGREGATE_HEADER + "\n")
        for line in aggregate_rows(rows):
            fh.write(line + "\n")
    with open(out / "config.json", "w", encoding="utf-8") as fh:
        json.dump(cfg.to_dict(), fh, sort_keys=True, indent=2)
        fh.write("\n")
