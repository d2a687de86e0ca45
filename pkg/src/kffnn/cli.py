"""Command-line interface.

Subcommands: generate | train | predict | evaluate | sweep | gradcheck.
Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .dataset import generate_synthetic, load_jsonl, save_jsonl
from .errors import DatasetFormatError, TrainingDivergedError
from .experiment import SYSTEMS, ExperimentConfig, run_sweep
from .ffnn import TrainConfig
from .gradcheck import CHECK_KINDS, check
from .knowledge import ENVELOPE_KINDS, Envelope, load_envelope_file
from .metrics import evaluate_clip_level, predict_clip
from .modelio import _model_kind, load_model, save_model

DEFAULT_STAMP = ".gradcheck_passed"


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {value}")
    return value


def _int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _str_list(text: str) -> list[str]:
    return [tok.strip() for tok in text.split(",") if tok.strip()]


def _parse_envelope(arg: str) -> Envelope:
    if arg.startswith("custom:"):
        return load_envelope_file(arg.split(":", 1)[1])
    name = arg.lower()
    if name not in ENVELOPE_KINDS or name == "custom":
        raise ValueError(
            f"unknown envelope {arg!r}; use one of "
            f"{[k for k in ENVELOPE_KINDS if k != 'custom']} or custom:<file>"
        )
    return Envelope.from_name(name)


def _label_histogram(labels: np.ndarray, bins: int = 10) -> list[str]:
    counts, edges = np.histogram(labels, bins=bins, range=(0.0, 5.0))
    top = max(int(counts.max()), 1)
    lines = []
    for i, c in enumerate(counts):
        bar = "#" * max(1, round(40 * c / top)) if c else ""
        lines.append(f"  [{edges[i]:.2f},{edges[i + 1]:.2f}) {c:6d} {bar}")
    return lines


def cmd_generate(args) -> int:
    ds = generate_synthetic(
        count=args.count, n_range=(args.n_min, args.n_max), d=args.d,
        env=Envelope.from_name(args.envelope), noise_sigma=args.noise_sigma,
        seed=args.seed, label_mode=args.label_mode)
    save_jsonl(ds, args.out)
    print(f"wrote {len(ds)} clips (d={ds.feature_dim}, envelope={args.envelope}) "
          f"to {args.out}")
    print("label histogram over [0, 5]:")
    for line in _label_histogram(ds.labels()):
        print(line)
    return 0


def _train_config_from_args(args) -> TrainConfig:
    return TrainConfig(eta=args.eta, epochs=args.epochs, lam=args.lam,
                       seed=args.seed, init_range=args.init_range,
                       shuffle_each_epoch=not args.no_shuffle,
                       hidden=args.hidden, output_activation=args.activation,
                       grad_clip=args.grad_clip)


def cmd_train(args) -> int:
    from .experiment import train_system

    ds = load_jsonl(args.data)
    tc = _train_config_from_args(args)
    kind, model, env = train_system(args.system, ds, tc)
    save_model(model, args.out)
    envnote = f" (training envelope: {env.kind})" if env else ""
    print(f"trained {args.system} [{kind}] on {len(ds)} clips{envnote}; "
          f"model saved to {args.out}")
    return 0


def _predictions(args):
    model = load_model(args.model)
    kind = _model_kind(model)
    ds = load_jsonl(args.data)
    env = _parse_envelope(args.envelope) if args.envelope else None
    if kind == "ffnn" and env is None:
        raise _EnvelopeRequired(
            "this model predicts per segment; pass --envelope to reconstruct "
            "clip-level values"
        )
    return model, kind, ds, env


class _EnvelopeRequired(Exception):
    pass


def cmd_predict(args) -> int:
    model, kind, ds, env = _predictions(args)
    lines = ["id,truth,prediction"]
    for clip in ds.clips:
        pred = predict_clip(kind, model, clip, env, args.epsilon)
        lines.append(f"{clip.id},{clip.label!r},{pred!r}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {len(ds)} predictions to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_evaluate(args) -> int:
    model, kind, ds, env = _predictions(args)
    rep = evaluate_clip_level(kind, model, ds, env, args.epsilon)
    pcc_s = "NA" if rep.pcc is None else f"{rep.pcc:.6f}"
    print(f"system={kind} n_test={rep.n_test} mse={rep.mse:.6f} pcc={pcc_s}")
    return 0


def cmd_gradcheck(args) -> int:
    kinds = list(CHECK_KINDS) if args.kind == "all" else [args.kind]
    reports = []
    for kind in kinds:
        rep = check(kind, trials=args.trials, seed=args.seed)
        print(rep.summary())
        reports.append(rep)
    if all(r.passed for r in reports):
        with open(args.stamp, "w", encoding="utf-8") as fh:
            for r in reports:
                fh.write(f"{r.kind} trials={r.trials} passed\n")
        return 0
    return 1


def cmd_sweep(args) -> int:
    cfg = ExperimentConfig.from_json(args.config)
    if args.output_dir is not None:
        cfg.output_dir = args.output_dir
    if args.sizes is not None:
        cfg.train_sizes = args.sizes
    if args.seeds is not None:
        cfg.seeds = args.seeds
    if args.systems is not None:
        cfg.systems = args.systems
    if args.epochs is not None:
        cfg.epochs = args.epochs
    if args.eta is not None:
        cfg.eta = args.eta
    if args.hidden is not None:
        cfg.hidden = args.hidden
    cfg.__post_init__()
    if not args.force and not Path(args.stamp).exists():
        print(f"error: no gradcheck stamp at {args.stamp}; run "
              f"`kffnn gradcheck all` first or pass --force", file=sys.stderr)
        return 1
    rows = run_sweep(cfg)
    print(f"wrote {len(rows)} result rows to {Path(cfg.output_dir) / 'results.csv'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kffnn",
        description="Clip-level sequence regression: envelope-infused FFNNs "
                    "vs recurrent baselines.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic fade-envelope dataset")
    p.add_argument("--out", required=True, help="output JSONL path")
    p.add_argument("--count", type=_positive_int, default=1000)
    p.add_argument("--d", type=_positive_int, default=21,
                   help="feature dimension per segment")
    p.add_argument("--n-min", type=_positive_int, default=8)
    p.add_argument("--n-max", type=_positive_int, default=12)
    p.add_argument("--envelope", default="fn1",
                   choices=[k for k in ENVELOPE_KINDS if k != "custom"])
    p.add_argument("--noise-sigma", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--label-mode", default="uniform", choices=("uniform", "skewed"))
    p.set_defaults(func=cmd_generate)

    def add_train_flags(p):
        p.add_argument("--eta", type=float, default=0.01)
        p.add_argument("--epochs", type=_positive_int, default=200)
        p.add_argument("--hidden", type=_positive_int, default=21)
        p.add_argument("--lambda", dest="lam", type=float, default=1.0)
        p.add_argument("--seed", type=int, default=1)
        p.add_argument("--init-range", type=float, default=None)
        p.add_argument("--no-shuffle", action="store_true")
        p.add_argument("--grad-clip", type=float, default=None)
        p.add_argument("--activation", default="linear",
                       choices=("linear", "sigmoid"))

    p = sub.add_parser("train", help="train one system on a dataset file")
    p.add_argument("--data", required=True)
    p.add_argument("--system", required=True, choices=sorted(SYSTEMS))
    p.add_argument("--out", required=True, help="model output path")
    add_train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="per-clip predictions from a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--envelope", default=None,
                   help="envelope name or custom:<file>; required for ffnn models")
    p.add_argument("--epsilon", type=float, default=1e-9)
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="clip-level MSE/PCC of a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--envelope", default=None)
    p.add_argument("--epsilon", type=float, default=1e-9)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("gradcheck",
                       help="validate analytic gradients against finite differences")
    p.add_argument("kind", choices=CHECK_KINDS + ("all",))
    p.add_argument("--trials", type=_positive_int, default=100)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--stamp", default=DEFAULT_STAMP,
                   help="stamp file recorded on success (sweep checks for it)")
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("sweep", help="training-size sweep over systems and seeds")
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.add_argument("--output-dir", default=None)
    p.add_argument("--sizes", type=_int_list, default=None)
    p.add_argument("--seeds", type=_int_list, default=None)
    p.add_argument("--systems", type=_str_list, default=None)
    p.add_argument("--epochs", type=_positive_int, default=None)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--hidden", type=_positive_int, default=None)
    p.add_argument("--stamp", default=DEFAULT_STAMP)
    p.add_argument("--force", action="store_true",
                   help="run without a gradcheck stamp")
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return int(code) if code is not None else 0
    try:
        return args.func(args)
    except _EnvelopeRequired as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, DatasetFormatError, TrainingDivergedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())
