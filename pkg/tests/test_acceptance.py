"""Acceptance suite: every criterion at its stated tolerance.

Each test prints one `ACCEPTANCE <n> [<name>]: PASS/FAIL` line (run with
`pytest tests/test_acceptance.py -v -s` to see them live).  The ordering
criteria (5, 6) share one training-size sweep on synthetic fade-envelope
data; its absolute MSE values are specific to the generator, only the
orderings are asserted.
"""

import time

import numpy as np
import pytest

from kffnn.cli import main
from kffnn.dataset import generate_synthetic
from kffnn.experiment import ExperimentConfig, median_mse, run_sweep
from kffnn.gradcheck import check, fd_gradient, unrolled_rnn_loss
from kffnn.knowledge import Envelope, infuse_labels, reconstruct_clip
from kffnn.linalg import Rng
from kffnn.metrics import mse, pcc
from kffnn.rnn import rnn_bptt, rnn_init


def report(num, name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    suffix = f"  ({detail})" if detail else ""
    print(f"ACCEPTANCE {num} [{name}]: {status}{suffix}")
    return ok


@pytest.fixture(scope="module")
def ordering_sweep(tmp_path_factory):
    """One sweep shared by criteria 5 and 6: kffnn-fn1 / kffnn-fn3 / rnn on
    Fn1-generated data, sizes 200 and 2000, ten seeds, fixed 100-clip test."""
    out = tmp_path_factory.mktemp("ordering_sweep")
    cfg = ExperimentConfig(
        generate=dict(count=2100, d=21, envelope="fn1", noise_sigma=0.1,
                      seed=7, label_mode="uniform"),
        systems=["kffnn-fn1", "kffnn-fn3", "rnn"],
        train_sizes=[200, 2000],
        seeds=list(range(1, 11)),
        test_fraction=100 / 2100,
        split_seed=1234,
        output_dir=str(out),
    )
    start = time.monotonic()
    rows = run_sweep(cfg, progress=lambda msg: None)
    elapsed = time.monotonic() - start
    return rows, elapsed


def test_criterion_1_gradient_correctness(tmp_path):
    check("ffnn", trials=1, seed=99)  # warm the compiled kernels
    check("rnn", trials=1, seed=99)
    start = time.monotonic()
    code_ffnn = main(["gradcheck", "ffnn", "--trials", "100", "--seed", "1",
                      "--stamp", str(tmp_path / "s1")])
    code_rnn = main(["gradcheck", "rnn", "--trials", "100", "--seed", "1",
                     "--stamp", str(tmp_path / "s2")])
    elapsed = time.monotonic() - start
    ok = code_ffnn == 0 and code_rnn == 0 and elapsed < 30.0
    assert report(1, "gradient correctness", ok,
                  f"ffnn exit {code_ffnn}, rnn exit {code_rnn}, {elapsed:.1f}s")


def test_criterion_2_bptt_unrolled_equivalence():
    rng = Rng(2025)
    start = time.monotonic()
    worst = 0.0
    for _ in range(20):
        model = rnn_init(4, 2, rng, lam=1.0, output_activation="sigmoid",
                         init_range=0.5)
        seq = rng.uniform_matrix(3, 4, -1.0, 1.0)
        target = rng.uniform(0.0, 1.0)
        analytic = dict(zip(("w_ih", "w_hh", "w_ho"),
                            rnn_bptt(model, seq, target)))
        fd = fd_gradient(
            lambda: unrolled_rnn_loss(model.w_ih, model.w_hh, model.w_ho,
                                      seq, target, model.lam, "sigmoid"),
            model.weights())
        for name in analytic:
            worst = max(worst, float(np.max(np.abs(analytic[name] - fd[name]))))
    elapsed = time.monotonic() - start
    ok = worst <= 1e-8 and elapsed < 10.0
    assert report(2, "BPTT equals unrolled tied-weight network", ok,
                  f"max abs err {worst:.2e}, {elapsed:.1f}s")


def test_criterion_3_knowledge_round_trip():
    rng = Rng(3003)
    envs = [Envelope("fn1"), Envelope("fn2"), Envelope("fn3"),
            Envelope("constant")]
    worst = 0.0
    for _ in range(1000):
        v = rng.uniform(0.0, 5.0)
        env = envs[rng.below(4)]
        n = 8 + rng.below(5)
        ds = generate_synthetic(1, (n, n), 2, env, 0.0, seed=rng.below(1 << 32))
        clip = ds.clips[0]
        clip.label = v
        targets = [t for _, t in infuse_labels(clip, env)]
        worst = max(worst, abs(reconstruct_clip(targets, env) - v))
    assert report(3, "knowledge round trip", worst <= 1e-12,
                  f"1000 cases, max err {worst:.2e}")


def test_criterion_4_degenerate_envelope_identity():
    ds = generate_synthetic(50, (8, 12), 6, Envelope("fn2"), 0.25, seed=44)
    identical = True
    for clip in ds.clips:
        infused = infuse_labels(clip, Envelope("constant"))
        plain = [(seg.features, clip.label) for seg in clip.segments]
        for (gi, ti), (gp, tp) in zip(infused, plain):
            identical &= np.array_equal(gi, gp) and ti == tp
    assert report(4, "constant envelope equals plain FFNN data", identical,
                  "bitwise over 50 clips")


def test_criterion_5_small_data_ordering(ordering_sweep):
    rows, elapsed = ordering_sweep
    assert all(r.n_test == 100 for r in rows)
    k200 = median_mse(rows, "kffnn-fn1", 200)
    k2000 = median_mse(rows, "kffnn-fn1", 2000)
    r200 = median_mse(rows, "rnn", 200)
    r2000 = median_mse(rows, "rnn", 2000)
    gap_small = r200 - k200
    gap_large = r2000 - k2000
    ok = (k200 <= r200) and (gap_large < gap_small) and elapsed < 300.0
    assert report(
        5, "small-data ordering and level-out", ok,
        f"kffnn {k200:.4f}->{k2000:.4f}, rnn {r200:.4f}->{r2000:.4f}, "
        f"gap {gap_small:.4f}->{gap_large:.4f}, {elapsed:.0f}s")


def test_criterion_6_wrong_knowledge_degrades(ordering_sweep):
    rows, _ = ordering_sweep
    fn1 = median_mse(rows, "kffnn-fn1", 2000)
    fn3 = median_mse(rows, "kffnn-fn3", 2000)
    assert report(6, "wrong knowledge degrades", fn3 >= fn1,
                  f"fn3 {fn3:.4f} vs fn1 {fn1:.4f} at size 2000")


def test_criterion_7_metric_sanity():
    rng = Rng(777)
    worst = 0.0
    symmetric = True
    for _ in range(100):
        x = rng.uniform_block(11, -3.0, 3.0)
        y = rng.uniform_block(11, -3.0, 3.0)
        a = rng.uniform(0.1, 5.0)
        b = rng.uniform(-4.0, 4.0)
        worst = max(worst, abs(pcc(a * x + b, y) - pcc(x, y)))
        worst = max(worst, abs(pcc(x, x) - 1.0))
        worst = max(worst, abs(pcc(x, -x) + 1.0))
        symmetric &= mse(x, y) == mse(y, x)
    ok = worst <= 1e-12 and symmetric
    assert report(7, "metric sanity", ok, f"max deviation {worst:.2e}")


def test_criterion_8_sweep_determinism(tmp_path):
    import json

    cfg = {
        "generate": {"count": 160, "d": 5, "envelope": "fn1",
                     "noise_sigma": 0.1, "seed": 11},
        "systems": ["kffnn-fn1", "rnn"],
        "train_sizes": [30, 60],
        "seeds": [1, 2],
        "epochs": 20,
        "hidden": 5,
        "test_fraction": 0.2,
        "output_dir": str(tmp_path / "run_a"),
    }
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(cfg))
    code_a = main(["sweep", "--config", str(cfg_path), "--force"])
    code_b = main(["sweep", "--config", str(cfg_path), "--force",
                   "--output-dir", str(tmp_path / "run_b")])
    body_a = (tmp_path / "run_a" / "results.csv").read_bytes()
    body_b = (tmp_path / "run_b" / "results.csv").read_bytes()
    ok = code_a == 0 and code_b == 0 and body_a == body_b
    assert report(8, "sweep determinism", ok,
                  f"{len(body_a)} CSV bytes identical")
