"""The finite-difference oracle itself, and the randomized check harness."""

import numpy as np
import pytest

from kffnn.ffnn import FfnnModel, ffnn_backward, ffnn_forward, ffnn_loss
from kffnn.gradcheck import (check, compare_grads, fd_gradient,
                             unrolled_rnn_loss)
from kffnn.linalg import Rng
from kffnn.rnn import rnn_forward


class TestFdGradient:
    def test_quadratic_toy_loss(self):
        w = np.array([[0.5], [-1.25], [2.0]])
        fd = fd_gradient(lambda: float(np.sum(w ** 2)), [("w", w)])
        assert np.max(np.abs(fd["w"] - 2.0 * w)) < 1e-8

    def test_richardson_order(self):
        # halving the step shrinks the truncation error about fourfold
        rng = Rng(5)
        m = FfnnModel(rng.uniform_matrix(3, 2, -0.5, 0.5),
                      rng.uniform_matrix(2, 1, -0.5, 0.5), 1.0, "sigmoid")
        g = rng.uniform_block(3, -1.0, 1.0)
        loss = lambda: ffnn_loss(ffnn_forward(m, g)[1], 0.9)
        analytic = dict(zip(("w_ih", "w_ho"), ffnn_backward(m, g, 0.9)))

        def max_err(step):
            fd = fd_gradient(loss, m.weights(), step=step)
            return max(float(np.max(np.abs(fd[k] - analytic[k])))
                       for k in analytic)

        e1 = max_err(2e-2)
        e2 = max_err(1e-2)
        assert 2.5 < e1 / e2 < 6.0

    def test_zero_error_sample_gives_near_zero_gradient(self):
        m = FfnnModel(np.zeros((4, 2)), np.zeros((2, 1)), 1.0, "linear")
        g = np.array([1.0, -2.0, 0.5, 3.0])
        fd = fd_gradient(lambda: ffnn_loss(ffnn_forward(m, g)[1], 0.0),
                         m.weights())
        assert all(float(np.max(np.abs(v))) < 1e-9 for v in fd.values())

    def test_does_not_mutate_the_model(self):
        rng = Rng(6)
        m = FfnnModel(rng.uniform_matrix(4, 3, -0.5, 0.5),
                      rng.uniform_matrix(3, 1, -0.5, 0.5))
        before = [a.copy() for _, a in m.weights()]
        g = rng.uniform_block(4, -1.0, 1.0)
        fd_gradient(lambda: ffnn_loss(ffnn_forward(m, g)[1], 0.2), m.weights())
        for (_, after), snap in zip(m.weights(), before):
            assert np.array_equal(after, snap)

    def test_non_finite_loss_identifies_weight(self):
        w = np.array([[1.0]])
        with pytest.raises(ValueError, match=r"w\[0\]"):
            fd_gradient(lambda: float("inf"), [("w", w)])

    def test_step_validation(self):
        with pytest.raises(ValueError):
            fd_gradient(lambda: 0.0, [("w", np.zeros((1, 1)))], step=0.0)


class TestCompareGrads:
    def test_fault_injection_sign_flip(self):
        rng = Rng(7)
        m = FfnnModel(rng.uniform_matrix(4, 2, -0.5, 0.5),
                      rng.uniform_matrix(2, 1, -0.5, 0.5), 1.0, "linear")
        g = rng.uniform_block(4, -1.0, 1.0)
        target = 2.0  # far from the output, so gradients are sizeable
        analytic = dict(zip(("w_ih", "w_ho"), ffnn_backward(m, g, target)))
        fd = fd_gradient(lambda: ffnn_loss(ffnn_forward(m, g)[1], target),
                         m.weights())
        *_, ok = compare_grads(analytic, fd)
        assert ok
        corrupted = {k: v.copy() for k, v in analytic.items()}
        corrupted["w_ho"][1, 0] = -corrupted["w_ho"][1, 0]
        rel, ab, worst, score, n, ok = compare_grads(corrupted, fd)
        assert not ok
        assert worst == ("w_ho", 1, 0)
        assert n == 10

    def test_name_mismatch_rejected(self):
        with pytest.raises(ValueError):
            compare_grads({"a": np.zeros(1)}, {"b": np.zeros(1)})


class TestCheck:
    def test_ffnn_small_run_passes(self):
        rep = check("ffnn", trials=10, seed=3)
        assert rep.passed
        assert rep.trials == 10
        assert "PASS" in rep.summary()

    def test_rnn_small_run_passes(self):
        assert check("rnn", trials=6, seed=3).passed

    def test_lstm_small_run_passes(self):
        assert check("lstm", trials=4, seed=3).passed

    def test_blstm_small_run_passes(self):
        assert check("blstm", trials=3, seed=3).passed

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            check("bogus", trials=1)

    def test_trials_validated(self):
        with pytest.raises(ValueError):
            check("ffnn", trials=0)


class TestUnrolledOracle:
    def test_matches_recurrent_forward(self):
        rng = Rng(9)
        from kffnn.rnn import RnnModel
        m = RnnModel(rng.uniform_matrix(4, 3, -0.5, 0.5),
                     rng.uniform_matrix(3, 3, -0.5, 0.5),
                     rng.uniform_matrix(3, 1, -0.5, 0.5), 1.4, "sigmoid")
        seq = rng.uniform_matrix(6, 4, -1.0, 1.0)
        target = 0.3
        direct = ffnn_loss(rnn_forward(m, seq).output, target)
        unrolled = unrolled_rnn_loss(m.w_ih, m.w_hh, m.w_ho, seq, target,
                                     m.lam, "sigmoid")
        assert abs(direct - unrolled) < 1e-12
