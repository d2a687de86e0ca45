"""Feed-forward model: forward oracle, exact gradients, training behaviour."""

import math

import numpy as np
import pytest

from kffnn.errors import TrainingDivergedError
from kffnn.ffnn import (FfnnModel, TrainConfig, ffnn_backward, ffnn_dataset_loss,
                        ffnn_forward, ffnn_init, ffnn_loss, ffnn_train)
from kffnn.gradcheck import compare_grads, fd_gradient
from kffnn.linalg import Rng


def hand_forward(w_ih, w_ho, lam, activation, g):
    """Independent plain-Python forward pass used as an oracle."""
    d, nh = w_ih.shape
    hidden = []
    for k in range(nh):
        s = sum(g[j] * w_ih[j, k] for j in range(d))
        hidden.append(1.0 / (1.0 + math.exp(-lam * s)))
    z = sum(hidden[k] * w_ho[k, 0] for k in range(nh))
    if activation == "sigmoid":
        return hidden, 1.0 / (1.0 + math.exp(-lam * z))
    return hidden, z


class TestForward:
    def test_zero_weights_sigmoid(self):
        m = FfnnModel(np.zeros((5, 3)), np.zeros((3, 1)), 1.0, "sigmoid")
        h, o = ffnn_forward(m, np.array([0.3, -2.0, 1.0, 4.0, 0.0]))
        assert np.array_equal(h, np.full(3, 0.5))
        assert o == 0.5

    def test_zero_weights_linear(self):
        m = FfnnModel(np.zeros((4, 2)), np.zeros((2, 1)), 1.0, "linear")
        _, o = ffnn_forward(m, np.ones(4))
        assert o == 0.0

    def test_seed7_4_2_1_matches_hand_rolled(self):
        m = ffnn_init(4, 2, Rng(7), lam=1.3, output_activation="sigmoid")
        g = np.array([0.5, -1.0, 0.25, 2.0])
        h, o = ffnn_forward(m, g)
        h_ref, o_ref = hand_forward(m.w_ih, m.w_ho, m.lam, "sigmoid", g)
        assert np.max(np.abs(h - np.array(h_ref))) < 1e-12
        assert abs(o - o_ref) < 1e-12

    def test_dimension_mismatch(self):
        m = FfnnModel(np.zeros((4, 2)), np.zeros((2, 1)))
        with pytest.raises(ValueError):
            ffnn_forward(m, np.ones(3))


class TestLoss:
    def test_equal_is_zero(self):
        assert ffnn_loss(0.5, 0.5) == 0.0

    def test_unit_error(self):
        assert ffnn_loss(1.0, 0.0) == 1.0

    def test_arithmetic(self):
        assert ffnn_loss(0.3, 0.8) == 0.25

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            ffnn_loss(float("nan"), 0.0)


class TestBackward:
    def test_zero_error_gives_zero_gradients(self):
        m = FfnnModel(np.zeros((4, 3)), np.zeros((3, 1)), 1.0, "linear")
        gih, gho = ffnn_backward(m, np.array([1.0, 2.0, 3.0, 4.0]), 0.0)
        assert not gih.any()
        assert not gho.any()

    def test_1_1_1_matches_symbolic_derivative(self):
        a, b, g, v, lam = 0.7, -1.2, 0.9, 0.4, 1.5
        m = FfnnModel(np.array([[a]]), np.array([[b]]), lam, "linear")
        gih, gho = ffnn_backward(m, np.array([g]), v)
        h = 1.0 / (1.0 + math.exp(-lam * a * g))
        # d/db (h b - v)^2 = 2 (h b - v) h
        # d/da (h b - v)^2 = 2 (h b - v) b * lam h (1 - h) * g
        expect_b = 2.0 * (h * b - v) * h
        expect_a = 2.0 * (h * b - v) * b * lam * h * (1.0 - h) * g
        assert abs(gho[0, 0] - expect_b) < 1e-12
        assert abs(gih[0, 0] - expect_a) < 1e-12

    @pytest.mark.parametrize("activation", ["linear", "sigmoid"])
    def test_finite_difference_21_21_1(self, activation):
        rng = Rng(17)
        m = FfnnModel(rng.uniform_matrix(21, 21, -0.5, 0.5),
                      rng.uniform_matrix(21, 1, -0.5, 0.5), 1.1, activation)
        g = rng.uniform_block(21, -1.0, 1.0)
        target = 0.35
        analytic = dict(zip(("w_ih", "w_ho"), ffnn_backward(m, g, target)))
        fd = fd_gradient(lambda: ffnn_loss(ffnn_forward(m, g)[1], target),
                         m.weights())
        *_, passed = compare_grads(analytic, fd)
        assert passed

    def test_small_step_never_increases_loss(self):
        rng = Rng(23)
        for _ in range(20):
            m = FfnnModel(rng.uniform_matrix(6, 4, -0.5, 0.5),
                          rng.uniform_matrix(4, 1, -0.5, 0.5), 1.0, "linear")
            g = rng.uniform_block(6, -1.0, 1.0)
            target = rng.uniform(0.0, 2.0)
            before = ffnn_loss(ffnn_forward(m, g)[1], target)
            gih, gho = ffnn_backward(m, g, target)
            m.w_ih -= 1e-4 * gih
            m.w_ho -= 1e-4 * gho
            after = ffnn_loss(ffnn_forward(m, g)[1], target)
            assert after <= before + 1e-10


class TestTrain:
    def test_single_pair_loss_monotone_after_first_epoch(self):
        pairs = [(np.array([0.4, -0.2, 0.9]), 1.5)]
        history = []
        ffnn_train(pairs, TrainConfig(eta=0.01, epochs=200, seed=3, hidden=4),
                   history=history)
        tail = history[1:]
        assert all(b <= a + 1e-15 for a, b in zip(tail, tail[1:]))
        assert history[-1] < history[1]

    def test_zero_epochs_rejected(self):
        with pytest.raises(ValueError):
            TrainConfig(epochs=0)

    def test_seeded_training_is_bitwise_deterministic(self):
        rng = Rng(55)
        pairs = [(rng.uniform_block(5, -1, 1), rng.uniform(0, 2))
                 for _ in range(8)]
        cfg = TrainConfig(epochs=30, seed=42, hidden=3)
        m1 = ffnn_train(pairs, cfg)
        m2 = ffnn_train(pairs, cfg)
        assert np.array_equal(m1.w_ih, m2.w_ih)
        assert np.array_equal(m1.w_ho, m2.w_ho)

    def test_sample_order_changes_result_without_shuffle(self):
        pairs = [(np.array([1.0, 0.0]), 0.0), (np.array([0.0, 1.0]), 2.0)]
        cfg = TrainConfig(epochs=10, seed=1, hidden=2, shuffle_each_epoch=False)
        m_fwd = ffnn_train(pairs, cfg)
        m_rev = ffnn_train(list(reversed(pairs)), cfg)
        assert not np.array_equal(m_fwd.w_ih, m_rev.w_ih)

    def test_empty_dataset_rejected(self):
        with pytest.raises(ValueError):
            ffnn_train([], TrainConfig())

    def test_mixed_dimensions_rejected(self):
        pairs = [(np.ones(3), 1.0), (np.ones(4), 1.0)]
        with pytest.raises(ValueError):
            ffnn_train(pairs, TrainConfig())

    def test_divergence_detected(self):
        rng = Rng(9)
        pairs = [(rng.uniform_block(4, 50.0, 100.0), 1e6) for _ in range(4)]
        with pytest.raises(TrainingDivergedError):
            ffnn_train(pairs, TrainConfig(eta=1e9, epochs=50, hidden=3))

    def test_dataset_loss_matches_manual_mean(self):
        rng = Rng(12)
        pairs = [(rng.uniform_block(3, -1, 1), rng.uniform(0, 1))
                 for _ in range(5)]
        m = ffnn_train(pairs, TrainConfig(epochs=5, seed=0, hidden=2))
        manual = np.mean([(ffnn_forward(m, g)[1] - t) ** 2 for g, t in pairs])
        assert abs(ffnn_dataset_loss(m, pairs) - manual) < 1e-12


class TestInit:
    def test_default_range_is_inverse_sqrt_fan_in(self):
        m = ffnn_init(16, 8, Rng(1))
        assert float(np.max(np.abs(m.w_ih))) <= 0.25
        assert float(np.max(np.abs(m.w_ho))) <= 1.0 / math.sqrt(8)
        assert float(np.max(np.abs(m.w_ih))) > 0.2  # actually spans the range

    def test_explicit_range(self):
        m = ffnn_init(4, 4, Rng(2), init_range=0.05)
        assert float(np.max(np.abs(m.w_ih))) <= 0.05

    def test_config_validation(self):
        with pytest.raises(ValueError):
            TrainConfig(eta=0.0)
        with pytest.raises(ValueError):
            TrainConfig(lam=-1.0)
        with pytest.raises(ValueError):
            TrainConfig(init_range=0.0)
        with pytest.raises(ValueError):
            TrainConfig(output_activation="relu")
