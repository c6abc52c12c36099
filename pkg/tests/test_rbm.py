import math

import numpy as np
import pytest

from deepbow import oracle
from deepbow.rbm import (CdConfig, RbmLayer, cd_step, hidden_probs, reconstruction_error,
                         sample_bernoulli, train_rbm, visible_probs)


def random_layer(n_visible, n_hidden, seed, scale=0.5):
    return RbmLayer.random(n_visible, n_hidden, scale, np.random.default_rng(seed))


def zero_layer(n_visible, n_hidden):
    return RbmLayer(np.zeros((n_hidden, n_visible)), np.zeros(n_visible), np.zeros(n_hidden))


class TestHiddenProbs:
    def test_zero_parameters_give_half(self):
        layer = zero_layer(4, 3)
        assert np.array_equal(hidden_probs(layer, np.array([0.1, 0.9, 0.3, 0.5])),
                              np.full(3, 0.5))

    def test_log3_weight_gives_three_quarters(self):
        layer = RbmLayer(np.array([[math.log(3)]]), np.zeros(1), np.zeros(1))
        assert hidden_probs(layer, np.array([1.0]))[0] == pytest.approx(0.75, abs=1e-15)

    def test_matches_scalar_reevaluation(self):
        layer = random_layer(3, 2, seed=42)
        v = np.array([0.2, 0.5, 0.3])
        got = hidden_probs(layer, v)
        for i in range(2):
            z = layer.hidden_bias[i] + sum(layer.weights[i, j] * v[j] for j in range(3))
            assert got[i] == pytest.approx(1.0 / (1.0 + math.exp(-z)), rel=1e-12)

    def test_rejects_bad_input(self):
        layer = zero_layer(3, 2)
        with pytest.raises(ValueError):
            hidden_probs(layer, np.zeros(4))
        with pytest.raises(ValueError):
            hidden_probs(layer, np.array([0.1, np.nan, 0.2]))
        with pytest.raises(ValueError):
            hidden_probs(layer, np.array([0.1, 1.5, 0.2]))


class TestVisibleProbs:
    def test_zero_parameters_give_half(self):
        layer = zero_layer(4, 3)
        assert np.array_equal(visible_probs(layer, np.ones(3)), np.full(4, 0.5))

    def test_zero_hidden_exposes_biases(self):
        bias = np.array([-1.0, 0.3, 2.0])
        layer = RbmLayer(np.zeros((2, 3)), bias, np.zeros(2))
        got = visible_probs(layer, np.zeros(2))
        np.testing.assert_allclose(got, 1.0 / (1.0 + np.exp(-bias)), rtol=1e-15)

    def test_matches_scalar_reevaluation(self):
        layer = random_layer(2, 3, seed=7)
        h = np.array([1.0, 0.0, 1.0])
        got = visible_probs(layer, h)
        for j in range(2):
            z = layer.visible_bias[j] + sum(layer.weights[i, j] * h[i] for i in range(3))
            assert got[j] == pytest.approx(1.0 / (1.0 + math.exp(-z)), rel=1e-12)

    def test_rejects_dim_mismatch(self):
        with pytest.raises(ValueError):
            visible_probs(zero_layer(3, 2), np.zeros(3))


class TestSampleBernoulli:
    def test_zero_and_one_probabilities_are_exact(self):
        rng = np.random.default_rng(0)
        assert np.array_equal(sample_bernoulli(np.zeros(100), rng), np.zeros(100))
        assert np.array_equal(sample_bernoulli(np.ones(100), rng), np.ones(100))

    def test_half_probability_empirical_mean(self):
        rng = np.random.default_rng(1234)
        draws = sample_bernoulli(np.full((10 ** 5, 4), 0.5), rng)
        means = draws.mean(axis=0)
        assert np.all(means > 0.49) and np.all(means < 0.51)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            sample_bernoulli(np.array([0.5, 1.2]), np.random.default_rng(0))


class TestCdStep:
    def test_zero_learning_rate_is_identity(self):
        layer = random_layer(4, 3, seed=1)
        cfg = CdConfig(learning_rate=0.0, momentum=0.0)
        batch = np.random.default_rng(2).random((6, 4))
        new, delta = cd_step(layer, batch, cfg)
        assert np.array_equal(new.weights, layer.weights)
        assert np.array_equal(new.visible_bias, layer.visible_bias)
        assert np.array_equal(new.hidden_bias, layer.hidden_bias)
        assert not delta.weights.any()

    def test_deterministic_per_seed(self):
        layer = random_layer(5, 4, seed=3)
        batch = np.random.default_rng(4).random((8, 5))
        cfg = CdConfig(learning_rate=0.1, seed=11)
        a, da = cd_step(layer, batch, cfg)
        b, db = cd_step(layer, batch, cfg)
        assert np.array_equal(a.weights, b.weights)
        assert np.array_equal(da.weights, db.weights)
        assert np.array_equal(da.hidden_bias, db.hidden_bias)

    def test_symmetric_batch_at_zero_weights_keeps_weights_zero(self):
        # pos and neg statistics coincide exactly: reconstruction of 0.5 data
        # through zero weights is 0.5 again, and the decay term vanishes
        layer = zero_layer(3, 2)
        cfg = CdConfig(learning_rate=0.5, weight_decay=0.01, momentum=0.0)
        new, delta = cd_step(layer, np.full((10, 3), 0.5), cfg)
        assert np.array_equal(new.weights, np.zeros((2, 3)))
        assert np.array_equal(new.visible_bias, np.zeros(3))
        assert np.array_equal(new.hidden_bias, np.zeros(2))
        assert not delta.weights.any()

    def test_mean_cd1_update_tracks_exact_gradient(self):
        # 2 visible / 2 hidden at seed 0; averaging one CD-1 step over 2e4
        # independent repetitions equals a single step on the tiled batch
        rng = np.random.default_rng(0)
        layer = RbmLayer.random(2, 2, 0.5, rng)
        data = np.array([[0, 0], [0, 1], [1, 1], [1, 1]], dtype=float)
        grad = oracle.exact_gradient(layer, data)
        reps = 20000
        cfg = CdConfig(k=1, learning_rate=1.0, momentum=0.0, weight_decay=0.0,
                       batch_size=reps * len(data), seed=0)
        _, delta = cd_step(layer, np.tile(data, (reps, 1)), cfg)
        cos = (delta.weights.ravel() @ grad.weights.ravel()
               / np.linalg.norm(delta.weights) / np.linalg.norm(grad.weights))
        assert cos > 0.9

    def test_rejects_empty_batch(self):
        with pytest.raises(ValueError):
            cd_step(zero_layer(3, 2), np.empty((0, 3)), CdConfig())

    def test_symmetric_data_update_is_zero_up_to_noise(self):
        # all-0.5 data at zero weights: |mean update| must sit inside a 3-sigma
        # binomial bound (it is exactly zero for mean-field reconstructions)
        layer = zero_layer(4, 3)
        n = 40000
        cfg = CdConfig(learning_rate=1.0, momentum=0.0, weight_decay=0.0, batch_size=n)
        _, delta = cd_step(layer, np.full((n, 4), 0.5), cfg)
        bound = 3.0 * 0.25 / math.sqrt(n)
        assert np.abs(delta.weights).max() < bound
        assert np.abs(delta.visible_bias).max() < bound
        assert np.abs(delta.hidden_bias).max() < bound


class TestReconstructionError:
    def test_saturated_layer_reconstructs_ones(self):
        layer = RbmLayer(np.zeros((2, 3)), np.full(3, 30.0), np.zeros(2))
        data = np.ones((5, 3))
        assert reconstruction_error(layer, data) < 1e-3

    def test_zero_layer_on_half_data_is_exact(self):
        assert reconstruction_error(zero_layer(4, 2), np.full((6, 4), 0.5)) == 0.0

    def test_matches_compositional_recomputation(self):
        layer = random_layer(4, 3, seed=3)
        data = np.random.default_rng(30).random((5, 4))
        expected = np.mean([
            np.sum((v - visible_probs(layer, hidden_probs(layer, v))) ** 2)
            for v in data])
        assert reconstruction_error(layer, data) == pytest.approx(expected, rel=1e-14)

    def test_rejects_empty_data(self):
        with pytest.raises(ValueError):
            reconstruction_error(zero_layer(3, 2), np.empty((0, 3)))


class TestProperties:
    def test_probabilities_strictly_inside_unit_interval(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            layer = RbmLayer.random(5, 4, 3.0, rng)
            hp = hidden_probs(layer, rng.random(5))
            vp = visible_probs(layer, (rng.random(4) < 0.5).astype(float))
            assert np.all(hp > 0) and np.all(hp < 1)
            assert np.all(vp > 0) and np.all(vp < 1)

    def test_training_reduces_reconstruction_error(self):
        # 6 visible / 4 hidden, 100 epochs on a fixed 20-sample batch
        rng = np.random.default_rng(17)
        prototypes = rng.random((4, 6))
        data = np.clip(prototypes[rng.integers(0, 4, 20)]
                       + 0.05 * rng.normal(size=(20, 6)), 0, 1)
        layer = RbmLayer.random(6, 4, 0.01, np.random.default_rng(17))
        cfg = CdConfig(learning_rate=0.2, batch_size=10, seed=17)
        before = reconstruction_error(layer, data)
        after = reconstruction_error(train_rbm(layer, data, 100, cfg), data)
        assert after < before

    def test_train_rbm_deterministic(self):
        data = np.random.default_rng(5).random((12, 4))
        cfg = CdConfig(learning_rate=0.1, batch_size=4, seed=9)
        a = train_rbm(random_layer(4, 3, seed=5), data, 7, cfg)
        b = train_rbm(random_layer(4, 3, seed=5), data, 7, cfg)
        assert np.array_equal(a.weights, b.weights)
        assert np.array_equal(a.visible_bias, b.visible_bias)
        assert np.array_equal(a.hidden_bias, b.hidden_bias)


class TestConfigAndLayerValidation:
    def test_config_ranges(self):
        with pytest.raises(ValueError):
            CdConfig(k=0)
        with pytest.raises(ValueError):
            CdConfig(learning_rate=-0.1)
        with pytest.raises(ValueError):
            CdConfig(momentum=1.0)
        with pytest.raises(ValueError):
            CdConfig(weight_decay=-1e-4)
        with pytest.raises(ValueError):
            CdConfig(batch_size=0)

    def test_layer_dim_and_finiteness_checks(self):
        with pytest.raises(ValueError):
            RbmLayer(np.zeros((2, 3)), np.zeros(4), np.zeros(2))
        with pytest.raises(ValueError):
            RbmLayer(np.full((2, 3), np.inf), np.zeros(3), np.zeros(2))

    def test_non_finite_update_raises_overflow(self):
        layer = RbmLayer(np.full((2, 2), 1e308), np.zeros(2), np.zeros(2))
        cfg = CdConfig(learning_rate=1e308, momentum=0.0)
        batch = np.array([[1.0, 0.0], [0.0, 1.0]])
        with pytest.raises(FloatingPointError):
            cd_step(layer, batch, cfg)
