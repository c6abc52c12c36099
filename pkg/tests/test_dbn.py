import math

import numpy as np
import pytest

from deepbow import dbn
from deepbow.dbn import (DbnClassifier, FinetuneConfig, ModelFormatError, cross_entropy,
                         deserialize, error_rate, finetune, forward, init_random,
                         loss_and_gradients, pretrain_greedy, serialize)
from deepbow.rbm import CdConfig, RbmLayer


def zero_model(sizes):
    layers = [RbmLayer(np.zeros((sizes[i + 1], sizes[i])), np.zeros(sizes[i]),
                       np.zeros(sizes[i + 1])) for i in range(len(sizes) - 2)]
    return DbnClassifier(layers, np.zeros((sizes[-1], sizes[-2])), np.zeros(sizes[-1]))


class TestInitRandom:
    def test_tiny_scale_is_near_uniform(self):
        model = init_random([20, 10, 4], 1e-8, seed=1)
        probs = forward(model, np.random.default_rng(1).random(20))
        assert np.abs(probs - 0.25).max() < 1e-6

    def test_same_seed_bit_identical(self):
        a = init_random([12, 6, 3], 0.01, seed=4)
        b = init_random([12, 6, 3], 0.01, seed=4)
        for pa, pb in zip(a.parameters().values(), b.parameters().values()):
            assert np.array_equal(pa, pb)

    def test_parameter_count_matches_formula(self):
        model = init_random([1001, 500, 13], 0.01, seed=0)
        count = sum(p.size for p in model.parameters().values())
        assert count == 1001 * 500 + 500 + 1001 + 500 * 13 + 13 == 508514

    def test_rejects_bad_architecture(self):
        with pytest.raises(ValueError):
            init_random([10], 0.01, seed=0)
        with pytest.raises(ValueError):
            init_random([10, 5, 5, 5, 5, 3], 0.01, seed=0)  # 4 hidden layers
        with pytest.raises(ValueError):
            init_random([10, 0, 3], 0.01, seed=0)


class TestForward:
    def test_zero_model_uniform_over_13_classes(self):
        model = zero_model([7, 4, 13])
        probs = forward(model, np.full(7, 0.3))
        np.testing.assert_array_equal(probs, np.full(13, 1.0 / 13.0))

    def test_softmax_shift_invariance(self):
        model = init_random([6, 4, 3], 0.5, seed=2)
        v = np.random.default_rng(2).random(6)
        before = forward(model, v)
        model.label_bias += 7.3
        np.testing.assert_allclose(forward(model, v), before, atol=1e-12)

    def test_matches_layer_by_layer_scalar_reevaluation(self):
        model = init_random([4, 3, 2, 3], 0.7, seed=9)
        v = np.random.default_rng(9).random(4)
        a = list(v)
        for layer in model.rbm_layers:
            a = [1.0 / (1.0 + math.exp(-(layer.hidden_bias[i]
                 + sum(layer.weights[i, j] * a[j] for j in range(len(a))))))
                 for i in range(layer.n_hidden)]
        logits = [model.label_bias[c]
                  + sum(model.label_weights[c, j] * a[j] for j in range(len(a)))
                  for c in range(3)]
        z = max(logits)
        exps = [math.exp(x - z) for x in logits]
        expected = np.array(exps) / sum(exps)
        np.testing.assert_allclose(forward(model, v), expected, rtol=1e-12)

    def test_output_is_simplex_point(self):
        rng = np.random.default_rng(3)
        for seed in range(5):
            model = init_random([8, 5, 4], 2.0, seed=seed)
            probs = forward(model, rng.random((6, 8)))
            np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-9)
            assert np.all(probs > 0) and np.all(probs < 1)

    def test_rejects_dim_mismatch(self):
        with pytest.raises(ValueError):
            forward(zero_model([5, 3, 2]), np.zeros(4))


def finite_difference_model_gradients(model, X, y, step=1e-5):
    fd = {}
    for name, p in model.parameters().items():
        g = np.zeros_like(p)
        flat, gflat = p.reshape(-1), g.reshape(-1)
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + step
            hi = cross_entropy(model, X, y)
            flat[idx] = orig - step
            lo = cross_entropy(model, X, y)
            flat[idx] = orig
            gflat[idx] = (hi - lo) / (2 * step)
        fd[name] = g
    return fd


def max_rel_err(a, b):
    denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-10)
    return float(np.max(np.abs(a - b) / denom)) if a.size else 0.0


class TestFinetune:
    def test_zero_epochs_is_identity_with_empty_trace(self):
        model = init_random([6, 4, 3], 0.1, seed=1)
        X = np.random.default_rng(1).random((5, 6))
        y = np.array([0, 1, 2, 0, 1])
        out, trace = finetune(model, X, y, FinetuneConfig(epochs=0))
        assert len(trace) == 0
        for pa, pb in zip(model.parameters().values(), out.parameters().values()):
            assert np.array_equal(pa, pb)

    def test_single_sample_overfit(self):
        model = init_random([6, 4, 3], 0.1, seed=2)
        X = np.random.default_rng(2).random((1, 6))
        y = np.array([2])
        cfg = FinetuneConfig("full_network", learning_rate=0.1, epochs=500, batch_size=1)
        out, trace = finetune(model, X, y, cfg)
        assert trace.train_error[-1] == 0.0
        assert trace.train_loss[-1] < 1e-2

    @pytest.mark.parametrize("sizes", [[10, 8, 3], [10, 8, 5, 3], [10, 8, 6, 4, 3]])
    def test_backprop_matches_finite_differences(self, sizes):
        model = init_random(sizes, 0.5, seed=12)
        rng = np.random.default_rng(12)
        X = rng.random((4, 10))
        y = rng.integers(0, 3, 4)
        _, grads = loss_and_gradients(model, X, y)
        fd = finite_difference_model_gradients(model, X, y)
        for name in grads:
            assert max_rel_err(grads[name], fd[name]) <= 1e-4, name

    def test_top_layer_only_freezes_rbm_parameters(self):
        model = init_random([8, 5, 3], 0.3, seed=3)
        rng = np.random.default_rng(3)
        X, y = rng.random((20, 8)), rng.integers(0, 3, 20)
        cfg = FinetuneConfig("top_layer_only", learning_rate=0.3, epochs=8, batch_size=5)
        out, _ = finetune(model, X, y, cfg)
        for i, layer in enumerate(model.rbm_layers):
            assert np.array_equal(out.rbm_layers[i].weights, layer.weights)
            assert np.array_equal(out.rbm_layers[i].visible_bias, layer.visible_bias)
            assert np.array_equal(out.rbm_layers[i].hidden_bias, layer.hidden_bias)
        assert not np.array_equal(out.label_weights, model.label_weights)

    def test_deterministic_per_seed(self):
        model = init_random([6, 4, 3], 0.1, seed=5)
        rng = np.random.default_rng(5)
        X, y = rng.random((12, 6)), rng.integers(0, 3, 12)
        cfg = FinetuneConfig(learning_rate=0.2, epochs=6, batch_size=4, seed=7)
        a, ta = finetune(model, X, y, cfg)
        b, tb = finetune(model, X, y, cfg)
        assert np.array_equal(ta.train_loss, tb.train_loss)
        for pa, pb in zip(a.parameters().values(), b.parameters().values()):
            assert np.array_equal(pa, pb)

    def test_rejects_bad_labels_and_empty_data(self):
        model = init_random([6, 4, 3], 0.1, seed=1)
        X = np.random.default_rng(1).random((4, 6))
        with pytest.raises(ValueError):
            finetune(model, X, np.array([0, 1, 3, 0]), FinetuneConfig())
        with pytest.raises(ValueError):
            finetune(model, np.empty((0, 6)), np.empty(0, dtype=int), FinetuneConfig())


class TestPretrainGreedy:
    def test_zero_epochs_is_identity(self):
        model = init_random([10, 6, 3], 0.1, seed=1)
        data = np.random.default_rng(1).random((15, 10))
        out = pretrain_greedy(model, data, 0, CdConfig())
        for pa, pb in zip(model.parameters().values(), out.parameters().values()):
            assert np.array_equal(pa, pb)

    def test_label_layer_untouched(self):
        model = init_random([10, 6, 3], 0.1, seed=2)
        data = np.random.default_rng(2).random((15, 10))
        out = pretrain_greedy(model, data, 3, CdConfig(learning_rate=0.1, batch_size=5))
        assert np.array_equal(out.label_weights, model.label_weights)
        assert np.array_equal(out.label_bias, model.label_bias)
        assert not np.array_equal(out.rbm_layers[0].weights, model.rbm_layers[0].weights)

    def test_layer1_reconstruction_improves_on_clustered_data(self):
        # 200-100 stack, 100 epochs on clustered synthetic histograms
        from deepbow.rbm import reconstruction_error
        rng = np.random.default_rng(20)
        prototypes = rng.dirichlet(np.full(200, 0.05), size=4)
        data = np.vstack([rng.multinomial(60, p, size=30) / 60.0 for p in prototypes])
        model = init_random([200, 100, 4], 0.01, seed=20)
        cfg = CdConfig(learning_rate=1.0, batch_size=40, seed=20)
        before = reconstruction_error(model.rbm_layers[0], data)
        out = pretrain_greedy(model, data, 100, cfg)
        after = reconstruction_error(out.rbm_layers[0], data)
        assert after <= 0.8 * before

    def test_second_layer_trains_on_first_layer_probs(self):
        model = init_random([30, 12, 7, 3], 0.1, seed=3)
        data = np.random.default_rng(3).random((10, 30))
        hidden = dbn.hidden_stack(model, data)
        assert hidden[0].shape == (10, 12)
        assert np.all(hidden[0] > 0) and np.all(hidden[0] < 1)

    def test_rejects_zero_hidden_layers(self):
        model = init_random([10, 3], 0.1, seed=1)
        with pytest.raises(ValueError):
            pretrain_greedy(model, np.random.default_rng(1).random((5, 10)), 1, CdConfig())


class TestErrorRate:
    def test_memorized_set_scores_zero(self):
        model = init_random([6, 8, 3], 0.3, seed=4)
        rng = np.random.default_rng(4)
        X, y = rng.random((10, 6)), rng.integers(0, 3, 10)
        cfg = FinetuneConfig(learning_rate=0.5, epochs=800, batch_size=10,
                             weight_decay=0.0)
        model, _ = finetune(model, X, y, cfg)
        assert error_rate(model, X, y) == 0.0

    def test_zero_model_ties_break_to_class_zero(self):
        model = zero_model([4, 3, 13])
        X = np.random.default_rng(5).random((13, 4))
        y = np.arange(13)
        assert error_rate(model, X, y) == pytest.approx(12.0 / 13.0)

    def test_matches_confusion_matrix_accuracy(self):
        model = init_random([6, 4, 3], 0.8, seed=6)
        rng = np.random.default_rng(6)
        X, y = rng.random((40, 6)), rng.integers(0, 3, 40)
        confusion = np.zeros((3, 3), dtype=int)
        for xi, yi in zip(X, y):
            confusion[yi, int(np.argmax(forward(model, xi)))] += 1
        accuracy = np.trace(confusion) / confusion.sum()
        assert error_rate(model, X, y) == pytest.approx(1.0 - accuracy, abs=1e-12)


class TestSerialization:
    def test_round_trip_is_bitwise(self):
        model = init_random([9, 6, 4, 3], 0.4, seed=7)
        clone = deserialize(serialize(model))
        for pa, pb in zip(model.parameters().values(), clone.parameters().values()):
            assert np.array_equal(pa, pb)

    def test_stream_length_formula(self):
        model = init_random([4, 3, 2], 0.1, seed=8)
        blob = serialize(model)
        header = 4 + 4 + 4 + 3 * 4  # magic, version, size count, 3 sizes
        n_params = (4 * 3 + 3 + 4) + (3 * 2 + 2)
        assert n_params == 27
        assert len(blob) == header + 8 * 27

    def test_truncation_reports_offset(self):
        blob = serialize(init_random([4, 3, 2], 0.1, seed=8))
        with pytest.raises(ModelFormatError, match="offset"):
            deserialize(blob[:50])

    def test_bad_magic_and_version(self):
        blob = serialize(init_random([4, 3, 2], 0.1, seed=8))
        with pytest.raises(ModelFormatError, match="magic"):
            deserialize(b"XXXX" + blob[4:])
        with pytest.raises(ModelFormatError, match="version"):
            deserialize(blob[:4] + b"\x09\x00\x00\x00" + blob[8:])

    def test_trailing_bytes_rejected(self):
        blob = serialize(init_random([4, 3, 2], 0.1, seed=8))
        with pytest.raises(ModelFormatError, match="trailing"):
            deserialize(blob + b"\x00")

    def test_file_round_trip(self, tmp_path):
        model = init_random([5, 4, 2], 0.2, seed=9)
        path = tmp_path / "model.dbnm"
        dbn.save_model(model, path)
        clone = dbn.load_model(path)
        for pa, pb in zip(model.parameters().values(), clone.parameters().values()):
            assert np.array_equal(pa, pb)
