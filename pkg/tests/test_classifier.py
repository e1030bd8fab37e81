import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from segwords.classifier import (ModelParams, TrainConfig, cross_entropy,
                                 grad_cross_entropy, predict, read_model, softmax,
                                 train_baseline, write_model)
from segwords.errors import InputError, TrainingDivergedError
from segwords.features import FeatureMatrix
from segwords.labeling import AugmentConfig, FrameLabelSeq


def make_params(rng, d, scale=0.5):
    return ModelParams(rng.normal(0, scale, (d + 1, 3)),
                       rng.normal(0, 0.1, d), rng.uniform(0.5, 2.0, d))


def make_batch(rng, d, n_utts=3, max_frames=7):
    batch = []
    for _ in range(n_utts):
        m = int(rng.integers(2, max_frames + 1))
        feats = FeatureMatrix(rng.normal(0, 1, (m, d)), frame_len=4)
        valid = int(rng.integers(1, m + 1))
        codes = np.full(m, 2, dtype=np.int8)
        codes[:valid] = rng.integers(0, 3, valid)
        batch.append((feats, FrameLabelSeq(codes, 4, valid_frames=valid)))
    return batch


def fd_gradient(params, batch, h=1e-5):
    """Central finite differences on the cross-entropy, the gradient oracle."""
    from segwords.classifier import _design  # loss evaluated through public ops

    def loss_at(weights):
        p = ModelParams(weights, params.feat_mean, params.feat_std)
        labels = [y for _, y in batch]
        probs = [softmax(_design(p, f) @ weights) for f, _ in batch]
        return cross_entropy(labels, probs)

    g = np.zeros_like(params.weights)
    for i in range(g.shape[0]):
        for j in range(g.shape[1]):
            wp = params.weights.copy()
            wm = params.weights.copy()
            wp[i, j] += h
            wm[i, j] -= h
            g[i, j] = (loss_at(wp) - loss_at(wm)) / (2 * h)
    return g


class TestSoftmax:
    def test_uniform_row(self):
        np.testing.assert_allclose(softmax(np.zeros((1, 3))), [[1 / 3] * 3])

    def test_large_logit_no_overflow(self):
        p = softmax(np.array([[1000.0, 0.0, 0.0]]))
        assert np.all(np.isfinite(p))
        np.testing.assert_allclose(p, [[1.0, 0.0, 0.0]], atol=1e-12)

    @given(st.lists(st.floats(-1e4, 1e4), min_size=3, max_size=3))
    @settings(max_examples=200)
    def test_row_sums_to_one_up_to_1e4(self, row):
        assert abs(softmax(np.array([row])).sum() - 1.0) < 1e-6

    @given(st.lists(st.floats(-100, 100), min_size=3, max_size=3),
           st.floats(-100, 100))
    @settings(max_examples=200)
    def test_shift_invariance(self, row, c):
        # modest magnitudes: beyond ~1e3 the shifted differences themselves
        # lose bits to cancellation before softmax ever sees them
        base = softmax(np.array([row]))
        shifted = softmax(np.array([row]) + c)
        np.testing.assert_allclose(base, shifted, atol=1e-12)


class TestCrossEntropy:
    def test_perfect_onehot_is_zero(self):
        y = FrameLabelSeq(np.array([0, 2, 1], dtype=np.int8), 4)
        p = np.eye(3)[[0, 2, 1]]
        assert cross_entropy([y], [p]) == 0.0

    def test_uniform_two_frames(self):
        y = FrameLabelSeq(np.array([0, 1], dtype=np.int8), 4)
        p = np.full((2, 3), 1 / 3)
        assert cross_entropy([y], [p]) == pytest.approx(2 * np.log(3))

    def test_half_probability_single_frame(self):
        y = FrameLabelSeq(np.array([1], dtype=np.int8), 4)
        p = np.array([[0.25, 0.5, 0.25]])
        assert cross_entropy([y], [p]) == pytest.approx(np.log(2))

    def test_padded_frames_excluded(self):
        y = FrameLabelSeq(np.array([1, 2, 2], dtype=np.int8), 4, valid_frames=1)
        p = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
        assert cross_entropy([y], [p]) == 0.0  # the two bad padded rows ignored

    def test_shape_mismatch(self):
        y = FrameLabelSeq(np.array([1, 2], dtype=np.int8), 4)
        with pytest.raises(ValueError, match="shape mismatch"):
            cross_entropy([y], [np.full((3, 3), 1 / 3)])

    def test_nonnegative_random(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            m = int(rng.integers(1, 6))
            y = FrameLabelSeq(rng.integers(0, 3, m).astype(np.int8), 4)
            z = rng.normal(0, 3, (m, 3))
            assert cross_entropy([y], [softmax(z)]) >= 0.0


class TestGradient:
    def test_matches_finite_differences(self):
        rng = np.random.default_rng(42)
        for _ in range(20):
            d = int(rng.integers(2, 7))
            params = make_params(rng, d)
            batch = make_batch(rng, d)
            g = grad_cross_entropy(params, batch)
            g_fd = fd_gradient(params, batch)
            rel = np.linalg.norm(g - g_fd) / max(np.linalg.norm(g), np.linalg.norm(g_fd))
            assert rel < 1e-4

    def test_zero_bias_gradient_on_balanced_bias_only_batch(self):
        # zero weights, zero features: probabilities are uniform, and with
        # label counts balanced across classes the bias gradient cancels
        d = 2
        params = ModelParams(np.zeros((d + 1, 3)), np.zeros(d), np.ones(d))
        feats = FeatureMatrix(np.zeros((3, d)), 4)
        y = FrameLabelSeq(np.array([0, 1, 2], dtype=np.int8), 4)
        g = grad_cross_entropy(params, [(feats, y)])
        np.testing.assert_allclose(g[d], 0.0, atol=1e-15)

    def test_gradient_vanishes_at_perfect_prediction_limit(self):
        d = 2
        rng = np.random.default_rng(1)
        feats = FeatureMatrix(rng.normal(0, 1, (1, d)), 4)
        y = FrameLabelSeq(np.array([0], dtype=np.int8), 4)
        # scale weights so softmax saturates on the true class
        direction = np.zeros((d + 1, 3))
        direction[:d, 0] = feats.rows[0] / np.linalg.norm(feats.rows[0]) ** 2
        params = ModelParams(direction * 200.0, np.zeros(d), np.ones(d))
        g = grad_cross_entropy(params, [(feats, y)])
        assert np.max(np.abs(g)) < 1e-6


class TestPredict:
    def test_zero_weights_zero_logits(self):
        params = ModelParams(np.zeros((3, 3)), np.zeros(2), np.ones(2))
        f = FeatureMatrix(np.ones((4, 2)), 4)
        out = predict(params, f)
        assert np.array_equal(out.rows, np.zeros((4, 3), dtype=np.float32))

    def test_onehot_weight_selects_feature(self):
        d = 3
        w = np.zeros((d + 1, 3))
        w[1, 0] = 1.0       # class 0 logit = feature 1
        w[d, 0] = 0.25      # plus bias
        params = ModelParams(w, np.zeros(d), np.ones(d))
        f = FeatureMatrix(np.array([[5.0, 7.0, -2.0]]), 4)
        out = predict(params, f)
        assert out.rows[0, 0] == pytest.approx(7.25)

    def test_shape(self):
        params = ModelParams(np.zeros((12, 3)), np.zeros(11), np.ones(11))
        f = FeatureMatrix(np.zeros((9, 11)), 400)
        assert predict(params, f).rows.shape == (9, 3)

    def test_dim_mismatch(self):
        params = ModelParams(np.zeros((3, 3)), np.zeros(2), np.ones(2))
        with pytest.raises(ValueError, match="dim"):
            predict(params, FeatureMatrix(np.zeros((4, 5)), 4))


class TestTrainBaseline:
    def test_deterministic(self, small_datasets):
        train, val = small_datasets
        cfg = TrainConfig(max_epochs=5, patience=5)
        a = train_baseline(train, val, cfg)
        b = train_baseline(train, val, cfg)
        assert np.array_equal(a.weights, b.weights)
        assert np.array_equal(a.feat_mean, b.feat_mean)

    def test_epoch_one_reduces_training_loss(self, small_datasets):
        train, val = small_datasets
        losses = []
        cfg = TrainConfig(max_epochs=1, patience=1)
        from segwords.classifier import _loss_for
        init = ModelParams(np.zeros((train[0].features.dim + 1, 3)),
                           np.zeros(train[0].features.dim),
                           np.ones(train[0].features.dim))
        # initial loss measured with the trainer's own normalization
        params = train_baseline(train, val, cfg,
                                on_epoch=lambda e, l, r: losses.append(l))
        batch = [(s.features, s.labels) for s in train]
        initial = _loss_for(ModelParams(np.zeros_like(params.weights),
                                        params.feat_mean, params.feat_std), batch)
        assert losses[0] < initial

    def test_patience_one_constant_score_stops_after_two_epochs(self, small_datasets):
        train, val = small_datasets
        epochs = []
        cfg = TrainConfig(learning_rate=1e-12, patience=1, max_epochs=50)
        train_baseline(train, val, cfg, on_epoch=lambda e, l, r: epochs.append(e))
        assert epochs == [1, 2]

    def test_separable_batch_loss_collapses(self):
        # three well-separated feature clusters, one per class
        rng = np.random.default_rng(9)
        d = 2
        centers = np.array([[4.0, 0.0], [-4.0, 4.0], [0.0, -4.0]])
        samples = []
        from segwords.classifier import UttSample, _loss_for
        for u in range(6):
            codes = rng.integers(0, 3, 20).astype(np.int8)
            rows = centers[codes] + rng.normal(0, 0.3, (20, d))
            samples.append(UttSample(
                utterance_id=f"u{u}",
                features=FeatureMatrix(rows, 4),
                labels=FrameLabelSeq(codes, 4),
                ref_times=np.array([0.01]),
                sample_rate=16000,
            ))
        cfg = TrainConfig(learning_rate=0.5, batch_size=6, patience=200,
                          max_epochs=200, augment=AugmentConfig(0),
                          val_metric="accuracy")
        params = train_baseline(samples, samples, cfg)
        batch = [(s.features, s.labels) for s in samples]
        initial = _loss_for(ModelParams(np.zeros_like(params.weights),
                                        params.feat_mean, params.feat_std), batch)
        assert _loss_for(params, batch) < 0.1 * initial

    def test_divergence_aborts(self, small_datasets):
        # an absurd step size overflows the weights on the first update
        train, val = small_datasets
        cfg = TrainConfig(learning_rate=1e308, max_epochs=5, patience=5)
        with np.errstate(all="ignore"):
            with pytest.raises(TrainingDivergedError, match="non-finite"):
                train_baseline(train, val, cfg)

    def test_accuracy_metric_path(self, small_datasets):
        train, val = small_datasets
        cfg = TrainConfig(max_epochs=2, patience=2, val_metric="accuracy")
        scores = []
        train_baseline(train, val, cfg, on_epoch=lambda e, l, r: scores.append(r))
        assert all(0.0 <= s <= 1.0 for s in scores)


class TestModelIO:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(3)
        params = make_params(rng, 11)
        p = tmp_path / "model.txt"
        write_model(p, params)
        loaded = read_model(p)
        np.testing.assert_array_equal(loaded.weights, params.weights)
        np.testing.assert_array_equal(loaded.feat_mean, params.feat_mean)
        np.testing.assert_array_equal(loaded.feat_std, params.feat_std)

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "model.txt"
        p.write_text("NOT-A-MODEL 1\n")
        with pytest.raises(InputError, match="bad magic"):
            read_model(p)

    def test_truncated(self, tmp_path):
        p = tmp_path / "model.txt"
        p.write_text("SEGWORDS-MODEL 1\n11 3\n0.0 0.0 0.0\n")
        with pytest.raises(InputError, match="truncated|malformed"):
            read_model(p)
