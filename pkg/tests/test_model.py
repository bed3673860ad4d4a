import numpy as np
import pytest

from screl.features import EncodedExample
from screl.model import (
    Adam,
    Batch,
    CnnConfig,
    CnnModel,
    EmbedSpec,
    RnnConfig,
    RnnModel,
    class_weights,
    load_model,
    make_batch,
    save_model,
    softmax,
    train_step,
    weighted_ce,
    weighted_ce_batch,
)
from screl.model.layers import (
    conv_maxpool_forward,
    dropout_forward,
    lstm_forward,
    reverse_padded,
)

SMALL = EmbedSpec(vocab_size=7, pos_size=5, relpos_size=9,
                  word_dim=4, pos_dim=3, relpos_dim=2)


def random_examples(rng, n, spec, n_classes, lengths=None):
    out = []
    for i in range(n):
        t = int(lengths[i]) if lengths is not None else int(rng.integers(4, 8))
        out.append(EncodedExample(
            word_ids=rng.integers(0, spec.vocab_size, t),
            pos_ids=rng.integers(0, spec.pos_size, t),
            relpos1_ids=rng.integers(0, spec.relpos_size, t),
            relpos2_ids=rng.integers(0, spec.relpos_size, t),
            label=int(rng.integers(0, n_classes)),
            length=t,
            original_length=max(t - 6, 0),
        ))
    return out


def small_cnn(seed=0, dropout_keep=1.0, l2=0.01, dtype=np.float64):
    cfg = CnnConfig(filter_widths=(2, 3), filters_per_width=3,
                    dropout_keep=dropout_keep, l2_lambda=l2)
    return CnnModel(SMALL, cfg, n_classes=3, seed=seed, dtype=dtype)


def small_rnn(seed=0, dropout_keep=1.0, l2=0.01, dtype=np.float64):
    cfg = RnnConfig(lstm_units=4, dropout_keep=dropout_keep, l2_lambda=l2)
    return RnnModel(SMALL, cfg, n_classes=3, seed=seed, dtype=dtype)


def numeric_gradient(model, batch, weights, name, index, eps=1e-6):
    param = model.params[name]
    orig = param[index]
    param[index] = orig + eps
    hi, _ = model.loss_and_grads(batch, weights, train=False)
    param[index] = orig - eps
    lo, _ = model.loss_and_grads(batch, weights, train=False)
    param[index] = orig
    return (hi - lo) / (2.0 * eps)


class TestGradients:
    """Analytic gradients against central finite differences, float64."""

    WEIGHTS = np.array([1.0, 2.5, 0.7])

    def check_model(self, model, seed):
        rng = np.random.default_rng(seed)
        examples = random_examples(rng, 3, SMALL, 3)
        batch = make_batch(examples, word_pad=0, pos_pad=0, relpos_pad=0,
                           min_length=model.min_length)
        _, grads = model.loss_and_grads(batch, self.WEIGHTS, train=False)
        assert set(grads) == set(model.params)
        for name, grad in grads.items():
            assert grad.shape == model.params[name].shape
            flat = grad.reshape(-1)
            for j in range(flat.size):
                idx = np.unravel_index(j, grad.shape)
                num = numeric_gradient(model, batch, self.WEIGHTS, name, idx)
                diff = abs(num - flat[j])
                # absolute floor absorbs finite-difference roundoff
                # (~1e-10 at eps=1e-6) on near-zero entries
                if diff >= 1e-8:
                    rel = diff / (abs(num) + abs(flat[j]))
                    assert rel < 1e-6, (
                        f"{name}{idx}: analytic {flat[j]}, numeric {num}")

    def test_cnn_gradients(self):
        self.check_model(small_cnn(seed=5), seed=50)

    def test_rnn_gradients(self):
        self.check_model(small_rnn(seed=6), seed=60)

    def test_frozen_word_table_gets_no_gradient(self):
        spec = EmbedSpec(vocab_size=7, pos_size=5, relpos_size=9,
                         word_dim=4, pos_dim=3, relpos_dim=2,
                         finetune_words=False)
        cfg = CnnConfig((2, 3), 3, dropout_keep=1.0, l2_lambda=0.0)
        model = CnnModel(spec, cfg, n_classes=3, seed=1, dtype=np.float64)
        rng = np.random.default_rng(2)
        batch = make_batch(random_examples(rng, 2, spec, 3), 0, 0, 0,
                           min_length=3)
        _, grads = model.loss_and_grads(batch, np.ones(3), train=False)
        assert "word_emb" not in grads
        assert "pos_emb" in grads


class TestPaddingInvariance:
    """Extra padding must never leak into features or predictions."""

    @pytest.mark.parametrize("build", [small_cnn, small_rnn],
                             ids=["cnn", "rnn"])
    def test_batched_equals_solo(self, build):
        model = build(dtype=np.float64)
        rng = np.random.default_rng(7)
        examples = random_examples(rng, 4, SMALL, 3,
                                   lengths=np.array([4, 9, 5, 12]))
        together = model.predict_proba(
            make_batch(examples, 0, 0, 0, min_length=model.min_length))
        for i, ex in enumerate(examples):
            alone = model.predict_proba(
                make_batch([ex], 0, 0, 0, min_length=model.min_length))
            np.testing.assert_allclose(alone[0], together[i], atol=1e-12)

    def test_lstm_ignores_steps_past_length(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(2, 6, 5))
        w = rng.normal(size=(5 + 4, 16))
        b = rng.normal(size=16)
        mask = np.zeros((2, 6))
        mask[:, :3] = 1.0
        h_full, c_full, _ = lstm_forward(x, mask, w, b)
        h_cut, c_cut, _ = lstm_forward(x[:, :3], mask[:, :3], w, b)
        np.testing.assert_array_equal(h_full, h_cut)
        np.testing.assert_array_equal(c_full, c_cut)

    def test_conv_pooling_ignores_positions_past_valid(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(1, 6, 3))
        x[0, 4:] = 100.0  # padding region: enormous activations
        w = rng.normal(size=(2 * 3, 2))
        b = np.zeros(2)
        valid = np.array([3])  # windows starting at 0..2 only
        pooled, _ = conv_maxpool_forward(x, w, b, width=2, valid=valid)
        x2 = x.copy()
        x2[0, 4:] = -100.0
        pooled2, _ = conv_maxpool_forward(x2, w, b, width=2, valid=valid)
        np.testing.assert_array_equal(pooled, pooled2)


class TestArchitectureShape:
    def test_cnn_feature_dim_at_defaults(self):
        cfg = CnnConfig()
        assert cfg.filter_widths == (2, 3, 4, 5, 6, 7)
        assert cfg.filters_per_width == 192
        model = CnnModel(EmbedSpec(10, 5, 9), cfg, n_classes=6, seed=0)
        assert model.feature_dim == 6 * 192 == 1152
        assert model.params["fc_w"].shape == (1152, 6)
        assert model.min_length == 7

    def test_rnn_feature_dim_at_defaults(self):
        cfg = RnnConfig()
        assert cfg.lstm_units == 600
        model = RnnModel(EmbedSpec(10, 5, 9, word_dim=8, pos_dim=4,
                                   relpos_dim=2), cfg, n_classes=6, seed=0)
        assert model.feature_dim == 4 * 600 == 2400

    def test_token_dim_is_sum_of_channels(self):
        spec = EmbedSpec(10, 5, 9, word_dim=200, pos_dim=30, relpos_dim=20)
        assert spec.token_dim == 200 + 30 + 20 + 20 == 270

    def test_forget_gate_bias_starts_at_one(self):
        model = small_rnn()
        h = model.config.lstm_units
        for direction in ("fwd", "bwd"):
            bias = model.params[f"lstm_{direction}_b"]
            np.testing.assert_array_equal(bias[h:2 * h], 1.0)
            np.testing.assert_array_equal(bias[:h], 0.0)
            np.testing.assert_array_equal(bias[2 * h:], 0.0)

    def test_word_init_is_copied_and_checked(self):
        table = np.full((7, 4), 0.25)
        model = CnnModel(SMALL, CnnConfig((2,), 2), 3, seed=0,
                         dtype=np.float64, word_init=table)
        np.testing.assert_array_equal(model.params["word_emb"], table)
        table[0, 0] = 9.0
        assert model.params["word_emb"][0, 0] == 0.25
        with pytest.raises(ValueError, match="shape"):
            CnnModel(SMALL, CnnConfig((2,), 2), 3,
                     word_init=np.zeros((7, 5)))

    def test_config_validation(self):
        with pytest.raises(ValueError, match="ascending"):
            CnnConfig(filter_widths=(3, 2))
        with pytest.raises(ValueError, match="ascending"):
            CnnConfig(filter_widths=(2, 2, 3))
        with pytest.raises(ValueError, match="positive"):
            CnnConfig(filter_widths=())
        with pytest.raises(ValueError, match="lstm_units"):
            RnnConfig(lstm_units=0)
        with pytest.raises(ValueError, match="vocab_size"):
            EmbedSpec(0, 5, 9)
        with pytest.raises(ValueError, match="dropout_keep"):
            CnnModel(SMALL, CnnConfig((2,), 2, dropout_keep=0.0), 3)
        with pytest.raises(ValueError, match="n_classes"):
            CnnModel(SMALL, CnnConfig((2,), 2), 1)


class TestLoss:
    def test_class_weights_balance_expected_loss(self):
        counts = np.array([619.0, 136.0])
        w = class_weights(counts)
        # total / (n_classes * count)
        np.testing.assert_allclose(w, [755.0 / (2 * 619), 755.0 / (2 * 136)],
                                   rtol=0, atol=1e-15)
        assert float(np.dot(counts, w)) == pytest.approx(counts.sum())

    def test_class_weights_reject_empty_and_zero(self):
        with pytest.raises(ValueError):
            class_weights([])
        with pytest.raises(ValueError, match="class 1"):
            class_weights([4, 0, 2])

    def test_single_example_loss(self):
        loss = weighted_ce([0.2, 0.5, 0.3], 1, [1.0, 2.0, 0.5])
        assert loss == pytest.approx(-2.0 * np.log(0.5))

    def test_tiny_probability_is_clamped(self):
        loss = weighted_ce([1.0, 0.0], 1, [1.0, 1.0])
        assert np.isfinite(loss)
        assert loss == pytest.approx(-np.log(1e-12))

    def test_batch_loss_matches_per_example_mean(self):
        rng = np.random.default_rng(8)
        logits = rng.normal(size=(5, 3))
        labels = np.array([0, 2, 1, 1, 0])
        weights = np.array([1.0, 3.0, 0.5])
        loss, _ = weighted_ce_batch(logits, labels, weights)
        probs = softmax(logits)
        expected = np.mean([
            weighted_ce(probs[i], labels[i], weights) for i in range(5)
        ])
        assert loss == pytest.approx(expected, rel=1e-12)

    def test_batch_gradient_against_finite_differences(self):
        rng = np.random.default_rng(9)
        logits = rng.normal(size=(4, 3))
        labels = np.array([0, 2, 1, 1])
        weights = np.array([1.0, 2.0, 0.5])
        _, dlogits = weighted_ce_batch(logits, labels, weights)
        eps = 1e-6
        for i in range(4):
            for j in range(3):
                bumped = logits.copy()
                bumped[i, j] += eps
                hi, _ = weighted_ce_batch(bumped, labels, weights)
                bumped[i, j] -= 2 * eps
                lo, _ = weighted_ce_batch(bumped, labels, weights)
                assert dlogits[i, j] == pytest.approx((hi - lo) / (2 * eps),
                                                      abs=1e-8)

    def test_softmax_rows_sum_to_one(self):
        rng = np.random.default_rng(10)
        logits = rng.normal(size=(6, 4)) * 50
        probs = softmax(logits)
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-12)
        assert np.all(probs >= 0)


class TestOptimizer:
    def test_first_step_moves_by_lr_times_sign(self):
        # With constant gradient g the bias-corrected moments are exactly
        # g and g*g at every step, so each update is lr*g/(|g| + eps).
        params = {"p": np.array([1.0, -2.0])}
        grad = {"p": np.array([0.5, -0.25])}
        opt = Adam(eps=1e-8)
        opt.step(params, grad, lr=0.1)
        expected = np.array([1.0, -2.0]) - 0.1 * grad["p"] / (
            np.abs(grad["p"]) + 1e-8)
        np.testing.assert_allclose(params["p"], expected, rtol=1e-9)
        opt.step(params, grad, lr=0.1)
        np.testing.assert_allclose(
            params["p"],
            expected - 0.1 * grad["p"] / (np.abs(grad["p"]) + 1e-8),
            rtol=1e-9)
        assert opt.t == 2

    def test_parameters_without_gradients_stay_frozen(self):
        params = {"a": np.ones(2), "frozen": np.ones(2)}
        opt = Adam()
        opt.step(params, {"a": np.ones(2)}, lr=0.05)
        np.testing.assert_array_equal(params["frozen"], 1.0)
        assert not np.array_equal(params["a"], np.ones(2))


class TestDropout:
    def test_eval_pass_is_identity(self):
        x = np.arange(6.0).reshape(2, 3)
        out, mask = dropout_forward(x, 0.5, rng=None)
        assert mask is None
        np.testing.assert_array_equal(out, x)

    def test_training_scales_survivors(self):
        rng = np.random.default_rng(11)
        x = np.ones((400, 50))
        out, mask = dropout_forward(x, 0.5, rng)
        values = np.unique(out)
        np.testing.assert_allclose(values, [0.0, 2.0])
        assert abs(out.mean() - 1.0) < 0.05

    def test_training_forward_requires_rng(self):
        model = small_cnn(dropout_keep=0.5)
        rng = np.random.default_rng(12)
        batch = make_batch(random_examples(rng, 2, SMALL, 3), 0, 0, 0,
                           min_length=3)
        with pytest.raises(ValueError, match="dropout rng"):
            model.forward(batch, train=True)
        logits, _ = model.forward(batch, train=True,
                                  dropout_rng=np.random.default_rng(0))
        assert logits.shape == (2, 3)


class TestBatching:
    def test_make_batch_pads_to_min_length(self):
        rng = np.random.default_rng(13)
        examples = random_examples(rng, 2, SMALL, 3,
                                   lengths=np.array([4, 5]))
        batch = make_batch(examples, word_pad=6, pos_pad=0, relpos_pad=0,
                           min_length=9)
        assert batch.word.shape == (2, 9)
        assert batch.word[0, 4:].tolist() == [6] * 5
        np.testing.assert_array_equal(batch.lengths, [4, 5])
        mask = batch.mask()
        assert mask[0].tolist() == [1, 1, 1, 1, 0, 0, 0, 0, 0]

    def test_any_unlabeled_example_clears_labels(self):
        rng = np.random.default_rng(14)
        a, b = random_examples(rng, 2, SMALL, 3)
        unlabeled = EncodedExample(
            word_ids=b.word_ids, pos_ids=b.pos_ids,
            relpos1_ids=b.relpos1_ids, relpos2_ids=b.relpos2_ids,
            label=None, length=b.length,
            original_length=b.original_length)
        assert make_batch([a, b], 0, 0, 0).labels is not None
        assert make_batch([a, unlabeled], 0, 0, 0).labels is None

    def test_empty_batch_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            make_batch([], 0, 0, 0)

    def test_loss_needs_labels(self):
        model = small_cnn()
        rng = np.random.default_rng(15)
        batch = make_batch(random_examples(rng, 2, SMALL, 3), 0, 0, 0,
                           min_length=3)
        batch.labels = None
        with pytest.raises(ValueError, match="labels"):
            model.loss_and_grads(batch, np.ones(3))

    def test_short_batch_rejected_by_cnn(self):
        model = small_cnn()
        rng = np.random.default_rng(16)
        batch = make_batch(random_examples(rng, 1, SMALL, 3,
                                           lengths=np.array([2])), 0, 0, 0)
        with pytest.raises(ValueError, match="filter"):
            model.predict_proba(batch)

    def test_reverse_padded_is_involution(self):
        rng = np.random.default_rng(17)
        arr = rng.normal(size=(3, 7, 2))
        lengths = np.array([3, 7, 5])
        twice = reverse_padded(reverse_padded(arr, lengths), lengths)
        np.testing.assert_array_equal(twice, arr)
        once = reverse_padded(arr, lengths)
        np.testing.assert_array_equal(once[0, 3:], arr[0, 3:])
        np.testing.assert_array_equal(once[0, :3], arr[0, :3][::-1])


class TestTrainStep:
    def test_loss_decreases_on_fixed_batch(self):
        model = small_cnn(dropout_keep=1.0, l2=0.0)
        rng = np.random.default_rng(18)
        batch = make_batch(random_examples(rng, 6, SMALL, 3), 0, 0, 0,
                           min_length=3)
        opt = Adam()
        weights = np.ones(3)
        first = train_step(model, batch, opt, 0.01, weights)
        for _ in range(30):
            last = train_step(model, batch, opt, 0.01, weights)
        assert last < first

    def test_non_finite_loss_aborts(self):
        model = small_cnn()
        model.params["fc_b"][:] = np.inf
        rng = np.random.default_rng(19)
        batch = make_batch(random_examples(rng, 2, SMALL, 3), 0, 0, 0,
                           min_length=3)
        with np.errstate(invalid="ignore"):
            with pytest.raises(FloatingPointError, match="non-finite"):
                train_step(model, batch, Adam(), 0.01, np.ones(3))


class TestCheckpoint:
    @pytest.mark.parametrize("build", [small_cnn, small_rnn],
                             ids=["cnn", "rnn"])
    def test_round_trip_is_bit_exact(self, build, tmp_path):
        model = build(seed=21, dropout_keep=0.5, dtype=np.float32)
        rng = np.random.default_rng(22)
        for value in model.params.values():
            value += rng.normal(size=value.shape).astype(value.dtype)
        path = tmp_path / "model.npz"
        save_model(path, model, extra={"note": "trained", "index": 3})
        loaded, extra = load_model(path)
        assert extra == {"note": "trained", "index": 3}
        assert loaded.arch == model.arch
        assert loaded.dtype == model.dtype
        assert set(loaded.params) == set(model.params)
        for name in model.params:
            np.testing.assert_array_equal(loaded.params[name],
                                          model.params[name])
        batch = make_batch(random_examples(rng, 3, SMALL, 3), 0, 0, 0,
                           min_length=model.min_length)
        np.testing.assert_array_equal(model.predict_proba(batch),
                                      loaded.predict_proba(batch))

    def test_wrong_format_rejected(self, tmp_path):
        path = tmp_path / "junk.npz"
        np.savez(path, __meta__=np.array('{"format": "other"}'),
                 param_x=np.zeros(2))
        with pytest.raises(ValueError, match="not a model checkpoint"):
            load_model(path)


class TestPrediction:
    @pytest.mark.parametrize("build", [small_cnn, small_rnn],
                             ids=["cnn", "rnn"])
    def test_probabilities_are_a_distribution(self, build):
        model = build()
        rng = np.random.default_rng(23)
        batch = make_batch(random_examples(rng, 5, SMALL, 3), 0, 0, 0,
                           min_length=model.min_length)
        probs = model.predict_proba(batch)
        assert probs.shape == (5, 3)
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-6)
        np.testing.assert_array_equal(model.predict(batch),
                                      probs.argmax(axis=1))

    def test_same_seed_same_init(self):
        a = small_rnn(seed=30)
        b = small_rnn(seed=30)
        c = small_rnn(seed=31)
        for name in a.params:
            np.testing.assert_array_equal(a.params[name], b.params[name])
        assert any(not np.array_equal(a.params[n], c.params[n])
                   for n in a.params)
