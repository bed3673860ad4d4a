import numpy as np
import pytest

from screl.ensemble import average, blend, combine, rnn_weight, write_probabilities


def random_dist(rng, n, k):
    raw = rng.random((n, k)) + 1e-3
    return raw / raw.sum(axis=1, keepdims=True)


class TestRnnWeight:
    def test_endpoints_hit_the_caps(self):
        assert rnn_weight(10, 10, 30) == pytest.approx(0.25)
        assert rnn_weight(30, 10, 30) == pytest.approx(0.75)

    def test_midpoint_is_even_split(self):
        assert rnn_weight(20, 10, 30) == pytest.approx(0.5)

    def test_quarter_points(self):
        # s = -0.25 -> 0.5 - 0.0625; s = +0.25 -> 0.5 + 0.0625
        assert rnn_weight(15, 10, 30) == pytest.approx(0.4375)
        assert rnn_weight(25, 10, 30) == pytest.approx(0.5625)

    def test_degenerate_range(self):
        assert rnn_weight(4, 4, 4) == 0.5

    def test_monotone_in_length(self):
        values = [rnn_weight(n, 0, 100) for n in range(101)]
        assert all(a <= b for a, b in zip(values, values[1:]))
        assert all(0.25 <= v <= 0.75 for v in values)

    def test_symmetry_about_midpoint(self):
        for offset in range(0, 11):
            lo = rnn_weight(50 - offset, 0, 100)
            hi = rnn_weight(50 + offset, 0, 100)
            assert lo + hi == pytest.approx(1.0)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError, match="outside"):
            rnn_weight(31, 10, 30)
        with pytest.raises(ValueError, match="exceeds"):
            rnn_weight(5, 10, 3)


class TestAverage:
    def test_mean_of_valid_rows(self):
        a = np.array([[0.2, 0.8], [0.5, 0.5]])
        b = np.array([[0.4, 0.6], [0.9, 0.1]])
        np.testing.assert_allclose(average([a, b]),
                                   [[0.3, 0.7], [0.7, 0.3]], atol=1e-12)

    def test_single_member_is_identity(self):
        rng = np.random.default_rng(1)
        a = random_dist(rng, 4, 3)
        np.testing.assert_allclose(average([a]), a, atol=1e-12)

    def test_idempotent(self):
        rng = np.random.default_rng(2)
        a = random_dist(rng, 5, 6)
        once = average([a, a, a])
        np.testing.assert_allclose(once, a, atol=1e-12)

    def test_rows_stay_normalized(self):
        rng = np.random.default_rng(3)
        members = [random_dist(rng, 8, 6) for _ in range(12)]
        out = average(members)
        np.testing.assert_allclose(out.sum(axis=1), 1.0, atol=1e-12)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError, match="shape"):
            average([np.full((2, 2), 0.5), np.full((3, 2), 0.5)])

    def test_unnormalized_rows_rejected(self):
        bad = np.array([[0.6, 0.6]])
        with pytest.raises(ValueError, match="sum to 1"):
            average([bad])
        # within tolerance is fine
        ok = np.array([[0.5, 0.5 + 5e-7]])
        average([ok])

    def test_negative_probabilities_rejected(self):
        bad = np.array([[1.2, -0.2]])
        with pytest.raises(ValueError, match="negative"):
            average([bad])

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="zero"):
            average([])


class TestCombine:
    def test_hand_blend(self):
        cnn = np.array([[0.8, 0.2]])
        rnn = np.array([[0.2, 0.8]])
        # length at max -> w = 0.75
        out = combine(cnn, rnn, [30], 10, 30)
        expected = 0.75 * rnn + 0.25 * cnn
        np.testing.assert_allclose(out, expected, atol=1e-12)

    def test_each_row_uses_its_own_length(self):
        cnn = np.array([[1.0, 0.0], [1.0, 0.0]])
        rnn = np.array([[0.0, 1.0], [0.0, 1.0]])
        out = combine(cnn, rnn, [10, 30], 10, 30)
        np.testing.assert_allclose(out[0], [0.75, 0.25], atol=1e-12)
        np.testing.assert_allclose(out[1], [0.25, 0.75], atol=1e-12)

    def test_convexity(self):
        rng = np.random.default_rng(4)
        cnn = random_dist(rng, 20, 6)
        rnn = random_dist(rng, 20, 6)
        lengths = rng.integers(5, 40, size=20)
        out = combine(cnn, rnn, lengths.tolist(), 5, 39)
        low = np.minimum(cnn, rnn)
        high = np.maximum(cnn, rnn)
        assert np.all(out >= low - 1e-12)
        assert np.all(out <= high + 1e-12)
        np.testing.assert_allclose(out.sum(axis=1), 1.0, atol=1e-12)

    def test_length_count_must_match(self):
        with pytest.raises(ValueError, match="lengths"):
            combine(np.full((2, 2), 0.5), np.full((2, 2), 0.5), [7], 5, 9)
        with pytest.raises(ValueError, match="disagree"):
            combine(np.full((2, 2), 0.5), np.full((2, 3), 1 / 3), [7, 8], 5, 9)


class TestBlend:
    def test_single_architecture_passthrough(self):
        rng = np.random.default_rng(5)
        members = [random_dist(rng, 6, 4) for _ in range(3)]
        out = blend(members, ["cnn"] * 3, lengths=[5] * 6)
        np.testing.assert_allclose(out, average(members), atol=1e-12)

    def test_two_architectures_match_manual_pipeline(self):
        rng = np.random.default_rng(6)
        cnn_members = [random_dist(rng, 5, 3) for _ in range(2)]
        rnn_members = [random_dist(rng, 5, 3) for _ in range(2)]
        lengths = [3, 7, 11, 15, 19]
        out = blend(cnn_members + rnn_members, ["cnn", "cnn", "rnn", "rnn"],
                    lengths)
        manual = combine(average(cnn_members), average(rnn_members),
                         lengths, 3, 19)
        np.testing.assert_allclose(out, manual, atol=1e-12)

    def test_explicit_range_clips_out_of_range_lengths(self):
        rng = np.random.default_rng(7)
        cnn = [random_dist(rng, 3, 2)]
        rnn = [random_dist(rng, 3, 2)]
        out = blend(cnn + rnn, ["cnn", "rnn"], lengths=[1, 10, 99],
                    min_length=5, max_length=20)
        clipped = combine(cnn[0], rnn[0], [5, 10, 20], 5, 20)
        np.testing.assert_allclose(out, clipped, atol=1e-12)

    def test_unknown_architecture_rejected(self):
        with pytest.raises(ValueError, match="unknown architecture"):
            blend([np.full((1, 2), 0.5)], ["gru"], [4])

    def test_count_mismatch_rejected(self):
        with pytest.raises(ValueError, match="architectures"):
            blend([np.full((1, 2), 0.5)], ["cnn", "rnn"], [4])


class TestWriteProbabilities:
    def test_layout(self, tmp_path):
        path = tmp_path / "probs.tsv"
        probs = np.array([[0.25, 0.75], [0.5, 0.5]])
        write_probabilities(path, probs, ["USAGE", "RESULT"],
                            ["T-1.1|T-1.2", "T-2.1|T-2.3"],
                            header_comment="run abc123")
        lines = path.read_text().splitlines()
        assert lines[0] == "# run abc123"
        assert lines[1] == "instance\tUSAGE\tRESULT"
        assert lines[2] == "T-1.1|T-1.2\t0.250000\t0.750000"
        assert lines[3] == "T-2.1|T-2.3\t0.500000\t0.500000"

    def test_no_comment_line_when_absent(self, tmp_path):
        path = tmp_path / "probs.tsv"
        write_probabilities(path, np.array([[1.0]]), ["A"], ["x"])
        assert path.read_text().splitlines()[0] == "instance\tA"

    def test_dimension_checks(self, tmp_path):
        with pytest.raises(ValueError, match="class names"):
            write_probabilities(tmp_path / "p.tsv", np.ones((1, 2)),
                                ["A"], ["x"])
        with pytest.raises(ValueError, match="instance ids"):
            write_probabilities(tmp_path / "p.tsv", np.full((2, 1), 1.0),
                                ["A"], ["x"])
