import math

import numpy as np
import pytest

from scriptstress.backends import SentimentScores
from scriptstress.stress import (PageStressRecord, StressLevel, StressWeights, build_record,
                                 classify_stress, raw_stress_index, shannon_entropy, stress_index)

from conftest import RECORDED_ENTROPY, RECORDED_STRESS, RECORDED_TRIPLE

UNIFORM = SentimentScores(1 / 3, 1 / 3, 1 / 3)


def closed_form_stress(n, u, p):
    h = -sum(x * math.log(x) for x in (n, u, p) if x > 0)
    return 0.6 * n + 0.3 * h + 0.1 * (1 - p)


class TestEntropy:
    def test_recorded(self):
        s = SentimentScores(*RECORDED_TRIPLE)
        assert shannon_entropy(s, np.float32) == pytest.approx(RECORDED_ENTROPY, abs=1e-9)
        # double precision disagrees only in the 8th decimal
        assert shannon_entropy(s) == pytest.approx(RECORDED_ENTROPY, abs=2e-8)

    def test_degenerate(self):
        assert shannon_entropy(SentimentScores(1, 0, 0)) == 0.0
        assert shannon_entropy(SentimentScores(0, 0, 1), np.float32) == 0.0

    def test_uniform(self):
        assert shannon_entropy(UNIFORM) == pytest.approx(math.log(3), abs=1e-12)

    def test_uniform_is_max(self):
        rng = np.random.default_rng(0)
        h_max = shannon_entropy(UNIFORM)
        for q in rng.dirichlet([1, 1, 1], size=1000):
            assert shannon_entropy(SentimentScores(*q)) < h_max

    def test_permutation_invariant(self):
        rng = np.random.default_rng(1)
        for q in rng.dirichlet([0.5, 1, 2], size=200):
            vals = {round(shannon_entropy(SentimentScores(*q[list(perm)])), 13)
                    for perm in ((0, 1, 2), (2, 0, 1), (1, 2, 0), (0, 2, 1))}
            assert len(vals) == 1


class TestStressIndex:
    def test_recorded(self):
        s = SentimentScores(*RECORDED_TRIPLE)
        assert stress_index(s, dtype=np.float32) == pytest.approx(RECORDED_STRESS, abs=1e-9)

    @pytest.mark.parametrize("triple,expected", [
        ((1, 0, 0), 0.7), ((0, 1, 0), 0.1), ((0, 0, 1), 0.0),
    ])
    def test_vertices(self, triple, expected):
        assert stress_index(SentimentScores(*triple)) == pytest.approx(expected, abs=1e-15)

    def test_uniform(self):
        expected = 0.2 + 0.3 * math.log(3) + 0.1 * (2 / 3)
        assert expected == pytest.approx(0.5962504, abs=1e-7)
        assert stress_index(UNIFORM) == pytest.approx(expected, abs=1e-12)

    def test_simplex_grid_range(self):
        raws = []
        for i in range(101):
            for j in range(101 - i):
                n, p = i / 100, j / 100
                u = max(0.0, 1.0 - n - p)
                s = SentimentScores(n, u, p)
                raw = raw_stress_index(s)
                assert raw == pytest.approx(closed_form_stress(n, u, p), abs=1e-12)
                assert 0.0 <= stress_index(s) <= 1.0
                raws.append(raw)
        assert min(raws) >= 0.0 and max(raws) <= 1.0297
        # maximizing a.p + T*H over the simplex gives T*ln(sum exp(a/T)); here
        # a = (0.6, 0, -0.1), T = 0.3, plus the constant 0.1
        true_max = 0.3 * math.log(math.exp(2) + 1 + math.exp(-1 / 3)) + 0.1
        assert max(raws) <= true_max + 1e-12
        assert max(raws) == pytest.approx(true_max, abs=1e-3)

    def test_clamp_warns(self, caplog):
        s = SentimentScores(0.75, 0.15, 0.10)
        w = StressWeights(1.0, 0.5, 0.2)
        assert raw_stress_index(s, w) > 1.0
        assert stress_index(s, w) == 1.0
        assert "clamping" in caplog.text

    def test_custom_weights(self):
        w = StressWeights(1.0, 0.0, 0.0)
        assert stress_index(SentimentScores(0.4, 0.5, 0.1), w) == pytest.approx(0.4)
        with pytest.raises(ValueError):
            StressWeights(-0.1, 0.3, 0.1)


class TestClassify:
    @pytest.mark.parametrize("score,level", [
        (0.2637971342, StressLevel.LOW), (0.31, StressLevel.HIGH), (0.30, StressLevel.LOW), (0.0, StressLevel.LOW),
    ])
    def test_default_threshold(self, score, level):
        assert classify_stress(score) is level

    def test_custom_threshold(self):
        assert classify_stress(0.25, threshold=0.2) is StressLevel.HIGH


class TestRecord:
    def test_recorded_record(self):
        r = build_record("student0_page_2", SentimentScores(*RECORDED_TRIPLE), dtype=np.float32)
        assert r.student == "student0_page_2"
        assert r.sentiment.as_tuple() == RECORDED_TRIPLE
        assert r.entropy == pytest.approx(RECORDED_ENTROPY, abs=1e-9)
        assert r.stress_index == pytest.approx(RECORDED_STRESS, abs=1e-9)

    def test_pure_neutral(self):
        r = build_record("x_page_1", SentimentScores(0, 1, 0))
        assert (r.entropy, r.stress_index) == (0.0, pytest.approx(0.1, abs=1e-15))

    def test_pure_negative(self):
        r = build_record("x_page_1", SentimentScores(1, 0, 0))
        assert (r.entropy, r.stress_index) == (0.0, pytest.approx(0.7, abs=1e-15))

    def test_reproducible(self):
        rng = np.random.default_rng(2)
        for q in rng.dirichlet([1, 1, 1], size=100):
            r = build_record("x_page_1", SentimentScores(*q))
            assert stress_index(r.sentiment) == r.stress_index
            assert min(max(closed_form_stress(*r.sentiment.as_tuple()), 0), 1) == pytest.approx(r.stress_index, abs=1e-12)

    def test_json_round_trip(self):
        r = build_record("x_page_3", SentimentScores(0.2, 0.5, 0.3))
        assert PageStressRecord.from_json(r.to_json()) == r
        assert list(r.to_json()) == ["student", "sentiment", "entropy", "stress_index"]
