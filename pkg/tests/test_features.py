import pickle

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import quantiles_by_hand

from mlterm.corpus import Corpus, Sentence, Token
from mlterm.errors import ConfigError
from mlterm.features import (
    FEATURE_NAMES,
    FeatureConfig,
    FeatureMatrix,
    FeatureRow,
    bin_value,
    extract_features,
    fit_binner,
    observations,
    read_feature_matrix,
    write_feature_matrix,
)


def _numeric_matrix(values, col="delta_freq"):
    return FeatureMatrix((col,), [[FeatureRow(**{col: float(v)}) for v in values]])


class TestFeatureConfig:
    def test_default_is_all_sixteen(self):
        assert FeatureConfig().columns == FEATURE_NAMES
        assert len(FEATURE_NAMES) == 16

    def test_group_names(self):
        assert FeatureConfig.parse("Word").columns == ("word",)
        cfg = FeatureConfig.parse("ΔFreq+ΔFreq_Sen")
        assert cfg.columns == ("word", "pos", "delta_freq", "delta_freq_sen")
        assert FeatureConfig.parse("Number-intensified ΔRank").intensify_rank

    def test_feature_lists_are_put_in_canonical_order(self):
        cfg = FeatureConfig.parse("delta_freq, word, POS")
        assert cfg.columns == ("word", "pos", "delta_freq")

    def test_unknown_feature(self):
        with pytest.raises(ConfigError):
            FeatureConfig.parse("word,nonsense")


class TestExtraction:
    def test_toy_rows(self, toy_domain, toy_table):
        m = extract_features(toy_domain, toy_table)
        rows = m.sentences[0]
        assert [r.word for r in rows] == ["a", "b", "a", "c"]
        assert all(r.count == 4 for r in rows)
        assert rows[0].len == 1
        assert rows[0].pos == "_"
        assert rows[0].delta_freq == 0.5
        assert rows[1].delta_rank == -0.5
        assert all(r.delta_freq_sen == pytest.approx(0.75, abs=1e-12) for r in rows)

    def test_intensified_rank_goes_in_delta_rank(self, toy_domain, toy_table):
        m = extract_features(toy_domain, toy_table, FeatureConfig.parse("Number-intensified ΔRank"))
        assert [r.delta_rank for r in m.sentences[0]] == [2.0, -0.5, 2.0, 0.0]

    def test_unselected_columns_absent(self, toy_domain, toy_table):
        m = extract_features(toy_domain, toy_table, FeatureConfig(("word",)))
        assert m.columns == ("word",)
        assert m.sentences[0][0].delta_freq is None

    def test_count_matches_block_size(self, toy_table):
        corpus = Corpus([Sentence.from_words(["a"] * k) for k in (1, 3, 5)])
        m = extract_features(corpus, toy_table)
        for rows in m.sentences:
            assert all(r.count == len(rows) for r in rows)

    def test_file_round_trip(self, tmp_path, toy_table):
        corpus = Corpus([Sentence([Token("a", "n"), Token("b", "v")], ["B", "O"]),
                         Sentence([Token("c", "n")], ["B"])])
        m = extract_features(corpus, toy_table)
        path = tmp_path / "f.tsv"
        write_feature_matrix(m, path, header=["test"])
        back = read_feature_matrix(path)
        assert back.columns == m.columns
        assert back.sentences == m.sentences


class TestBinner:
    def test_quartiles_of_one_to_hundred(self):
        b = fit_binner(_numeric_matrix(range(1, 101)), bin_count=4)
        assert b.boundaries["delta_freq"] == pytest.approx((25.75, 50.5, 75.25), abs=1e-12)

    @given(st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=2, max_size=60),
           st.integers(2, 20))
    def test_boundaries_match_quantile_oracle(self, values, k):
        b = fit_binner(_numeric_matrix(values), bin_count=k)
        expected = sorted({quantiles_by_hand(values, q / k) for q in range(1, k)})
        expected = [c for c in expected if c > min(values)]
        assert b.boundaries["delta_freq"] == pytest.approx(expected, rel=1e-9, abs=1e-9)

    def test_constant_values_single_bin(self):
        b = fit_binner(_numeric_matrix([3.0] * 10))
        assert b.boundaries["delta_freq"] == ()
        assert bin_value(b, "delta_freq", 3.0) == 0
        assert bin_value(b, "delta_freq", 99.0) == 0

    def test_out_of_range_clamps_to_edges(self):
        b = fit_binner(_numeric_matrix(range(1, 101)), bin_count=4)
        assert bin_value(b, "delta_freq", -1e9) == 0
        assert bin_value(b, "delta_freq", 1e9) == 3

    @settings(max_examples=50)
    @given(st.lists(st.floats(-50, 50, allow_nan=False), min_size=2, max_size=40),
           st.integers(2, 16), st.floats(-60, 60), st.floats(-60, 60))
    def test_bins_are_monotone_and_in_range(self, values, k, x, y):
        b = fit_binner(_numeric_matrix(values), bin_count=k)
        bx, by = bin_value(b, "delta_freq", x), bin_value(b, "delta_freq", y)
        assert 0 <= bx < k and 0 <= by < k
        if x <= y:
            assert bx <= by
        bounds = b.boundaries["delta_freq"]
        assert all(u < v for u, v in zip(bounds, bounds[1:]))

    def test_bin_count_below_two(self):
        with pytest.raises(ConfigError):
            fit_binner(_numeric_matrix([1.0, 2.0]), bin_count=1)

    def test_frozen_binner_unchanged_by_use(self):
        b = fit_binner(_numeric_matrix(np.linspace(0, 1, 50)), bin_count=8)
        before = pickle.dumps(b.to_dict())
        observations(_numeric_matrix([-5.0, 0.3, 7.0]), b)
        assert pickle.dumps(b.to_dict()) == before
        with pytest.raises(AttributeError):
            b.bin_count = 3

    def test_observation_strings(self):
        b = fit_binner(_numeric_matrix(range(1, 101)), bin_count=4)
        obs = observations(_numeric_matrix([1.0, 60.0]), b)
        assert obs == [[{"delta_freq": "q0"}, {"delta_freq": "q2"}]]

    def test_numeric_columns_need_binner(self):
        with pytest.raises(ConfigError):
            observations(_numeric_matrix([1.0]), None)
