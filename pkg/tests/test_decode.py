"""Table-model decoding: next-token distributions, beam search, certificates."""

from pathlib import Path

import numpy as np
import pytest

from entmax import (
    ConfigurationError,
    InvalidInputError,
    ResourceError,
    TableModel,
    beam_search,
    exhaustive_enumerate,
    load_fixture,
    next_distribution,
    parse_fixture,
    random_table_model,
    table_model_from_dict,
)

FIXTURES = Path(__file__).parent / "fixtures"


def constant_model(scores, max_len=4):
    row = np.asarray(scores, dtype=float)
    return TableModel(vocab_size=row.size, score_fn=lambda prefix: row, max_len=max_len)


class TestNextDistribution:
    def test_immediate_stop_when_stop_dominates(self):
        model = constant_model([5.0, 0.0, 0.0, 0.0])
        dist = next_distribution(model, (), 2.0)
        np.testing.assert_array_equal(dist, [1.0, 0.0, 0.0, 0.0])

    def test_softmax_is_strictly_positive(self):
        model = constant_model([5.0, 0.0, 0.0, 0.0])
        dist = next_distribution(model, (), 1.0)
        assert (dist > 0.0).all()

    def test_symmetric_tie_splits_evenly(self):
        model = constant_model([-5.0, 1.0, 1.0, -5.0])
        dist = next_distribution(model, (), 2.0)
        np.testing.assert_allclose(dist, [0.0, 0.5, 0.5, 0.0], atol=1e-12)

    def test_prefix_length_capped(self):
        model = constant_model([1.0, 0.0], max_len=2)
        with pytest.raises(InvalidInputError):
            next_distribution(model, (1, 1), 1.5)


class TestBeamSearch:
    def test_deterministic_chain(self):
        model = load_fixture(FIXTURES / "chain.json")
        for beam in (1, 3, 8):
            ranked, cert = beam_search(model, 2.0, beam)
            assert len(ranked) == 1
            assert ranked[0].tokens == (1, 2, 0)
            assert ranked[0].prob == 1.0
            assert ranked[0].complete
            assert cert.exact
            assert cert.dropped_mass_bound == 0.0
            assert cert.steps_saturated == 0

    def test_three_way_fixture(self):
        model = load_fixture(FIXTURES / "three_way.json")
        for alpha in (1.5, 2.0):
            ranked, cert = beam_search(model, alpha, 5)
            assert cert.exact
            assert len(ranked) == 3
            assert [h.tokens for h in ranked] == [(1, 0), (2, 0), (3, 0)]
            assert all(h.complete for h in ranked)
        ranked, _ = beam_search(model, 2.0, 5)
        np.testing.assert_allclose(
            [h.prob for h in ranked], [0.664, 0.322, 0.014], atol=1e-9
        )

    def test_dense_softmax_is_never_exact(self):
        model = constant_model([0.4, 0.1, -0.2, 0.3], max_len=3)
        ranked, cert = beam_search(model, 1.0, 2)
        assert not cert.exact
        assert cert.dropped_mass_bound > 0.0
        assert cert.steps_saturated >= 1
        assert any(not h.complete for h in ranked)

    def test_ranking_and_tie_break(self):
        model = constant_model([-5.0, 1.0, 1.0, -5.0], max_len=1)
        ranked, cert = beam_search(model, 2.0, 4)
        # both survivors die incomplete at max_len, listed lexicographically
        assert [h.tokens for h in ranked] == [(1,), (2,)]
        assert not cert.exact
        assert cert.dropped_mass_bound == pytest.approx(1.0, abs=1e-12)

    def test_beam_width_validated(self):
        model = constant_model([1.0, 0.0])
        with pytest.raises(ConfigurationError):
            beam_search(model, 1.5, 0)


class TestExhaustiveEnumerate:
    def test_chain(self):
        model = load_fixture(FIXTURES / "chain.json")
        hyps = exhaustive_enumerate(model, 2.0)
        assert len(hyps) == 1
        assert hyps[0].tokens == (1, 2, 0)
        assert hyps[0].prob == 1.0

    def test_matches_beam_on_three_way(self):
        model = load_fixture(FIXTURES / "three_way.json")
        ranked, cert = beam_search(model, 2.0, 5)
        oracle = exhaustive_enumerate(model, 2.0)
        assert cert.exact
        assert [h.tokens for h in ranked] == [h.tokens for h in oracle]
        assert all(a.prob == b.prob for a, b in zip(ranked, oracle))

    def test_total_mass_bounded(self):
        rng = np.random.default_rng(42)
        for seed in rng.integers(0, 2**31, size=50):
            model = random_table_model(int(seed), 5, 4)
            for alpha in (1.5, 2.0):
                mass = sum(h.prob for h in exhaustive_enumerate(model, alpha))
                assert mass <= 1.0 + 1e-9

    def test_mass_is_one_when_all_paths_stop(self):
        model = load_fixture(FIXTURES / "three_way.json")
        mass = sum(h.prob for h in exhaustive_enumerate(model, 2.0))
        assert mass == pytest.approx(1.0, abs=1e-9)

    def test_expansion_cap(self):
        model = random_table_model(1, 8, 10)
        with pytest.raises(ResourceError):
            exhaustive_enumerate(model, 1.5)


class TestCertificateSoundness:
    def test_exact_runs_equal_enumeration(self):
        rng = np.random.default_rng(42)
        exact_seen = 0
        for _ in range(200):
            vocab = int(rng.integers(3, 9))
            depth = int(rng.integers(2, 7))
            alpha = float(rng.choice([1.5, 2.0]))
            beam = int(rng.integers(1, 7))
            model = random_table_model(int(rng.integers(0, 2**31)), vocab, depth)
            ranked, cert = beam_search(model, alpha, beam)
            oracle = exhaustive_enumerate(model, alpha)
            if cert.exact:
                exact_seen += 1
                assert all(h.complete for h in ranked)
                assert [h.tokens for h in ranked] == [h.tokens for h in oracle]
                for got, want in zip(ranked, oracle):
                    assert abs(got.prob - want.prob) <= 1e-12
            else:
                oracle_probs = {h.tokens: h.prob for h in oracle}
                for h in ranked:
                    if h.complete:
                        assert abs(h.prob - oracle_probs[h.tokens]) <= 1e-12
        assert exact_seen >= 20

    def test_monotone_in_beam_width(self):
        rng = np.random.default_rng(7)
        for _ in range(40):
            model = random_table_model(int(rng.integers(0, 2**31)), 5, 4)
            alpha = float(rng.choice([1.5, 2.0]))
            previous_tokens: set = set()
            previous_exact = False
            for beam in (1, 2, 4, 8, 16):
                ranked, cert = beam_search(model, alpha, beam)
                tokens = {h.tokens for h in ranked if h.complete}
                assert previous_tokens <= tokens
                assert not (previous_exact and not cert.exact)
                previous_tokens = tokens
                previous_exact = cert.exact


class TestFixtureParsing:
    def test_parse_error_carries_line_and_column(self):
        with pytest.raises(InvalidInputError, match=r"line 2, column"):
            parse_fixture('{\n  "vocab_size": }')

    def test_missing_field(self):
        with pytest.raises(InvalidInputError, match="max_len"):
            table_model_from_dict({"vocab_size": 3, "stop": 0, "table": {}})

    def test_wrong_stop_index(self):
        with pytest.raises(InvalidInputError, match="stop"):
            table_model_from_dict({"vocab_size": 3, "max_len": 2, "stop": 1, "table": {}})

    def test_bad_prefix_key(self):
        doc = {"vocab_size": 3, "max_len": 2, "stop": 0, "table": {"x": [0.0, 0.0, 0.0]}}
        with pytest.raises(InvalidInputError, match="'x'"):
            table_model_from_dict(doc)
        doc = {"vocab_size": 3, "max_len": 2, "stop": 0, "table": {"7": [0.0, 0.0, 0.0]}}
        with pytest.raises(InvalidInputError, match="outside"):
            table_model_from_dict(doc)

    def test_wrong_row_length(self):
        doc = {"vocab_size": 3, "max_len": 2, "stop": 0, "table": {"": [0.0, 0.0]}}
        with pytest.raises(InvalidInputError, match="expected 3"):
            table_model_from_dict(doc)

    def test_missing_prefix_surfaces_context(self):
        doc = {"vocab_size": 3, "max_len": 2, "stop": 0, "table": {"": [0.0, 5.0, 0.0]}}
        model = table_model_from_dict(doc)
        with pytest.raises(InvalidInputError, match=r"prefix \(1,\)"):
            beam_search(model, 2.0, 2)

    def test_model_invariants(self):
        with pytest.raises(InvalidInputError):
            TableModel(vocab_size=1, score_fn=lambda p: [0.0], max_len=3)
        with pytest.raises(InvalidInputError):
            TableModel(vocab_size=3, score_fn=lambda p: [0.0] * 3, max_len=0)
