"""BM25 index: oracle equivalence, constraints, persistence."""

import numpy as np
import pytest

import oracles
from conftest import random_corpus, random_query_tokens
from hopchain.corpus import Corpus, Fact, Tokenizer
from hopchain.errors import ConfigError, FormatError
from hopchain.lexical import (
    Bm25Params,
    build_index,
    load_index,
    query,
    query_constrained,
    save_index,
)

TOY_FACTS = [
    Fact("f1", "wind turbines convert wind energy"),
    Fact("f2", "solar panels convert sunlight"),
    Fact("f3", "wind moves sailboats"),
    Fact("f4", "electricity flows through wires"),
    Fact("f5", "energy is stored in batteries"),
]


@pytest.fixture
def toy_index():
    return build_index(Corpus(facts=list(TOY_FACTS)))


class TestBuildIndex:
    def test_postings_membership(self, toy_index):
        ordinals = toy_index.postings["wind"][0]
        assert list(ordinals) == [0, 2]

    def test_avg_doc_length(self):
        corpus = Corpus(facts=[Fact("a", "wind turbine"), Fact("b", "solar panel cloud rain")])
        index = build_index(corpus)
        assert index.avg_doc_length == 3.0

    def test_empty_corpus_rejected(self):
        with pytest.raises(ConfigError, match="empty"):
            build_index(Corpus(facts=[]))

    def test_invariants(self, toy_index):
        for ordinals, _ in toy_index.postings.values():
            assert all(o < toy_index.doc_count for o in ordinals)
            assert list(ordinals) == sorted(ordinals)
        assert abs(toy_index.avg_doc_length - float(np.mean(toy_index.doc_lengths))) < 1e-9

    def test_bm25_params_bounds(self):
        with pytest.raises(ConfigError):
            Bm25Params(k1=-0.1)
        with pytest.raises(ConfigError):
            Bm25Params(b=1.5)


class TestQuery:
    def test_unique_match(self, toy_index):
        result = query(toy_index, frozenset({"sunlight"}), top_n=5)
        assert [r.fact_id for r in result] == ["f2"]

    def test_frozen_reference_scores(self, toy_index):
        # Brute-force BM25 over the toy corpus, query {wind}: values frozen
        # from the term-by-term oracle computation.
        result = query(toy_index, frozenset({"wind"}), top_n=5)
        assert [r.fact_id for r in result] == ["f1", "f3"]
        assert result[0].score == pytest.approx(1.1055768344831727, abs=1e-9)
        assert result[1].score == pytest.approx(0.9579736445390842, abs=1e-9)

    def test_tie_broken_by_ascending_id(self, toy_index):
        # f3 and f5 tie exactly on {wind, energy} (same tf, df, doc length).
        result = query(toy_index, frozenset({"wind", "energy"}), top_n=5)
        assert [r.fact_id for r in result] == ["f1", "f3", "f5"]
        assert result[1].score == pytest.approx(result[2].score, abs=0.0)

    def test_stopword_only_query_is_empty(self, toy_index):
        assert query(toy_index, frozenset(), top_n=3) == []
        assert query(toy_index, frozenset({"zzz-not-here"}), top_n=3) == []

    def test_top_n_precondition(self, toy_index):
        with pytest.raises(ConfigError):
            query(toy_index, frozenset({"wind"}), top_n=0)

    def test_oracle_equivalence_randomized(self):
        rng = np.random.default_rng(7)
        tokenizer = Tokenizer()
        for _ in range(20):
            corpus = random_corpus(rng, int(rng.integers(5, 60)))
            index = build_index(corpus, tokenizer=tokenizer)
            for _ in range(5):
                tokens = random_query_tokens(rng)
                got = query(index, tokens, top_n=10)
                expected = oracles.bm25_topn(corpus, tokenizer, tokens, 10)
                assert [g.fact_id for g in got] == [fid for fid, _ in expected]
                for g, (_, score) in zip(got, expected):
                    assert g.score == pytest.approx(score, abs=1e-9)

    def test_adding_query_token_never_decreases_scores(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            corpus = random_corpus(rng, 40)
            index = build_index(corpus)
            base = random_query_tokens(rng, max_terms=3)
            extra = base | {"orbit"}
            before = {r.fact_id: r.score for r in query(index, base, top_n=40)}
            after = {r.fact_id: r.score for r in query(index, extra, top_n=40)}
            for fid, score in before.items():
                assert after[fid] >= score - 1e-12

    def test_determinism(self, toy_index):
        runs = [query(toy_index, frozenset({"wind", "energy"}), top_n=5) for _ in range(3)]
        assert runs[0] == runs[1] == runs[2]


class TestQueryConstrained:
    def test_constraint_filters(self):
        corpus = Corpus(
            facts=[
                Fact("a", "wind produces electricity"),
                Fact("b", "wind moves sailboats"),
            ]
        )
        index = build_index(corpus)
        result = query_constrained(
            index,
            frozenset({"wind"}),
            must_overlap=[frozenset({"wind"}), frozenset({"electricity"})],
            exclude=set(),
            top_m=5,
        )
        assert [r.fact_id for r in result] == ["a"]

    def test_exclusion(self, toy_index):
        result = query_constrained(
            toy_index, frozenset({"sunlight"}), must_overlap=[], exclude={"f2"}, top_m=5
        )
        assert result == []

    def test_top_m_truncates_to_best(self):
        rng = np.random.default_rng(3)
        corpus = random_corpus(rng, 30)
        index = build_index(corpus)
        tokens = frozenset({"wind", "solar", "water"})
        must = [frozenset({"wind", "solar", "water", "rock", "sand"})]
        full = query_constrained(index, tokens, must, set(), top_m=30)
        cut = query_constrained(index, tokens, must, set(), top_m=2)
        assert cut == full[:2]
        expected = oracles.bm25_topn_constrained(corpus, Tokenizer(), tokens, must, set(), 2)
        assert [(r.fact_id, pytest.approx(r.score, abs=1e-9)) for r in cut] == expected

    def test_subsequence_of_unconstrained(self):
        rng = np.random.default_rng(23)
        for _ in range(10):
            corpus = random_corpus(rng, 50)
            index = build_index(corpus)
            tokens = random_query_tokens(rng)
            must = [random_query_tokens(rng, max_terms=6)]
            unconstrained = [r.fact_id for r in query(index, tokens, top_n=50)]
            constrained = [
                r.fact_id for r in query_constrained(index, tokens, must, set(), top_m=50)
            ]
            assert set(constrained) <= set(unconstrained)
            positions = [unconstrained.index(fid) for fid in constrained]
            assert positions == sorted(positions)


class TestPersistence:
    def test_roundtrip_reproduces_query_results(self, tmp_path):
        rng = np.random.default_rng(11)
        corpus = random_corpus(rng, 40)
        index = build_index(corpus)
        path = tmp_path / "index.hopchain"
        save_index(path, index)
        loaded = load_index(path)
        for _ in range(10):
            tokens = random_query_tokens(rng)
            assert query(index, tokens, top_n=10) == query(loaded, tokens, top_n=10)

    def test_magic_header_checked(self, tmp_path):
        path = tmp_path / "bogus"
        path.write_text("not an index\n{}", encoding="utf-8")
        with pytest.raises(FormatError, match="expected"):
            load_index(path)

    def test_tokenizer_settings_preserved(self, tmp_path):
        corpus = Corpus(facts=[Fact("a", "the wind blows")])
        index = build_index(corpus, tokenizer=Tokenizer(stopwords=frozenset({"blows"})))
        path = tmp_path / "index.hopchain"
        save_index(path, index)
        loaded = load_index(path)
        assert loaded.tokenizer.stopwords == frozenset({"blows"})
        assert loaded.tokens_of("a") == {"the", "wind"}
