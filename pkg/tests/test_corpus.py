"""Tokenizer, overlap, and corpus-file behavior."""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hopchain.corpus import (
    DEFAULT_STOPWORDS,
    Corpus,
    Fact,
    QAPair,
    Tokenizer,
    load_corpus,
    load_questions,
    load_stopwords,
    overlaps,
    save_corpus,
    tokenize,
)
from hopchain.errors import DuplicateIdError, FormatError


class TestTokenize:
    def test_reference_vector(self):
        # stopwords here: "is", "for"
        assert tokenize("Wind is used for producing electricity.") == {
            "wind",
            "used",
            "producing",
            "electricity",
        }

    def test_empty_input(self):
        assert tokenize("") == frozenset()

    def test_case_folding_and_stopwords(self):
        assert tokenize("The THE the", Tokenizer(stopwords=frozenset({"the"}))) == frozenset()

    def test_splits_on_any_non_alphanumeric(self):
        assert tokenize("wind-powered, 2-stage (cheap) turbine_x") == {
            "wind",
            "powered",
            "2",
            "stage",
            "cheap",
            "turbine",
            "x",
        }

    def test_sequence_keeps_duplicates_and_order(self):
        assert Tokenizer().sequence("wind wind energy") == ["wind", "wind", "energy"]

    def test_stemming_flag_defaults_off(self):
        plain = Tokenizer()
        assert plain.tokens("producing turbines") == {"producing", "turbines"}
        stemmed = Tokenizer(stem=True)
        assert stemmed.tokens("producing turbines") == {"produc", "turbine"}

    @given(st.text(max_size=200))
    @settings(max_examples=200, deadline=None)
    def test_idempotent_on_joined_output(self, text):
        first = tokenize(text)
        assert tokenize(" ".join(sorted(first))) == first

    @given(st.text(max_size=200))
    @settings(max_examples=200, deadline=None)
    def test_never_contains_stopwords(self, text):
        assert tokenize(text).isdisjoint(DEFAULT_STOPWORDS)


class TestOverlaps:
    def test_shared_token(self):
        assert overlaps(frozenset({"wind", "electricity"}), frozenset({"wind", "turbine"}))

    def test_disjoint(self):
        assert not overlaps(frozenset({"wind"}), frozenset({"solar"}))

    def test_empty_set(self):
        assert not overlaps(frozenset(), frozenset({"anything"}))

    @given(
        st.frozensets(st.sampled_from("abcdefgh"), max_size=5),
        st.frozensets(st.sampled_from("abcdefgh"), max_size=5),
    )
    def test_symmetric(self, a, b):
        assert overlaps(a, b) == overlaps(b, a)


class TestCorpusFile:
    def _write(self, path, records):
        path.write_text("\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8")

    def test_loads_all_lines_in_order(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        self._write(path, [{"id": f"f{i}", "text": f"fact number {i}"} for i in range(3)])
        corpus = load_corpus(path)
        assert len(corpus) == 3
        assert [f.id for f in corpus.facts] == ["f0", "f1", "f2"]

    def test_duplicate_id_names_the_id(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        records = [{"id": "f1", "text": "a fact"}] * 2
        self._write(path, [{"id": "f0", "text": "x"}, records[0], {"id": "f2", "text": "y"},
                           {"id": "f3", "text": "z"}, records[1]])
        with pytest.raises(DuplicateIdError, match="'f1'"):
            load_corpus(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text("", encoding="utf-8")
        assert len(load_corpus(path)) == 0

    def test_malformed_line_reports_line_number(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text('{"id": "f0", "text": "ok"}\nnot json\n', encoding="utf-8")
        with pytest.raises(FormatError, match="line 2"):
            load_corpus(path)

    def test_missing_field_rejected(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text('{"id": "f0"}\n', encoding="utf-8")
        with pytest.raises(FormatError, match="'id' and 'text'"):
            load_corpus(path)

    def test_save_load_roundtrip(self, tmp_path):
        corpus = Corpus(facts=[Fact("a", "one fact"), Fact("b", "another fact")])
        path = tmp_path / "c.jsonl"
        save_corpus(path, corpus)
        again = load_corpus(path)
        assert [(f.id, f.text) for f in again.facts] == [(f.id, f.text) for f in corpus.facts]

    def test_comment_lines_skipped(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text('# header\n{"id": "f0", "text": "ok"}\n', encoding="utf-8")
        assert len(load_corpus(path)) == 1


class TestTypes:
    def test_fact_invariants(self):
        with pytest.raises(ValueError):
            Fact(id="", text="x")
        with pytest.raises(ValueError):
            Fact(id="f", text="")

    def test_qapair_invariants(self):
        with pytest.raises(ValueError):
            QAPair(qid="q", question="", answer="a")
        pair = QAPair(qid="q", question="why?", answer="because")
        assert pair.combined_text() == "why? because"

    def test_corpus_lookup(self):
        corpus = Corpus(facts=[Fact("a", "one"), Fact("b", "two")])
        assert corpus.by_id["b"].text == "two"
        assert len(corpus.by_id) == len(corpus.facts)

    def test_corpus_rejects_duplicates(self):
        with pytest.raises(DuplicateIdError):
            Corpus(facts=[Fact("a", "one"), Fact("a", "two")])


def test_load_stopwords(tmp_path):
    path = tmp_path / "stop.txt"
    path.write_text("the\nAnd\n\nof\n", encoding="utf-8")
    assert load_stopwords(path) == frozenset({"the", "and", "of"})


def test_load_questions_accepts_gold_files(tmp_path):
    path = tmp_path / "q.jsonl"
    record = {"qid": "q1", "question": "why?", "answer": "because", "f1": "a", "f2": "b"}
    path.write_text(json.dumps(record) + "\n", encoding="utf-8")
    pairs = load_questions(path)
    assert pairs[0].qid == "q1"
    assert pairs[0].answer == "because"
