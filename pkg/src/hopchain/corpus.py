"""Fact corpus, question-answer pairs, and the shared tokenizer.

Every overlap test in the engine (second-hop constraints, the semantic
concept filter) goes through the one tokenization defined here:
lowercase, split on any non-alphanumeric character, drop stopwords.
"""

import re
from dataclasses import dataclass, field

from .errors import DuplicateIdError, FormatError
from .fileio import atomic_write_text, data_lines, dump_json_line
import json

# Classic Lucene English stopword list (33 function words). Kept verbatim;
# pass a custom set or a --stopwords file to override.
DEFAULT_STOPWORDS = frozenset(
    {
        "a", "an", "and", "are", "as", "at", "be", "but", "by",
        "for", "if", "in", "into", "is", "it", "no", "not", "of",
        "on", "or", "such", "that", "the", "their", "then", "there",
        "these", "they", "this", "to", "was", "will", "with",
    }
)

_WORD_RE = re.compile(r"[^\W_]+", re.UNICODE)

def _stem(token: str) -> str:
    """Minimal suffix stripper, used only when stemming is switched on."""
    for suffix in ("ing", "ed"):
        if token.endswith(suffix) and len(token) - len(suffix) >= 3:
            return token[: -len(suffix)]
    if token.endswith("es") and len(token) >= 5 and token[-3] in "sxz":
        return token[:-2]
    if token.endswith("s") and not token.endswith("ss") and len(token) >= 4:
        return token[:-1]
    return token


@dataclass(frozen=True)
class Tokenizer:
    """Tokenization config: stopword set plus an optional stemming flag."""

    stopwords: frozenset[str] = DEFAULT_STOPWORDS
    stem: bool = False

    def sequence(self, text: str) -> list[str]:
        """All kept tokens in text order (duplicates preserved)."""
        out = []
        for raw in _WORD_RE.findall(text.lower()):
            if raw in self.stopwords:
                continue
            token = _stem(raw) if self.stem else raw
            if token:
                out.append(token)
        return out

    def tokens(self, text: str) -> frozenset[str]:
        """The set of distinct kept tokens."""
        return frozenset(self.sequence(text))


DEFAULT_TOKENIZER = Tokenizer()


def tokenize(text: str, tokenizer: Tokenizer = DEFAULT_TOKENIZER) -> frozenset[str]:
    """Lowercase, split on non-alphanumerics, drop stopwords; distinct tokens."""
    return tokenizer.tokens(text)


def overlaps(a: frozenset[str], b: frozenset[str]) -> bool:
    """True iff the two token sets share at least one token."""
    return not frozenset(a).isdisjoint(b)


@dataclass(frozen=True)
class Fact:
    id: str
    text: str

    def __post_init__(self):
        if not self.id:
            raise ValueError("fact id must be non-empty")
        if not self.text:
            raise ValueError(f"fact {self.id!r}: text must be non-empty")


@dataclass(frozen=True)
class QAPair:
    qid: str
    question: str
    answer: str

    def __post_init__(self):
        if not self.qid:
            raise ValueError("qid must be non-empty")
        if not self.question or not self.answer:
            raise ValueError(f"question {self.qid!r}: question and answer must be non-empty")

    def combined_text(self) -> str:
        """Question and answer joined as the single query unit."""
        return f"{self.question} {self.answer}"


@dataclass
class Corpus:
    facts: list[Fact]
    by_id: dict[str, Fact] = field(init=False)

    def __post_init__(self):
        self.by_id = {}
        for fact in self.facts:
            if fact.id in self.by_id:
                raise DuplicateIdError(f"duplicate fact id {fact.id!r}")
            self.by_id[fact.id] = fact

    def __len__(self) -> int:
        return len(self.facts)

    def text_of(self, fact_id: str) -> str:
        return self.by_id[fact_id].text


def load_corpus(path) -> Corpus:
    """Read a JSONL corpus file; every record needs `id` and `text` fields."""
    facts: list[Fact] = []
    seen: dict[str, int] = {}
    for number, line in data_lines(path):
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc.msg}", line=number) from exc
        if not isinstance(record, dict) or "id" not in record or "text" not in record:
            raise FormatError("record must be an object with 'id' and 'text'", line=number)
        fact_id = str(record["id"])
        if fact_id in seen:
            raise DuplicateIdError(
                f"duplicate fact id {fact_id!r} (first seen on line {seen[fact_id]})",
                line=number,
            )
        seen[fact_id] = number
        try:
            facts.append(Fact(id=fact_id, text=str(record["text"])))
        except ValueError as exc:
            raise FormatError(str(exc), line=number) from exc
    return Corpus(facts=facts)


def save_corpus(path, corpus: Corpus) -> None:
    lines = [dump_json_line({"id": f.id, "text": f.text}) for f in corpus.facts]
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def load_stopwords(path) -> frozenset[str]:
    """Plain-text stopword list, one token per line."""
    words = set()
    for _, line in data_lines(path):
        words.add(line.strip().lower())
    return frozenset(words)


def load_questions(path) -> list[QAPair]:
    """Read question records (qid, question, answer); extra fields ignored."""
    pairs: list[QAPair] = []
    seen: dict[str, int] = {}
    for number, line in data_lines(path):
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc.msg}", line=number) from exc
        for key in ("qid", "question", "answer"):
            if key not in record:
                raise FormatError(f"question record missing {key!r}", line=number)
        qid = str(record["qid"])
        if qid in seen:
            raise DuplicateIdError(f"duplicate qid {qid!r}", line=number)
        seen[qid] = number
        pairs.append(QAPair(qid=qid, question=str(record["question"]), answer=str(record["answer"])))
    return pairs
