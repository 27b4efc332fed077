"""Gold-chain retrieval rate and run-to-run comparison reports.

A question counts as a hit when its top-k predicted chains contain the
gold fact pair in either orientation (fact order in a 2-hop explanation
does not matter).
"""

import json
from dataclasses import dataclass, field

from .chains import ChainCandidate
from .corpus import QAPair
from .errors import ConfigError, DuplicateIdError, FormatError
from .fileio import atomic_write_text, data_lines, dump_json_line


@dataclass(frozen=True)
class GoldChain:
    qid: str
    f1: str
    f2: str

    def __post_init__(self):
        if self.f1 == self.f2:
            raise ValueError(f"gold chain for {self.qid!r} repeats fact {self.f1!r}")

    def unordered(self) -> frozenset[str]:
        return frozenset((self.f1, self.f2))


@dataclass(frozen=True)
class GoldRecord:
    """A gold chain together with its question-answer pair."""

    qa: QAPair
    chain: GoldChain


@dataclass(frozen=True)
class QuestionResult:
    hit: bool
    rank_of_gold: int | None


@dataclass
class EvalReport:
    per_question: dict[str, QuestionResult]
    retrieval_rate: float
    k_used: int
    hits: int = field(init=False)

    def __post_init__(self):
        self.hits = sum(1 for r in self.per_question.values() if r.hit)


def gold_retrieval_rate(predictions, gold: list[GoldChain], k: int) -> EvalReport:
    """Fraction of questions whose gold pair (forward or reverse) appears in
    the top-k predictions. Questions absent from predictions are misses."""
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    if not gold:
        raise ConfigError("gold chain list is empty")
    seen: set[str] = set()
    per_question: dict[str, QuestionResult] = {}
    for chain in gold:
        if chain.qid in seen:
            raise ConfigError(f"duplicate gold qid {chain.qid!r}")
        seen.add(chain.qid)
        target = chain.unordered()
        rank = None
        for position, cand in enumerate(predictions.get(chain.qid, [])[:k], start=1):
            if frozenset((cand.f1, cand.f2)) == target:
                rank = position
                break
        per_question[chain.qid] = QuestionResult(hit=rank is not None, rank_of_gold=rank)
    hits = sum(1 for r in per_question.values() if r.hit)
    return EvalReport(per_question=per_question, retrieval_rate=hits / len(gold), k_used=k)


@dataclass
class RunComparison:
    rates: list[tuple[str, float]]
    deltas: list[tuple[str, str, float]]  # (run_a, run_b, rate_b - rate_a)
    best: str

    def to_dict(self) -> dict:
        return {
            "rates": {name: rate for name, rate in self.rates},
            "deltas": [
                {"from": a, "to": b, "delta": delta} for a, b, delta in self.deltas
            ],
            "best": self.best,
        }

    def to_text(self) -> str:
        lines = ["run\tgold retrieval rate (%)"]
        for name, rate in self.rates:
            marker = "  <- best" if name == self.best else ""
            lines.append(f"{name}\t{rate * 100:.1f}{marker}")
        for a, b, delta in self.deltas:
            lines.append(f"delta {a} -> {b}: {delta * 100:+.1f}")
        return "\n".join(lines)


def compare_runs(reports: list[tuple[str, EvalReport]]) -> RunComparison:
    """Tabulate retrieval rates and pairwise deltas; flags the best run.

    All reports must cover the same question set.
    """
    if not reports:
        raise ConfigError("no runs to compare")
    base_name, base_report = reports[0]
    base_qids = set(base_report.per_question)
    for name, report in reports[1:]:
        qids = set(report.per_question)
        if qids != base_qids:
            difference = sorted(qids.symmetric_difference(base_qids))
            raise ConfigError(
                f"question sets differ between {base_name!r} and {name!r}: {difference}"
            )
    rates = [(name, report.retrieval_rate) for name, report in reports]
    deltas = [
        (rates[i][0], rates[j][0], rates[j][1] - rates[i][1])
        for i in range(len(rates))
        for j in range(i + 1, len(rates))
    ]
    best = max(rates, key=lambda item: item[1])[0]
    return RunComparison(rates=rates, deltas=deltas, best=best)


def load_gold(path) -> list[GoldRecord]:
    """Gold file: JSONL records {qid, question, answer, f1, f2}."""
    records: list[GoldRecord] = []
    seen: dict[str, int] = {}
    for number, line in data_lines(path):
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc.msg}", line=number) from exc
        for key in ("qid", "question", "answer", "f1", "f2"):
            if key not in raw:
                raise FormatError(f"gold record missing {key!r}", line=number)
        qid = str(raw["qid"])
        if qid in seen:
            raise DuplicateIdError(f"duplicate gold qid {qid!r}", line=number)
        seen[qid] = number
        try:
            records.append(
                GoldRecord(
                    qa=QAPair(qid=qid, question=str(raw["question"]), answer=str(raw["answer"])),
                    chain=GoldChain(qid=qid, f1=str(raw["f1"]), f2=str(raw["f2"])),
                )
            )
        except ValueError as exc:
            raise FormatError(str(exc), line=number) from exc
    return records


def save_gold(path, records: list[GoldRecord]) -> None:
    lines = [
        dump_json_line(
            {
                "qid": r.chain.qid,
                "question": r.qa.question,
                "answer": r.qa.answer,
                "f1": r.chain.f1,
                "f2": r.chain.f2,
            }
        )
        for r in records
    ]
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def report_to_dict(report: EvalReport, config_digest: str | None = None) -> dict:
    payload = {
        "k": report.k_used,
        "questions": len(report.per_question),
        "hits": report.hits,
        "retrieval_rate": report.retrieval_rate,
        "retrieval_rate_percent": round(report.retrieval_rate * 100, 1),
        "per_question": {
            qid: {"hit": result.hit, "rank_of_gold": result.rank_of_gold}
            for qid, result in sorted(report.per_question.items())
        },
    }
    if config_digest is not None:
        payload["config_digest"] = config_digest
    return payload


def report_from_dict(payload: dict) -> EvalReport:
    per_question = {
        qid: QuestionResult(hit=bool(entry["hit"]), rank_of_gold=entry["rank_of_gold"])
        for qid, entry in payload["per_question"].items()
    }
    return EvalReport(
        per_question=per_question,
        retrieval_rate=float(payload["retrieval_rate"]),
        k_used=int(payload["k"]),
    )


def save_report(path, report: EvalReport, fmt: str = "json", config_digest: str | None = None) -> None:
    if fmt == "json":
        text = json.dumps(report_to_dict(report, config_digest), sort_keys=True, indent=2) + "\n"
    elif fmt == "tsv":
        lines = []
        if config_digest is not None:
            lines.append(f"# hopchain eval v1 config={config_digest}")
        lines.append(f"# k={report.k_used} hits={report.hits} questions={len(report.per_question)} "
                     f"retrieval_rate={report.retrieval_rate!r}")
        lines.append("qid\thit\trank_of_gold")
        for qid, result in sorted(report.per_question.items()):
            rank = "" if result.rank_of_gold is None else str(result.rank_of_gold)
            lines.append(f"{qid}\t{int(result.hit)}\t{rank}")
        text = "\n".join(lines) + "\n"
    else:
        raise ConfigError(f"unknown report format {fmt!r} (expected json or tsv)")
    atomic_write_text(path, text)


def load_report(path) -> EvalReport:
    with open(path, encoding="utf-8") as handle:
        try:
            payload = json.load(handle)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid report JSON: {exc.msg}") from exc
    try:
        return report_from_dict(payload)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad report payload: {exc}") from exc
