"""Command-line entry point.

Subcommands map one-to-one onto pipeline stages: build-index,
import-embeddings, train-reencoder, generate, rerank,
build-rerank-dataset, eval, report.

Exit codes: 0 success, 2 usage error, 3 configuration/validation error,
4 I/O or input-format error, 1 other runtime failure. Output files are
written atomically and stamped with the config digest.
"""

import argparse
import dataclasses
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import chains as chains_mod
from . import config as config_mod
from . import corpus as corpus_mod
from . import dense as dense_mod
from . import evaluation as eval_mod
from . import lexical as lexical_mod
from . import reencoder as reencoder_mod
from . import rerank as rerank_mod
from .errors import ConfigError, DimensionError, EngineError, FormatError

CONFIG_ENV = "HOPCHAIN_CONFIG"


def _engine_config(args) -> config_mod.EngineConfig:
    """Resolve the effective config: file (flag or env), then preset
    pipeline override, then individual command-line flags."""
    config_path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV)
    engine = config_mod.load_config(config_path) if config_path else config_mod.EngineConfig()
    preset = getattr(args, "preset", None)
    if preset:
        engine = dataclasses.replace(engine, pipeline=config_mod.presets(preset).pipeline)
    return engine


def _tokenizer(args, engine: config_mod.EngineConfig) -> corpus_mod.Tokenizer:
    stopwords_path = getattr(args, "stopwords", None) or engine.stopwords_path
    stopwords = (
        corpus_mod.load_stopwords(stopwords_path) if stopwords_path else corpus_mod.DEFAULT_STOPWORDS
    )
    stem = bool(getattr(args, "stem", False) or engine.stem)
    return corpus_mod.Tokenizer(stopwords=stopwords, stem=stem)


def _require(args, engine, names: dict[str, str]) -> dict[str, str]:
    """Resolve required paths from flags or config; missing -> ConfigError."""
    resolved = {}
    missing = []
    for flag, config_field in names.items():
        value = getattr(args, flag.replace("-", "_"), None) or getattr(engine, config_field, "")
        if not value:
            missing.append(f"--{flag}")
        resolved[flag] = value
    if missing:
        raise ConfigError(f"missing required inputs for this mode: {', '.join(missing)}")
    return resolved


def _validated(engine: config_mod.EngineConfig) -> config_mod.EngineConfig:
    violations = config_mod.validate(engine)
    if violations:
        raise ConfigError("; ".join(violations))
    return engine


def cmd_build_index(args) -> int:
    engine = _validated(_engine_config(args))
    corpus = corpus_mod.load_corpus(args.corpus)
    tokenizer = _tokenizer(args, engine)
    params = lexical_mod.Bm25Params(k1=args.k1, b=args.b)
    index = lexical_mod.build_index(corpus, params, tokenizer)
    lexical_mod.save_index(args.out, index)
    print(f"indexed {index.doc_count} facts ({len(index.postings)} terms) -> {args.out}")
    return 0


def cmd_import_embeddings(args) -> int:
    engine = _validated(_engine_config(args))
    dindex = dense_mod.load_embeddings(args.embeddings)
    if args.corpus:
        corpus = corpus_mod.load_corpus(args.corpus)
        unknown = [fid for fid in dindex.ids if fid not in corpus.by_id]
        if unknown:
            raise FormatError(f"embeddings reference unknown fact ids: {unknown[:5]}")
    dense_mod.save_embeddings(args.out, dindex, comment=f"hopchain import config={engine.digest()}")
    print(f"imported {len(dindex)} embeddings (dim={dindex.dim}) -> {args.out}")
    return 0


def cmd_train_reencoder(args) -> int:
    engine = _validated(_engine_config(args))
    gold = eval_mod.load_gold(args.gold)
    facts = dense_mod.load_embeddings(args.fact_embeddings)
    queries = dense_mod.load_embeddings(args.query_embeddings)
    triples = []
    for record in gold:
        qid = record.chain.qid
        if qid not in queries:
            raise FormatError(f"no query embedding for qid {qid!r}")
        for fact_id in (record.chain.f1, record.chain.f2):
            if fact_id not in facts:
                raise FormatError(f"no fact embedding for id {fact_id!r} (qid {qid!r})")
        triples.append(
            (
                queries.embedding_of(qid),
                facts.embedding_of(record.chain.f1),
                facts.embedding_of(record.chain.f2),
            )
        )
    seed = args.seed if args.seed is not None else config_mod.derive_seed(engine.seed, "train-reencoder")
    train_config = reencoder_mod.TrainConfig(
        learning_rate=args.learning_rate if args.learning_rate is not None else engine.train.learning_rate,
        epochs=args.epochs if args.epochs is not None else engine.train.epochs,
        batch_size=args.batch_size if args.batch_size is not None else engine.train.batch_size,
        seed=seed,
        hidden=args.hidden if args.hidden is not None else engine.train.hidden,
        objective=args.objective or engine.train.objective,
    )
    def report_epoch(epoch: int, loss: float) -> None:
        print(f"epoch {epoch}\tloss {loss:.8g}")

    batch = reencoder_mod.ChainTripleBatch.from_triples(triples)
    model = reencoder_mod.train(batch, train_config, on_epoch=report_epoch)
    reencoder_mod.save_model(args.out, model, comment=f"hopchain train config={engine.digest()}")
    print(f"trained re-encoder on {len(batch)} gold chains -> {args.out}")
    return 0


def _generate_one(mode, qa, index, dindex, queries, model, corpus, pipeline, tokenizer):
    syntactic = semantic = None
    if mode in ("syntactic", "hybrid"):
        syntactic = chains_mod.syntactic_chains(index, qa, pipeline)
    if mode in ("semantic", "hybrid"):
        if qa.qid not in queries:
            raise FormatError(f"no query embedding for qid {qa.qid!r}")
        semantic = chains_mod.semantic_chains(
            dindex, model, queries.embedding_of(qa.qid), qa, corpus, pipeline, tokenizer
        )
    if mode == "syntactic":
        return syntactic
    if mode == "semantic":
        return semantic
    return chains_mod.merge_candidates(syntactic, semantic, pipeline)


def cmd_generate(args) -> int:
    engine = _validated(_engine_config(args))
    required = {"corpus": "corpus_path"}
    if args.mode in ("syntactic", "hybrid"):
        required["index"] = "index_path"
    if args.mode in ("semantic", "hybrid"):
        required["fact-embeddings"] = "fact_embeddings_path"
        required["query-embeddings"] = "query_embeddings_path"
        required["model"] = "model_path"
    paths = _require(args, engine, required)
    if not args.questions:
        raise ConfigError("missing required inputs for this mode: --questions")

    corpus = corpus_mod.load_corpus(paths["corpus"])
    index = dindex = queries = model = None
    if "index" in paths:
        index = lexical_mod.load_index(paths["index"])
    if "fact-embeddings" in paths:
        dindex = dense_mod.load_embeddings(paths["fact-embeddings"])
        queries = dense_mod.load_embeddings(paths["query-embeddings"])
        model = reencoder_mod.load_model(paths["model"])
    tokenizer = index.tokenizer if index is not None else _tokenizer(args, engine)

    questions = corpus_mod.load_questions(args.questions)

    def worker(qa):
        return qa.qid, _generate_one(
            args.mode, qa, index, dindex, queries, model, corpus, engine.pipeline, tokenizer
        )

    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            results = list(pool.map(worker, questions))
    else:
        results = [worker(qa) for qa in questions]
    by_qid = {qid: chain_list for qid, chain_list in sorted(results)}
    header = f"# hopchain chains v1 mode={args.mode} config={engine.digest()}"
    chains_mod.save_chains(args.out, by_qid, header=header)
    total = sum(len(v) for v in by_qid.values())
    print(f"generated {total} chains over {len(by_qid)} questions -> {args.out}")
    return 0


def cmd_rerank(args) -> int:
    engine = _validated(_engine_config(args))
    candidate_lists = chains_mod.load_chains(args.chains)
    if args.scores:
        table = rerank_mod.load_scores(args.scores)
    else:
        table = rerank_mod.baseline_scores(candidate_lists)
    reranked = {
        qid: rerank_mod.rerank(cands, table, qid, args.k)
        for qid, cands in sorted(candidate_lists.items())
    }
    header = f"# hopchain chains v1 mode=rerank config={engine.digest()}"
    chains_mod.save_chains(args.out, reranked, header=header)
    print(f"reranked {len(reranked)} questions (k={args.k}) -> {args.out}")
    return 0


def cmd_build_rerank_dataset(args) -> int:
    engine = _validated(_engine_config(args))
    gold = eval_mod.load_gold(args.gold)
    pools = chains_mod.load_chains(args.chains)
    corpus = corpus_mod.load_corpus(args.corpus)
    seed = args.seed if args.seed is not None else engine.seed
    records = rerank_mod.build_rerank_dataset(
        gold, pools, corpus, negatives_per_positive=args.negatives_per_positive, seed=seed
    )
    header = f"# hopchain rerank-dataset v1 config={engine.digest()}"
    rerank_mod.save_dataset(args.out, records, header=header)
    positives = sum(1 for r in records if r.label == rerank_mod.LABEL_VALID)
    print(f"wrote {len(records)} records ({positives} positive) -> {args.out}")
    return 0


def cmd_eval(args) -> int:
    engine = _validated(_engine_config(args))
    predictions = chains_mod.load_chains(args.chains)
    gold = [record.chain for record in eval_mod.load_gold(args.gold)]
    report = eval_mod.gold_retrieval_rate(predictions, gold, args.k)
    if args.out:
        eval_mod.save_report(args.out, report, fmt=args.format, config_digest=engine.digest())
    print(
        f"retrieval_rate={report.retrieval_rate:.4f} "
        f"({report.hits}/{len(report.per_question)} hits at k={args.k})"
    )
    return 0


def cmd_report(args) -> int:
    runs = []
    for spec in args.run:
        name, sep, path = spec.partition("=")
        if not sep or not name or not path:
            raise ConfigError(f"--run expects NAME=EVAL_JSON, got {spec!r}")
        runs.append((name, eval_mod.load_report(path)))
    comparison = eval_mod.compare_runs(runs)
    if args.format == "json":
        import json

        text = json.dumps(comparison.to_dict(), sort_keys=True, indent=2)
    else:
        text = comparison.to_text()
    if args.out:
        from .fileio import atomic_write_text

        atomic_write_text(args.out, text + "\n")
    else:
        print(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hopchain",
        description="Two-hop explanation chain retrieval over a fact corpus.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help=f"engine config JSON (default: ${CONFIG_ENV})")
        p.add_argument("--preset", choices=config_mod.PRESETS, help="pipeline size preset")

    p = sub.add_parser("build-index", help="build the BM25 inverted index")
    common(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--stopwords", help="stopword list, one token per line")
    p.add_argument("--stem", action="store_true", help="enable suffix stemming")
    p.add_argument("--k1", type=float, default=1.2)
    p.add_argument("--b", type=float, default=0.75)
    p.set_defaults(func=cmd_build_index)

    p = sub.add_parser("import-embeddings", help="validate and canonicalize an embeddings file")
    common(p)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--corpus", help="verify ids against this corpus")
    p.set_defaults(func=cmd_import_embeddings)

    p = sub.add_parser("train-reencoder", help="train the second-hop query re-encoder")
    common(p)
    p.add_argument("--gold", required=True)
    p.add_argument("--fact-embeddings", required=True)
    p.add_argument("--query-embeddings", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--hidden", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--objective", choices=reencoder_mod.OBJECTIVES)
    p.set_defaults(func=cmd_train_reencoder)

    p = sub.add_parser("generate", help="generate ranked two-hop chains per question")
    common(p)
    p.add_argument("--mode", required=True, choices=("syntactic", "semantic", "hybrid"))
    p.add_argument("--corpus")
    p.add_argument("--questions", help="JSONL with qid/question/answer")
    p.add_argument("--index")
    p.add_argument("--fact-embeddings")
    p.add_argument("--query-embeddings")
    p.add_argument("--model")
    p.add_argument("--stopwords")
    p.add_argument("--stem", action="store_true")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("rerank", help="reorder chains by a score table and truncate")
    common(p)
    p.add_argument("--chains", required=True)
    p.add_argument("--scores", help="score file; omitted -> retrieval-sum baseline")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_rerank)

    p = sub.add_parser("build-rerank-dataset", help="emit labeled chains for classifier training")
    common(p)
    p.add_argument("--gold", required=True)
    p.add_argument("--chains", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--negatives-per-positive", type=int, default=2)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_rerank_dataset)

    p = sub.add_parser("eval", help="gold retrieval rate of a chains file")
    common(p)
    p.add_argument("--chains", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--out")
    p.add_argument("--format", choices=("json", "tsv"), default="json")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("report", help="compare eval reports across runs")
    p.add_argument("--run", action="append", required=True, metavar="NAME=EVAL_JSON")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"hopchain: error: config: {exc}", file=sys.stderr)
        return 3
    except (FormatError, DimensionError, OSError) as exc:
        print(f"hopchain: error: io: {exc}", file=sys.stderr)
        return 4
    except EngineError as exc:
        print(f"hopchain: error: runtime: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
