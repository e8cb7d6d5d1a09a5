"""Command-line entry point: build-db, retrieve, revise, eval, coverage.

Every command is a pure function of its config file, input files, and
seed; reruns write byte-identical outputs. Result-affecting parameters
live in the config file, paths in flags, and each output carries the
config fingerprint in its header. Exit codes: 0 success, 1 internal
error, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from contextlib import contextmanager
from pathlib import Path

from . import construction, retrieval, revision
from .backend import Backend, RemoteBackend, StubBackend
from .config import RunConfig
from .corpus import load_corpus
from .database import QADatabase
from .errors import ContractViolation, ModeUnavailable, ParseError, QADBError
from .metrics import evaluate_longform, evaluate_retrieval_recall, load_examples

LOCK_NAME = ".qadb.lock"


class _CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _require_file(path: str, role: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise _CliError(2, f"{role} file not found: {path}")
    return p


@contextmanager
def _output_lock(directory: Path):
    """One process per output directory."""
    directory.mkdir(parents=True, exist_ok=True)
    lock = directory / LOCK_NAME
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise _CliError(1, f"output directory is locked by another run: {lock}") from None
    try:
        os.write(fd, f"{os.getpid()}\n".encode())
        os.close(fd)
        yield
    finally:
        lock.unlink(missing_ok=True)


def _load_config(args) -> RunConfig:
    if args.config:
        _require_file(args.config, "config")
        return RunConfig.from_file(args.config)
    return RunConfig()


def _make_backend(config: RunConfig) -> Backend:
    if config.backend_stub or not config.backend_endpoint:
        return StubBackend()
    return RemoteBackend(config.backend_endpoint)


def _read_jsonl(path: Path, required: tuple[str, ...]) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
            if "header" in row and lineno == 1:
                continue
            missing = [key for key in required if key not in row]
            if missing:
                raise ParseError(f"{path}:{lineno}: missing fields {missing}")
            rows.append(row)
    return rows


def _dump(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True)


def _write_jsonl(path: Path, header: dict, rows: list[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_dump({"header": header}) + "\n")
        for row in rows:
            fh.write(_dump(row) + "\n")


def _warn(message: str) -> None:
    print(f"warning: {message}", file=sys.stderr)


def cmd_build_db(args) -> int:
    config = _load_config(args)
    corpus_path = _require_file(args.corpus, "corpus")
    corpus = load_corpus(str(corpus_path))
    backend = _make_backend(config)
    pipeline = construction.PipelineConfig(
        beam=config.beam, workers=args.workers, checkpoint_path=args.checkpoint
    )
    with _output_lock(Path(args.db).resolve().parent):
        db, report = construction.build_database(corpus, backend, pipeline)
        db.save(args.db)
        report_payload = {
            "fingerprint": config.fingerprint(),
            **report.to_dict(),
            "stats": db.stats.to_dict(),
        }
        report_path = args.report or f"{args.db}.report.json"
        Path(report_path).write_text(_dump(report_payload) + "\n", encoding="utf-8")
    print(
        f"built database: {report.detected} detected -> {report.generated} generated "
        f"-> {report.verified} verified -> {report.unique_questions} unique questions"
    )
    return 0


def cmd_retrieve(args) -> int:
    config = _load_config(args)
    if config.retrieval_method not in ("max", "count", "direct"):
        raise _CliError(2, f"unknown retrieval method: {config.retrieval_method}")
    if config.retrieval_mode not in ("sparse", "dense"):
        raise _CliError(2, f"unknown retrieval mode: {config.retrieval_mode}")
    db = QADatabase.load(_require_file(args.db, "database"))
    queries = _read_jsonl(_require_file(args.queries, "queries"), ("query_id", "question"))

    embedder = None
    if config.retrieval_mode == "dense":
        embedder = retrieval.hashing_embedder(config.embedding_dim, config.seed)
    dense_vectors = None
    if args.embeddings:
        dense_vectors = retrieval.load_vectors(str(_require_file(args.embeddings, "embeddings")))
    index = retrieval.build_index(
        db, embedder, k1=config.bm25_k1, b=config.bm25_b, dense_vectors=dense_vectors
    )
    passage_index = None
    if config.retrieval_method == "direct":
        if not args.corpus:
            raise _CliError(2, "direct method needs --corpus to build the passage index")
        corpus = load_corpus(str(_require_file(args.corpus, "corpus")))
        passage_index = retrieval.build_passage_index(
            corpus, embedder, k1=config.bm25_k1, b=config.bm25_b
        )

    rows = []
    for query in queries:
        try:
            scored = retrieval.retrieve_passages(
                index,
                db,
                query["question"],
                method=config.retrieval_method,
                top_n=config.top_n,
                mode=config.retrieval_mode,
                k_questions=config.k_questions,
                passage_index=passage_index,
            )
        except ModeUnavailable as exc:
            raise _CliError(2, str(exc)) from exc
        for rank, ps in enumerate(scored, start=1):
            rows.append(
                {
                    "query_id": query["query_id"],
                    "rank": rank,
                    "passage_id": ps.passage_id,
                    "score": ps.score,
                    "method": ps.method,
                }
            )
    header = {
        "fingerprint": config.fingerprint(),
        "method": config.retrieval_method,
        "mode": config.retrieval_mode,
        "k_questions": config.k_questions,
        "top_n": config.top_n,
    }
    with _output_lock(Path(args.out).resolve().parent):
        _write_jsonl(Path(args.out), header, rows)
    print(f"wrote {len(rows)} result rows for {len(queries)} queries to {args.out}")
    return 0


def cmd_revise(args) -> int:
    config = _load_config(args)
    corpus = load_corpus(str(_require_file(args.corpus, "corpus")))
    inputs = _read_jsonl(
        _require_file(args.questions, "questions"), ("question", "answer", "passage_id")
    )
    backend = _make_backend(config)
    rows = []
    for row in inputs:
        passage = corpus.get(row["passage_id"])
        if passage is None:
            _warn(f"unknown passage_id {row['passage_id']!r}; record skipped")
            continue
        record = revision.revise_iterative(
            row["question"], row["answer"], passage, backend, config.max_revision_rounds
        )
        rows.append(record.to_record())
    header = {"fingerprint": config.fingerprint(), "max_rounds": config.max_revision_rounds}
    with _output_lock(Path(args.out).resolve().parent):
        _write_jsonl(Path(args.out), header, rows)
    print(f"wrote {len(rows)} revision records to {args.out}")
    return 0


def cmd_eval(args) -> int:
    config = _load_config(args)
    examples = load_examples(
        _require_file(args.gold, "gold").read_text(encoding="utf-8").splitlines()
    )
    if args.task == "retrieval":
        rows = _read_jsonl(
            _require_file(args.results, "results"), ("query_id", "rank", "passage_id")
        )
        if not args.corpus:
            raise _CliError(2, "the retrieval task needs --corpus for passage texts")
        corpus = load_corpus(str(_require_file(args.corpus, "corpus")))
        ranked: dict[str, list[tuple[int, str]]] = {}
        for row in rows:
            ranked.setdefault(str(row["query_id"]), []).append((row["rank"], row["passage_id"]))
        retrieved_texts = {}
        for query_id, pairs in ranked.items():
            texts = []
            for _, pid in sorted(pairs):
                passage = corpus.get(pid)
                if passage is None:
                    _warn(f"results reference unknown passage {pid!r}")
                    continue
                texts.append(passage.text)
            retrieved_texts[query_id] = texts
        overlap = {e.query_id for e in examples} & set(retrieved_texts)
        if not overlap:
            raise _CliError(2, "no overlapping query ids between results and gold")
        report = evaluate_retrieval_recall(
            retrieved_texts, examples, ks=config.recall_ks,
            multi_answer_only=config.multi_answer_only,
        )
    elif args.task == "longform":
        rows = _read_jsonl(_require_file(args.results, "predictions"), ("query_id", "output"))
        predictions = {str(row["query_id"]): row["output"] for row in rows}
        overlap = {e.query_id for e in examples} & set(predictions)
        if not overlap:
            raise _CliError(2, "no overlapping query ids between predictions and gold")
        backend = _make_backend(config)
        label = "stub" if isinstance(backend, StubBackend) else config.backend_endpoint
        report = evaluate_longform(predictions, examples, backend, backend_label=label)
    else:
        raise _CliError(2, f"unknown eval task: {args.task}")

    for message in report.warnings:
        _warn(message)
    payload = {"fingerprint": config.fingerprint(), **report.to_dict()}
    del payload["per_query"]
    with _output_lock(Path(args.report).resolve().parent):
        Path(args.report).write_text(_dump(payload) + "\n", encoding="utf-8")
        per_query_path = args.per_query or f"{args.report}.per_query.jsonl"
        _write_jsonl(
            Path(per_query_path),
            {"fingerprint": config.fingerprint(), "task": report.task},
            [{"query_id": qid, **row} for qid, row in sorted(report.per_query.items())],
        )
    for metric, value in sorted(report.macro.items()):
        print(f"{metric}: {value:.4f}")
    return 0


def cmd_coverage(args) -> int:
    config = _load_config(args)
    db = QADatabase.load(_require_file(args.db, "database"))
    examples = load_examples(
        _require_file(args.gold, "gold").read_text(encoding="utf-8").splitlines()
    )
    try:
        fraction = db.answer_coverage(examples)
    except ContractViolation as exc:
        raise _CliError(2, str(exc)) from exc
    payload = {
        "fingerprint": config.fingerprint(),
        "coverage": fraction,
        "examples": len(examples),
    }
    if args.out:
        with _output_lock(Path(args.out).resolve().parent):
            Path(args.out).write_text(_dump(payload) + "\n", encoding="utf-8")
    print(f"answer coverage: {fraction:.4f} ({100 * fraction:.1f}%)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qadb",
        description="Question-answer database construction, retrieval, and evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-db", help="run the construction pipeline over a corpus")
    p.add_argument("--config", default=None)
    p.add_argument("--corpus", required=True)
    p.add_argument("--db", required=True, help="output database file")
    p.add_argument("--report", default=None, help="funnel report path (default: <db>.report.json)")
    p.add_argument("--checkpoint", default=None, help="resumable candidate-record file")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_build_db)

    p = sub.add_parser("retrieve", help="rank passages for a query file")
    p.add_argument("--config", default=None)
    p.add_argument("--db", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--corpus", default=None, help="needed for the direct baseline")
    p.add_argument("--embeddings", default=None, help="precomputed question vectors")
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("revise", help="iteratively revise (question, answer, passage) rows")
    p.add_argument("--config", default=None)
    p.add_argument("--corpus", required=True)
    p.add_argument("--questions", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_revise)

    p = sub.add_parser("eval", help="score retrieval results or long-form answers")
    p.add_argument("--config", default=None)
    p.add_argument("--task", required=True, choices=["retrieval", "longform"])
    p.add_argument("--results", required=True, help="retrieval results or predictions file")
    p.add_argument("--gold", required=True)
    p.add_argument("--corpus", default=None, help="needed for the retrieval task")
    p.add_argument("--report", required=True)
    p.add_argument("--per-query", dest="per_query", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("coverage", help="gold-answer coverage of a database")
    p.add_argument("--config", default=None)
    p.add_argument("--db", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_coverage)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ParseError, ContractViolation, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except QADBError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
