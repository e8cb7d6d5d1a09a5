"""Three-stage QA-pair construction: detect answers, generate, verify.

Stage 1 proposes answer spans with beam search and keeps only spans that
literally occur in the passage, merging spans that are identical after
normalization. Stage 2 generates one question per surviving answer with
greedy decoding and requires the model to repeat its target answer.
Stage 3 re-reads the passage with the generated question and drops pairs
whose predicted answer is "not answerable" or differs from the target.
"""

from __future__ import annotations

import json
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path

from .backend import (
    BEAM,
    NOT_ANSWERABLE,
    Backend,
    GenerationRequest,
    detection_prompt,
    question_generation_prompt,
    reading_qa_prompt,
)
from .corpus import Corpus, Passage
from .database import QADatabase, merge_questions
from .metrics import normalize_answer

logger = logging.getLogger(__name__)

DEFAULT_BEAM = 32

REJECT_UNPARSEABLE = "unparseable_output"
REJECT_ANSWER_MISMATCH = "answer_mismatch"
REJECT_EMPTY_QUESTION = "empty_question"

_QG_OUTPUT = re.compile(r"^answer:\s*(.*?)\s*question:\s*(.*)$", re.DOTALL)


@dataclass(frozen=True)
class DetectedAnswer:
    """An answer span proposed from a passage; always a literal substring."""

    passage_id: str
    span: str
    char_start: int


@dataclass(frozen=True)
class CandidateQA:
    passage_id: str
    answer: str
    question: str
    verified: bool = False

    def __post_init__(self) -> None:
        if not self.question.strip() or not self.question.strip().endswith("?"):
            raise ValueError(f"candidate question must end with '?': {self.question!r}")

    def to_record(self) -> dict:
        return {
            "passage_id": self.passage_id,
            "answer": self.answer,
            "question": self.question,
            "verified": self.verified,
        }


@dataclass(frozen=True)
class Rejection:
    """A question-generation output that failed the acceptance rules."""

    passage_id: str
    answer: str
    reason: str


@dataclass
class PipelineConfig:
    beam: int = DEFAULT_BEAM
    workers: int = 1
    checkpoint_path: str | None = None


@dataclass
class FunnelReport:
    """Stage counts of one construction run (the detect/generate/verify funnel)."""

    passages: int = 0
    detected: int = 0
    generated: int = 0
    verified: int = 0
    unique_questions: int = 0
    rejections: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "passages": self.passages,
            "detected": self.detected,
            "generated": self.generated,
            "verified": self.verified,
            "unique_questions": self.unique_questions,
            "rejections": dict(sorted(self.rejections.items())),
        }


def detect_answers(passage: Passage, backend: Backend, beam: int = DEFAULT_BEAM) -> list[DetectedAnswer]:
    """Stage 1: propose answer spans from a passage.

    One backend call with beam decoding. Candidates that are not literal
    substrings of the passage are dropped; candidates identical after
    normalization are merged, keeping the highest-ranked surface form.
    Output preserves backend rank order.
    """
    response = backend.generate(
        GenerationRequest(
            prompt=detection_prompt(passage.text), max_candidates=beam, decode_mode=BEAM
        )
    )
    detected = []
    seen: set[str] = set()
    for span in response.candidates:
        if not span or span not in passage.text:
            continue
        key = normalize_answer(span)
        if key in seen:
            continue
        seen.add(key)
        detected.append(DetectedAnswer(passage.id, span, passage.text.find(span)))
    return detected


def generate_question(
    passage: Passage, answer: DetectedAnswer, backend: Backend
) -> CandidateQA | Rejection:
    """Stage 2: one greedily decoded question per detected answer.

    The output must parse as ``answer: <a'> question: <q>`` and repeat
    the target answer (compared after normalization); otherwise the pair
    is rejected, never raised.
    """
    response = backend.generate(
        GenerationRequest(
            prompt=question_generation_prompt(answer.span, passage.title, passage.text)
        )
    )
    match = _QG_OUTPUT.match(response.candidates[0])
    if not match:
        return Rejection(passage.id, answer.span, REJECT_UNPARSEABLE)
    echoed, question = match.group(1).strip(), match.group(2).strip()
    if normalize_answer(echoed) != normalize_answer(answer.span):
        return Rejection(passage.id, answer.span, REJECT_ANSWER_MISMATCH)
    if not question:
        return Rejection(passage.id, answer.span, REJECT_EMPTY_QUESTION)
    if not question.endswith("?"):
        question += "?"
    return CandidateQA(passage.id, answer.span, question, verified=False)


def verify(passage: Passage, qa: CandidateQA, backend: Backend) -> bool:
    """Stage 3: machine-reading check of a generated question.

    False when the backend predicts "not answerable" or an answer that
    differs from the original after normalization.
    """
    response = backend.generate(
        GenerationRequest(prompt=reading_qa_prompt(qa.question, passage.text))
    )
    prediction = response.candidates[0]
    if prediction == NOT_ANSWERABLE:
        return False
    return normalize_answer(prediction) == normalize_answer(qa.answer)


def _process_passage(
    passage: Passage, backend: Backend, beam: int
) -> tuple[list[CandidateQA], dict, Counter]:
    records = []
    rejections: Counter = Counter()
    answers = detect_answers(passage, backend, beam)
    generated = 0
    verified = 0
    for answer in answers:
        outcome = generate_question(passage, answer, backend)
        if isinstance(outcome, Rejection):
            rejections[outcome.reason] += 1
            logger.debug(
                "rejected answer %r from %s: %s", outcome.answer, passage.id, outcome.reason
            )
            continue
        generated += 1
        ok = verify(passage, outcome, backend)
        verified += ok
        records.append(replace(outcome, verified=ok))
    tallies = {
        "passage_id": passage.id,
        "detected": len(answers),
        "generated": generated,
        "verified": verified,
    }
    return records, tallies, rejections


def _checkpoint_meta_path(checkpoint_path: str) -> Path:
    return Path(str(checkpoint_path) + ".meta")


def _load_checkpoint(checkpoint_path: str) -> tuple[dict[str, dict], dict[str, list[CandidateQA]]]:
    """Completed passages (meta rows) and their candidate records.

    Candidate rows of passages without a meta row are orphans from an
    interrupted run and are dropped; those passages get reprocessed.
    """
    meta_path = _checkpoint_meta_path(checkpoint_path)
    completed: dict[str, dict] = {}
    if meta_path.exists():
        with open(meta_path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    row = json.loads(line)
                    completed[row["passage_id"]] = row
    records: dict[str, list[CandidateQA]] = {pid: [] for pid in completed}
    if Path(checkpoint_path).exists():
        with open(checkpoint_path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                row = json.loads(line)
                if row["passage_id"] in records:
                    records[row["passage_id"]].append(
                        CandidateQA(
                            passage_id=row["passage_id"],
                            answer=row["answer"],
                            question=row["question"],
                            verified=row["verified"],
                        )
                    )
    return completed, records


def build_database(
    corpus: Corpus, backend: Backend, config: PipelineConfig | None = None
) -> tuple[QADatabase, FunnelReport]:
    """Run all three stages over a corpus and merge the survivors.

    With a checkpoint path configured, per-passage candidate records and
    completion markers are appended as passages finish, and a rerun skips
    passages already completed. A backend failure aborts the run with the
    checkpoint intact, so the run is resumable by passage id.
    """
    config = config or PipelineConfig()
    report = FunnelReport(passages=len(corpus))
    rejections: Counter = Counter()

    completed: dict[str, dict] = {}
    kept: dict[str, list[CandidateQA]] = {}
    if config.checkpoint_path:
        completed, kept = _load_checkpoint(config.checkpoint_path)

    pending = [p for p in corpus if p.id not in completed]
    all_records: list[CandidateQA] = [r for rows in kept.values() for r in rows]
    for row in completed.values():
        report.detected += row["detected"]
        report.generated += row["generated"]
        report.verified += row["verified"]

    def outcomes():
        if config.workers > 1:
            with ThreadPoolExecutor(max_workers=config.workers) as pool:
                yield from pool.map(lambda p: _process_passage(p, backend, config.beam), pending)
        else:
            for passage in pending:
                yield _process_passage(passage, backend, config.beam)

    checkpoint_fh = meta_fh = None
    if config.checkpoint_path:
        checkpoint_fh = open(config.checkpoint_path, "a", encoding="utf-8", newline="\n")
        meta_fh = open(_checkpoint_meta_path(config.checkpoint_path), "a", encoding="utf-8", newline="\n")
    try:
        # Stream results so a backend failure aborts with everything
        # finished so far already on disk.
        for records, tallies, passage_rejections in outcomes():
            all_records.extend(records)
            rejections.update(passage_rejections)
            report.detected += tallies["detected"]
            report.generated += tallies["generated"]
            report.verified += tallies["verified"]
            if checkpoint_fh and meta_fh:
                for record in records:
                    checkpoint_fh.write(
                        json.dumps(record.to_record(), ensure_ascii=False, sort_keys=True) + "\n"
                    )
                checkpoint_fh.flush()
                meta_fh.write(json.dumps(tallies, ensure_ascii=False, sort_keys=True) + "\n")
                meta_fh.flush()
    finally:
        if checkpoint_fh:
            checkpoint_fh.close()
        if meta_fh:
            meta_fh.close()

    db = merge_questions([r for r in all_records if r.verified])
    report.unique_questions = len(db)
    report.rejections = dict(rejections)
    return db, report
