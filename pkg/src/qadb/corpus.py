"""Passage corpus: chunking, ingestion, serialization, and lookup.

Tokenization throughout is plain Unicode-whitespace splitting, so token
counts are deterministic and independent of any model vocabulary.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Iterator
from dataclasses import dataclass

from .errors import DuplicateId, EmptyDocument, ParseError

DEFAULT_CHUNK_SIZE = 100


@dataclass(frozen=True)
class Passage:
    """A chunk of a source document; the unit that retrieval returns."""

    id: str
    title: str
    text: str
    token_count: int

    def __post_init__(self) -> None:
        if not self.text.split():
            raise ValueError(f"passage {self.id!r} has empty text")
        actual = len(self.text.split())
        if self.token_count != actual:
            raise ValueError(
                f"passage {self.id!r}: token_count {self.token_count} != {actual}"
            )

    @classmethod
    def from_text(cls, id: str, title: str, text: str) -> "Passage":
        return cls(id=id, title=title, text=text, token_count=len(text.split()))

    def to_record(self) -> dict:
        return {"id": self.id, "title": self.title, "text": self.text}


class Corpus:
    """Ordered, id-indexed collection of passages.

    Immutable once built; iteration order is ingestion order.
    """

    def __init__(self, passages: Iterable[Passage] = ()):
        self._passages: list[Passage] = []
        self._by_id: dict[str, int] = {}
        for passage in passages:
            if passage.id in self._by_id:
                raise DuplicateId(passage.id)
            self._by_id[passage.id] = len(self._passages)
            self._passages.append(passage)

    def __len__(self) -> int:
        return len(self._passages)

    def __iter__(self) -> Iterator[Passage]:
        return iter(self._passages)

    def __contains__(self, passage_id: str) -> bool:
        return passage_id in self._by_id

    def __getitem__(self, passage_id: str) -> Passage:
        return self._passages[self._by_id[passage_id]]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Corpus):
            return NotImplemented
        return self._passages == other._passages

    def get(self, passage_id: str, default: Passage | None = None) -> Passage | None:
        idx = self._by_id.get(passage_id)
        return default if idx is None else self._passages[idx]

    @property
    def ids(self) -> list[str]:
        return [p.id for p in self._passages]


def chunk_document(title: str, body: str, chunk_size: int = DEFAULT_CHUNK_SIZE) -> list[Passage]:
    """Split a document body into fixed-size token chunks.

    Every chunk except possibly the last holds exactly ``chunk_size``
    whitespace tokens; chunk ids are ``"<title>#<0-based ordinal>"``.
    """
    if chunk_size < 1:
        raise ValueError(f"chunk_size must be >= 1, got {chunk_size}")
    tokens = body.split()
    if not tokens:
        raise EmptyDocument(f"document {title!r} is empty after whitespace normalization")
    passages = []
    for ordinal, start in enumerate(range(0, len(tokens), chunk_size)):
        chunk = tokens[start : start + chunk_size]
        passages.append(Passage.from_text(f"{title}#{ordinal}", title, " ".join(chunk)))
    return passages


def ingest_passages(lines: Iterable[str]) -> Corpus:
    """Build a Corpus from a stream of line-delimited JSON records.

    Each record must carry string fields ``id``, ``title``, ``text``.
    Blank lines are tolerated; anything else malformed raises ParseError
    with the 1-based line number.
    """
    passages = []
    seen: set[str] = set()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {lineno}: invalid JSON ({exc})") from exc
        if not isinstance(record, dict):
            raise ParseError(f"line {lineno}: record is not an object")
        try:
            pid, title, text = record["id"], record["title"], record["text"]
        except KeyError as exc:
            raise ParseError(f"line {lineno}: missing field {exc}") from exc
        if not all(isinstance(v, str) for v in (pid, title, text)):
            raise ParseError(f"line {lineno}: id/title/text must be strings")
        if pid in seen:
            raise DuplicateId(pid)
        seen.add(pid)
        try:
            passages.append(Passage.from_text(pid, title, text))
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from exc
    return Corpus(passages)


def save_corpus(corpus: Corpus, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for passage in corpus:
            fh.write(json.dumps(passage.to_record(), ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def load_corpus(path: str) -> Corpus:
    with open(path, encoding="utf-8") as fh:
        return ingest_passages(fh)
