"""Question indexing and indirect passage retrieval.

A query is matched against *generated questions* (sparse BM25 or dense
inner product), and question hits are mapped onto passages through their
provenance: either the best-scoring generated question per passage
("max") or the number of a passage's questions inside the top-k hits
("count"). A direct passage-level index built with the same machinery
serves as the conventional retrieval baseline.
"""

from __future__ import annotations

import hashlib
import math
import re
import struct
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from .corpus import Corpus
from .database import QADatabase
from .errors import EmbeddingDimMismatch, ModeUnavailable

DEFAULT_K1 = 1.2
DEFAULT_B = 0.75
DEFAULT_QUESTION_FETCH = 50

SPARSE = "sparse"
DENSE = "dense"

METHOD_MAX = "max"
METHOD_COUNT = "count"
METHOD_DIRECT = "direct"

_WORD = re.compile(r"\w+", re.UNICODE)

Embedder = Callable[[str], np.ndarray]


def tokenize(text: str) -> list[str]:
    """Lowercased Unicode word tokens; no stemming, no stopword removal."""
    return _WORD.findall(text.lower())


@dataclass(frozen=True)
class RetrievalHit:
    qid: int | str
    score: float
    rank: int


@dataclass(frozen=True)
class PassageScore:
    passage_id: str
    score: float
    method: str


class _Bm25:
    """Inverted-index BM25 with the non-negative idf variant.

    score(q, d) = sum over query token occurrences t of
        idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * dl / avgdl))
    with idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5)).
    """

    def __init__(self, docs: Sequence[list[str]], k1: float = DEFAULT_K1, b: float = DEFAULT_B):
        self.k1 = k1
        self.b = b
        self.size = len(docs)
        self.doc_len = [len(d) for d in docs]
        self.avgdl = sum(self.doc_len) / self.size if self.size else 0.0
        self.postings: dict[str, list[tuple[int, int]]] = {}
        for idx, doc in enumerate(docs):
            counts: dict[str, int] = {}
            for token in doc:
                counts[token] = counts.get(token, 0) + 1
            for token, tf in counts.items():
                self.postings.setdefault(token, []).append((idx, tf))

    def idf(self, token: str) -> float:
        df = len(self.postings.get(token, ()))
        return math.log(1.0 + (self.size - df + 0.5) / (df + 0.5))

    def scores(self, query_tokens: Sequence[str]) -> dict[int, float]:
        """Accumulated scores for documents sharing at least one query token."""
        acc: dict[int, float] = {}
        if not self.size or self.avgdl == 0.0:
            return acc
        for token in query_tokens:
            plist = self.postings.get(token)
            if not plist:
                continue
            idf = self.idf(token)
            for idx, tf in plist:
                norm = self.k1 * (1 - self.b + self.b * self.doc_len[idx] / self.avgdl)
                acc[idx] = acc.get(idx, 0.0) + idf * tf * (self.k1 + 1) / (tf + norm)
        return acc


class QuestionIndex:
    """Dual sparse/dense index over short texts keyed by stable ids.

    Built over generated questions for indirect retrieval, and reused
    over passage texts for the direct baseline.
    """

    def __init__(
        self,
        keys: Sequence[int | str],
        texts: Sequence[str],
        embedder: Embedder | None = None,
        *,
        k1: float = DEFAULT_K1,
        b: float = DEFAULT_B,
        dense_vectors: np.ndarray | None = None,
    ):
        self.keys = tuple(keys)
        self.sparse = _Bm25([tokenize(t) for t in texts], k1=k1, b=b)
        self.embedder = embedder
        if dense_vectors is not None:
            if dense_vectors.shape[0] != len(self.keys):
                raise EmbeddingDimMismatch(
                    f"{dense_vectors.shape[0]} vectors for {len(self.keys)} texts"
                )
            self.dense: np.ndarray | None = _unit_rows(np.asarray(dense_vectors, dtype=np.float64))
        elif embedder is not None:
            self.dense = _unit_rows(_embed_all(embedder, texts))
        else:
            self.dense = None

    def embed_query(self, query: str) -> np.ndarray:
        if self.dense is None or self.embedder is None:
            raise ModeUnavailable("index has no dense vectors / query embedder")
        vector = np.asarray(self.embedder(query), dtype=np.float64)
        if vector.ndim != 1 or vector.shape[0] != self.dense.shape[1]:
            raise EmbeddingDimMismatch(
                f"query vector dim {vector.shape} != index dim {self.dense.shape[1]}"
            )
        return _unit_rows(vector[None, :])[0]


def _embed_all(embedder: Embedder, texts: Sequence[str]) -> np.ndarray:
    vectors = []
    dim = None
    for text in texts:
        v = np.asarray(embedder(text), dtype=np.float64)
        if v.ndim != 1:
            raise EmbeddingDimMismatch(f"embedder returned shape {v.shape} for {text!r}")
        if dim is None:
            dim = v.shape[0]
        elif v.shape[0] != dim:
            raise EmbeddingDimMismatch(
                f"embedder returned dim {v.shape[0]} after dim {dim}"
            )
        vectors.append(v)
    return np.stack(vectors) if vectors else np.zeros((0, dim or 0))


def _unit_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    safe = np.where(norms == 0.0, 1.0, norms)  # all-zero rows stay zero
    return matrix / safe


def build_index(
    db: QADatabase,
    embedder: Embedder | None = None,
    *,
    k1: float = DEFAULT_K1,
    b: float = DEFAULT_B,
    dense_vectors: np.ndarray | None = None,
) -> QuestionIndex:
    """Index a question database; dense vectors only when an embedder is given."""
    qids = [q.qid for q in db.questions]
    texts = [q.question for q in db.questions]
    return QuestionIndex(qids, texts, embedder, k1=k1, b=b, dense_vectors=dense_vectors)


def build_passage_index(
    corpus: Corpus,
    embedder: Embedder | None = None,
    *,
    k1: float = DEFAULT_K1,
    b: float = DEFAULT_B,
) -> QuestionIndex:
    """Passage-text index for the direct retrieval baseline."""
    return QuestionIndex([p.id for p in corpus], [p.text for p in corpus], embedder, k1=k1, b=b)


def retrieve_questions(
    index: QuestionIndex, query: str, k: int, mode: str = SPARSE
) -> list[RetrievalHit]:
    """Top-k index entries for a query, ranked (score desc, key asc).

    Sparse mode returns only entries scoring > 0, so fewer than k hits is
    normal; dense mode returns min(k, index size) hits.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if mode == SPARSE:
        scored = index.sparse.scores(tokenize(query))
        items = [(index.keys[i], s) for i, s in scored.items() if s > 0.0]
    elif mode == DENSE:
        if index.dense is None:
            raise ModeUnavailable("index was built without dense vectors")
        scores = index.dense @ index.embed_query(query)
        items = [(index.keys[i], float(scores[i])) for i in range(len(index.keys))]
    else:
        raise ValueError(f"unknown retrieval mode {mode!r}")
    items.sort(key=lambda kv: (-kv[1], kv[0]))
    return [
        RetrievalHit(qid=key, score=score, rank=rank)
        for rank, (key, score) in enumerate(items[:k], start=1)
    ]


def score_passages_max(db: QADatabase, hits: Sequence[RetrievalHit]) -> list[PassageScore]:
    """Passage score = best hit score among the passage's generated questions.

    Passages none of whose questions were hit are absent from the output.
    """
    best: dict[str, float] = {}
    for hit in hits:
        for pid in db.question(hit.qid).passage_ids:
            if pid not in best or hit.score > best[pid]:
                best[pid] = hit.score
    ranked = sorted(best.items(), key=lambda kv: (-kv[1], kv[0]))
    return [PassageScore(pid, score, METHOD_MAX) for pid, score in ranked]


def score_passages_count(
    db: QADatabase, hits: Sequence[RetrievalHit], k: int = DEFAULT_QUESTION_FETCH
) -> list[PassageScore]:
    """Passage score = how many of the top-k hit questions it generated.

    A question generated from several passages counts once per passage.
    Ties break by the max-method score over the same top-k hits, then by
    passage id.
    """
    top = [hit for hit in hits if hit.rank <= k]
    counts: dict[str, int] = {}
    best: dict[str, float] = {}
    for hit in top:
        for pid in db.question(hit.qid).passage_ids:
            counts[pid] = counts.get(pid, 0) + 1
            if pid not in best or hit.score > best[pid]:
                best[pid] = hit.score
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], -best[kv[0]], kv[0]))
    return [PassageScore(pid, float(count), METHOD_COUNT) for pid, count in ranked]


def retrieve_passages(
    index: QuestionIndex,
    db: QADatabase,
    query: str,
    *,
    method: str = METHOD_COUNT,
    top_n: int = 10,
    mode: str = SPARSE,
    k_questions: int = DEFAULT_QUESTION_FETCH,
    passage_index: QuestionIndex | None = None,
) -> list[PassageScore]:
    """Ranked passages for a query under the chosen aggregation method.

    Question-based methods fetch ``k_questions`` question hits before
    aggregation; the direct baseline needs a prebuilt ``passage_index``.
    """
    if method == METHOD_DIRECT:
        if passage_index is None:
            raise ModeUnavailable("direct method requires a passage index")
        hits = retrieve_questions(passage_index, query, top_n, mode)
        return [PassageScore(str(h.qid), h.score, METHOD_DIRECT) for h in hits]
    hits = retrieve_questions(index, query, k_questions, mode)
    if method == METHOD_MAX:
        return score_passages_max(db, hits)[:top_n]
    if method == METHOD_COUNT:
        return score_passages_count(db, hits, k_questions)[:top_n]
    raise ValueError(f"unknown aggregation method {method!r}")


def hashing_embedder(dim: int = 64, seed: int = 0) -> Embedder:
    """Deterministic feature-hashing text embedder for tests and demos.

    Token hashes (keyed by ``seed``) pick a bucket and a sign; equal text
    always embeds identically, across processes and platforms.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")

    def embed(text: str) -> np.ndarray:
        vector = np.zeros(dim, dtype=np.float64)
        for token in tokenize(text):
            digest = hashlib.blake2b(
                f"{seed}:{token}".encode("utf-8"), digest_size=8
            ).digest()
            value = int.from_bytes(digest, "little")
            bucket = value % dim
            sign = 1.0 if (value >> 32) & 1 else -1.0
            vector[bucket] += sign
        return vector

    return embed


_VEC_MAGIC = b"QVEC"


def save_vectors(path: str, matrix: np.ndarray) -> None:
    """Write embeddings: magic, (count, dim) header, float32 rows in key order."""
    mat = np.ascontiguousarray(matrix, dtype=np.float32)
    if mat.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {mat.shape}")
    with open(path, "wb") as fh:
        fh.write(_VEC_MAGIC)
        fh.write(struct.pack("<II", mat.shape[0], mat.shape[1]))
        fh.write(mat.tobytes())


def load_vectors(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 12 or blob[:4] != _VEC_MAGIC:
        raise ValueError(f"{path}: not an embedding file")
    count, dim = struct.unpack("<II", blob[4:12])
    expected = 12 + 4 * count * dim
    if len(blob) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, found {len(blob)}")
    return np.frombuffer(blob[12:], dtype=np.float32).reshape(count, dim).astype(np.float64)
