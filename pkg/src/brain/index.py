"""In-memory inverted index with Okapi BM25 scoring and system/version filters."""

from __future__ import annotations

import json
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from brain.corpus import SourceDocument, preprocess

logger = logging.getLogger(__name__)

DEFAULT_K1 = 1.2
DEFAULT_B = 0.75
DEFAULT_TOP_K = 50

SNAPSHOT_MAGIC = b"BRAINIDX"
SNAPSHOT_VERSION = 1


class IndexFailure(Exception):
    """Base class for index build, lookup and snapshot failures."""


class IndexBuildError(IndexFailure):
    pass


class UnknownDocumentError(IndexFailure, KeyError):
    def __str__(self) -> str:
        return f"unknown doc_id: {self.args[0]}"


class QueryError(IndexFailure, ValueError):
    pass


class SnapshotError(IndexFailure):
    pass


@dataclass(frozen=True)
class DocMeta:
    system: str
    version: str
    path: str


@dataclass
class Query:
    tokens: list[str]
    system_filter: str | None = None
    version_filter: str | None = None
    k: int = DEFAULT_TOP_K

    def __post_init__(self) -> None:
        if self.k < 1:
            raise QueryError(f"k must be >= 1, got {self.k}")


@dataclass
class InvertedIndex:
    postings: dict[str, list[tuple[str, int]]]
    doc_lengths: dict[str, int]
    doc_meta: dict[str, DocMeta]
    contents: dict[str, str] = field(default_factory=dict)
    k1: float = DEFAULT_K1
    b: float = DEFAULT_B

    def __post_init__(self) -> None:
        self._tf: dict[str, dict[str, int]] = {}
        for term, plist in self.postings.items():
            for doc_id, tf in plist:
                self._tf.setdefault(doc_id, {})[term] = tf
        self._avgdl = sum(self.doc_lengths.values()) / len(self.doc_lengths) if self.doc_lengths else 0.0

    @property
    def doc_count(self) -> int:
        return len(self.doc_lengths)

    @property
    def avg_doc_length(self) -> float:
        return self._avgdl

    def df(self, term: str) -> int:
        return len(self.postings.get(term, ()))

    def idf(self, term: str) -> float:
        n = self.doc_count
        df = self.df(term)
        return max(0.0, math.log(1.0 + (n - df + 0.5) / (df + 0.5)))

    def tf(self, term: str, doc_id: str) -> int:
        return self._tf.get(doc_id, {}).get(term, 0)

    def document(self, doc_id: str) -> SourceDocument:
        if doc_id not in self.doc_meta:
            raise UnknownDocumentError(doc_id)
        meta = self.doc_meta[doc_id]
        return SourceDocument(doc_id, meta.path, meta.system, meta.version, self.contents.get(doc_id, ""))

    def doc_ids(self) -> list[str]:
        return sorted(self.doc_lengths)

    def paths(self) -> set[str]:
        return {m.path for m in self.doc_meta.values()}

    def _term_weight(self, idf: float, tf: int, dl: int, avgdl: float) -> float:
        norm = self.k1 * (1.0 - self.b + self.b * dl / avgdl)
        return idf * tf * (self.k1 + 1.0) / (tf + norm)


def build_index(
    docs: Sequence[SourceDocument],
    k1: float = DEFAULT_K1,
    b: float = DEFAULT_B,
) -> InvertedIndex:
    """Preprocess (code mode) and index every document.

    Documents whose token stream is empty are left out with a warning.
    """
    if not docs:
        raise IndexBuildError("cannot build an index from zero documents")
    postings: dict[str, list[tuple[str, int]]] = {}
    lengths: dict[str, int] = {}
    meta: dict[str, DocMeta] = {}
    contents: dict[str, str] = {}
    for doc in sorted(docs, key=lambda d: d.doc_id):
        if doc.doc_id in lengths:
            raise IndexBuildError(f"duplicate doc_id {doc.doc_id} ({doc.path})")
        tokens = preprocess(doc.content, code=True)
        if not tokens:
            logger.warning("no indexable terms in %s, skipped", doc.path)
            continue
        for term, tf in sorted(Counter(tokens).items()):
            postings.setdefault(term, []).append((doc.doc_id, tf))
        lengths[doc.doc_id] = len(tokens)
        meta[doc.doc_id] = DocMeta(doc.system, doc.version, doc.path)
        contents[doc.doc_id] = doc.content
    if not lengths:
        raise IndexBuildError("every document was empty after preprocessing")
    return InvertedIndex(postings, lengths, meta, contents, k1=k1, b=b)


def bm25_score(index: InvertedIndex, query_tokens: Sequence[str], doc_id: str) -> float:
    """BM25 score of one document; repeated query tokens contribute repeatedly."""
    if doc_id not in index.doc_lengths:
        raise UnknownDocumentError(doc_id)
    dl = index.doc_lengths[doc_id]
    avgdl = index.avg_doc_length
    score = 0.0
    for term in query_tokens:
        tf = index.tf(term, doc_id)
        if tf:
            score += index._term_weight(index.idf(term), tf, dl, avgdl)
    return score


def _passes(meta: DocMeta, query: Query) -> bool:
    if query.system_filter is not None and meta.system != query.system_filter:
        return False
    if query.version_filter is not None and meta.version != query.version_filter:
        return False
    return True


def search(index: InvertedIndex, query: Query) -> list[tuple[str, float]]:
    """Top-k documents by BM25, ties broken by path then doc_id.

    Zero-score documents are never returned.
    """
    if not query.tokens:
        raise QueryError("query has no tokens")
    avgdl = index.avg_doc_length
    scores: dict[str, float] = {}
    # accumulate term by term in query order, same summation order as bm25_score
    for term in query.tokens:
        plist = index.postings.get(term)
        if not plist:
            continue
        idf = index.idf(term)
        for doc_id, tf in plist:
            if not _passes(index.doc_meta[doc_id], query):
                continue
            w = index._term_weight(idf, tf, index.doc_lengths[doc_id], avgdl)
            scores[doc_id] = scores.get(doc_id, 0.0) + w
    ranked = [(d, s) for d, s in scores.items() if s > 0.0]
    ranked.sort(key=lambda ds: (-ds[1], index.doc_meta[ds[0]].path, ds[0]))
    return ranked[: query.k]


def save_index(index: InvertedIndex, path: str | Path) -> None:
    """Write a snapshot: magic line, then one JSON object with sorted keys."""
    header = SNAPSHOT_MAGIC + b" %d\n" % SNAPSHOT_VERSION
    doc_ids = index.doc_ids()
    body = {
        "stats": {
            "doc_count": index.doc_count,
            "avg_doc_length": index.avg_doc_length,
            "k1": index.k1,
            "b": index.b,
        },
        "docs": [
            {
                "doc_id": d,
                "system": index.doc_meta[d].system,
                "version": index.doc_meta[d].version,
                "path": index.doc_meta[d].path,
                "length": index.doc_lengths[d],
                "content": index.contents.get(d, ""),
            }
            for d in doc_ids
        ],
        "postings": {t: [[d, tf] for d, tf in index.postings[t]] for t in sorted(index.postings)},
    }
    payload = json.dumps(body, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(header + payload.encode("utf-8") + b"\n")
    tmp.replace(path)


def load_index(path: str | Path) -> InvertedIndex:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise SnapshotError(f"cannot read index snapshot {path}: {exc}") from exc
    header, _, payload = raw.partition(b"\n")
    parts = header.split()
    if len(parts) != 2 or parts[0] != SNAPSHOT_MAGIC:
        raise SnapshotError(f"{path} is not an index snapshot")
    if int(parts[1]) != SNAPSHOT_VERSION:
        raise SnapshotError(f"{path}: unsupported snapshot version {parts[1].decode()}")
    try:
        body = json.loads(payload)
    except json.JSONDecodeError as exc:
        raise SnapshotError(f"{path}: corrupt snapshot body") from exc
    lengths = {d["doc_id"]: d["length"] for d in body["docs"]}
    meta = {d["doc_id"]: DocMeta(d["system"], d["version"], d["path"]) for d in body["docs"]}
    contents = {d["doc_id"]: d["content"] for d in body["docs"]}
    postings = {t: [(d, tf) for d, tf in plist] for t, plist in body["postings"].items()}
    stats = body["stats"]
    index = InvertedIndex(postings, lengths, meta, contents, k1=stats["k1"], b=stats["b"])
    if index.doc_count != stats["doc_count"]:
        raise SnapshotError(f"{path}: document count mismatch")
    return index


def snapshot_path(index_dir: str | Path, system: str, version: str) -> Path:
    return Path(index_dir) / system / f"{version}.idx"

