"""Reranking, softmax normalisation, relevance gating and the end-to-end pipeline."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

from brain.config import Mode, PipelineConfig
from brain.corpus import BugReport, preprocess
from brain.expansion import (
    ExpandedQuery,
    build_term_graph,
    dump_graph,
    expand_query,
    pagerank,
    select_terms,
)
from brain.feedback import ContractViolation, FeedbackResult, RelevanceOracle, VerdictCache
from brain.index import InvertedIndex, Query, UnknownDocumentError, bm25_score, search
from brain.segmenter import extract_signatures, signatures_to_phrases

logger = logging.getLogger(__name__)


@dataclass
class ScoredDocument:
    doc_id: str
    path: str
    bm25_expanded: float
    softmax_score: float
    relevance: int | None  # None when the mode never consults the oracle
    final_score: float
    initial_rank: int

    def to_record(self, rank: int) -> dict[str, Any]:
        return {
            "rank": rank,
            "path": self.path,
            "final_score": self.final_score,
            "relevance": self.relevance,
            "bm25_expanded": self.bm25_expanded,
        }


@dataclass
class RankedResult:
    bug_id: str
    documents: list[ScoredDocument]
    mode: Mode
    degraded: bool = False
    diagnostic: str | None = None
    explain: dict[str, Any] | None = None

    @property
    def paths(self) -> list[str]:
        return [d.path for d in self.documents]

    def to_record(self, explain: bool = False) -> dict[str, Any]:
        rec: dict[str, Any] = {
            "bug_id": self.bug_id,
            "mode": self.mode.value,
            "results": [d.to_record(i) for i, d in enumerate(self.documents, start=1)],
        }
        if self.degraded:
            rec["degraded"] = True
        if self.diagnostic:
            rec["diagnostic"] = self.diagnostic
        if explain and self.explain is not None:
            rec["explain"] = self.explain
        return rec


def rerank(index: InvertedIndex, candidates: Sequence[str], q: ExpandedQuery) -> list[tuple[str, float]]:
    """BM25 of each candidate against the expanded query, using full-index statistics."""
    if not q.combined:
        raise ContractViolation("expanded query is empty")
    for doc_id in candidates:
        if doc_id not in index.doc_lengths:
            raise UnknownDocumentError(doc_id)
    return [(d, bm25_score(index, q.combined, d)) for d in candidates]


def softmax(scores: Sequence[float]) -> list[float]:
    if not scores:
        raise ValueError("softmax of an empty list")
    top = max(scores)
    exps = [math.exp(z - top) for z in scores]
    total = math.fsum(exps)
    return [e / total for e in exps]


def rescore(soft: Sequence[float], rel: Sequence[int]) -> list[float]:
    """Gate normalised scores by binary relevance."""
    if len(soft) != len(rel):
        raise ContractViolation(f"length mismatch: {len(soft)} scores, {len(rel)} relevance flags")
    return [s * r for s, r in zip(soft, rel)]


def finalize(scored: Sequence[ScoredDocument], k: int = 10, bug_id: str = "", mode: Mode = Mode.FULL) -> RankedResult:
    """Order by final score, then expanded BM25, initial rank and path; keep k."""
    ordered = sorted(scored, key=lambda s: (-s.final_score, -s.bm25_expanded, s.initial_rank, s.path))
    return RankedResult(bug_id=bug_id, documents=ordered[:k], mode=mode)


def _harvest_terms(
    index: InvertedIndex,
    relevant_ids: Sequence[str],
    cfg: PipelineConfig,
    bug_id: str,
) -> list[str]:
    phrases: list[list[str]] = []
    for doc_id in relevant_ids:
        phrases.extend(signatures_to_phrases(extract_signatures(index.document(doc_id))))
    graph = build_term_graph(phrases)
    ecfg = cfg.expansion
    if not len(graph):
        if ecfg.dump_dir:
            dump_graph(Path(ecfg.dump_dir) / f"{bug_id}.json", graph, None, [])
        return []
    scores = pagerank(graph, d=ecfg.damping, max_iter=ecfg.max_iter, eps=ecfg.eps)
    terms = select_terms(scores, ecfg.top_terms)
    if ecfg.dump_dir:
        dump_graph(Path(ecfg.dump_dir) / f"{bug_id}.json", graph, scores, terms)
    return terms


def _explain_feedback(feedback: FeedbackResult, index: InvertedIndex) -> list[dict[str, Any]]:
    out = []
    for doc_id, j in feedback.judgements.items():
        out.append(
            {
                "path": index.doc_meta[doc_id].path,
                "relevant": j.relevant,
                "segments": [
                    {"kind": s.kind, "name": s.name, "lines": [s.start_line, s.end_line],
                     "relevant": v.relevant, "source": v.source}
                    for s, v in zip(j.segments, j.verdicts)
                ],
            }
        )
    return out


def localize(
    report: BugReport,
    index: InvertedIndex,
    cfg: PipelineConfig,
    oracle: RelevanceOracle | None = None,
    mode: Mode | str | None = None,
) -> RankedResult:
    """Run retrieval, feedback, expansion and rescoring for one bug report."""
    mode = Mode.parse(mode) if mode is not None else Mode.parse(cfg.ranking.mode)
    k = cfg.ranking.result_k
    base = preprocess(report.text, code=True)
    if not base:
        return RankedResult(report.bug_id, [], mode, diagnostic="bug report has no searchable terms")
    first = search(index, Query(base, report.system, report.version, cfg.retrieval.top_k))
    if not first:
        return RankedResult(
            report.bug_id, [], mode,
            diagnostic=f"no candidates for system={report.system} version={report.version}",
        )
    cand_ids = [d for d, _ in first]
    explain: dict[str, Any] = {
        "query": base,
        "candidates": [
            {"rank": i, "path": index.doc_meta[d].path, "bm25": s} for i, (d, s) in enumerate(first, start=1)
        ],
    }

    if mode is Mode.BASELINE_VSM:
        soft = softmax([s for _, s in first])
        docs = [
            ScoredDocument(d, index.doc_meta[d].path, s, p, None, p, i)
            for i, ((d, s), p) in enumerate(zip(first, soft), start=1)
        ]
        return RankedResult(report.bug_id, docs[:k], mode, explain=explain)

    feedback: FeedbackResult | None = None
    if mode.uses_oracle:
        if oracle is None:
            cache = VerdictCache(cfg.cache_dir) if cfg.cache_dir else None
            oracle = RelevanceOracle(cfg.oracle, cache)
        feedback = oracle.judge_documents(
            report,
            [index.document(d) for d in cand_ids],
            segment_cap=cfg.feedback.segment_cap,
            best_effort=cfg.feedback.best_effort,
            segment_chars=cfg.feedback.segment_chars,
        )
        explain["feedback"] = _explain_feedback(feedback, index)

    if mode.uses_expansion:
        assert feedback is not None
        relevant_ids = [d for d in cand_ids if feedback.relevance(d)]
        terms = _harvest_terms(index, relevant_ids, cfg, report.bug_id) if relevant_ids else []
        q = expand_query(base, terms)
    else:
        q = ExpandedQuery(base, [], list(base))
    explain["expansion_terms"] = q.expansion_terms
    explain["expanded_query"] = q.combined

    z = [s for _, s in rerank(index, cand_ids, q)]
    soft = softmax(z)
    rel = [feedback.relevance(d) for d in cand_ids] if feedback is not None else None
    final = rescore(soft, rel) if mode.uses_rescoring and rel is not None else list(soft)

    scored = [
        ScoredDocument(
            doc_id=d,
            path=index.doc_meta[d].path,
            bm25_expanded=z[i],
            softmax_score=soft[i],
            relevance=rel[i] if rel is not None else None,
            final_score=final[i],
            initial_rank=i + 1,
        )
        for i, d in enumerate(cand_ids)
    ]
    result = finalize(scored, k, report.bug_id, mode)
    result.explain = explain
    if feedback is not None and feedback.degraded:
        result.degraded = True
        result.diagnostic = f"{len(feedback.failures)} segment(s) unjudged; treated as irrelevant"
    return result

