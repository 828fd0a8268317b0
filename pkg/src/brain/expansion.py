"""Query expansion from a signature term graph ranked with PageRank."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from brain.corpus import BugReport, preprocess

DEFAULT_DAMPING = 0.85
DEFAULT_MAX_ITER = 100
DEFAULT_EPS = 1e-6
DEFAULT_TOP_TERMS = 10
# scores closer than this compare equal when selecting terms
TIE_DIGITS = 12


class EmptyGraphError(ValueError):
    pass


@dataclass
class TermGraph:
    adjacency: dict[str, set[str]] = field(default_factory=dict)

    @property
    def vertices(self) -> set[str]:
        return set(self.adjacency)

    @property
    def edges(self) -> set[tuple[str, str]]:
        return {(a, b) for a, nbrs in self.adjacency.items() for b in nbrs if a < b}

    def add_vertex(self, term: str) -> None:
        self.adjacency.setdefault(term, set())

    def add_edge(self, a: str, b: str) -> None:
        if a == b:
            return
        self.adjacency.setdefault(a, set()).add(b)
        self.adjacency.setdefault(b, set()).add(a)

    def __len__(self) -> int:
        return len(self.adjacency)


@dataclass
class PageRankScores:
    scores: dict[str, float]
    iterations_run: int
    converged: bool


@dataclass
class ExpandedQuery:
    base_tokens: list[str]
    expansion_terms: list[str]
    combined: list[str]


def build_term_graph(phrases: Iterable[Sequence[str]]) -> TermGraph:
    """Vertices are terms; consecutive terms within a phrase share an edge."""
    g = TermGraph()
    for phrase in phrases:
        for term in phrase:
            g.add_vertex(term)
        for a, b in zip(phrase, phrase[1:]):
            g.add_edge(a, b)
    return g


def pagerank(
    g: TermGraph,
    d: float = DEFAULT_DAMPING,
    max_iter: int = DEFAULT_MAX_ITER,
    eps: float = DEFAULT_EPS,
) -> PageRankScores:
    """Power iteration on an undirected graph, out-degree = vertex degree.

    Isolated vertices spread their mass uniformly over all vertices so the
    scores stay a probability distribution. Iteration stops once the L1
    distance to the fixed point, bounded by ``delta * d / (1 - d)`` for this
    contraction, drops below ``eps``.
    """
    if not len(g):
        raise EmptyGraphError("pagerank needs at least one vertex")
    # sorted order keeps floating-point results independent of insertion order
    terms = sorted(g.adjacency)
    pos = {t: i for i, t in enumerate(terms)}
    nbrs = [sorted(pos[u] for u in g.adjacency[t]) for t in terms]
    degree = [len(x) for x in nbrs]
    dangling = [i for i, k in enumerate(degree) if k == 0]
    n = len(terms)
    base = (1.0 - d) / n
    pr = [1.0 / n] * n
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        spread = d * sum(pr[i] for i in dangling) / n
        share = [pr[j] / degree[j] if degree[j] else 0.0 for j in range(n)]
        new = [base + spread + d * sum(share[j] for j in nbrs[i]) for i in range(n)]
        delta = sum(abs(a - b) for a, b in zip(new, pr))
        pr = new
        if delta * d / (1.0 - d) < eps:
            converged = True
            break
    return PageRankScores(dict(zip(terms, pr)), it, converged)


def select_terms(scores: PageRankScores, n: int = DEFAULT_TOP_TERMS) -> list[str]:
    if n < 1:
        raise ValueError("n must be >= 1")
    ranked = sorted(scores.scores.items(), key=lambda kv: (-round(kv[1], TIE_DIGITS), kv[0]))
    return [t for t, _ in ranked[:n]]


def expand_query(report: BugReport | Sequence[str], terms: Sequence[str]) -> ExpandedQuery:
    """Append expansion terms that the base query does not already contain."""
    if isinstance(report, BugReport):
        base = preprocess(report.text, code=True)
    else:
        base = list(report)
    present = set(base)
    added: list[str] = []
    for t in terms:
        if t not in present:
            added.append(t)
            present.add(t)
    return ExpandedQuery(base_tokens=base, expansion_terms=list(terms), combined=base + added)


def dump_graph(path: str | Path, g: TermGraph, scores: PageRankScores | None, selected: Sequence[str]) -> None:
    """Write the term graph and its scores as JSON for inspection."""
    doc = {
        "vertices": sorted(g.vertices),
        "edges": sorted([a, b] for a, b in g.edges),
        "scores": {t: scores.scores[t] for t in sorted(scores.scores)} if scores else {},
        "iterations": scores.iterations_run if scores else 0,
        "converged": scores.converged if scores else False,
        "selected": list(selected),
    }
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
