import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reference import dense_pagerank

from brain.corpus import BugReport
from brain.expansion import (
    EmptyGraphError,
    PageRankScores,
    TermGraph,
    build_term_graph,
    dump_graph,
    expand_query,
    pagerank,
    select_terms,
)


def test_build_graph_from_phrases():
    g = build_term_graph([["get", "user", "name"], ["user", "id"], ["solo"], ["dup", "dup"]])
    assert g.vertices == {"get", "user", "name", "id", "solo", "dup"}
    assert g.edges == {("get", "user"), ("name", "user"), ("id", "user")}


def test_single_vertex():
    s = pagerank(build_term_graph([["only"]]))
    assert s.scores == {"only": pytest.approx(1.0)}
    assert s.converged


def test_single_edge():
    s = pagerank(build_term_graph([["a", "b"]]))
    assert s.scores["a"] == pytest.approx(0.5)
    assert s.scores["b"] == pytest.approx(0.5)


def test_path_graph_middle_wins():
    s = pagerank(build_term_graph([["a", "b", "c"]]))
    ref = dense_pagerank(["a", "b", "c"], {("a", "b"), ("b", "c")})
    for t in "abc":
        assert abs(s.scores[t] - ref[t]) <= 1e-6
    assert select_terms(s, 1) == ["b"]
    assert s.scores["a"] == pytest.approx(s.scores["c"])


def test_empty_graph():
    with pytest.raises(EmptyGraphError):
        pagerank(TermGraph())


def test_isolated_vertices_keep_distribution():
    s = pagerank(build_term_graph([["a", "b"], ["lonely"]]))
    assert sum(s.scores.values()) == pytest.approx(1.0, abs=1e-9)
    assert s.scores["lonely"] < s.scores["a"]


@st.composite
def graphs(draw):
    n = draw(st.integers(1, 12))
    terms = [f"t{i}" for i in range(n)]
    pairs = [(a, b) for i, a in enumerate(terms) for b in terms[i + 1 :]]
    edges = draw(st.sets(st.sampled_from(pairs), max_size=len(pairs))) if pairs else set()
    return terms, edges


def _graph(terms, edges):
    g = TermGraph()
    for t in terms:
        g.add_vertex(t)
    for a, b in edges:
        g.add_edge(a, b)
    return g


@settings(max_examples=60, deadline=None)
@given(graphs())
def test_sums_to_one_and_matches_dense(graph):
    terms, edges = graph
    s = pagerank(_graph(terms, edges))
    assert abs(sum(s.scores.values()) - 1.0) <= 1e-9
    ref = dense_pagerank(terms, edges)
    assert max(abs(s.scores[t] - ref[t]) for t in terms) <= 1e-6


@settings(max_examples=30, deadline=None)
@given(graphs(), st.randoms(use_true_random=False))
def test_permutation_equivariance(graph, rnd):
    terms, edges = graph
    renamed = terms[:]
    rnd.shuffle(renamed)
    mapping = dict(zip(terms, renamed))
    a = pagerank(_graph(terms, edges)).scores
    b = pagerank(_graph(renamed, {(mapping[x], mapping[y]) for x, y in edges})).scores
    for t in terms:
        assert a[t] == pytest.approx(b[mapping[t]], abs=1e-12)


@pytest.mark.parametrize("n", [3, 5, 8])
def test_regular_graphs_uniform(n):
    ring = [(f"v{i}", f"v{(i + 1) % n}") for i in range(n)]
    complete = [(f"v{i}", f"v{j}") for i in range(n) for j in range(i + 1, n)]
    for edges in (ring, complete):
        s = pagerank(_graph([f"v{i}" for i in range(n)], edges))
        for v in s.scores.values():
            assert v == pytest.approx(1 / n, abs=1e-9)


def test_max_iter_reports_nonconvergence():
    g = build_term_graph([["a", "b", "c", "d"], ["d", "e"]])
    s = pagerank(g, max_iter=1)
    assert s.iterations_run == 1 and not s.converged


def test_select_terms_tie_break_and_bounds():
    s = PageRankScores({"zeta": 0.25, "alpha": 0.25, "mid": 0.3, "low": 0.2}, 1, True)
    assert select_terms(s, 3) == ["mid", "alpha", "zeta"]
    assert select_terms(s, 10) == ["mid", "alpha", "zeta", "low"]
    with pytest.raises(ValueError):
        select_terms(s, 0)


def test_expand_query_appends_new_terms_only():
    q = expand_query(["login", "password", "login"], ["hash", "password", "salt", "hash"])
    assert q.base_tokens == ["login", "password", "login"]
    assert q.combined == ["login", "password", "login", "hash", "salt"]
    assert expand_query(["a"], []).combined == ["a"]


def test_expand_query_from_report():
    report = BugReport("B", "s", "1", "NullPointerException in getUserName", "")
    q = expand_query(report, ["user", "cache"])
    assert q.base_tokens == ["pointer", "exception", "get", "user", "name"]
    assert q.combined[-1] == "cache"


def test_dump_graph(tmp_path):
    g = build_term_graph([["a", "b"]])
    s = pagerank(g)
    dump_graph(tmp_path / "x" / "B.json", g, s, ["a"])
    doc = json.loads((tmp_path / "x" / "B.json").read_text())
    assert doc["edges"] == [["a", "b"]] and doc["selected"] == ["a"]
