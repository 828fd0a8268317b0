import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_doc
from reference import reference_localize, ref_softmax

from brain.config import Mode, PipelineConfig
from brain.corpus import BugReport
from brain.expansion import ExpandedQuery
from brain.feedback import ContractViolation
from brain.index import UnknownDocumentError, bm25_score, build_index
from brain.ranker import ScoredDocument, finalize, localize, rerank, rescore, softmax

finite = st.floats(min_value=-50, max_value=50, allow_nan=False)


def test_softmax_examples():
    assert softmax([0.0, 0.0]) == [0.5, 0.5]
    assert softmax([5.0]) == [1.0]
    out = softmax([1.0, 2.0, 3.0])
    assert out == pytest.approx(ref_softmax([1.0, 2.0, 3.0]), abs=1e-15)
    assert softmax([1000.0, 0.0])[0] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        softmax([])


@given(st.lists(finite, min_size=1, max_size=30), finite)
def test_softmax_properties(z, c):
    out = softmax(z)
    assert math.fsum(out) == pytest.approx(1.0, abs=1e-12)
    assert all(0.0 <= p <= 1.0 for p in out)
    assert softmax([x + c for x in z]) == pytest.approx(out, abs=1e-9)
    order = sorted(range(len(z)), key=lambda i: z[i])
    assert all(out[a] <= out[b] for a, b in zip(order, order[1:]))


def test_rescore():
    assert rescore([0.5, 0.3, 0.2], [1, 0, 1]) == [0.5, 0.0, 0.2]
    with pytest.raises(ContractViolation):
        rescore([0.5], [1, 0])


def _sd(doc_id, final, z, rank, path=None):
    return ScoredDocument(doc_id, path or f"{doc_id}.java", z, final, 1, final, rank)


def test_finalize_order_and_ties():
    docs = [
        _sd("a", 0.0, 9.0, 1),
        _sd("b", 0.4, 1.0, 2),
        _sd("c", 0.4, 2.0, 3),
        _sd("d", 0.2, 5.0, 4),
        _sd("e", 0.2, 5.0, 5, path="A.java"),
    ]
    result = finalize(docs, k=10)
    assert [d.doc_id for d in result.documents] == ["c", "b", "d", "e", "a"]
    assert len(finalize(docs, k=2).documents) == 2


def test_relevance_dominates():
    # any relevant doc outranks every irrelevant one whatever its softmax score
    soft = softmax([10.0, 1.0, 0.5])
    final = rescore(soft, [0, 0, 1])
    docs = [ScoredDocument(str(i), f"{i}.java", z, s, r, f, i + 1)
            for i, (z, s, r, f) in enumerate(zip([10.0, 1.0, 0.5], soft, [0, 0, 1], final))]
    assert finalize(docs).documents[0].doc_id == "2"


def test_rerank_identity_and_errors():
    docs = [make_doc("A.java", "alpha beta"), make_doc("B.java", "beta gamma"), make_doc("C.java", "delta")]
    index = build_index(docs)
    ids = index.doc_ids()
    q = ExpandedQuery(["beta"], [], ["beta"])
    assert rerank(index, ids, q) == [(d, bm25_score(index, ["beta"], d)) for d in ids]
    extended = ExpandedQuery(["beta"], ["gamma"], ["beta", "gamma"])
    for (d, s), (_, base) in zip(rerank(index, ids, extended), rerank(index, ids, q)):
        assert s == pytest.approx(base + bm25_score(index, ["gamma"], d))
    with pytest.raises(UnknownDocumentError):
        rerank(index, ["missing"], q)
    with pytest.raises(ContractViolation):
        rerank(index, ids, ExpandedQuery([], [], []))


@pytest.mark.parametrize("mode", [m.value for m in Mode])
def test_localize_matches_reference(fixture_docs, fixture_index, fixture_bugs, mode):
    cfg = PipelineConfig()
    for bug in fixture_bugs:
        got = localize(bug, fixture_index, cfg, mode=mode)
        assert got.paths == reference_localize(fixture_docs, bug, mode)
        assert got.mode.value == mode


def test_localize_full_vs_baseline(fixture_index, fixture_bugs, manifest):
    cfg = PipelineConfig()
    for bug in fixture_bugs:
        full = localize(bug, fixture_index, cfg, mode="full")
        base = localize(bug, fixture_index, cfg, mode="baseline_vsm")
        planted = manifest["bugs"][bug.bug_id]["planted"]
        assert full.paths[0] in planted
        assert base.paths.index(planted[0]) + 1 == manifest["bugs"][bug.bug_id]["baseline_vsm_rank"]
        assert full.documents[0].relevance == 1
        assert all(d.relevance is None for d in base.documents)


def test_localize_record_shape(fixture_index, fixture_bugs):
    cfg = PipelineConfig()
    cfg.ranking.result_k = 3
    rec = localize(fixture_bugs[0], fixture_index, cfg).to_record(explain=True)
    assert [r["rank"] for r in rec["results"]] == [1, 2, 3]
    assert set(rec["results"][0]) == {"rank", "path", "final_score", "relevance", "bm25_expanded"}
    assert {"query", "candidates", "feedback", "expansion_terms", "expanded_query"} <= set(rec["explain"])
    assert "explain" not in localize(fixture_bugs[0], fixture_index, cfg).to_record()


def test_localize_no_match(fixture_index):
    cfg = PipelineConfig()
    empty = localize(BugReport("X", "demo", "1.0", "the of and"), fixture_index, cfg)
    assert empty.documents == [] and "no searchable terms" in empty.diagnostic
    wrong = localize(BugReport("X", "other", "9", "password hash"), fixture_index, cfg)
    assert wrong.documents == [] and "no candidates" in wrong.diagnostic


def test_dump_graph_written(tmp_path, fixture_index, fixture_bugs):
    cfg = PipelineConfig()
    cfg.expansion.dump_dir = str(tmp_path)
    localize(fixture_bugs[0], fixture_index, cfg)
    assert (tmp_path / f"{fixture_bugs[0].bug_id}.json").exists()
