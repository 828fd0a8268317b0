import math
import random

import pytest

from conftest import make_doc
from reference import brute_bm25, brute_search

from brain.corpus import preprocess
from brain.index import (
    IndexBuildError,
    Query,
    QueryError,
    SnapshotError,
    UnknownDocumentError,
    bm25_score,
    build_index,
    load_index,
    save_index,
    search,
)


def _three_docs():
    return [
        make_doc("a/A.java", "download failed retry"),
        make_doc("b/B.java", "upload complete"),
        make_doc("c/C.java", "cache eviction policy"),
    ]


def test_idf_of_single_document_term():
    index = build_index(_three_docs())
    # N=3, df=1: ln(1 + 2.5/1.5)
    assert index.idf("download") == pytest.approx(math.log(1 + 2.5 / 1.5))
    assert index.idf("download") == pytest.approx(0.9808, abs=1e-4)


def test_idf_of_term_in_every_document():
    docs = [make_doc(f"D{i}.java", "shared token") for i in range(3)]
    index = build_index(docs)
    assert index.idf("shared") == pytest.approx(math.log(1 + 0.5 / 3.5))
    assert index.idf("shared") >= 0.0


def test_idf_four_thirds_case():
    docs = [make_doc("A.java", "alpha beta"), make_doc("B.java", "alpha gamma")]
    index = build_index(docs)
    # N=2, df=1 -> ln(1 + 1.5/1.5) = ln 2 ; N=2, df=2 -> ln(1 + 0.5/2.5) = ln 1.2
    assert index.idf("beta") == pytest.approx(math.log(2))
    assert index.idf("alpha") == pytest.approx(math.log(1.2))


def test_search_returns_only_matching_docs():
    index = build_index(_three_docs())
    hits = search(index, Query(["download"]))
    assert [index.doc_meta[d].path for d, _ in hits] == ["a/A.java"]
    assert hits[0][1] > 0


def test_score_matches_bm25_score_exactly():
    docs = _three_docs()
    index = build_index(docs)
    q = ["download", "retry", "cache", "download"]
    for doc_id, score in search(index, Query(q)):
        assert score == bm25_score(index, q, doc_id)


def test_repeated_query_tokens_count_twice():
    index = build_index(_three_docs())
    doc_id = search(index, Query(["download"]))[0][0]
    once = bm25_score(index, ["download"], doc_id)
    assert bm25_score(index, ["download", "download"], doc_id) == pytest.approx(2 * once)


def test_ties_broken_by_path():
    docs = [make_doc("z/Z.java", "widget"), make_doc("a/A.java", "widget"), make_doc("m/M.java", "widget")]
    index = build_index(docs)
    hits = search(index, Query(["widget"]))
    assert [index.doc_meta[d].path for d, _ in hits] == ["a/A.java", "m/M.java", "z/Z.java"]
    assert len({s for _, s in hits}) == 1


def test_system_and_version_filters():
    docs = [
        make_doc("A.java", "widget", system="s1", version="1"),
        make_doc("A.java", "widget", system="s1", version="2"),
        make_doc("A.java", "widget", system="s2", version="1"),
    ]
    index = build_index(docs)
    assert len(search(index, Query(["widget"]))) == 3
    assert len(search(index, Query(["widget"], system_filter="s1"))) == 2
    (hit,) = search(index, Query(["widget"], system_filter="s1", version_filter="2"))
    assert index.doc_meta[hit[0]].version == "2"
    assert search(index, Query(["widget"], system_filter="nope")) == []


def test_k_truncates():
    docs = [make_doc(f"D{i}.java", "widget " * (i + 1)) for i in range(8)]
    index = build_index(docs)
    assert len(search(index, Query(["widget"], k=3))) == 3


def test_query_errors():
    index = build_index(_three_docs())
    with pytest.raises(QueryError):
        Query(["x"], k=0)
    with pytest.raises(QueryError):
        search(index, Query([]))
    with pytest.raises(UnknownDocumentError):
        bm25_score(index, ["download"], "deadbeef")


def test_build_errors():
    with pytest.raises(IndexBuildError):
        build_index([])
    with pytest.raises(IndexBuildError):
        build_index([make_doc("A.java", "public static void")])


def test_docs_without_terms_are_skipped(caplog):
    docs = _three_docs() + [make_doc("K.java", "public static final")]
    index = build_index(docs)
    assert index.doc_count == 3
    assert "K.java" in caplog.text


@pytest.mark.parametrize("seed", range(5))
def test_matches_brute_force(seed):
    rng = random.Random(seed)
    vocab = [f"w{c}{d}" for c in "abcdefg" for d in "xyz"]
    docs = [
        make_doc(f"f/D{i:02d}.java", " ".join(rng.choices(vocab, k=rng.randint(1, 30))))
        for i in range(rng.randint(3, 25))
    ]
    index = build_index(docs)
    toks = {d.doc_id: preprocess(d.content, code=True) for d in docs}
    paths = {d.doc_id: d.path for d in docs}
    query = preprocess(" ".join(rng.choices(vocab, k=rng.randint(1, 6))), code=True)
    expected = brute_search(toks, paths, query, 50)
    got = search(index, Query(query))
    assert [d for d, _ in got] == [d for d, _ in expected]
    for (_, s), (_, e) in zip(got, expected):
        assert abs(s - e) <= 1e-9
    ref = brute_bm25(toks, query)
    for doc_id in toks:
        assert abs(bm25_score(index, query, doc_id) - ref[doc_id]) <= 1e-9


def test_snapshot_round_trip(tmp_path, fixture_index):
    path = tmp_path / "demo" / "1.0.idx"
    save_index(fixture_index, path)
    loaded = load_index(path)
    assert loaded.doc_count == fixture_index.doc_count
    assert loaded.avg_doc_length == fixture_index.avg_doc_length
    q = Query(preprocess("password encoder hash login", code=True))
    assert search(loaded, q) == search(fixture_index, q)
    doc_id = fixture_index.doc_ids()[0]
    assert loaded.document(doc_id) == fixture_index.document(doc_id)
    again = tmp_path / "again.idx"
    save_index(loaded, again)
    assert again.read_bytes() == path.read_bytes()


def test_snapshot_errors(tmp_path):
    with pytest.raises(SnapshotError):
        load_index(tmp_path / "missing.idx")
    bad = tmp_path / "bad.idx"
    bad.write_bytes(b"NOTANIDX 1\n{}")
    with pytest.raises(SnapshotError):
        load_index(bad)
    bad.write_bytes(b"BRAINIDX 99\n{}")
    with pytest.raises(SnapshotError, match="version"):
        load_index(bad)
    bad.write_bytes(b"BRAINIDX 1\n{broken")
    with pytest.raises(SnapshotError, match="corrupt"):
        load_index(bad)
