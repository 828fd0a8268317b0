import csv
import io
import json

import pytest

from brain.config import Mode, PipelineConfig
from brain.corpus import BugReport
from brain.evaluation import (
    BugRow,
    GroundTruth,
    aggregate,
    average_precision,
    evaluate,
    first_relevant_rank,
    hit_at_k,
    reciprocal_rank,
    split_dataset,
)


def test_average_precision_example():
    # hits at 1 and 3 with |D|=2: (1/1 + 2/3) / 2
    assert average_precision(["a", "x", "b", "y"], {"a", "b"}, 10) == pytest.approx(0.8333333333)


def test_average_precision_cutoff_and_missing():
    assert average_precision(["x", "a"], {"a"}, 1) == 0.0
    assert average_precision(["a"], {"a", "b"}, 10) == 0.5
    assert average_precision([], {"a"}, 10) == 0.0
    with pytest.raises(ValueError):
        average_precision(["a"], set(), 10)
    with pytest.raises(ValueError):
        average_precision(["a"], {"a"}, 0)


def test_reciprocal_rank_and_hits():
    ranked = ["x", "y", "a"] + [f"f{i}" for i in range(10)] + ["b"]
    assert first_relevant_rank(ranked, {"a", "b"}) == 3
    assert reciprocal_rank(ranked, {"a"}) == pytest.approx(1 / 3)
    assert reciprocal_rank(ranked, {"zz"}) == 0.0
    assert first_relevant_rank(ranked, {"zz"}) is None
    assert [hit_at_k(ranked, {"a"}, k) for k in (1, 2, 3, 5)] == [0, 0, 1, 1]
    assert hit_at_k(ranked, {"b"}, 10) == 0


def test_aggregate_mrr():
    rows = [
        BugRow("a", 1.0, 1.0, 1, {1: 1, 5: 1, 10: 1}, True),
        BugRow("b", 0.5, 0.5, 2, {1: 0, 5: 1, 10: 1}, True),
    ]
    m = aggregate(rows)
    assert m["MRR"] == 0.75 and m["MAP"] == 0.75
    assert (m["HIT@1"], m["HIT@5"]) == (0.5, 1.0)
    assert aggregate([])["MAP"] == 0.0


def test_ground_truth():
    assert GroundTruth.of("B", ["./a/B.java"]).relevant_paths == {"a/B.java"}
    with pytest.raises(ValueError):
        GroundTruth.of("B", [])


def test_split_dataset():
    reports = [BugReport(f"B{i}", "s", "1", "t") for i in range(10)]
    assert [r.bug_id for r in split_dataset(reports, "train")] == [f"B{i}" for i in range(8)]
    assert [r.bug_id for r in split_dataset(reports, "test")] == ["B8", "B9"]
    assert len(split_dataset(reports)) == 10
    with pytest.raises(ValueError):
        split_dataset(reports, "valid")


def _index_for(index):
    return lambda system, version: index if (system, version) == ("demo", "1.0") else None


def test_fixture_metrics_match_manifest(fixture_index, fixture_bugs, manifest):
    report = evaluate(fixture_bugs, PipelineConfig(), ["full", "baseline_vsm"], _index_for(fixture_index))
    assert not report.partial
    for mode in ("full", "baseline_vsm"):
        got = report.modes[Mode(mode)].metrics
        for name, value in manifest[mode].items():
            assert got[name] == pytest.approx(value, abs=1e-12), (mode, name)


def test_skipped_and_errors(fixture_index, fixture_bugs):
    extra = [
        BugReport("Z-1", "demo", "1.0", "password hash", fixed_files=frozenset({"not/in/Corpus.java"})),
        BugReport("Z-2", "demo", "9.9", "password hash", fixed_files=frozenset({"x.java"})),
    ]
    report = evaluate(list(fixture_bugs) + extra, PipelineConfig(), ["baseline_vsm"], _index_for(fixture_index))
    assert report.partial
    assert [s["bug_id"] for s in report.skipped] == ["Z-1"]
    assert [e["bug_id"] for e in report.errors] == ["Z-2"]
    assert len(report.modes[Mode.BASELINE_VSM].rows) == len(fixture_bugs)


def test_report_files(tmp_path, fixture_index, fixture_bugs):
    report = evaluate(fixture_bugs, PipelineConfig(), ["full", "baseline_vsm"], _index_for(fixture_index))
    report.write(tmp_path)
    rows = list(csv.DictReader(io.StringIO((tmp_path / "summary.csv").read_text())))
    assert [(r["mode"], r["subset"]) for r in rows] == [
        ("full", "all"), ("full", "filtered"), ("baseline_vsm", "all"), ("baseline_vsm", "filtered"),
    ]
    assert list(rows[0]) == ["mode", "subset", "n", "MAP", "MRR", "HIT@1", "HIT@5", "HIT@10"]
    per_bug = list(csv.DictReader(io.StringIO((tmp_path / "per_bug.csv").read_text())))
    assert len(per_bug) == 2 * len(fixture_bugs)
    data = json.loads((tmp_path / "report.json").read_text())
    assert data["modes"]["full"]["all"]["MRR"] == 1.0
    assert "MAP" in report.summary_table()


def test_invariant_hit1_mrr_hit10(fixture_index, fixture_bugs):
    report = evaluate(fixture_bugs, PipelineConfig(), list(Mode), _index_for(fixture_index))
    for mr in report.modes.values():
        m = mr.metrics
        assert m["HIT@1"] <= m["MRR"] <= m["HIT@10"]
