"""Retrieval metrics (AP@K, RR, HIT@K) and the multi-mode evaluation harness."""

from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from statistics import fmean
from typing import Any, Callable, Collection, Iterable, Sequence

from brain.config import Mode, PipelineConfig
from brain.corpus import BugReport, normalize_path
from brain.feedback import RelevanceOracle, VerdictCache
from brain.index import InvertedIndex
from brain.ranker import localize

logger = logging.getLogger(__name__)

HIT_KS = (1, 5, 10)
METRIC_NAMES = ("MAP", "MRR", "HIT@1", "HIT@5", "HIT@10")
SUMMARY_COLUMNS = ("mode", "subset", "n", *METRIC_NAMES)
PER_BUG_COLUMNS = ("mode", "bug_id", "ap", "rr", "first_rank", "hit1", "hit5", "hit10", "in_candidates")


@dataclass(frozen=True)
class GroundTruth:
    bug_id: str
    relevant_paths: frozenset[str]

    def __post_init__(self) -> None:
        if not self.relevant_paths:
            raise ValueError(f"ground truth for {self.bug_id!r} is empty")

    @classmethod
    def of(cls, bug_id: str, paths: Iterable[str]) -> GroundTruth:
        return cls(bug_id, frozenset(normalize_path(p) for p in paths))


def _truth_set(truth: GroundTruth | Collection[str]) -> frozenset[str]:
    paths = truth.relevant_paths if isinstance(truth, GroundTruth) else frozenset(truth)
    if not paths:
        raise ValueError("ground truth is empty")
    return paths


def average_precision(ranked: Sequence[str], truth: GroundTruth | Collection[str], k: int) -> float:
    """(1/|D|) * sum over the first k positions of precision@i at every hit."""
    if k < 1:
        raise ValueError("K must be >= 1")
    d = _truth_set(truth)
    hits = 0
    total = 0.0
    for i, item in enumerate(ranked[:k], start=1):
        if item in d:
            hits += 1
            total += hits / i
    return total / len(d)


def first_relevant_rank(ranked: Sequence[str], truth: GroundTruth | Collection[str]) -> int | None:
    d = _truth_set(truth)
    for i, item in enumerate(ranked, start=1):
        if item in d:
            return i
    return None


def reciprocal_rank(ranked: Sequence[str], truth: GroundTruth | Collection[str]) -> float:
    rank = first_relevant_rank(ranked, truth)
    return 0.0 if rank is None else 1.0 / rank


def hit_at_k(ranked: Sequence[str], truth: GroundTruth | Collection[str], k: int) -> int:
    if k < 1:
        raise ValueError("k must be >= 1")
    d = _truth_set(truth)
    return int(any(item in d for item in ranked[:k]))


@dataclass
class BugRow:
    bug_id: str
    ap: float
    rr: float
    first_rank: int | None
    hits: dict[int, int]
    in_candidates: bool

    def to_record(self) -> dict[str, Any]:
        return {
            "bug_id": self.bug_id,
            "ap": self.ap,
            "rr": self.rr,
            "first_rank": self.first_rank,
            "hit@1": self.hits[1],
            "hit@5": self.hits[5],
            "hit@10": self.hits[10],
            "in_candidates": self.in_candidates,
        }


def aggregate(rows: Sequence[BugRow]) -> dict[str, float]:
    if not rows:
        return {name: 0.0 for name in METRIC_NAMES}
    out = {"MAP": fmean(r.ap for r in rows), "MRR": fmean(r.rr for r in rows)}
    for k in HIT_KS:
        out[f"HIT@{k}"] = fmean(r.hits[k] for r in rows)
    return out


@dataclass
class ModeReport:
    mode: Mode
    rows: list[BugRow]

    @property
    def metrics(self) -> dict[str, float]:
        return aggregate(self.rows)

    @property
    def filtered_rows(self) -> list[BugRow]:
        return [r for r in self.rows if r.in_candidates]


@dataclass
class EvalReport:
    dataset_size: int
    k: int
    modes: dict[Mode, ModeReport]
    skipped: list[dict[str, str]] = field(default_factory=list)
    errors: list[dict[str, str]] = field(default_factory=list)
    degraded: list[str] = field(default_factory=list)

    @property
    def partial(self) -> bool:
        return bool(self.skipped or self.errors or self.degraded)

    def to_record(self) -> dict[str, Any]:
        modes = {}
        for mode, mr in self.modes.items():
            filtered = mr.filtered_rows
            modes[mode.value] = {
                "all": {"n": len(mr.rows), **mr.metrics},
                "filtered": {"n": len(filtered), **aggregate(filtered)},
                "rows": [r.to_record() for r in mr.rows],
            }
        return {
            "dataset_size": self.dataset_size,
            "evaluated": len(next(iter(self.modes.values())).rows) if self.modes else 0,
            "k": self.k,
            "modes": modes,
            "skipped": self.skipped,
            "errors": self.errors,
            "degraded": self.degraded,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record(), indent=2) + "\n"

    def summary_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for mode, mr in self.modes.items():
            for subset, rows in (("all", mr.rows), ("filtered", mr.filtered_rows)):
                m = aggregate(rows)
                w.writerow([mode.value, subset, len(rows), *(f"{m[name]:.6f}" for name in METRIC_NAMES)])
        return buf.getvalue()

    def per_bug_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(PER_BUG_COLUMNS)
        for mode, mr in self.modes.items():
            for r in mr.rows:
                w.writerow([
                    mode.value, r.bug_id, f"{r.ap:.6f}", f"{r.rr:.6f}",
                    "" if r.first_rank is None else r.first_rank,
                    r.hits[1], r.hits[5], r.hits[10], int(r.in_candidates),
                ])
        return buf.getvalue()

    def summary_table(self) -> str:
        lines = [f"{'mode':<28}{'n':>5}" + "".join(f"{name:>9}" for name in METRIC_NAMES)]
        for mode, mr in self.modes.items():
            m = mr.metrics
            lines.append(f"{mode.value:<28}{len(mr.rows):>5}" + "".join(f"{m[name]:>9.3f}" for name in METRIC_NAMES))
        if self.skipped:
            lines.append(f"skipped: {len(self.skipped)}")
        if self.errors:
            lines.append(f"errors: {len(self.errors)}")
        return "\n".join(lines)

    def write(self, out_dir: str | Path) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        files = {
            "report.json": self.to_json(),
            "summary.csv": self.summary_csv(),
            "per_bug.csv": self.per_bug_csv(),
        }
        written = []
        for name, text in files.items():
            (out / name).write_text(text, encoding="utf-8")
            written.append(out / name)
        return written


def split_dataset(reports: Sequence[BugReport], part: str = "all", ratio: float = 0.8) -> list[BugReport]:
    """Chronological split, taking file order as chronological order."""
    if part == "all":
        return list(reports)
    cut = int(round(len(reports) * ratio))
    if part == "train":
        return list(reports[:cut])
    if part == "test":
        return list(reports[cut:])
    raise ValueError(f"unknown split {part!r}")


IndexProvider = Callable[[str, str], "InvertedIndex | None"]


def evaluate(
    dataset: Sequence[BugReport],
    cfg: PipelineConfig,
    modes: Iterable[Mode | str],
    index_for: IndexProvider,
    oracle: RelevanceOracle | None = None,
    jobs: int = 1,
) -> EvalReport:
    """Localize every bug in every mode and aggregate MAP, MRR and HIT@K."""
    mode_list = list(dict.fromkeys(Mode.parse(m) for m in modes))
    k = cfg.ranking.result_k
    if oracle is None and any(m.uses_oracle for m in mode_list):
        oracle = RelevanceOracle(cfg.oracle, VerdictCache(cfg.cache_dir) if cfg.cache_dir else None)

    skipped: list[dict[str, str]] = []
    errors: list[dict[str, str]] = []
    eligible: list[tuple[BugReport, InvertedIndex, GroundTruth]] = []
    for report in sorted(dataset, key=lambda r: r.bug_id):
        try:
            index = index_for(report.system, report.version)
        except Exception as exc:  # noqa: BLE001 - recorded per bug
            errors.append({"bug_id": report.bug_id, "error": str(exc)})
            continue
        if index is None:
            errors.append({"bug_id": report.bug_id, "error": f"no index for {report.system}/{report.version}"})
            continue
        linked = report.fixed_files & index.paths()
        if not linked:
            skipped.append({"bug_id": report.bug_id, "reason": "ground truth not in corpus"})
            continue
        eligible.append((report, index, GroundTruth(report.bug_id, frozenset(linked))))

    def run(item: tuple[BugReport, InvertedIndex, GroundTruth]) -> tuple[str, dict[Mode, BugRow] | str, bool]:
        report, index, truth = item
        rows: dict[Mode, BugRow] = {}
        degraded = False
        try:
            for mode in mode_list:
                result = localize(report, index, cfg, oracle=oracle, mode=mode)
                degraded = degraded or result.degraded
                paths = result.paths
                cands = [c["path"] for c in (result.explain or {}).get("candidates", [])]
                rows[mode] = BugRow(
                    bug_id=report.bug_id,
                    ap=average_precision(paths, truth, k),
                    rr=reciprocal_rank(paths, truth),
                    first_rank=first_relevant_rank(paths, truth),
                    hits={h: hit_at_k(paths, truth, h) for h in HIT_KS},
                    in_candidates=any(p in truth.relevant_paths for p in cands),
                )
        except Exception as exc:  # noqa: BLE001 - recorded per bug
            logger.error("bug %s failed: %s", report.bug_id, exc)
            return report.bug_id, f"{type(exc).__name__}: {exc}", degraded
        return report.bug_id, rows, degraded

    if jobs > 1 and len(eligible) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(run, eligible))
    else:
        outcomes = [run(item) for item in eligible]

    per_mode: dict[Mode, list[BugRow]] = {m: [] for m in mode_list}
    degraded_ids: list[str] = []
    for bug_id, rows, degraded in outcomes:
        if isinstance(rows, str):
            errors.append({"bug_id": bug_id, "error": rows})
            continue
        if degraded:
            degraded_ids.append(bug_id)
        for m in mode_list:
            per_mode[m].append(rows[m])
    errors.sort(key=lambda e: e["bug_id"])
    return EvalReport(
        dataset_size=len(dataset),
        k=k,
        modes={m: ModeReport(m, per_mode[m]) for m in mode_list},
        skipped=skipped,
        errors=errors,
        degraded=sorted(degraded_ids),
    )
