"""``brain`` command line: index, localize, evaluate, oracle-check.

Exit status:

    0  success
    1  configuration, input or file error
    2  usage error
    3  evaluation finished with skipped, failed or degraded bugs
    4  index snapshot missing for the requested system/version
    5  unknown bug id
    6  oracle unavailable (network failure, timeout, non-2xx)
    7  oracle rejected the credentials
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from functools import lru_cache
from typing import Sequence

from brain.config import ConfigError, Mode, PipelineConfig, load_config
from brain.corpus import BugReport, CorpusError, DatasetError, discover_snapshots, ingest_snapshot, load_bug_reports
from brain.evaluation import evaluate, split_dataset
from brain.feedback import (
    OracleAuthError,
    OracleConfigError,
    OracleError,
    OracleUnavailableError,
    RelevanceOracle,
    VerdictCache,
    build_prompt,
    parse_verdict,
    query_oracle,
)
from brain.index import IndexFailure, build_index, load_index, save_index, snapshot_path
from brain.ranker import localize
from brain.segmenter import CodeSegment

logger = logging.getLogger("brain")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_PARTIAL = 3
EXIT_NO_INDEX = 4
EXIT_UNKNOWN_BUG = 5
EXIT_ORACLE_UNAVAILABLE = 6
EXIT_ORACLE_AUTH = 7


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="JSON file of flat dotted keys")
    parser.add_argument("--set", metavar="KEY=VALUE", action="append", default=[], help="override one config key")
    parser.add_argument("--corpus-root", help="corpus directory laid out as <system>/<version>/...")
    parser.add_argument("--index-dir", help="where index snapshots live")
    parser.add_argument("--cache-dir", help="verdict cache directory")
    parser.add_argument("--mode", help="full | no_expansion | no_rescoring | no_expansion+no_rescoring | baseline_vsm")
    parser.add_argument("--k", type=int, help="number of results to return")
    parser.add_argument("--jobs", type=int, help="worker threads (oracle calls and per-bug evaluation)")
    parser.add_argument("--oracle", choices=("mock", "http"), help="oracle backend")
    parser.add_argument("--oracle-best-effort", action="store_true", help="treat unjudged segments as irrelevant")
    parser.add_argument("--dump-graph", metavar="DIR", help="write each term graph to DIR/<bug_id>.json")
    parser.add_argument("--explain", action="store_true", help="include intermediate artefacts in the output")
    parser.add_argument("-v", "--verbose", action="count", default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="brain", description="IR bug localization with LLM relevance feedback")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="build index snapshots for every system/version")
    _common(p)

    p = sub.add_parser("localize", help="rank source files for one bug report")
    _common(p)
    p.add_argument("--dataset", help="JSONL bug dataset (with --bug-id)")
    p.add_argument("--bug-id")
    p.add_argument("--title")
    p.add_argument("--description", default="")
    p.add_argument("--system")
    p.add_argument("--version")

    p = sub.add_parser("evaluate", help="MAP / MRR / HIT@K over a dataset")
    _common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--modes", default="full,baseline_vsm", help="comma-separated list of modes")
    p.add_argument("--out", default="brain-eval", help="report directory")
    p.add_argument("--split", choices=("all", "train", "test"), default="all")

    p = sub.add_parser("oracle-check", help="send one canned prompt to the oracle")
    _common(p)
    return parser


def _config_from_args(args: argparse.Namespace) -> PipelineConfig:
    overrides: dict[str, object] = {}
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        overrides[key.strip()] = value
    flag_map = {
        "corpus_root": "corpus_root",
        "index_dir": "index_dir",
        "cache_dir": "cache_dir",
        "mode": "ranking.mode",
        "k": "ranking.result_k",
        "jobs": "oracle.max_concurrency",
        "oracle": "oracle.mode",
        "dump_graph": "expansion.dump_dir",
    }
    for attr, key in flag_map.items():
        value = getattr(args, attr, None)
        if value is not None:
            overrides[key] = value
    if args.oracle_best_effort:
        overrides["feedback.best_effort"] = True
    return load_config(args.config, overrides)


def _emit(record: object) -> None:
    sys.stdout.write(json.dumps(record, indent=2) + "\n")
    sys.stdout.flush()


def cmd_index(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    if not cfg.corpus_root:
        raise ConfigError("corpus_root is not set (use --corpus-root or the config file)")
    snapshots = discover_snapshots(cfg.corpus_root)
    if not snapshots:
        raise CorpusError(f"no <system>/<version> directories under {cfg.corpus_root}")
    for system, version, directory in snapshots:
        docs = ingest_snapshot(directory, system, version, cfg.retrieval.extensions)
        index = build_index(docs, k1=cfg.retrieval.bm25_k1, b=cfg.retrieval.bm25_b)
        path = snapshot_path(cfg.index_dir, system, version)
        save_index(index, path)
        print(f"{system} {version}: indexed {index.doc_count} documents -> {path}")
    return EXIT_OK


def _index_loader(cfg: PipelineConfig):
    @lru_cache(maxsize=None)
    def load(system: str, version: str):
        path = snapshot_path(cfg.index_dir, system, version)
        if not path.exists():
            return None
        return load_index(path)

    return load


def _oracle(cfg: PipelineConfig) -> RelevanceOracle:
    cache = VerdictCache(cfg.cache_dir) if cfg.cache_dir else None
    return RelevanceOracle(cfg.oracle, cache)


def cmd_localize(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    if args.bug_id:
        if not args.dataset:
            raise ConfigError("--bug-id needs --dataset")
        reports = {r.bug_id: r for r in load_bug_reports(args.dataset)}
        if args.bug_id not in reports:
            print(f"error: unknown bug id {args.bug_id!r}", file=sys.stderr)
            return EXIT_UNKNOWN_BUG
        report = reports[args.bug_id]
    else:
        if not (args.title and args.system and args.version):
            raise ConfigError("give --bug-id/--dataset or --title, --system and --version")
        report = BugReport("adhoc", args.system, args.version, args.title, args.description or "")
    index = _index_loader(cfg)(report.system, report.version)
    if index is None:
        print(
            f"error: no index snapshot for {report.system}/{report.version} under {cfg.index_dir}",
            file=sys.stderr,
        )
        return EXIT_NO_INDEX
    oracle = _oracle(cfg) if Mode.parse(cfg.ranking.mode).uses_oracle else None
    try:
        result = localize(report, index, cfg, oracle=oracle)
    finally:
        if oracle is not None:
            oracle.close()
    if result.diagnostic:
        print(f"note: {result.diagnostic}", file=sys.stderr)
    _emit(result.to_record(explain=args.explain))
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    reports = split_dataset(load_bug_reports(args.dataset), args.split)
    modes = [Mode.parse(m) for m in args.modes.split(",") if m.strip()]
    jobs = args.jobs or 1
    oracle = _oracle(cfg) if any(m.uses_oracle for m in modes) else None
    try:
        report = evaluate(reports, cfg, modes, _index_loader(cfg), oracle=oracle, jobs=jobs)
    finally:
        if oracle is not None:
            oracle.close()
    report.write(args.out)
    print(report.summary_table())
    for s in report.skipped:
        print(f"skipped {s['bug_id']}: {s['reason']}", file=sys.stderr)
    for e in report.errors:
        print(f"error {e['bug_id']}: {e['error']}", file=sys.stderr)
    return EXIT_PARTIAL if report.partial else EXIT_OK


CANNED_REPORT = BugReport(
    "oracle-check",
    "check",
    "0",
    "NullPointerException when login password is empty",
    "Submitting the login form with an empty password crashes with a NullPointerException.",
)
CANNED_SEGMENT = CodeSegment(
    "oracle-check",
    "method",
    "checkLoginPassword",
    "boolean checkLoginPassword(String password) {\n"
    "    if (password.isEmpty()) {\n"
    "        return false;\n"
    "    }\n"
    "    return password.trim().length() >= MIN_LENGTH;\n"
    "}",
    1,
    6,
)


def cmd_oracle_check(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    prompt = build_prompt(CANNED_REPORT, CANNED_SEGMENT, cfg.oracle.supports_system_role, cfg.oracle.prompt_char_budget)
    started = time.perf_counter()
    raw = query_oracle(prompt, cfg.oracle, ("oracle-check", 0))
    latency = time.perf_counter() - started
    verdict = parse_verdict(raw)
    print(f"latency: {latency * 1000:.1f} ms", file=sys.stderr)
    _emit({
        "mode": cfg.oracle.mode,
        "model": cfg.oracle.cache_model_key,
        "verdict": "yes" if verdict.relevant else "no",
        "source": verdict.source,
        "raw_response": verdict.raw_response,
    })
    return EXIT_OK


COMMANDS = {
    "index": cmd_index,
    "localize": cmd_localize,
    "evaluate": cmd_evaluate,
    "oracle-check": cmd_oracle_check,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = _config_from_args(args)
        return COMMANDS[args.command](args, cfg)
    except OracleAuthError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ORACLE_AUTH
    except OracleUnavailableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ORACLE_UNAVAILABLE
    except (ConfigError, OracleConfigError, CorpusError, DatasetError, IndexFailure, OracleError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
