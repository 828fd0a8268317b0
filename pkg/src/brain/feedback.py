"""LLM relevance feedback: prompts, oracle calls, verdict parsing and caching."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import tempfile
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Literal, Sequence

import httpx

from brain.corpus import BugReport, SourceDocument, preprocess
from brain.segmenter import CodeSegment, segment_document

logger = logging.getLogger(__name__)

API_KEY_ENV = "BRAIN_ORACLE_API_KEY"
DEFAULT_PROMPT_CHARS = 32_000
SLOT_TRUNCATION_MARKER = "\n// ... [code segment truncated]"

SYSTEM_TEXT = (
    "You are a helpful AI software engineer specializing in identifying buggy code "
    "segments given a bug report. Analyze the provided bug report and the JAVA code "
    "segment to determine if the code segment is responsible for causing the bug "
    "described in the bug report. You need to understand the functionality of the "
    "code segment and the details of the bug report to determine the relevance of "
    "the code segment to the bug report.\n"
    "\n"
    "There are two possible outputs: 'yes', 'no'.\n"
    "- 'yes': The code is responsible for the bug described in the bug report.\n"
    "- 'no': The code is NOT responsible for the bug described in the bug report.\n"
    "\n"
    'Provide your output in JSON format like this sample: {"relevance": "yes"}.\n'
    "\n"
    "Act like a rational software engineer and provide output. Avoid emotion and "
    "extra text other than JSON."
)

USER_TEMPLATE = (
    "Analyze the following bug report and code segment:\n"
    "\n"
    "Bug Report: {bug_report}\n"
    "Code Segment: {code_segment}\n"
    "\n"
    "\n"
    "Please determine if the code segment is responsible for the bug described in "
    "the bug report."
)

VerdictSource = Literal["json", "string_match", "default_irrelevant"]
SegmentRef = tuple[str, int]


class OracleError(Exception):
    pass


class OracleUnavailableError(OracleError):
    def __init__(self, message: str, segment_ref: SegmentRef | None = None):
        self.segment_ref = segment_ref
        super().__init__(message if segment_ref is None else f"{message} (segment {segment_ref})")


class OracleAuthError(OracleError):
    pass


class OracleConfigError(OracleError, ValueError):
    pass


class ContractViolation(ValueError):
    pass


@dataclass(frozen=True)
class Prompt:
    system_text: str
    user_text: str
    supports_system_role: bool = True
    # raw slot contents, kept for the offline overlap oracle
    report_text: str = ""
    segment_text: str = ""

    def messages(self) -> list[dict[str, str]]:
        if self.supports_system_role:
            return [
                {"role": "system", "content": self.system_text},
                {"role": "user", "content": self.user_text},
            ]
        return [{"role": "user", "content": self.user_text}]


@dataclass(frozen=True)
class RelevanceVerdict:
    segment_ref: SegmentRef | None
    relevant: bool
    source: VerdictSource
    raw_response: str


@dataclass
class OracleConfig:
    mode: Literal["http", "mock"] = "mock"
    endpoint_url: str | None = None
    model_name: str | None = None
    temperature: float = 0.0
    max_output_tokens: int = 64
    request_timeout: float = 60.0
    max_retries: int = 3
    max_concurrency: int = 4
    supports_system_role: bool = True
    overlap_threshold: int = 3
    prompt_char_budget: int = DEFAULT_PROMPT_CHARS
    backoff_base: float = 0.5

    def validate(self) -> None:
        if self.mode not in ("http", "mock"):
            raise OracleConfigError(f"unknown oracle mode {self.mode!r}")
        if self.mode == "http" and not (self.endpoint_url and self.model_name):
            raise OracleConfigError("http oracle needs endpoint_url and model_name")
        if self.temperature < 0:
            raise OracleConfigError("temperature must be >= 0")
        if self.max_retries < 0 or self.max_concurrency < 1 or self.max_output_tokens < 1:
            raise OracleConfigError("max_retries >= 0, max_concurrency >= 1, max_output_tokens >= 1 required")

    @property
    def cache_model_key(self) -> str:
        if self.mode == "mock":
            return f"mock-overlap-{self.overlap_threshold}"
        return str(self.model_name)


def build_prompt(
    report: BugReport,
    segment: CodeSegment,
    supports_system_role: bool = True,
    char_budget: int = DEFAULT_PROMPT_CHARS,
) -> Prompt:
    """Fill the relevance template; only the code slot is ever truncated."""
    if not segment.body_text:
        raise ContractViolation("segment body is empty")
    report_text = report.text
    code = segment.body_text
    prefix = "" if supports_system_role else SYSTEM_TEXT + "\n\n"
    fixed = len(SYSTEM_TEXT) if supports_system_role else 0
    fixed += len(prefix) + len(USER_TEMPLATE.format(bug_report=report_text, code_segment=""))
    room = char_budget - fixed
    if len(code) > room:
        keep = max(0, room - len(SLOT_TRUNCATION_MARKER))
        code = code[:keep] + SLOT_TRUNCATION_MARKER
    user = prefix + USER_TEMPLATE.format(bug_report=report_text, code_segment=code)
    return Prompt(
        system_text=SYSTEM_TEXT,
        user_text=user,
        supports_system_role=supports_system_role,
        report_text=report_text,
        segment_text=code,
    )


def _mock_response(prompt: Prompt, threshold: int) -> str:
    shared = set(preprocess(prompt.report_text, code=True)) & set(preprocess(prompt.segment_text, code=True))
    return '{"relevance": "yes"}' if len(shared) >= threshold else '{"relevance": "no"}'


def _assistant_text(payload: object) -> str:
    if isinstance(payload, dict):
        choices = payload.get("choices")
        if isinstance(choices, list) and choices:
            first = choices[0]
            if isinstance(first, dict):
                msg = first.get("message")
                if isinstance(msg, dict) and isinstance(msg.get("content"), str):
                    return msg["content"]
                if isinstance(first.get("text"), str):
                    return first["text"]
        msg = payload.get("message")
        if isinstance(msg, dict) and isinstance(msg.get("content"), str):
            return msg["content"]
    raise OracleError("response carries no assistant message")


def query_oracle(
    prompt: Prompt,
    cfg: OracleConfig,
    segment_ref: SegmentRef | None = None,
    client: httpx.Client | None = None,
    sleep: Callable[[float], None] = time.sleep,
) -> str:
    """Return the oracle's raw reply to one prompt."""
    cfg.validate()
    if cfg.mode == "mock":
        return _mock_response(prompt, cfg.overlap_threshold)

    body = {
        "model": cfg.model_name,
        "messages": prompt.messages(),
        "temperature": cfg.temperature,
        "max_tokens": cfg.max_output_tokens,
    }
    headers = {"Content-Type": "application/json"}
    key = os.environ.get(API_KEY_ENV)
    if key:
        headers["Authorization"] = f"Bearer {key}"
    own_client = client is None
    client = client or httpx.Client(timeout=cfg.request_timeout)
    last_error = "no attempt made"
    try:
        for attempt in range(cfg.max_retries + 1):
            if attempt:
                sleep(cfg.backoff_base * 2 ** (attempt - 1))
            try:
                resp = client.post(str(cfg.endpoint_url), json=body, headers=headers, timeout=cfg.request_timeout)
            except httpx.HTTPError as exc:
                last_error = f"{type(exc).__name__}: {exc}"
                logger.warning("oracle request failed (attempt %d): %s", attempt + 1, last_error)
                continue
            if resp.status_code in (401, 403):
                raise OracleAuthError(f"oracle rejected credentials (HTTP {resp.status_code})")
            if not 200 <= resp.status_code < 300:
                last_error = f"HTTP {resp.status_code}"
                logger.warning("oracle returned %s (attempt %d)", last_error, attempt + 1)
                continue
            try:
                return _assistant_text(resp.json())
            except (ValueError, OracleError) as exc:
                last_error = f"bad response body: {exc}"
                continue
    finally:
        if own_client:
            client.close()
    raise OracleUnavailableError(f"oracle unavailable after {cfg.max_retries + 1} attempts: {last_error}", segment_ref)


_WORD = re.compile(r"\b(yes|no)\b", re.IGNORECASE)
_OBJECT = re.compile(r"\{[^{}]*\}")


def _json_relevance(text: str) -> bool | None:
    candidates = [text.strip()] + _OBJECT.findall(text)
    for cand in candidates:
        try:
            obj = json.loads(cand)
        except (ValueError, RecursionError):
            continue
        if not isinstance(obj, dict):
            continue
        for key, value in obj.items():
            if isinstance(key, str) and key.strip().lower() == "relevance" and isinstance(value, str):
                v = value.strip().lower()
                if v in ("yes", "no"):
                    return v == "yes"
    return None


def parse_verdict(raw: str | bytes, segment_ref: SegmentRef | None = None) -> RelevanceVerdict:
    """Turn any oracle reply into a verdict; never raises."""
    text = raw.decode("utf-8", errors="replace") if isinstance(raw, (bytes, bytearray)) else str(raw)
    rel = _json_relevance(text)
    if rel is not None:
        return RelevanceVerdict(segment_ref, rel, "json", text)
    m = _WORD.search(text)
    if m:
        return RelevanceVerdict(segment_ref, m.group(1).lower() == "yes", "string_match", text)
    return RelevanceVerdict(segment_ref, False, "default_irrelevant", text)


def document_relevance(verdicts: Sequence[RelevanceVerdict]) -> bool:
    """OR over segment verdicts of a single document."""
    doc_ids = {v.segment_ref[0] for v in verdicts if v.segment_ref is not None}
    if len(doc_ids) > 1:
        raise ContractViolation(f"verdicts span several documents: {sorted(doc_ids)}")
    return any(v.relevant for v in verdicts)


class VerdictCache:
    """Content-addressed on-disk store of oracle replies."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)

    @staticmethod
    def key(prompt: Prompt, model_key: str) -> str:
        h = hashlib.sha256()
        for part in (model_key, str(prompt.supports_system_role), prompt.system_text, prompt.user_text):
            h.update(part.encode("utf-8"))
            h.update(b"\x00")
        return h.hexdigest()

    def _path(self, key: str) -> Path:
        return self.directory / key[:2] / f"{key}.json"

    def get(self, key: str) -> dict | None:
        try:
            return json.loads(self._path(key).read_text(encoding="utf-8"))
        except FileNotFoundError:
            return None
        except (OSError, ValueError):
            logger.warning("ignoring unreadable cache entry %s", key)
            return None

    def put(self, key: str, verdict: RelevanceVerdict, model_key: str) -> None:
        path = self._path(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        entry = {
            "model": model_key,
            "raw_response": verdict.raw_response,
            "relevant": verdict.relevant,
            "source": verdict.source,
        }
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(entry, fh, sort_keys=True)
        os.replace(tmp, path)


@dataclass
class DocumentJudgement:
    doc_id: str
    segments: list[CodeSegment]
    verdicts: list[RelevanceVerdict]
    relevant: bool


@dataclass
class FeedbackResult:
    judgements: dict[str, DocumentJudgement]
    degraded: bool = False
    failures: list[str] = field(default_factory=list)

    def relevance(self, doc_id: str) -> int:
        j = self.judgements.get(doc_id)
        return int(bool(j and j.relevant))


class RelevanceOracle:
    """Judges (report, segment) pairs through the cache, then the configured oracle."""

    def __init__(
        self,
        cfg: OracleConfig,
        cache: VerdictCache | None = None,
        client: httpx.Client | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        cfg.validate()
        self.cfg = cfg
        self.cache = cache
        if client is None and cfg.mode == "http":
            client = httpx.Client(timeout=cfg.request_timeout)
        self.client = client
        self.sleep = sleep
        self.calls = 0
        self._lock = threading.Lock()
        self._memo: dict[str, RelevanceVerdict] = {}

    def judge(self, prompt: Prompt, segment_ref: SegmentRef) -> RelevanceVerdict:
        model_key = self.cfg.cache_model_key
        key = VerdictCache.key(prompt, model_key)
        with self._lock:
            hit = self._memo.get(key)
        if hit is not None:
            return RelevanceVerdict(segment_ref, hit.relevant, hit.source, hit.raw_response)
        if self.cache is not None:
            entry = self.cache.get(key)
            if entry is not None:
                verdict = parse_verdict(entry["raw_response"], segment_ref)
                with self._lock:
                    self._memo[key] = verdict
                return verdict
        with self._lock:
            self.calls += 1
        raw = query_oracle(prompt, self.cfg, segment_ref, client=self.client, sleep=self.sleep)
        verdict = parse_verdict(raw, segment_ref)
        with self._lock:
            self._memo[key] = verdict
        if self.cache is not None:
            self.cache.put(key, verdict, model_key)
        return verdict

    def judge_documents(
        self,
        report: BugReport,
        docs: Sequence[SourceDocument],
        segment_cap: int | None = None,
        best_effort: bool = False,
        segment_chars: int | None = None,
    ) -> FeedbackResult:
        """Judge every segment of every document; results follow input order."""
        work: list[tuple[SegmentRef, Prompt]] = []
        segs_by_doc: dict[str, list[CodeSegment]] = {}
        for doc in docs:
            segs = segment_document(doc) if segment_chars is None else segment_document(doc, segment_chars)
            if segment_cap is not None:
                segs = segs[:segment_cap]
            segs_by_doc[doc.doc_id] = segs
            for n, seg in enumerate(segs):
                prompt = build_prompt(report, seg, self.cfg.supports_system_role, self.cfg.prompt_char_budget)
                work.append(((doc.doc_id, n), prompt))

        failures: list[str] = []

        def run(item: tuple[SegmentRef, Prompt]) -> RelevanceVerdict:
            ref, prompt = item
            try:
                return self.judge(prompt, ref)
            except OracleUnavailableError as exc:
                if not best_effort:
                    raise
                failures.append(str(exc))
                return RelevanceVerdict(ref, False, "default_irrelevant", "")

        if self.cfg.max_concurrency > 1 and len(work) > 1:
            with ThreadPoolExecutor(max_workers=self.cfg.max_concurrency) as pool:
                verdicts = list(pool.map(run, work))
        else:
            verdicts = [run(item) for item in work]

        by_doc: dict[str, list[RelevanceVerdict]] = {d.doc_id: [] for d in docs}
        for v in verdicts:
            assert v.segment_ref is not None
            by_doc[v.segment_ref[0]].append(v)
        judgements = {
            doc.doc_id: DocumentJudgement(
                doc.doc_id, segs_by_doc[doc.doc_id], by_doc[doc.doc_id], document_relevance(by_doc[doc.doc_id])
            )
            for doc in docs
        }
        return FeedbackResult(judgements, degraded=bool(failures), failures=sorted(failures))

    def close(self) -> None:
        if self.client is not None:
            self.client.close()
