"""Source snapshots, bug-report datasets and the shared text preprocessor."""

from __future__ import annotations

import hashlib
import json
import logging
import posixpath
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

logger = logging.getLogger(__name__)

STOPWORDS_RESOURCE = "stopwords_en_v1.txt"
JAVA_KEYWORDS_RESOURCE = "java_keywords_v1.txt"
DEFAULT_EXTENSIONS = (".java",)

_ALNUM_RUN = re.compile(r"[A-Za-z0-9]+")
# acronym run before a capitalised word, capitalised/lower word, bare acronym, digits
_HUMP = re.compile(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+|[A-Z]+|[0-9]+")


class CorpusError(Exception):
    """Raised when a source snapshot cannot be ingested."""


class EmptyCorpusError(CorpusError):
    pass


class DatasetError(Exception):
    """Raised for malformed or invalid bug-report records."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class SourceDocument:
    doc_id: str
    path: str
    system: str
    version: str
    content: str


@dataclass(frozen=True)
class BugReport:
    bug_id: str
    system: str
    version: str
    title: str
    description: str = ""
    fixed_files: frozenset[str] = field(default_factory=frozenset)

    @property
    def text(self) -> str:
        """Title and description as a single query text."""
        if self.description:
            return f"{self.title}\n\n{self.description}"
        return self.title


@lru_cache(maxsize=None)
def _word_list(name: str) -> frozenset[str]:
    raw = resources.files("brain.resources").joinpath(name).read_text(encoding="utf-8")
    words = (line.strip() for line in raw.splitlines())
    return frozenset(w for w in words if w and not w.startswith("#"))


def stopwords() -> frozenset[str]:
    return _word_list(STOPWORDS_RESOURCE)


def java_keywords() -> frozenset[str]:
    return _word_list(JAVA_KEYWORDS_RESOURCE)


def split_identifier(word: str) -> list[str]:
    """Split one alphanumeric run on camel-case humps and letter/digit boundaries.

    >>> split_identifier("HTTPServerError2")
    ['HTTP', 'Server', 'Error', '2']
    """
    return _HUMP.findall(word)


def preprocess(text: str, code: bool = False) -> list[str]:
    """Tokenize, split identifiers, lowercase and drop stop words.

    With ``code=True`` Java reserved words are dropped as well. Single
    character tokens are always dropped.
    """
    stop = stopwords()
    keywords = java_keywords() if code else frozenset()
    tokens: list[str] = []
    for run in _ALNUM_RUN.findall(text):
        for part in split_identifier(run):
            tok = part.lower()
            if len(tok) < 2 or tok in stop or tok in keywords:
                continue
            tokens.append(tok)
    return tokens


def make_doc_id(system: str, version: str, path: str) -> str:
    key = "\x00".join((system, version, path)).encode("utf-8")
    return hashlib.sha1(key).hexdigest()[:16]


def normalize_path(path: str) -> str:
    """Canonical repo-relative form used for both corpus paths and ground truth."""
    p = path.replace("\\", "/").strip()
    p = posixpath.normpath(p)
    while p.startswith("./"):
        p = p[2:]
    return p


def _is_valid_relpath(path: str) -> bool:
    if not path or path.startswith("/") or re.match(r"^[A-Za-z]:", path):
        return False
    norm = normalize_path(path)
    return norm not in (".", "") and not norm.startswith("../") and norm != ".."


def ingest_snapshot(
    root: str | Path,
    system: str,
    version: str,
    extensions: Sequence[str] = DEFAULT_EXTENSIONS,
) -> list[SourceDocument]:
    """Read every source file under ``root`` into a SourceDocument.

    Documents come back sorted by path so the result does not depend on
    filesystem enumeration order.
    """
    root = Path(root)
    if not root.is_dir():
        raise CorpusError(f"cannot read snapshot root: {root}")
    exts = tuple(e.lower() for e in extensions)
    docs: list[SourceDocument] = []
    try:
        files = [p for p in root.rglob("*") if p.is_file() and p.suffix.lower() in exts]
    except OSError as exc:
        raise CorpusError(f"cannot read snapshot root: {root}: {exc}") from exc
    for file in files:
        rel = file.relative_to(root).as_posix()
        try:
            content = file.read_text(encoding="utf-8", errors="replace")
        except OSError as exc:
            raise CorpusError(f"cannot read {file}: {exc}") from exc
        if not content.strip():
            logger.info("skipping empty file %s", rel)
            continue
        docs.append(
            SourceDocument(
                doc_id=make_doc_id(system, version, rel),
                path=rel,
                system=system,
                version=version,
                content=content,
            )
        )
    if not docs:
        raise EmptyCorpusError(f"no files matching {', '.join(exts)} under {root}")
    docs.sort(key=lambda d: d.path)
    return docs


def discover_snapshots(corpus_root: str | Path) -> list[tuple[str, str, Path]]:
    """List (system, version, directory) triples in a ``<root>/<system>/<version>`` tree."""
    root = Path(corpus_root)
    if not root.is_dir():
        raise CorpusError(f"corpus root not found: {root}")
    found = []
    for system_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        for version_dir in sorted(p for p in system_dir.iterdir() if p.is_dir()):
            found.append((system_dir.name, version_dir.name, version_dir))
    return found


def _require_str(record: dict, key: str, lineno: int, optional: bool = False) -> str:
    if key not in record or record[key] is None:
        if optional:
            return ""
        raise DatasetError(f"missing field '{key}'", lineno)
    value = record[key]
    if not isinstance(value, str):
        raise DatasetError(f"field '{key}' must be a string", lineno)
    return value


def parse_bug_record(record: object, lineno: int) -> BugReport:
    if not isinstance(record, dict):
        raise DatasetError("record is not an object", lineno)
    bug_id = _require_str(record, "bug_id", lineno)
    system = _require_str(record, "system", lineno)
    version = _require_str(record, "version", lineno)
    title = _require_str(record, "title", lineno)
    description = _require_str(record, "description", lineno, optional=True)
    if not bug_id:
        raise DatasetError("empty bug_id", lineno)
    if not title.strip():
        raise DatasetError("empty title", lineno)
    files = record.get("fixed_files")
    if not isinstance(files, list) or not all(isinstance(f, str) for f in files):
        raise DatasetError("field 'fixed_files' must be an array of strings", lineno)
    bad = [f for f in files if not _is_valid_relpath(f)]
    if bad:
        raise DatasetError(f"invalid relative path(s) in fixed_files: {bad}", lineno)
    return BugReport(
        bug_id=bug_id,
        system=system,
        version=version,
        title=title,
        description=description,
        fixed_files=frozenset(normalize_path(f) for f in files),
    )


def parse_bug_reports(lines: Iterable[str]) -> list[BugReport]:
    reports: list[BugReport] = []
    seen: dict[str, int] = {}
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DatasetError(f"malformed record: {exc.msg}", lineno) from exc
        report = parse_bug_record(record, lineno)
        if report.bug_id in seen:
            raise DatasetError(
                f"duplicate bug_id '{report.bug_id}' (first seen on line {seen[report.bug_id]})",
                lineno,
            )
        seen[report.bug_id] = lineno
        reports.append(report)
    return reports


def load_bug_reports(dataset: str | Path) -> list[BugReport]:
    """Load a line-delimited JSON bug dataset."""
    path = Path(dataset)
    try:
        with path.open(encoding="utf-8") as fh:
            return parse_bug_reports(fh)
    except OSError as exc:
        raise DatasetError(f"cannot read dataset {path}: {exc}") from exc
