import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from brain import fixture_path
from brain.config import PipelineConfig
from brain.corpus import SourceDocument, ingest_snapshot, load_bug_reports, make_doc_id
from brain.index import build_index


@pytest.fixture(scope="session")
def fixture_root() -> Path:
    return fixture_path()


@pytest.fixture(scope="session")
def fixture_docs(fixture_root):
    return ingest_snapshot(fixture_root / "corpus" / "demo" / "1.0", "demo", "1.0")


@pytest.fixture(scope="session")
def fixture_index(fixture_docs):
    return build_index(fixture_docs)


@pytest.fixture(scope="session")
def fixture_bugs(fixture_root):
    return load_bug_reports(fixture_root / "bugs.jsonl")


@pytest.fixture(scope="session")
def manifest(fixture_root):
    return json.loads((fixture_root / "manifest.json").read_text())


@pytest.fixture
def mock_cfg() -> PipelineConfig:
    cfg = PipelineConfig()
    cfg.oracle.max_concurrency = 1
    return cfg


def make_doc(path: str, content: str, system: str = "s", version: str = "v") -> SourceDocument:
    return SourceDocument(make_doc_id(system, version, path), path, system, version, content)
