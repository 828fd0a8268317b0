"""Bug localization: BM25 retrieval, LLM relevance feedback, PageRank query expansion, gated rescoring."""

__version__ = "0.1.0"

from pathlib import Path


def fixture_path() -> Path:
    """Directory of the bundled planted-bug demo corpus and dataset."""
    return Path(__file__).parent / "fixture"
