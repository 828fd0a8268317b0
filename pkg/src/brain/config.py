"""Pipeline configuration: defaults, flat dotted-key files and overrides."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Mapping

from brain.feedback import OracleConfig


class ConfigError(ValueError):
    pass


class Mode(str, Enum):
    FULL = "full"
    NO_EXPANSION = "no_expansion"
    NO_RESCORING = "no_rescoring"
    NO_EXPANSION_NO_RESCORING = "no_expansion+no_rescoring"
    BASELINE_VSM = "baseline_vsm"

    @property
    def uses_expansion(self) -> bool:
        return self in (Mode.FULL, Mode.NO_RESCORING)

    @property
    def uses_rescoring(self) -> bool:
        return self in (Mode.FULL, Mode.NO_EXPANSION)

    @property
    def uses_oracle(self) -> bool:
        return self.uses_expansion or self.uses_rescoring

    @classmethod
    def parse(cls, value: str | Mode) -> Mode:
        if isinstance(value, Mode):
            return value
        v = value.strip().lower().replace("-", "_")
        parts = sorted(p for p in v.replace(",", "+").split("+") if p)
        if parts == ["no_expansion", "no_rescoring"]:
            return cls.NO_EXPANSION_NO_RESCORING
        try:
            return cls(v)
        except ValueError:
            names = ", ".join(m.value for m in cls)
            raise ConfigError(f"unknown mode {value!r} (expected one of: {names})") from None


@dataclass
class RetrievalConfig:
    top_k: int = 50
    bm25_k1: float = 1.2
    bm25_b: float = 0.75
    extensions: tuple[str, ...] = (".java",)


@dataclass
class ExpansionConfig:
    damping: float = 0.85
    max_iter: int = 100
    eps: float = 1e-6
    top_terms: int = 10
    dump_dir: str | None = None


@dataclass
class RankingConfig:
    result_k: int = 10
    mode: Mode = Mode.FULL


@dataclass
class FeedbackConfig:
    segment_cap: int | None = None
    segment_chars: int = 24_000
    best_effort: bool = False


@dataclass
class PipelineConfig:
    corpus_root: str | None = None
    index_dir: str = "brain-index"
    cache_dir: str | None = None
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)
    expansion: ExpansionConfig = field(default_factory=ExpansionConfig)
    ranking: RankingConfig = field(default_factory=RankingConfig)
    feedback: FeedbackConfig = field(default_factory=FeedbackConfig)
    oracle: OracleConfig = field(default_factory=OracleConfig)

    def validate(self) -> None:
        r, e, k = self.retrieval, self.expansion, self.ranking
        positive = {
            "retrieval.top_k": r.top_k,
            "retrieval.bm25_k1": r.bm25_k1,
            "expansion.max_iter": e.max_iter,
            "expansion.eps": e.eps,
            "expansion.top_terms": e.top_terms,
            "ranking.result_k": k.result_k,
            "feedback.segment_chars": self.feedback.segment_chars,
        }
        for key, value in positive.items():
            if not value > 0:
                raise ConfigError(f"{key} must be positive, got {value}")
        if not 0.0 <= r.bm25_b <= 1.0:
            raise ConfigError(f"retrieval.bm25_b must be in [0, 1], got {r.bm25_b}")
        if not 0.0 < e.damping < 1.0:
            raise ConfigError(f"expansion.damping must be in (0, 1), got {e.damping}")
        if self.feedback.segment_cap is not None and self.feedback.segment_cap < 1:
            raise ConfigError("feedback.segment_cap must be >= 1")
        self.ranking.mode = Mode.parse(self.ranking.mode)
        self.oracle.validate()

    def set(self, dotted: str, value: Any) -> None:
        """Assign one flat dotted key, e.g. ``expansion.top_terms``."""
        target: Any = self
        *path, last = dotted.split(".")
        for part in path:
            if not dataclasses.is_dataclass(target) or not hasattr(target, part):
                raise ConfigError(f"unknown config key {dotted!r}")
            target = getattr(target, part)
        if not dataclasses.is_dataclass(target) or last not in {f.name for f in dataclasses.fields(target)}:
            raise ConfigError(f"unknown config key {dotted!r}")
        current = getattr(target, last)
        setattr(target, last, _coerce(dotted, current, value))

    def update(self, values: Mapping[str, Any]) -> None:
        for key in sorted(values):
            self.set(key, values[key])


def _coerce(key: str, current: Any, value: Any) -> Any:
    if value is None:
        return None
    if isinstance(current, Mode) or key == "ranking.mode":
        return Mode.parse(value)
    if isinstance(current, bool):
        if isinstance(value, str):
            v = value.strip().lower()
            if v in ("1", "true", "yes", "on"):
                return True
            if v in ("0", "false", "no", "off"):
                return False
            raise ConfigError(f"{key} expects a boolean, got {value!r}")
        return bool(value)
    if isinstance(current, int) and not isinstance(current, bool):
        try:
            return int(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{key} expects an integer, got {value!r}") from None
    if isinstance(current, float):
        try:
            return float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{key} expects a number, got {value!r}") from None
    if isinstance(current, tuple):
        if isinstance(value, str):
            return tuple(v.strip() for v in value.split(",") if v.strip())
        return tuple(value)
    if key == "feedback.segment_cap":
        return int(value)
    return value


def load_config(path: str | Path | None = None, overrides: Mapping[str, Any] | None = None) -> PipelineConfig:
    """Defaults, then the config file's flat dotted keys, then overrides."""
    cfg = PipelineConfig()
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"config {path} must be a JSON object of dotted keys")
        cfg.update(raw)
    if overrides:
        cfg.update(overrides)
    cfg.validate()
    return cfg
