"""Pipeline configuration: one flat dataclass, loadable from JSON and overridable from the CLI."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Optional

from ..multilabel import LogisticParams
from ..textfeat import DEFAULT_DIM, FEATURE_MODES


@dataclass(frozen=True)
class PipelineConfig:
    # files
    data_dir: str = "data"
    ontology_path: Optional[str] = None
    dictionary_path: Optional[str] = None  # None -> bundled toy dictionary
    model_path: str = "model.json"
    report_path: Optional[str] = None
    # features
    feature_mode: str = "fused"
    dim: int = DEFAULT_DIM
    # classifier
    classifier: str = "lp"
    k: int = 3
    M: int = 10
    threshold: float = 0.5
    seed: int = 0
    learning_rate: float = 1.0
    l2: float = 1e-4
    iterations: int = 300
    test_fraction: float = 0.2
    # thresholds
    min_tweets: int = 200
    pin_threshold: float = 200
    board_divisor: float = 100
    popularity_weight: float = 1.0
    # diversification
    k_candidates: int = 10
    m: int = 5
    exact_cap: int = 20
    damping: float = 0.9
    max_iter: int = 200
    stable_iter: int = 15

    def __post_init__(self):
        problems = []
        if self.feature_mode not in FEATURE_MODES:
            problems.append(f"feature_mode must be one of {FEATURE_MODES}")
        if self.classifier not in ("br", "lp", "rakel"):
            problems.append("classifier must be br, lp or rakel")
        if self.dim < 1:
            problems.append("dim must be >= 1")
        if self.k < 1 or self.M < 1:
            problems.append("k and M must be >= 1")
        if not 0.0 < self.threshold < 1.0:
            problems.append("threshold must lie in (0, 1)")
        if self.learning_rate <= 0 or self.l2 < 0 or self.iterations < 0:
            problems.append("learning_rate > 0, l2 >= 0, iterations >= 0 required")
        if not 0.0 < self.test_fraction < 1.0:
            problems.append("test_fraction must lie in (0, 1)")
        if self.min_tweets < 0:
            problems.append("min_tweets must be >= 0")
        if self.pin_threshold < 0 or self.board_divisor < 1:
            problems.append("pin_threshold >= 0 and board_divisor >= 1 required")
        if self.k_candidates < 1 or self.m < 1 or self.exact_cap < 1:
            problems.append("k_candidates, m and exact_cap must be >= 1")
        if not 0.5 <= self.damping < 1.0:
            problems.append("damping must lie in [0.5, 1)")
        if self.max_iter < 1 or self.stable_iter < 1:
            problems.append("max_iter and stable_iter must be >= 1")
        if problems:
            raise ValueError("invalid config: " + "; ".join(problems))

    @property
    def hp(self) -> LogisticParams:
        return LogisticParams(self.learning_rate, self.l2, self.iterations)

    def as_dict(self) -> dict:
        return asdict(self)

    def updated(self, **overrides) -> "PipelineConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def from_file(cls, path: str | Path, **overrides) -> "PipelineConfig":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        unknown = set(raw) - set(cls.field_names())
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**raw).updated(**overrides)
