"""Record types shared by every stage, plus multi-label dataset statistics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class Tweet:
    user_id: str
    text: str
    timestamp: int = 0

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError(f"empty tweet text for user {self.user_id!r}")


@dataclass(frozen=True)
class Pin:
    pin_id: str
    board_id: str
    description: str = ""
    # Stand-in for the image feature; pins without one are skipped by diversification.
    embedding: Optional[tuple[float, ...]] = None

    @property
    def has_embedding(self) -> bool:
        return self.embedding is not None


@dataclass(frozen=True)
class Board:
    board_id: str
    owner_id: str
    title: str = ""
    description: str = ""
    popularity: int = 0
    pin_ids: tuple[str, ...] = ()

    def __post_init__(self):
        if self.popularity < 0:
            raise ValueError(f"negative popularity for board {self.board_id!r}")
        if len(set(self.pin_ids)) != len(self.pin_ids):
            raise ValueError(f"duplicate pin ids in board {self.board_id!r}")


@dataclass(frozen=True)
class UserRecord:
    user_id: str
    tweets: tuple[Tweet, ...] = ()
    board_ids: tuple[str, ...] = ()

    @property
    def timeline(self) -> str:
        return "\n".join(t.text for t in self.tweets)


@dataclass(frozen=True)
class DatasetStats:
    examples: int
    attributes: int
    labels: int
    label_cardinality: float
    label_density: float

    def as_dict(self) -> dict:
        return {
            "examples": self.examples,
            "attributes": self.attributes,
            "labels": self.labels,
            "label_cardinality": self.label_cardinality,
            "label_density": self.label_density,
        }


def as_label_matrix(labels: Sequence) -> np.ndarray:
    """Stack label vectors into an (N, L) uint8 matrix, checking that lengths agree."""
    rows = [np.asarray(v, dtype=np.uint8).ravel() for v in labels]
    if rows and len({len(r) for r in rows}) > 1:
        raise ValueError("label length mismatch")
    if not rows:
        return np.zeros((0, 0), dtype=np.uint8)
    return np.vstack(rows)


def compute_dataset_stats(labels: Sequence, attribute_count: int) -> DatasetStats:
    """Label cardinality (mean labels per example) and density (cardinality / |L|)."""
    if len(labels) == 0:
        raise ValueError("empty dataset")
    Y = as_label_matrix(labels)
    n, n_labels = Y.shape
    lc = float(Y.sum(axis=1, dtype=np.int64).mean())
    density = lc / n_labels if n_labels else 0.0
    return DatasetStats(n, int(attribute_count), n_labels, lc, density)


def density_from_cardinality(label_cardinality: float, n_labels: int) -> float:
    return label_cardinality / n_labels
