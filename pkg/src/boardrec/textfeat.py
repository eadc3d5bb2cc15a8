"""Timeline features: signed feature hashing with bucket-level tf-idf, plus word-category proportions.

One document is one user's whole concatenated timeline. Hashing uses keyed
BLAKE2b so bucket and sign assignments are identical on every platform.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

HASH_SEED = 20150518
DEFAULT_DIM = 5000
FEATURE_MODES = ("hashed", "categories", "fused")

_SPLIT = re.compile(r"[\W_]+")


def tokenize(text: str) -> list[str]:
    """Lowercase word tokens of length >= 2, with URLs removed."""
    tokens = []
    for chunk in text.lower().split():
        if chunk.startswith("http"):
            continue
        tokens.extend(t for t in _SPLIT.split(chunk) if len(t) >= 2)
    return tokens


@lru_cache(maxsize=1 << 18)
def _digest(token: str, seed: int) -> int:
    h = hashlib.blake2b(token.encode("utf-8"), digest_size=8, key=seed.to_bytes(8, "little"))
    return int.from_bytes(h.digest(), "little")


def hash_token(token: str, dim: int, seed: int = HASH_SEED) -> tuple[int, int]:
    """(bucket, sign). The sign comes from the top bit, the bucket from the low 63."""
    d = _digest(token, seed)
    bucket = (d & ((1 << 63) - 1)) % dim
    sign = -1 if d >> 63 else 1
    return bucket, sign


@dataclass(frozen=True)
class HashedCorpusModel:
    dim: int
    df: np.ndarray
    n_docs: int
    seed: int = HASH_SEED

    @property
    def idf(self) -> np.ndarray:
        return np.log((1.0 + self.n_docs) / (1.0 + self.df)) + 1.0


def fit_hashed_corpus(timelines: Sequence[Sequence[str]], dim: int = DEFAULT_DIM, seed: int = HASH_SEED) -> HashedCorpusModel:
    """Bucket document frequencies over token lists (one list per user)."""
    if dim < 1:
        raise ValueError("dimension must be >= 1")
    if len(timelines) == 0:
        raise ValueError("no timelines to fit")
    df = np.zeros(dim, dtype=np.int64)
    for tokens in timelines:
        buckets = {hash_token(t, dim, seed)[0] for t in set(tokens)}
        if buckets:
            df[list(buckets)] += 1
    return HashedCorpusModel(dim, df, len(timelines), seed)


def hashed_counts(tokens: Iterable[str], dim: int, seed: int = HASH_SEED) -> np.ndarray:
    raw = np.zeros(dim)
    for tok in tokens:
        bucket, sign = hash_token(tok, dim, seed)
        raw[bucket] += sign
    return raw


def transform_timeline(model: HashedCorpusModel, tokens: Iterable[str]) -> np.ndarray:
    """Signed term counts per bucket, idf-weighted and L2-normalised."""
    weights = hashed_counts(tokens, model.dim, model.seed) * model.idf
    norm = np.linalg.norm(weights)
    return weights / norm if norm > 0 else weights


class CategoryDictionary:
    """Word -> category lookup. Patterns ending in ``*`` match any token with that prefix."""

    def __init__(self, categories: Sequence[str], entries: dict[str, set[int]]):
        self.categories = list(categories)
        self.entries = {p: frozenset(c) for p, c in entries.items()}
        for pattern, cats in self.entries.items():
            bad = [c for c in cats if not 0 <= c < len(self.categories)]
            if bad:
                raise ValueError(f"pattern {pattern!r} refers to unknown category index {bad[0]}")
        self._exact = {p: c for p, c in self.entries.items() if not p.endswith("*")}
        self._prefix = {p[:-1]: c for p, c in self.entries.items() if p.endswith("*")}
        self._cache: dict[str, frozenset[int]] = {}

    def __len__(self) -> int:
        return len(self.categories)

    def lookup(self, token: str) -> frozenset[int]:
        hit = self._cache.get(token)
        if hit is None:
            cats = set(self._exact.get(token, ()))
            for i in range(len(token) + 1):
                cats |= self._prefix.get(token[:i], frozenset())
            hit = self._cache[token] = frozenset(cats)
        return hit

    @classmethod
    def parse(cls, text: str) -> "CategoryDictionary":
        """Read the tab-separated dictionary format.

        The first non-blank, non-``#`` line holds the category names in order
        (tab-separated). Every later line is ``pattern<TAB>cat1,cat2``.
        """
        lines = [ln.rstrip("\n") for ln in text.splitlines()]
        lines = [ln for ln in lines if ln.strip() and not ln.lstrip().startswith("#")]
        if not lines:
            raise ValueError("dictionary has no header line")
        categories = [c.strip() for c in lines[0].split("\t") if c.strip()]
        pos = {c: i for i, c in enumerate(categories)}
        entries: dict[str, set[int]] = {}
        for lineno, line in enumerate(lines[1:], start=2):
            try:
                pattern, cats = line.split("\t")
            except ValueError:
                raise ValueError(f"dictionary line {lineno}: expected 'pattern<TAB>categories'") from None
            idx = set()
            for c in cats.split(","):
                c = c.strip()
                if c not in pos:
                    raise ValueError(f"dictionary line {lineno}: unknown category {c!r}")
                idx.add(pos[c])
            entries.setdefault(pattern.strip().lower(), set()).update(idx)
        return cls(categories, entries)

    @classmethod
    def load(cls, path: str | Path) -> "CategoryDictionary":
        return cls.parse(Path(path).read_text(encoding="utf-8"))

    def dumps(self) -> str:
        lines = ["\t".join(self.categories)]
        for pattern in sorted(self.entries):
            cats = ",".join(self.categories[i] for i in sorted(self.entries[pattern]))
            lines.append(f"{pattern}\t{cats}")
        return "\n".join(lines) + "\n"


def toy_dictionary() -> CategoryDictionary:
    """The bundled 10-category dictionary."""
    text = resources.files("boardrec").joinpath("data/toy_dictionary.tsv").read_text(encoding="utf-8")
    return CategoryDictionary.parse(text)


def category_features(dictionary: CategoryDictionary, tokens: Sequence[str]) -> np.ndarray:
    """Share of tokens that fall into each category."""
    counts = np.zeros(len(dictionary))
    for tok in tokens:
        for c in dictionary.lookup(tok):
            counts[c] += 1
    return counts / max(1, len(tokens))


def fuse(hashed: np.ndarray, categories: np.ndarray, mode: str = "fused") -> np.ndarray:
    if mode == "hashed":
        return np.asarray(hashed, dtype=float)
    if mode == "categories":
        return np.asarray(categories, dtype=float)
    if mode == "fused":
        return np.concatenate([hashed, categories]).astype(float)
    raise ValueError(f"unknown feature mode {mode!r}; expected one of {FEATURE_MODES}")


@dataclass(frozen=True)
class Featurizer:
    """Fitted hashing model plus dictionary; turns raw timelines into feature rows."""

    corpus: HashedCorpusModel
    dictionary: CategoryDictionary
    mode: str = "fused"

    @classmethod
    def fit(cls, timelines: Sequence[str], dictionary: CategoryDictionary, mode: str = "fused",
            dim: int = DEFAULT_DIM, seed: int = HASH_SEED) -> "Featurizer":
        if mode not in FEATURE_MODES:
            raise ValueError(f"unknown feature mode {mode!r}")
        tokens = [tokenize(t) for t in timelines]
        return cls(fit_hashed_corpus(tokens, dim, seed), dictionary, mode)

    @property
    def dimension(self) -> int:
        return {"hashed": self.corpus.dim, "categories": len(self.dictionary)}.get(
            self.mode, self.corpus.dim + len(self.dictionary)
        )

    def transform_one(self, timeline: str) -> np.ndarray:
        tokens = tokenize(timeline)
        hashed = transform_timeline(self.corpus, tokens) if self.mode != "categories" else np.zeros(0)
        cats = category_features(self.dictionary, tokens) if self.mode != "hashed" else np.zeros(0)
        return fuse(hashed, cats, self.mode)

    def transform(self, timelines: Sequence[str]) -> np.ndarray:
        if not timelines:
            return np.zeros((0, self.dimension))
        return np.vstack([self.transform_one(t) for t in timelines])

