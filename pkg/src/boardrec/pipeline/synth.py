"""Seeded synthetic corpus with planted topic structure.

Each topic owns a disjoint vocabulary and a handful of embedding "styles"
(sub-centroids). A user picks a set of topics, tweets from their
vocabularies (with a ``noise`` share of off-topic tokens) and owns one
board per topic whose title names it and whose pins sit around one of the
topic's styles.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from ..data_model import Board, Pin, Tweet, UserRecord
from ..ontology import load_raw_ontology
from .records import Dataset, write_dataset

_ONSETS = ["b", "c", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "tr", "st", "pl", "gr"]
_VOWELS = ["a", "e", "i", "o", "u", "ai", "ou"]


@dataclass(frozen=True)
class SynthSpec:
    n_users: int = 200
    n_topics: int = 20
    vocab_per_topic: int = 30
    labels_per_user: float = 2.0
    tweets_per_user: int = 200
    tokens_per_tweet: int = 8
    pins_per_board: int = 6
    embedding_dim: int = 8
    styles_per_topic: int = 3
    noise: float = 0.1
    seed: int = 0

    def __post_init__(self):
        sizes = (self.n_users, self.n_topics, self.vocab_per_topic, self.tweets_per_user,
                 self.tokens_per_tweet, self.pins_per_board, self.embedding_dim, self.styles_per_topic)
        if min(sizes) < 1 or self.labels_per_user < 1:
            raise ValueError("synthetic sizes must be positive")
        if not 0.0 <= self.noise <= 1.0:
            raise ValueError("noise must lie in [0, 1]")


def _pseudo_words(rng: np.random.Generator, count: int, taken: set[str]) -> list[str]:
    words = []
    while len(words) < count:
        syll = rng.integers(2, 4)
        w = "".join(_ONSETS[rng.integers(len(_ONSETS))] + _VOWELS[rng.integers(len(_VOWELS))] for _ in range(syll))
        if w not in taken:
            taken.add(w)
            words.append(w)
    return words


@dataclass
class SynthCorpus:
    dataset: Dataset
    topic_names: list[str]
    vocab: dict[str, list[str]]  # topic name -> words
    truth: dict[str, list[str]]  # user id -> topic names

    def truth_record(self) -> dict:
        return {"topics": self.topic_names, "vocab": self.vocab, "labels": self.truth}


def generate_synthetic(spec: SynthSpec) -> SynthCorpus:
    rng = np.random.default_rng(spec.seed)
    taken: set[str] = set()
    names = _pseudo_words(rng, spec.n_topics, taken)
    vocab = {name: _pseudo_words(rng, spec.vocab_per_topic, taken) for name in names}
    all_words = [w for name in names for w in vocab[name]]
    centroids = rng.normal(0.0, 10.0, size=(spec.n_topics, spec.embedding_dim))
    styles = centroids[:, None, :] + rng.normal(0.0, 3.0, size=(spec.n_topics, spec.styles_per_topic, spec.embedding_dim))

    ontology = load_raw_ontology({"node_id": f"t{i:03d}", "name": n, "parents": []} for i, n in enumerate(names))

    users: dict[str, UserRecord] = {}
    boards: dict[str, Board] = {}
    pins: dict[str, Pin] = {}
    truth: dict[str, list[str]] = {}
    for u in range(spec.n_users):
        uid = f"u{u:05d}"
        n_labels = int(min(spec.n_topics, 1 + rng.poisson(spec.labels_per_user - 1)))
        topics = sorted(rng.choice(spec.n_topics, size=n_labels, replace=False).tolist())
        truth[uid] = [names[t] for t in topics]
        own_words = [w for t in topics for w in vocab[names[t]]]

        tweets = []
        for j in range(spec.tweets_per_user):
            toks = []
            for _ in range(spec.tokens_per_tweet):
                pool = all_words if rng.random() < spec.noise else own_words
                toks.append(pool[rng.integers(len(pool))])
            tweets.append(Tweet(uid, " ".join(toks), 1_400_000_000 + 3600 * j))

        board_ids = []
        for t in topics:
            bid = f"b{len(boards):06d}"
            style = rng.integers(spec.styles_per_topic)
            pin_ids = []
            for _ in range(spec.pins_per_board):
                pid = f"p{len(pins):07d}"
                emb = styles[t, style] + rng.normal(0.0, 0.5, size=spec.embedding_dim)
                desc = " ".join(vocab[names[t]][i] for i in rng.integers(spec.vocab_per_topic, size=4))
                pins[pid] = Pin(pid, bid, desc, tuple(float(x) for x in np.round(emb, 6)))
                pin_ids.append(pid)
            boards[bid] = Board(bid, uid, f"My {names[t]} board", "", int(rng.integers(0, 1000)), tuple(pin_ids))
            board_ids.append(bid)
        users[uid] = UserRecord(uid, tuple(tweets), tuple(board_ids))

    ds = Dataset(users, boards, pins, ontology)
    return SynthCorpus(ds, names, vocab, truth)


def write_synthetic(corpus: SynthCorpus, out_dir: str | Path, spec: SynthSpec | None = None) -> None:
    out_dir = Path(out_dir)
    write_dataset(corpus.dataset, out_dir)
    rec = corpus.truth_record()
    if spec is not None:
        rec["spec"] = asdict(spec)
    (out_dir / "truth.json").write_text(json.dumps(rec, indent=1, sort_keys=True) + "\n", encoding="utf-8")
