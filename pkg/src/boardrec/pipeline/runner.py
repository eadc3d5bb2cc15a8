"""Train / evaluate / recommend / sweep orchestration over an ingested data directory."""

from __future__ import annotations

import hashlib
import logging
import time
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .. import metrics
from ..data_model import UserRecord, compute_dataset_stats
from ..diversify import diversify_topic, select_candidates
from ..multilabel import fit_model, predict
from ..ontology import TopicOntology
from ..profiling import PhraseMatcher, board_pins, build_user_profile, map_board
from ..textfeat import CategoryDictionary, Featurizer, toy_dictionary
from .config import PipelineConfig
from .persistence import TrainedBundle
from .records import Dataset, ingest

log = logging.getLogger(__name__)


class PipelineError(RuntimeError):
    pass


def filter_active(users: Iterable[UserRecord], min_tweets: int = 200) -> list[UserRecord]:
    """Users with at least ``min_tweets`` tweets."""
    if min_tweets < 0:
        raise ValueError("min_tweets must be >= 0")
    return [u for u in users if len(u.tweets) >= min_tweets]


def split_fraction(user_id: str, seed: int) -> float:
    """Stable pseudo-uniform value in [0, 1) derived from the user id."""
    h = hashlib.blake2b(f"{seed}:{user_id}".encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(h, "little") / 2.0**64


def split_users(users: Sequence[UserRecord], test_fraction: float, seed: int) -> tuple[list, list]:
    train, test = [], []
    for u in users:
        (test if split_fraction(u.user_id, seed) < test_fraction else train).append(u)
    return train, test


def load_dictionary(config: PipelineConfig) -> CategoryDictionary:
    return CategoryDictionary.load(config.dictionary_path) if config.dictionary_path else toy_dictionary()


def load_dataset(config: PipelineConfig) -> Dataset:
    ds = ingest(config.data_dir, config.ontology_path)
    if ds.ontology is None:
        raise PipelineError(f"no ontology found for data directory {config.data_dir!r}")
    return ds


def user_profiles(users: Sequence[UserRecord], ds: Dataset) -> np.ndarray:
    """Label matrix (users x topics); board ids that do not resolve are skipped (ingest reports them)."""
    matcher = PhraseMatcher(ds.ontology)
    rows = []
    for u in users:
        known = UserRecord(u.user_id, u.tweets, tuple(b for b in u.board_ids if b in ds.boards))
        rows.append(build_user_profile(known, ds.boards, ds.pins, ds.ontology, matcher))
    return np.vstack(rows) if rows else np.zeros((0, len(ds.ontology)), dtype=np.uint8)


# -- reports ------------------------------------------------------------------


@dataclass
class ScoreReport:
    config: dict
    classifier: str
    feature_mode: str
    macro_ex: float
    macro_label: float
    shuffled_macro_ex: float
    per_label: list[dict]
    stats: dict
    n_train: int
    n_test: int
    zero_support: bool = False
    wall_time: float = 0.0

    def as_dict(self) -> dict:
        return {
            "config": self.config,
            "classifier": self.classifier,
            "feature_mode": self.feature_mode,
            "macro_ex": self.macro_ex,
            "macro_label": self.macro_label,
            "shuffled_macro_ex": self.shuffled_macro_ex,
            "per_label": self.per_label,
            "stats": self.stats,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "zero_support": self.zero_support,
            "wall_time": self.wall_time,
        }

    def table(self) -> str:
        s = self.stats
        lines = [
            f"classifier      {self.classifier}",
            f"features        {self.feature_mode} ({s['attributes']} attributes)",
            f"train / test    {self.n_train} / {self.n_test}",
            f"labels          {s['labels']}  LC {s['label_cardinality']:.3f}  density {s['label_density']:.4f}",
            f"F1 macro-ex     {self.macro_ex:.4f}   (shuffled baseline {self.shuffled_macro_ex:.4f})",
            f"F1 macro-label  {self.macro_label:.4f}" + ("   [no supported labels]" if self.zero_support else ""),
        ]
        return "\n".join(lines)


def shuffled_baseline(Y: np.ndarray, P: np.ndarray, seed: int, rounds: int = 20) -> float:
    """Macro-ex F1 when predictions are assigned to the wrong users at random."""
    rng = np.random.default_rng(seed)
    return float(np.mean([metrics.f1_macro_ex(Y, P[rng.permutation(len(P))]) for _ in range(rounds)]))


def _macro_label(Y, P) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", metrics.ZeroSupportWarning)
        return metrics.f1_macro_label(Y, P)


def score(bundle: TrainedBundle, Y: np.ndarray, P: np.ndarray, config: PipelineConfig,
          n_train: int, stats_labels: np.ndarray) -> ScoreReport:
    per = metrics.f1_per_label(Y, P)
    zero = bool(np.all(np.isnan(per)))
    per_label = [
        {"node_id": nid, "name": name, "support": int(Y[:, i].sum()), "predicted": int(P[:, i].sum()),
         "f1": None if np.isnan(per[i]) else float(per[i])}
        for i, (nid, name) in enumerate(zip(bundle.label_ids, bundle.label_names))
    ]
    stats = compute_dataset_stats(stats_labels, bundle.featurizer.dimension).as_dict()
    return ScoreReport(
        config=config.as_dict(),
        classifier=config.classifier,
        feature_mode=bundle.featurizer.mode,
        macro_ex=metrics.f1_macro_ex(Y, P),
        macro_label=_macro_label(Y, P),
        shuffled_macro_ex=shuffled_baseline(Y, P, config.seed),
        per_label=per_label,
        stats=stats,
        n_train=n_train,
        n_test=len(Y),
        zero_support=zero,
    )


# -- train / evaluate -----------------------------------------------------------


def prepare_users(ds: Dataset, config: PipelineConfig) -> list[UserRecord]:
    users = filter_active(ds.users.values(), config.min_tweets)
    log.info("%d of %d users have >= %d tweets", len(users), len(ds.users), config.min_tweets)
    if len(users) < 2:
        raise PipelineError(f"fewer than 2 active users after filtering (min_tweets={config.min_tweets})")
    return users


def train_bundle(train: Sequence[UserRecord], Y_train: np.ndarray, ont: TopicOntology,
                 config: PipelineConfig, dictionary: Optional[CategoryDictionary] = None) -> TrainedBundle:
    dictionary = dictionary or load_dictionary(config)
    fz = Featurizer.fit([u.timeline for u in train], dictionary, config.feature_mode, config.dim)
    X = fz.transform([u.timeline for u in train])
    clf = fit_model(config.classifier, X, Y_train, config.hp, k=config.k, M=config.M,
                    threshold=config.threshold, seed=config.seed)
    ids = ont.node_ids
    return TrainedBundle(fz, clf, ids, [ont.nodes[i].name for i in ids])


def run_train(config: PipelineConfig, ds: Optional[Dataset] = None) -> tuple[TrainedBundle, ScoreReport]:
    """Fit on the hash-selected training users and score on the held-out ones."""
    t0 = time.perf_counter()
    ds = ds or load_dataset(config)
    users = prepare_users(ds, config)
    train, test = split_users(users, config.test_fraction, config.seed)
    if not train or not test:
        raise PipelineError(f"split produced {len(train)} train / {len(test)} test users; need both non-empty")
    Y_all = user_profiles(users, ds)
    pos = {u.user_id: i for i, u in enumerate(users)}
    Y_train = Y_all[[pos[u.user_id] for u in train]]
    Y_test = Y_all[[pos[u.user_id] for u in test]]
    bundle = train_bundle(train, Y_train, ds.ontology, config)
    P = predict(bundle.classifier, bundle.featurizer.transform([u.timeline for u in test]))
    report = score(bundle, Y_test, P, config, len(train), Y_all)
    report.wall_time = time.perf_counter() - t0
    return bundle, report


def run_evaluate(config: PipelineConfig, bundle: TrainedBundle, ds: Optional[Dataset] = None,
                 split: str = "test") -> ScoreReport:
    t0 = time.perf_counter()
    ds = ds or load_dataset(config)
    if ds.ontology.node_ids != bundle.label_ids:
        raise PipelineError("model label table does not match the data's ontology")
    users = prepare_users(ds, config)
    train, test = split_users(users, config.test_fraction, config.seed)
    chosen = {"test": test, "train": train, "all": users}[split]
    if not chosen:
        raise PipelineError(f"no users in split {split!r}")
    Y_all = user_profiles(users, ds)
    Y = user_profiles(chosen, ds)
    P = predict(bundle.classifier, bundle.featurizer.transform([u.timeline for u in chosen]))
    report = score(bundle, Y, P, config, len(train), Y_all)
    report.wall_time = time.perf_counter() - t0
    return report


# -- recommend ------------------------------------------------------------------


@dataclass
class TopicRecommendation:
    node_id: str
    name: str
    board_ids: list[str]
    entropy: Optional[float]
    solver: str
    status: str
    n_candidates: int
    n_clusters: int

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class Recommendation:
    status: str
    topics: list[TopicRecommendation] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"status": self.status, "topics": [t.as_dict() for t in self.topics]}


class BoardIndex:
    """Label vectors of every board in the corpus, computed once."""

    def __init__(self, ds: Dataset):
        self.ds = ds
        matcher = PhraseMatcher(ds.ontology)
        self.boards = sorted(ds.boards.values(), key=lambda b: b.board_id)
        self.labels = {b.board_id: map_board(b, board_pins(b, ds.pins), ds.ontology, matcher) for b in self.boards}


def run_recommend(config: PipelineConfig, bundle: TrainedBundle, tweets: Sequence[str],
                  ds: Optional[Dataset] = None, index: Optional[BoardIndex] = None) -> Recommendation:
    """Predict topics for a timeline and pick diverse boards under each."""
    if index is None:
        index = BoardIndex(ds or load_dataset(config))
    ds = index.ds
    if ds.ontology.node_ids != bundle.label_ids:
        raise PipelineError("model label table does not match the board corpus ontology")
    timeline = "\n".join(tweets)
    x = bundle.featurizer.transform_one(timeline)
    if not np.any(x):
        return Recommendation("no features")
    bits = predict(bundle.classifier, x)
    topics = np.flatnonzero(bits)
    if topics.size == 0:
        return Recommendation("no predicted topics")
    out = []
    for t in topics:
        cands = select_candidates(index.boards, int(t), config.k_candidates, index.labels)
        sel = diversify_topic(cands, ds.pins, config.m, config.exact_cap, config.damping,
                              config.max_iter, config.stable_iter)
        out.append(TopicRecommendation(bundle.label_ids[t], bundle.label_names[t], list(sel.board_ids),
                                       sel.entropy, sel.solver, sel.status, sel.n_candidates, sel.n_clusters))
    return Recommendation("ok", out)


# -- sweep ------------------------------------------------------------------------


def run_sweep(config: PipelineConfig, ks: Sequence[int], Ms: Sequence[int],
              ds: Optional[Dataset] = None) -> list[dict]:
    """Macro scores for BR, LP and every RAkEL (k, M) on one split."""
    ds = ds or load_dataset(config)
    rows = []
    for kind in ("br", "lp"):
        _, rep = run_train(config.updated(classifier=kind), ds)
        rows.append({"classifier": kind, "k": None, "M": None,
                     "macro_ex": rep.macro_ex, "macro_label": rep.macro_label})
    for k in ks:
        for M in Ms:
            try:
                _, rep = run_train(config.updated(classifier="rakel", k=k, M=M), ds)
            except ValueError as exc:
                log.warning("skipping k=%d M=%d: %s", k, M, exc)
                continue
            rows.append({"classifier": "rakel", "k": k, "M": M,
                         "macro_ex": rep.macro_ex, "macro_label": rep.macro_label})
    return rows


def sweep_table(rows: Sequence[dict]) -> str:
    lines = [f"{'classifier':<10} {'k':>3} {'M':>4} {'macro-ex':>9} {'macro-label':>12}"]
    for r in rows:
        k = "-" if r["k"] is None else r["k"]
        M = "-" if r["M"] is None else r["M"]
        lines.append(f"{r['classifier']:<10} {k:>3} {M:>4} {r['macro_ex']:>9.4f} {r['macro_label']:>12.4f}")
    return "\n".join(lines)
