"""Visual diversification of candidate boards for one topic.

Pipeline per topic: the top-k most popular boards mapped to the topic are
the candidates; their pin embeddings are clustered with affinity
propagation; each board becomes a histogram over clusters; the recommended
subset is the fixed-size subset whose mean histogram has maximal entropy.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .data_model import Board, Pin

TIE_TOL = 1e-12
DEFAULT_EXACT_CAP = 20


@dataclass(frozen=True)
class ClusterModel:
    exemplars: np.ndarray  # point indices, ascending
    labels: np.ndarray  # point index -> cluster index in [0, C)
    damping: float
    n_iter: int
    converged: bool

    @property
    def n_clusters(self) -> int:
        return len(self.exemplars)


@dataclass(frozen=True)
class ClusterDistribution:
    board_id: str
    probs: Optional[np.ndarray]  # None marks a board with no embeddable pins

    @property
    def empty(self) -> bool:
        return self.probs is None


@dataclass(frozen=True)
class Selection:
    board_ids: tuple[str, ...]
    entropy: float
    solver: str


# -- candidates ---------------------------------------------------------------


def select_candidates(boards: Sequence[Board], topic_index: int, k: int, board_labels: Mapping[str, np.ndarray]) -> list[Board]:
    """Up to k boards carrying the topic bit, most popular first, ties by board id.

    ``board_labels`` maps board id to its label vector (see
    :func:`boardrec.profiling.map_board`).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    matched = [b for b in boards if board_labels[b.board_id][topic_index]]
    matched.sort(key=lambda b: (-b.popularity, b.board_id))
    return matched[:k]


# -- affinity propagation -----------------------------------------------------


def similarity_matrix(points: np.ndarray) -> np.ndarray:
    """Negative squared euclidean distances, diagonal set to the median off-diagonal value."""
    S = -cdist(points, points, "sqeuclidean")
    n = len(points)
    if n > 1:
        off = S[~np.eye(n, dtype=bool)]
        np.fill_diagonal(S, np.median(off))
    return S


def fit_affinity_propagation(points, damping: float = 0.9, max_iter: int = 200, stable_iter: int = 15) -> ClusterModel:
    """Responsibility/availability message passing with damping.

    Deterministic: no noise is added to break symmetries, every argmax takes
    the lowest index. Stops once the exemplar set has been unchanged for
    ``stable_iter`` consecutive iterations; otherwise returns the state after
    ``max_iter`` with ``converged=False``.
    """
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] < 1:
        raise ValueError("need at least one point")
    if not np.all(np.isfinite(X)):
        raise ValueError("non-finite embedding")
    if not 0.5 <= damping < 1.0:
        raise ValueError("damping must lie in [0.5, 1)")
    n = X.shape[0]
    if n == 1:
        return ClusterModel(np.array([0]), np.array([0]), damping, 0, True)

    S = similarity_matrix(X)
    R = np.zeros((n, n))
    A = np.zeros((n, n))
    rows = np.arange(n)
    last = None
    unchanged = 0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        # responsibilities
        AS = A + S
        first = np.argmax(AS, axis=1)
        top = AS[rows, first]
        AS[rows, first] = -np.inf
        second = AS.max(axis=1)
        R_new = S - top[:, None]
        R_new[rows, first] = S[rows, first] - second
        R = damping * R + (1.0 - damping) * R_new

        # availabilities
        Rp = np.maximum(R, 0.0)
        Rp[rows, rows] = R[rows, rows]
        A_new = Rp.sum(axis=0)[None, :] - Rp
        diag = A_new[rows, rows].copy()
        A_new = np.minimum(A_new, 0.0)
        A_new[rows, rows] = diag
        A = damping * A + (1.0 - damping) * A_new

        ex = (np.diag(A) + np.diag(R)) > 0
        if last is not None and np.array_equal(ex, last):
            unchanged += 1
        else:
            unchanged = 0
        last = ex
        if unchanged >= stable_iter - 1 and ex.any():
            converged = True
            break

    exemplars = np.flatnonzero((np.diag(A) + np.diag(R)) > 0)
    if exemplars.size == 0:
        exemplars = np.array([int(np.argmax(np.diag(A) + np.diag(R)))])
    labels = np.argmax(S[:, exemplars], axis=1)
    labels[exemplars] = np.arange(len(exemplars))
    return ClusterModel(exemplars, labels, damping, it, converged)


# -- distributions and entropy ------------------------------------------------


def board_distribution(board: Board, model: ClusterModel, pin_index: Mapping[str, int]) -> ClusterDistribution:
    """Normalised histogram of the clusters of the board's embedded pins."""
    idx = [pin_index[p] for p in board.pin_ids if p in pin_index]
    if not idx:
        return ClusterDistribution(board.board_id, None)
    counts = np.bincount(model.labels[idx], minlength=model.n_clusters).astype(float)
    return ClusterDistribution(board.board_id, counts / counts.sum())


def entropy(p) -> float:
    """Shannon entropy in nats with 0 ln 0 = 0."""
    p = np.asarray(p, dtype=float)
    nz = p[p > 0]
    return float(-(nz * np.log(nz)).sum())


def _entropy_rows(P: np.ndarray) -> np.ndarray:
    logs = np.log(np.where(P > 0, P, 1.0))
    return -(P * logs).sum(axis=-1)


def set_entropy(dists: Sequence[ClusterDistribution]) -> float:
    """Entropy of the mean cluster distribution of a set of boards."""
    if not dists:
        raise ValueError("set entropy of an empty board set")
    if any(d.empty for d in dists):
        raise ValueError("empty distribution in board set")
    P = np.vstack([d.probs for d in dists])
    return entropy(P.sum(axis=0) / len(dists))


def _sorted(cands: Sequence[ClusterDistribution]) -> list[ClusterDistribution]:
    if any(c.empty for c in cands):
        raise ValueError("candidates must have non-empty distributions")
    return sorted(cands, key=lambda c: c.board_id)


def select_diverse_exact(candidates: Sequence[ClusterDistribution], m: int, exact_cap: int = DEFAULT_EXACT_CAP) -> Selection:
    """Enumerate every m-subset and keep the highest set entropy.

    Ties (within 1e-12) go to the lexicographically smallest board-id tuple.
    """
    cands = _sorted(candidates)
    n = len(cands)
    if n > exact_cap:
        raise ValueError(f"{n} candidates exceed the exact cap {exact_cap}; use select_diverse_greedy")
    if not 1 <= m <= n:
        raise ValueError(f"subset size m={m} must lie in [1, {n}]")
    P = np.vstack([c.probs for c in cands])
    combos = np.array(list(itertools.combinations(range(n), m)), dtype=np.intp)
    values = _entropy_rows(P[combos].sum(axis=1) / m)
    # combinations() of an id-sorted list come out in lexicographic id order
    best = int(np.flatnonzero(values >= values.max() - TIE_TOL)[0])
    return Selection(tuple(cands[i].board_id for i in combos[best]), float(values[best]), "exact")


def select_diverse_greedy(candidates: Sequence[ClusterDistribution], m: int) -> Selection:
    """Grow the set one board at a time, each step taking the largest set entropy."""
    cands = _sorted(candidates)
    n = len(cands)
    if not 1 <= m <= n:
        raise ValueError(f"subset size m={m} must lie in [1, {n}]")
    P = np.vstack([c.probs for c in cands])
    chosen: list[int] = []
    total = np.zeros(P.shape[1])
    for size in range(1, m + 1):
        rest = np.array([i for i in range(n) if i not in chosen])
        values = _entropy_rows((total + P[rest]) / size)
        pick = int(rest[np.flatnonzero(values >= values.max() - TIE_TOL)[0]])
        chosen.append(pick)
        total = total + P[pick]
    return Selection(tuple(cands[i].board_id for i in chosen), entropy(total / m), "greedy")


def select_diverse(candidates: Sequence[ClusterDistribution], m: int, exact_cap: int = DEFAULT_EXACT_CAP) -> Selection:
    if len(candidates) <= exact_cap:
        return select_diverse_exact(candidates, m, exact_cap)
    return select_diverse_greedy(candidates, m)


# -- per-topic driver ---------------------------------------------------------


@dataclass(frozen=True)
class TopicSelection:
    board_ids: tuple[str, ...]
    entropy: Optional[float]
    solver: str
    status: str
    n_candidates: int
    n_clusters: int


def diversify_topic(
    candidates: Sequence[Board],
    pins: Mapping[str, Pin],
    m: int = 5,
    exact_cap: int = DEFAULT_EXACT_CAP,
    damping: float = 0.9,
    max_iter: int = 200,
    stable_iter: int = 15,
) -> TopicSelection:
    """Cluster the candidates' pins and pick up to m diverse boards.

    Boards without any embedded pin cannot take part in the entropy
    objective; they are appended after the diverse picks when fewer than m
    embeddable boards exist.
    """
    point_ids: list[str] = []
    vectors = []
    for board in candidates:
        for pid in board.pin_ids:
            pin = pins.get(pid)
            if pin is not None and pin.embedding is not None:
                point_ids.append(pid)
                vectors.append(pin.embedding)
    status = "ok" if len(candidates) >= m else "insufficient candidates"
    if not vectors:
        chosen = tuple(b.board_id for b in candidates[:m])
        return TopicSelection(chosen, None, "none", status, len(candidates), 0)

    model = fit_affinity_propagation(np.asarray(vectors, dtype=float), damping, max_iter, stable_iter)
    pin_index = {pid: i for i, pid in enumerate(point_ids)}
    dists = [board_distribution(b, model, pin_index) for b in candidates]
    usable = [d for d in dists if not d.empty]
    size = min(m, len(usable))
    sel = select_diverse(usable, size, exact_cap)
    extra = tuple(d.board_id for d in dists if d.empty)[: m - size]
    return TopicSelection(sel.board_ids + extra, sel.entropy, sel.solver, status, len(candidates), model.n_clusters)


def max_entropy(n_clusters: int) -> float:
    return math.log(n_clusters) if n_clusters > 0 else 0.0
