"""Binary Relevance, Label Powerset and RAkEL over a plain gradient-descent logistic learner.

All learners here are trained column-batched: ``K`` independent logistic
problems on one design matrix share each matrix product, which is the same
arithmetic as K separate fits.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np


class CoverageWarning(UserWarning):
    """Some labels appear in no RAkEL labelset and will always be predicted 0."""


@dataclass(frozen=True)
class LogisticParams:
    learning_rate: float = 0.1
    l2: float = 1e-4
    iterations: int = 200

    def as_dict(self) -> dict:
        return {"learning_rate": self.learning_rate, "l2": self.l2, "iterations": self.iterations}


def _check_features(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if not np.all(np.isfinite(X)):
        raise ValueError("non-finite feature")
    return X


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z, dtype=float)))


def logistic_loss_grad(W, b, X, Y, l2):
    """Mean logistic loss + (l2/2)|w|^2 per column, with gradients.

    W: (d, K), b: (K,), X: (n, d), Y: (n, K). The bias is not penalised.
    Returns (loss (K,), grad_W (d, K), grad_b (K,)).
    """
    n = X.shape[0]
    Z = X @ W + b
    # log(1 + e^z) - y z, computed stably
    loss = (np.logaddexp(0.0, Z) - Y * Z).mean(axis=0) + 0.5 * l2 * (W * W).sum(axis=0)
    R = sigmoid(Z) - Y
    grad_W = X.T @ R / n + l2 * W
    grad_b = R.mean(axis=0)
    return loss, grad_W, grad_b


def fit_logistic_columns(X, Y, hp: LogisticParams = LogisticParams(), track_loss: bool = False):
    """Full-batch GD from zero for every column of Y at once.

    Returns (W, b, losses) where losses is (iterations + 1, K) when
    ``track_loss`` is set, else None.
    """
    X = _check_features(X)
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    n, d = X.shape
    if n == 0 or Y.shape[0] != n:
        raise ValueError("X and Y must have the same, non-zero, number of rows")
    K = Y.shape[1]
    W = np.zeros((d, K))
    b = np.zeros(K)
    history = []
    for _ in range(hp.iterations):
        loss, gW, gb = logistic_loss_grad(W, b, X, Y, hp.l2)
        if track_loss:
            history.append(loss)
        W -= hp.learning_rate * gW
        b -= hp.learning_rate * gb
    if track_loss:
        history.append(logistic_loss_grad(W, b, X, Y, hp.l2)[0])
    if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
        raise FloatingPointError("logistic weights diverged; lower the learning rate")
    return W, b, (np.array(history) if track_loss else None)


@dataclass
class BinaryLearner:
    weights: np.ndarray
    bias: float
    hp: LogisticParams = field(default_factory=LogisticParams)


def fit_binary(X, y, hp: LogisticParams = LogisticParams()) -> BinaryLearner:
    y = np.asarray(y, dtype=float).ravel()
    W, b, _ = fit_logistic_columns(X, y[:, None], hp)
    return BinaryLearner(W[:, 0].copy(), float(b[0]), hp)


def predict_prob(learner: BinaryLearner, x):
    x = _check_features(x)
    return sigmoid(x @ learner.weights + learner.bias)


def predict_binary(learner: BinaryLearner, x):
    return (predict_prob(learner, x) > 0.5).astype(np.uint8)


def _as_rows(x) -> tuple[np.ndarray, bool]:
    x = _check_features(x)
    return (x[None, :], True) if x.ndim == 1 else (x, False)


def _label_matrix(Y) -> np.ndarray:
    Y = np.asarray(Y)
    if Y.ndim != 2:
        raise ValueError("label matrix must be 2-d")
    if Y.shape[0] == 0:
        raise ValueError("empty training set")
    return (Y != 0).astype(np.uint8)


# -- Binary Relevance ---------------------------------------------------------


@dataclass
class BRModel:
    weights: np.ndarray  # (d, L)
    bias: np.ndarray  # (L,)
    # -1 for a trained column, else the constant 0/1 prediction for single-class columns
    constant: np.ndarray
    hp: LogisticParams = field(default_factory=LogisticParams)

    @property
    def n_labels(self) -> int:
        return len(self.bias)


def fit_br(X, Y, hp: LogisticParams = LogisticParams()) -> BRModel:
    """One logistic learner per label; single-class label columns become constants."""
    Y = _label_matrix(Y)
    X = _check_features(X)
    if X.shape[0] != Y.shape[0]:
        raise ValueError("X and Y row counts differ")
    n, L = Y.shape
    pos = Y.sum(axis=0)
    constant = np.full(L, -1, dtype=np.int8)
    constant[pos == 0] = 0
    constant[pos == n] = 1
    W = np.zeros((X.shape[1], L))
    b = np.zeros(L)
    trained = np.flatnonzero(constant < 0)
    if trained.size:
        W[:, trained], b[trained], _ = fit_logistic_columns(X, Y[:, trained], hp)
    return BRModel(W, b, constant, hp)


def predict_br(model: BRModel, x) -> np.ndarray:
    X, single = _as_rows(x)
    out = (sigmoid(X @ model.weights + model.bias) > 0.5).astype(np.uint8)
    fixed = model.constant >= 0
    out[:, fixed] = model.constant[fixed].astype(np.uint8)
    return out[0] if single else out


# -- Label Powerset -----------------------------------------------------------


@dataclass
class LPModel:
    labelsets: np.ndarray  # (K, L) distinct training labelsets, class index = row
    counts: np.ndarray  # (K,) training frequency of each labelset
    weights: np.ndarray  # (d, K) one-vs-rest
    bias: np.ndarray  # (K,)
    hp: LogisticParams = field(default_factory=LogisticParams)

    @property
    def n_classes(self) -> int:
        return len(self.counts)


def labelset_table(Y) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Distinct rows of Y in lexicographic order, their counts, and each row's class."""
    Y = _label_matrix(Y)
    sets, inverse, counts = np.unique(Y, axis=0, return_inverse=True, return_counts=True)
    return sets.astype(np.uint8), counts.astype(np.int64), inverse.ravel()


def fit_lp(X, Y, hp: LogisticParams = LogisticParams()) -> LPModel:
    """Multi-class over distinct labelsets, one-vs-rest logistic per class."""
    X = _check_features(X)
    sets, counts, cls = labelset_table(Y)
    if X.shape[0] != len(cls):
        raise ValueError("X and Y row counts differ")
    K = len(counts)
    if K == 1:
        return LPModel(sets, counts, np.zeros((X.shape[1], 1)), np.zeros(1), hp)
    onehot = np.zeros((len(cls), K))
    onehot[np.arange(len(cls)), cls] = 1.0
    W, b, _ = fit_logistic_columns(X, onehot, hp)
    return LPModel(sets, counts, W, b, hp)


def lp_class_scores(model: LPModel, X) -> np.ndarray:
    return X @ model.weights + model.bias


def predict_lp(model: LPModel, x) -> np.ndarray:
    """Labelset of the top-scoring class; ties go to the more frequent labelset, then lower index."""
    X, single = _as_rows(x)
    scores = lp_class_scores(model, X)
    order = np.lexsort((np.arange(model.n_classes), -model.counts))
    ranked = scores[:, order]
    best = ranked.max(axis=1, keepdims=True)
    winner = order[np.argmax(ranked == best, axis=1)]
    out = model.labelsets[winner]
    return out[0] if single else out


# -- RAkEL --------------------------------------------------------------------


def draw_labelsets(n_labels: int, k: int, M: int, seed: int = 0, max_retries: int = 100) -> list[list[int]]:
    """M distinct sorted k-subsets of range(n_labels), drawn uniformly by rejection.

    When M*k >= n_labels the whole draw is repeated (up to ``max_retries``)
    until every label is covered; leftover gaps raise a CoverageWarning.
    """
    if not 1 <= k <= n_labels:
        raise ValueError(f"labelset size k={k} must lie in [1, {n_labels}]")
    if M < 1:
        raise ValueError("M must be >= 1")
    if M > math.comb(n_labels, k):
        raise ValueError(
            f"too many distinct subsets requested: M={M} > C({n_labels},{k})={math.comb(n_labels, k)}"
        )
    rng = np.random.default_rng(seed)
    attempts = max_retries if M * k >= n_labels else 1
    for _ in range(attempts):
        drawn: list[list[int]] = []
        seen: set[tuple[int, ...]] = set()
        while len(drawn) < M:
            subset = tuple(sorted(int(i) for i in rng.choice(n_labels, size=k, replace=False)))
            if subset not in seen:
                seen.add(subset)
                drawn.append(list(subset))
        uncovered = sorted(set(range(n_labels)).difference(*map(set, drawn)))
        if not uncovered:
            break
    if uncovered:
        warnings.warn(f"labels in no labelset (always predicted 0): {uncovered}", CoverageWarning)
    return drawn


@dataclass
class RakelMember:
    labelset: list[int]
    model: LPModel


@dataclass
class RakelModel:
    members: list[RakelMember]
    n_labels: int
    k: int
    M: int
    threshold: float = 0.5
    seed: int = 0


def fit_rakel(X, Y, k: int, M: int, threshold: float = 0.5, seed: int = 0,
              hp: LogisticParams = LogisticParams()) -> RakelModel:
    """Ensemble of LP models, each on a random k-label slice of Y."""
    if not 0.0 < threshold < 1.0:
        raise ValueError("vote threshold must lie in (0, 1)")
    Y = _label_matrix(Y)
    X = _check_features(X)
    L = Y.shape[1]
    members = [RakelMember(ls, fit_lp(X, Y[:, ls], hp)) for ls in draw_labelsets(L, k, M, seed)]
    return RakelModel(members, L, k, M, threshold, seed)


def rakel_votes(model: RakelModel, X) -> tuple[np.ndarray, np.ndarray]:
    """Positive-vote counts (n, L) and per-label member counts (L,)."""
    votes = np.zeros((X.shape[0], model.n_labels))
    seats = np.zeros(model.n_labels)
    for m in model.members:
        votes[:, m.labelset] += predict_lp(m.model, X)
        seats[m.labelset] += 1
    return votes, seats


def vote(votes: np.ndarray, seats: np.ndarray, threshold: float) -> np.ndarray:
    """Bit is 1 iff positive votes / seats > threshold; unseated labels are 0."""
    ratio = np.divide(votes, seats, out=np.zeros_like(votes, dtype=float), where=seats > 0)
    return (ratio > threshold).astype(np.uint8)


def predict_rakel(model: RakelModel, x) -> np.ndarray:
    X, single = _as_rows(x)
    out = vote(*rakel_votes(model, X), model.threshold)
    return out[0] if single else out


def fit_model(kind: str, X, Y, hp: LogisticParams = LogisticParams(), k: Optional[int] = None,
              M: Optional[int] = None, threshold: float = 0.5, seed: int = 0):
    if kind == "br":
        return fit_br(X, Y, hp)
    if kind == "lp":
        return fit_lp(X, Y, hp)
    if kind == "rakel":
        if k is None or M is None:
            raise ValueError("rakel needs k and M")
        return fit_rakel(X, Y, k, M, threshold, seed, hp)
    raise ValueError(f"unknown classifier {kind!r}; expected br, lp or rakel")


def predict(model, x) -> np.ndarray:
    if isinstance(model, BRModel):
        return predict_br(model, x)
    if isinstance(model, LPModel):
        return predict_lp(model, x)
    if isinstance(model, RakelModel):
        return predict_rakel(model, x)
    raise TypeError(f"not a multi-label model: {type(model).__name__}")


def model_kind(model) -> str:
    return {BRModel: "br", LPModel: "lp", RakelModel: "rakel"}[type(model)]

