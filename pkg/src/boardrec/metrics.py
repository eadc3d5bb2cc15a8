"""Example-averaged and label-averaged F1 for binary label matrices."""

from __future__ import annotations

import warnings

import numpy as np


class ZeroSupportWarning(UserWarning):
    """Every label column was empty in both truth and prediction."""


def _pair(v, v_hat) -> tuple[np.ndarray, np.ndarray]:
    v = np.asarray(v, dtype=bool)
    v_hat = np.asarray(v_hat, dtype=bool)
    if v.shape != v_hat.shape:
        raise ValueError(f"length mismatch: {v.shape} vs {v_hat.shape}")
    return v, v_hat


def _f1_from_counts(tp, n_true, n_pred) -> np.ndarray:
    """Vectorised F1 = 2|v^v̂| / (|v| + |v̂|), with both-empty scoring 1."""
    tp = np.asarray(tp, dtype=float)
    denom = np.asarray(n_true, dtype=float) + np.asarray(n_pred, dtype=float)
    out = np.ones_like(denom)
    nz = denom > 0
    out[nz] = 2.0 * tp[nz] / denom[nz]
    return out


def f1_example(v, v_hat) -> float:
    """F1 of one predicted label vector against the truth.

    Both empty scores 1; exactly one empty scores 0. The harmonic mean of
    precision and recall reduces to 2|v^v̂| / (|v| + |v̂|), which also gives 0
    when the vectors are disjoint.
    """
    v, v_hat = _pair(v, v_hat)
    if v.ndim != 1:
        raise ValueError("f1_example expects 1-d label vectors")
    return float(_f1_from_counts((v & v_hat).sum(), v.sum(), v_hat.sum()))


def _matrices(V, V_hat) -> tuple[np.ndarray, np.ndarray]:
    V, V_hat = _pair(V, V_hat)
    if V.ndim != 2:
        raise ValueError("expected 2-d label matrices")
    if V.shape[0] == 0:
        raise ValueError("no examples")
    return V, V_hat


def f1_per_example(V, V_hat) -> np.ndarray:
    V, V_hat = _matrices(V, V_hat)
    return _f1_from_counts((V & V_hat).sum(axis=1), V.sum(axis=1), V_hat.sum(axis=1))


def f1_macro_ex(V, V_hat) -> float:
    return float(f1_per_example(V, V_hat).mean())


def f1_per_label(V, V_hat) -> np.ndarray:
    """Column-wise F1; NaN for labels with no positives in truth or prediction."""
    V, V_hat = _matrices(V, V_hat)
    n_true = V.sum(axis=0)
    n_pred = V_hat.sum(axis=0)
    scores = _f1_from_counts((V & V_hat).sum(axis=0), n_true, n_pred)
    scores[(n_true + n_pred) == 0] = np.nan
    return scores


def f1_macro_label(V, V_hat) -> float:
    """Mean column F1 over labels that are positive somewhere in truth or prediction.

    Returns 0 and emits :class:`ZeroSupportWarning` if no label qualifies.
    """
    scores = f1_per_label(V, V_hat)
    supported = ~np.isnan(scores)
    if not supported.any():
        warnings.warn("no label has support; macro-label F1 set to 0", ZeroSupportWarning)
        return 0.0
    return float(scores[supported].mean())
