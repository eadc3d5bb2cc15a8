import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from boardrec.metrics import (
    ZeroSupportWarning, f1_example, f1_macro_ex, f1_macro_label, f1_per_label,
)


def naive_f1(truth, pred):
    """Precision/recall harmonic mean from explicit loops."""
    inter = sum(1 for t, p in zip(truth, pred) if t and p)
    nt = sum(1 for t in truth if t)
    np_ = sum(1 for p in pred if p)
    if nt == 0 and np_ == 0:
        return 1.0
    if nt == 0 or np_ == 0:
        return 0.0
    precision = inter / np_
    recall = inter / nt
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def naive_macro_ex(V, W):
    return sum(naive_f1(list(v), list(w)) for v, w in zip(V, W)) / len(V)


def naive_macro_label(V, W):
    scores = []
    for j in range(len(V[0])):
        col_t = [row[j] for row in V]
        col_p = [row[j] for row in W]
        if not any(col_t) and not any(col_p):
            continue
        scores.append(naive_f1(col_t, col_p))
    return sum(scores) / len(scores) if scores else 0.0


def test_f1_example_hand_values():
    assert f1_example([1, 1, 0, 0], [1, 0, 1, 0]) == 0.5
    assert f1_example([1, 0, 1], [1, 0, 1]) == 1.0
    assert f1_example([1, 0], [0, 1]) == 0.0


def test_f1_example_conventions():
    assert f1_example([0, 0], [0, 0]) == 1.0
    assert f1_example([0, 0], [1, 0]) == 0.0
    assert f1_example([1, 0], [0, 0]) == 0.0


def test_length_mismatch():
    with pytest.raises(ValueError):
        f1_example([1, 0], [1, 0, 0])
    with pytest.raises(ValueError):
        f1_macro_ex(np.zeros((0, 3)), np.zeros((0, 3)))


def test_macro_ex_mean_of_rows():
    V = [[1, 0], [1, 1], [1, 0]]
    W = [[1, 0], [1, 0], [0, 1]]  # rows score 1, 2/3, 0
    assert f1_macro_ex(V, W) == pytest.approx((1 + 2 / 3 + 0) / 3, abs=1e-15)
    V = [[1, 0, 0, 0], [1, 1, 0, 0], [1, 0, 0, 0]]
    W = [[1, 0, 0, 0], [1, 0, 1, 0], [0, 1, 0, 0]]  # 1.0, 0.5, 0.0
    assert f1_macro_ex(V, W) == 0.5
    assert f1_macro_ex(V, V) == 1.0


def test_macro_label_one_perfect_one_missed():
    V = np.array([[1, 1], [0, 1], [1, 0]])
    W = np.array([[1, 0], [0, 0], [1, 0]])
    assert f1_macro_label(V, W) == 0.5
    assert f1_macro_label(V, V) == 1.0


def test_macro_label_excludes_unused_labels():
    V = np.array([[1, 0, 0], [0, 0, 0]])
    W = np.array([[1, 0, 0], [0, 0, 0]])
    assert f1_macro_label(V, W) == 1.0
    assert np.isnan(f1_per_label(V, W)[1:]).all()


def test_macro_label_all_excluded_warns():
    with pytest.warns(ZeroSupportWarning):
        assert f1_macro_label(np.zeros((3, 2)), np.zeros((3, 2))) == 0.0


def test_against_naive_oracle(rng):
    for _ in range(200):
        V = (rng.random((6, 5)) < 0.4).astype(int)
        W = (rng.random((6, 5)) < 0.4).astype(int)
        assert abs(f1_macro_ex(V, W) - naive_macro_ex(V.tolist(), W.tolist())) <= 1e-12
        with _nowarn():
            got = f1_macro_label(V, W)
        assert abs(got - naive_macro_label(V.tolist(), W.tolist())) <= 1e-12


class _nowarn:
    def __enter__(self):
        import warnings
        self._ctx = warnings.catch_warnings()
        self._ctx.__enter__()
        warnings.simplefilter("ignore", ZeroSupportWarning)

    def __exit__(self, *exc):
        return self._ctx.__exit__(*exc)


binmat = arrays(np.int8, (5, 4), elements=st.integers(0, 1))


@settings(max_examples=200, deadline=None)
@given(binmat, binmat)
def test_symmetry_and_range(V, W):
    for v, w in zip(V, W):
        assert f1_example(v, w) == f1_example(w, v)
    ex = f1_macro_ex(V, W)
    assert 0 <= ex <= 1
    with _nowarn():
        lab = f1_macro_label(V, W)
    assert 0 <= lab <= 1


@settings(max_examples=100, deadline=None)
@given(binmat, binmat, st.permutations(range(5)), st.permutations(range(4)))
def test_permutation_invariance(V, W, rows, cols):
    rows, cols = list(rows), list(cols)
    assert f1_macro_ex(V[rows], W[rows]) == pytest.approx(f1_macro_ex(V, W), abs=1e-15)
    with _nowarn():
        assert f1_macro_label(V[:, cols], W[:, cols]) == pytest.approx(f1_macro_label(V, W), abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(binmat, binmat)
def test_perfect_iff_equal(V, W):
    if V.any() or W.any():
        assert (f1_macro_ex(V, W) == 1.0) == np.array_equal(V, W)
