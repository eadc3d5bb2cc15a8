import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boardrec.textfeat import (
    CategoryDictionary, Featurizer, category_features, fit_hashed_corpus, fuse, hash_token,
    tokenize, toy_dictionary, transform_timeline,
)


@pytest.mark.parametrize("text,expected", [
    ("I love NY!!", ["love", "ny"]),
    ("check http://x.co now", ["check", "now"]),
    ("", []),
    ("Ünïcode CAFÉ_au-lait", ["ünïcode", "café", "au", "lait"]),
])
def test_tokenize(text, expected):
    assert tokenize(text) == expected


def test_fit_deterministic():
    corpus = [["love", "ny", "love"], ["cake", "ny"]]
    a = fit_hashed_corpus(corpus, 64)
    b = fit_hashed_corpus(corpus, 64)
    assert np.array_equal(a.df, b.df) and a.n_docs == b.n_docs == 2


def test_fit_single_token():
    m = fit_hashed_corpus([["solo"]], 5000)
    assert np.count_nonzero(m.df) == 1 and m.df.max() == 1


def test_fit_forced_collision():
    m = fit_hashed_corpus([["a1", "b2"], ["zz"], ["qq", "rr", "ss"]], 1)
    assert m.df.tolist() == [3]


def test_tfidf_hand_values():
    # doc1 = {a, a, b}, doc2 = {b}; smooth idf: a -> ln(3/2) + 1, b -> ln(3/3) + 1 = 1
    toks_a, toks_b = "alpha", "beta"
    assert hash_token(toks_a, 5000)[0] != hash_token(toks_b, 5000)[0]
    m = fit_hashed_corpus([[toks_a, toks_a, toks_b], [toks_b]], 5000)
    x = transform_timeline(m, [toks_a, toks_a, toks_b])
    raw_a, raw_b = 2 * (math.log(1.5) + 1), 1.0  # 2.810930..., 1.0
    norm = math.hypot(raw_a, raw_b)
    (ia, sa), (ib, sb) = hash_token(toks_a, 5000), hash_token(toks_b, 5000)
    assert x[ia] == pytest.approx(sa * 0.942156, abs=1e-6)
    assert x[ib] == pytest.approx(sb * 0.335176, abs=1e-6)
    assert x[ia] == pytest.approx(sa * raw_a / norm, abs=1e-12)
    assert np.count_nonzero(x) == 2


def test_transform_empty_is_zero():
    m = fit_hashed_corpus([["x1"]], 16)
    assert not transform_timeline(m, []).any()


def test_signed_cancellation():
    # find two tokens sharing a bucket with opposite signs in D=2
    words = [f"w{i}" for i in range(200)]
    pos = next(w for w in words if hash_token(w, 2) == (0, 1))
    neg = next(w for w in words if hash_token(w, 2) == (0, -1))
    m = fit_hashed_corpus([[pos, neg]], 2)
    assert transform_timeline(m, [pos, neg, pos, neg])[0] == 0.0


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from(["aa", "bb", "cc", "dd", "ee", "ff", "gg"]), max_size=25), st.randoms())
def test_transform_norm_and_permutation(tokens, rnd):
    m = fit_hashed_corpus([["aa", "bb"], ["cc", "dd", "aa"]], 8)
    x = transform_timeline(m, tokens)
    n = np.linalg.norm(x)
    assert n == 0 or abs(n - 1) <= 1e-9
    shuffled = list(tokens)
    rnd.shuffle(shuffled)
    assert np.allclose(transform_timeline(m, shuffled), x, atol=1e-15, rtol=0)


def test_category_features():
    d = CategoryDictionary(["social", "work"], {"friend": {0}, "party": {0}, "job": {1}})
    assert category_features(d, ["friend", "job", "friend"]).tolist() == pytest.approx([2 / 3, 1 / 3])
    assert not category_features(d, []).any()


def test_category_prefix():
    d = CategoryDictionary(["posemo"], {"happ*": {0}})
    assert category_features(d, ["happy", "happier", "sad"])[0] == pytest.approx(2 / 3)


def test_dictionary_parse_round_trip():
    text = "# comment\nsocial\twork\nfriend*\tsocial\njob\twork,social\n"
    d = CategoryDictionary.parse(text)
    assert d.categories == ["social", "work"]
    assert d.lookup("friends") == {0} and d.lookup("job") == {0, 1}
    assert CategoryDictionary.parse(d.dumps()).entries == d.entries


def test_dictionary_parse_errors():
    with pytest.raises(ValueError, match="unknown category"):
        CategoryDictionary.parse("a\tb\nword\tc\n")
    with pytest.raises(ValueError, match="line 2"):
        CategoryDictionary.parse("a\nno-tab-here\n")


def test_toy_dictionary_has_ten_categories():
    d = toy_dictionary()
    assert len(d) == 10
    vals = category_features(d, tokenize("My friends love cake and coffee at the office party"))
    assert np.all((vals >= 0) & (vals <= 1))


def test_fuse_modes():
    h, c = np.zeros(5000), np.zeros(64)
    assert len(fuse(h, c, "fused")) == 5064
    assert len(fuse(h, c, "categories")) == 64
    assert len(fuse(h, c, "hashed")) == 5000
    assert not fuse(h, c).any()
    with pytest.raises(ValueError):
        fuse(h, c, "late")


def test_featurizer_dimensions():
    tl = ["I love my friends", "work work job"]
    for mode, dim in [("hashed", 5000), ("categories", 10), ("fused", 5010)]:
        fz = Featurizer.fit(tl, toy_dictionary(), mode)
        X = fz.transform(tl)
        assert X.shape == (2, dim) == (2, fz.dimension)
