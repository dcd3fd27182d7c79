import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import review_of
from negscope.corpus import PolarityLabel
from negscope.evaluate import tag_corpus
from negscope.features import (
    DocumentTermMatrix,
    SparseVector,
    Vocabulary,
    build_matrix,
    build_vocabulary,
    compute_idf,
    read_matrix,
    read_vocabulary,
    remove_stopwords,
    term_of,
    vectorize,
    write_matrix,
)
from negscope.negation import PolicyKind, ScopePolicy
from negscope.preprocess import Token, TokenizedReview


def rev(*words, rid="r", label=PolarityLabel.POSITIVE):
    """Words ending in ``_!`` become negated tokens."""
    toks = tuple(
        Token(w[:-2], i, True) if w.endswith("_!") else Token(w, i) for i, w in enumerate(words)
    )
    return TokenizedReview(rid, toks, (), label)


def test_term_of():
    assert term_of(Token("احب", 0, True)) == "احب_!"
    assert term_of(Token("احب", 0)) == "احب"


def test_remove_stopwords_keeps_tagged():
    out = remove_stopwords(rev("لا", "احب_!", "هذا"), {"لا", "هذا"})
    assert [(t.surface, t.negated, t.position) for t in out.tokens] == [("احب", True, 0)]
    r = rev("لا", "احب")
    assert remove_stopwords(r, frozenset()) == r
    assert remove_stopwords(r, {"لا", "احب"}).tokens == ()


def test_remove_stopwords_remaps_breaks():
    r = TokenizedReview("r", tuple(Token(w, i) for i, w in enumerate(["a", "b", "هذا", "c"])), (2,))
    out = remove_stopwords(r, {"هذا"})
    assert list(out.surfaces) == ["a", "b", "c"] and out.sentence_breaks == (2,)


def test_vocabulary_examples():
    v = build_vocabulary([rev("احب"), rev("احب_!")])
    assert len(v) == 2 and v.terms == ["احب", "احب_!"]
    v = build_vocabulary([rev("حلو", "حلو")])
    assert len(v) == 1 and v.document_frequency["حلو"] == 1
    with pytest.raises(ValueError):
        build_vocabulary([])


def test_idf():
    v = Vocabulary({"a": 0, "b": 1}, {"a": 1, "b": 4}, 4)
    idf = compute_idf(v)
    assert idf["a"] == pytest.approx(1.386294, abs=1e-6)
    assert idf["b"] == 0.0
    values = [math.log(10 / d) for d in range(1, 11)]
    assert all(x > y for x, y in zip(values, values[1:]))


def test_vectorize_examples():
    v = Vocabulary({"حلو": 0}, {"حلو": 1}, 3)
    x = vectorize(rev("حلو", "حلو"), v, {"حلو": 1.0})
    assert x == SparseVector((0,), (1.0,))
    assert vectorize(rev("غريب", "جديد"), v, {"حلو": 1.0}) == SparseVector()


def test_ubiquitous_terms_dropped():
    reviews = [rev("a", "b"), rev("a", "c")]
    v = build_vocabulary(reviews)
    x = vectorize(reviews[0], v, compute_idf(v))
    assert x.indices == (v.index["b"],)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.lists(st.sampled_from(["a", "b", "c", "d_!", "e", "a_!"]), max_size=6), min_size=1, max_size=8))
def test_vectors_unit_norm(docs):
    reviews = [rev(*d) for d in docs]
    v = build_vocabulary(reviews)
    m = build_matrix(reviews, v)
    for row in m.rows:
        assert len(row) == 0 or row.norm() == pytest.approx(1.0, abs=1e-12)


def test_sparse_vector_invariants():
    with pytest.raises(ValueError):
        SparseVector((1, 0), (1.0, 1.0))
    with pytest.raises(ValueError):
        SparseVector((0,), (0.0,))
    with pytest.raises(ValueError):
        SparseVector((0,), (1.0, 2.0))
    x = SparseVector.from_dense([0, 2.0, 0, 1.0])
    assert x.indices == (1, 3) and np.array_equal(x.to_dense(4), [0, 2.0, 0, 1.0])


def test_matrix_checks_bounds():
    v = Vocabulary({"a": 0}, {"a": 1}, 1)
    with pytest.raises(ValueError):
        DocumentTermMatrix((SparseVector((1,), (1.0,)),), (None,), v)


def test_fixture_matrix(fixture_corpus, resources):
    tagged = tag_corpus(fixture_corpus, ScopePolicy(PolicyKind.NONE), resources)
    v = build_vocabulary(tagged)
    m = build_matrix(tagged, v)
    assert len(m) == 12
    again = build_matrix(tag_corpus(fixture_corpus, ScopePolicy(PolicyKind.NONE), resources), build_vocabulary(tagged))
    assert again.rows == m.rows and again.labels == m.labels
    assert np.array_equal(m.signs, [1.0] * 6 + [-1.0] * 6)


def test_vocabulary_growth_on_fixture(fixture_corpus, resources):
    sizes = {
        k: len(build_vocabulary(tag_corpus(fixture_corpus, ScopePolicy(k), resources)))
        for k in (PolicyKind.NONE, PolicyKind.WINDOW)
    }
    assert sizes[PolicyKind.WINDOW] >= sizes[PolicyKind.NONE]


def test_test_fold_oov_is_zero():
    train = [rev("حلو"), rev("وسخ", label=PolarityLabel.NEGATIVE)]
    v = build_vocabulary(train)
    assert vectorize(rev("جديد", "غريب"), v, compute_idf(v)) == SparseVector()


def test_matrix_round_trip(tmp_path, fixture_corpus, resources):
    tagged = tag_corpus(fixture_corpus, ScopePolicy(PolicyKind.RULES), resources)
    v = build_vocabulary(tagged)
    m = build_matrix(tagged, v)
    write_matrix(m, tmp_path / "m.tsv")
    back = read_matrix(tmp_path / "m.tsv")
    assert back.rows == m.rows and back.labels == m.labels
    assert dict(back.vocabulary.index) == dict(v.index)
    assert read_vocabulary(tmp_path / "m.tsv.vocab").n_documents == 12
