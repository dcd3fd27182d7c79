import pytest

from negscope import data_path
from negscope.corpus import (
    load_corpus,
    load_negation_config,
    load_sentiment_lexicon,
    load_stopwords,
)
from negscope.evaluate import Resources
from negscope.preprocess import PreprocessOptions, preprocess_text, TokenizedReview


@pytest.fixture(scope="session")
def neg_config():
    return load_negation_config(data_path("negation.cfg"))


@pytest.fixture(scope="session")
def lexicon():
    return load_sentiment_lexicon(data_path("lexicon.tsv"))


@pytest.fixture(scope="session")
def stopwords():
    return load_stopwords(data_path("stopwords.txt"))


@pytest.fixture(scope="session")
def resources(lexicon, neg_config, stopwords):
    return Resources(lexicon, neg_config, stopwords)


@pytest.fixture(scope="session")
def fixture_corpus():
    return load_corpus(data_path("fixture_corpus.tsv"))


@pytest.fixture(scope="session")
def planted():
    from negscope.synthetic import generate_planted_corpus

    return generate_planted_corpus(400, 0.25, seed=0)


def review_of(text, rid="r", label=None):
    tokens, breaks = preprocess_text(text, PreprocessOptions())
    return TokenizedReview(rid, tuple(tokens), breaks, label)


def dense_matrix(X, labels=None):
    """DocumentTermMatrix from a dense array; ``labels`` are +1/-1 signs."""
    import numpy as np

    from negscope.corpus import PolarityLabel
    from negscope.features import DocumentTermMatrix, SparseVector, Vocabulary

    X = np.asarray(X, dtype=float)
    vocab = Vocabulary({f"t{j}": j for j in range(X.shape[1])}, {f"t{j}": 1 for j in range(X.shape[1])}, len(X))
    if labels is None:
        labs = (None,) * len(X)
    else:
        labs = tuple(PolarityLabel.POSITIVE if s > 0 else PolarityLabel.NEGATIVE for s in labels)
    return DocumentTermMatrix(tuple(SparseVector.from_dense(row) for row in X), labs, vocab)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split("[")[1].split("]")[0])):
            terminalreporter.write_line(line)
