"""Uni-gram TF-IDF features over tagged token sequences.

A negated occurrence of a word is a different feature from the plain word:
``term_of`` appends ``_!`` to tagged tokens.  Weights are raw count times
``ln(N / df)``, L2-normalized per document, with vocabulary and document
frequencies taken from the training reviews only.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from negscope.corpus import PolarityLabel, ResourceError
from negscope.negation import NEGATION_SUFFIX
from negscope.preprocess import Token, TokenizedReview


@dataclass(frozen=True)
class Vocabulary:
    index: Mapping[str, int]
    document_frequency: Mapping[str, int]
    n_documents: int

    def __len__(self) -> int:
        return len(self.index)

    def __contains__(self, term: object) -> bool:
        return term in self.index

    @property
    def terms(self) -> list[str]:
        return list(self.index)


@dataclass(frozen=True)
class SparseVector:
    indices: tuple[int, ...] = ()
    weights: tuple[float, ...] = ()

    def __post_init__(self):
        if len(self.indices) != len(self.weights):
            raise ValueError("indices and weights differ in length")
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise ValueError("indices must be strictly increasing")
        if any(not (w > 0 and math.isfinite(w)) for w in self.weights):
            raise ValueError("weights must be positive and finite")

    def __len__(self) -> int:
        return len(self.indices)

    def norm(self) -> float:
        return math.sqrt(math.fsum(w * w for w in self.weights))

    def items(self):
        return zip(self.indices, self.weights)

    def to_dense(self, size: int) -> np.ndarray:
        out = np.zeros(size)
        out[list(self.indices)] = self.weights
        return out

    @classmethod
    def from_dense(cls, values) -> "SparseVector":
        values = np.asarray(values, dtype=float)
        nz = np.flatnonzero(values)
        return cls(tuple(int(i) for i in nz), tuple(float(values[i]) for i in nz))


@dataclass(frozen=True)
class DocumentTermMatrix:
    rows: tuple[SparseVector, ...]
    labels: tuple[Optional[PolarityLabel], ...]
    vocabulary: Vocabulary

    def __post_init__(self):
        if len(self.rows) != len(self.labels):
            raise ValueError("rows and labels differ in length")
        size = len(self.vocabulary)
        for row in self.rows:
            if row.indices and row.indices[-1] >= size:
                raise ValueError("feature index outside the vocabulary")

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def n_features(self) -> int:
        return len(self.vocabulary)

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(indptr, indices, data)`` arrays for the kernels."""
        indptr = np.zeros(len(self.rows) + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(r) for r in self.rows])
        indices = np.fromiter((i for r in self.rows for i in r.indices), dtype=np.int64, count=int(indptr[-1]))
        data = np.fromiter((w for r in self.rows for w in r.weights), dtype=np.float64, count=int(indptr[-1]))
        return indptr, indices, data

    @cached_property
    def signs(self) -> np.ndarray:
        """Labels as +1 (positive) / -1 (negative)."""
        if any(label is None for label in self.labels):
            raise ResourceError("matrix has unlabeled rows")
        return np.array([1.0 if l is PolarityLabel.POSITIVE else -1.0 for l in self.labels])

    def to_dense(self) -> np.ndarray:
        out = np.zeros((len(self.rows), self.n_features))
        for i, row in enumerate(self.rows):
            out[i, list(row.indices)] = row.weights
        return out


def term_of(token: Token) -> str:
    return token.surface + NEGATION_SUFFIX if token.negated else token.surface


def remove_stopwords(review: TokenizedReview, stopwords) -> TokenizedReview:
    """Drop untagged stop words; tagged tokens always survive."""
    kept = [t for t in review.tokens if t.negated or t.surface not in stopwords]
    if len(kept) == len(review.tokens):
        return review
    # sentence breaks follow the surviving token they preceded
    old_to_new = {}
    for new, tok in enumerate(kept):
        old_to_new[tok.position] = new
    breaks = set()
    for b in review.sentence_breaks:
        nxt = next((old_to_new[p] for p in range(b, len(review.tokens)) if p in old_to_new), None)
        if nxt:
            breaks.add(nxt)
    tokens = tuple(replace(t, position=i) for i, t in enumerate(kept))
    return replace(review, tokens=tokens, sentence_breaks=tuple(sorted(breaks)))


def build_vocabulary(reviews: Iterable[TokenizedReview]) -> Vocabulary:
    index: dict[str, int] = {}
    df: Counter = Counter()
    n = 0
    for review in reviews:
        n += 1
        seen = set()
        for token in review.tokens:
            term = term_of(token)
            if term not in index:
                index[term] = len(index)
            seen.add(term)
        df.update(seen)
    if n == 0:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    return Vocabulary(index, {t: df[t] for t in index}, n)


def compute_idf(vocab: Vocabulary) -> dict[str, float]:
    n = vocab.n_documents
    return {t: math.log(n / d) for t, d in vocab.document_frequency.items()}


def vectorize(review: TokenizedReview, vocab: Vocabulary, idf: Mapping[str, float]) -> SparseVector:
    counts = Counter(term_of(t) for t in review.tokens)
    pairs = []
    for term, count in counts.items():
        j = vocab.index.get(term)
        if j is None:
            continue
        weight = count * idf[term]
        if weight > 0:
            pairs.append((j, weight))
    if not pairs:
        return SparseVector()
    pairs.sort()
    norm = math.sqrt(math.fsum(w * w for _, w in pairs))
    return SparseVector(tuple(j for j, _ in pairs), tuple(w / norm for _, w in pairs))


def build_matrix(
    reviews: Sequence[TokenizedReview],
    vocab: Vocabulary,
    idf: Optional[Mapping[str, float]] = None,
    require_labels: bool = True,
) -> DocumentTermMatrix:
    if idf is None:
        idf = compute_idf(vocab)
    if require_labels:
        for r in reviews:
            if r.label is None:
                raise ResourceError(f"review {r.id!r} has no label")
    rows = tuple(vectorize(r, vocab, idf) for r in reviews)
    return DocumentTermMatrix(rows, tuple(r.label for r in reviews), vocab)


def write_matrix(matrix: DocumentTermMatrix, path, vocab_path=None) -> None:
    """Write ``label<TAB>idx:weight ...`` rows plus a ``term<TAB>index<TAB>df`` sidecar."""
    path = Path(path)
    lines = []
    for label, row in zip(matrix.labels, matrix.rows):
        cells = " ".join(f"{j}:{w!r}" for j, w in row.items())
        lines.append(f"{label.value if label else ''}\t{cells}")
    path.write_text("".join(l + "\n" for l in lines), encoding="utf-8")
    write_vocabulary(matrix.vocabulary, vocab_path or path.with_name(path.name + ".vocab"))


def write_vocabulary(vocab: Vocabulary, path) -> None:
    lines = [f"# n_documents={vocab.n_documents}"]
    lines += [f"{t}\t{j}\t{vocab.document_frequency[t]}" for t, j in vocab.index.items()]
    Path(path).write_text("".join(l + "\n" for l in lines), encoding="utf-8")


def read_vocabulary(path) -> Vocabulary:
    path = Path(path)
    index, df, n = {}, {}, None
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if line.startswith("# n_documents="):
            n = int(line.partition("=")[2])
            continue
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) != 3:
            raise ResourceError("expected `term<TAB>index<TAB>df`", path, lineno)
        index[cols[0]] = int(cols[1])
        df[cols[0]] = int(cols[2])
    if sorted(index.values()) != list(range(len(index))):
        raise ResourceError("vocabulary indices are not dense", path)
    if n is None:
        raise ResourceError("missing `# n_documents=` header", path)
    ordered = dict(sorted(index.items(), key=lambda kv: kv[1]))
    return Vocabulary(ordered, df, n)


def read_matrix(path, vocab_path=None) -> DocumentTermMatrix:
    path = Path(path)
    vocab = read_vocabulary(vocab_path or path.with_name(path.name + ".vocab"))
    rows, labels = [], []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        label, sep, cells = line.partition("\t")
        if not sep:
            raise ResourceError("expected `label<TAB>cells`", path, lineno)
        labels.append(PolarityLabel.parse(label) if label else None)
        pairs = [c.split(":") for c in cells.split()]
        rows.append(SparseVector(tuple(int(j) for j, _ in pairs), tuple(float(w) for _, w in pairs)))
    return DocumentTermMatrix(tuple(rows), tuple(labels), vocab)
