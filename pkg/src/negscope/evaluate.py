"""Cross-validation, accuracy / precision / recall, and the policy x classifier grid."""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from negscope import __version__
from negscope._kernels import BACKEND
from negscope.classify import (
    CLASSIFIER_LABELS,
    Classifier,
    Model,
    TrainConfig,
    TrainingError,
    predict_many,
    train,
)
from negscope.corpus import (
    LabeledCorpus,
    NegationConfig,
    NegationStats,
    PolarityLabel,
    ResourceError,
    SentimentLexicon,
    corpus_stats,
)
from negscope.features import (
    Vocabulary,
    build_matrix,
    build_vocabulary,
    compute_idf,
    remove_stopwords,
)
from negscope.negation import POLICY_LABELS, PolicyKind, ScopePolicy, apply_policy
from negscope.preprocess import PreprocessOptions, TokenizedReview, preprocess_review

POS, NEG = PolarityLabel.POSITIVE, PolarityLabel.NEGATIVE


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.tp + other.tp, self.tn + other.tn, self.fp + other.fp, self.fn + other.fn)

    def to_dict(self) -> dict:
        return {"tp": self.tp, "tn": self.tn, "fp": self.fp, "fn": self.fn}


@dataclass(frozen=True)
class Metrics:
    """Precision / recall are ``None`` when their denominator is zero."""

    accuracy: float
    precision: Optional[float]
    recall: Optional[float]

    def to_dict(self) -> dict:
        return {"accuracy": self.accuracy, "precision": self.precision, "recall": self.recall}


def confusion_matrix(predicted: Sequence[PolarityLabel], gold: Sequence[PolarityLabel]) -> ConfusionMatrix:
    if len(predicted) != len(gold):
        raise ValueError(f"{len(predicted)} predictions for {len(gold)} gold labels")
    tp = tn = fp = fn = 0
    for p, g in zip(predicted, gold):
        if p is POS:
            if g is POS:
                tp += 1
            else:
                fp += 1
        elif g is NEG:
            tn += 1
        else:
            fn += 1
    return ConfusionMatrix(tp, tn, fp, fn)


def compute_metrics(cm: ConfusionMatrix) -> Metrics:
    if cm.total == 0:
        raise ValueError("empty confusion matrix")
    return Metrics(
        accuracy=(cm.tp + cm.tn) / cm.total,
        precision=cm.tp / (cm.tp + cm.fp) if cm.tp + cm.fp else None,
        recall=cm.tp / (cm.tp + cm.fn) if cm.tp + cm.fn else None,
    )


@dataclass(frozen=True)
class FoldPlan:
    n_folds: int
    assignments: Mapping[str, int]
    seed: int
    stratified: bool = True

    def fold_of(self, review_id: str) -> int:
        return self.assignments[review_id]

    def sizes(self) -> list[int]:
        counts = [0] * self.n_folds
        for fold in self.assignments.values():
            counts[fold] += 1
        return counts


def stratified_folds(corpus: LabeledCorpus, n: int = 10, seed: int = 0, stratify: bool = True) -> FoldPlan:
    """Seeded per-class shuffle, then round-robin assignment to ``n`` folds.

    The round-robin offset carries over from one class to the next so that
    total fold sizes also differ by at most one.
    """
    if n < 2:
        raise ValueError(f"need at least 2 folds, got {n}")
    if not corpus.is_labeled:
        raise ResourceError("cross-validation needs a fully labeled corpus")
    rng = random.Random(seed)
    if stratify:
        groups = [[r.id for r in corpus if r.label is label] for label in (POS, NEG)]
        for label, ids in zip((POS, NEG), groups):
            if len(ids) < n:
                raise ResourceError(f"class {label.value} has {len(ids)} reviews, fewer than {n} folds")
    else:
        groups = [[r.id for r in corpus]]
        if len(groups[0]) < n:
            raise ResourceError(f"corpus has {len(groups[0])} reviews, fewer than {n} folds")
    assignments: dict[str, int] = {}
    offset = 0
    for ids in groups:
        rng.shuffle(ids)
        for i, rid in enumerate(ids):
            assignments[rid] = (offset + i) % n
        offset = (offset + len(ids)) % n
    ordered = {r.id: assignments[r.id] for r in corpus}
    return FoldPlan(n, ordered, seed, stratify)


@dataclass(frozen=True)
class Resources:
    lexicon: SentimentLexicon
    config: NegationConfig
    stopwords: frozenset[str] = frozenset()
    options: PreprocessOptions = field(default_factory=PreprocessOptions)

    def digest(self) -> str:
        payload = {
            "lexicon": sorted((w, p.value) for w, p in self.lexicon.entries.items()),
            "triggers": sorted(self.config.triggers),
            "exceptional": sorted(self.config.exceptional_words),
            "superlatives": sorted(self.config.superlatives),
            "contexts": {
                t: [sorted(c.before), sorted(" ".join(s) for s in c.after)]
                for t, c in sorted(self.config.context_exceptions.items())
            },
            "window_length": self.config.window_length,
            "stopwords": sorted(self.stopwords),
            "preprocess": [
                self.options.collapse_repeats_to,
                self.options.strip_diacritics,
                sorted(self.options.normalization_table.items()),
            ],
        }
        blob = json.dumps(payload, ensure_ascii=False, sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()


def tag_corpus(corpus: LabeledCorpus, policy: ScopePolicy, resources: Resources) -> list[TokenizedReview]:
    """Preprocess, tag under ``policy``, and drop untagged stop words."""
    out = []
    for review in corpus:
        tokenized = preprocess_review(review, resources.options)
        tagged, _ = apply_policy(tokenized, policy, resources.config, resources.lexicon)
        out.append(remove_stopwords(tagged, resources.stopwords))
    return out


def fit(reviews: Sequence[TokenizedReview], config: TrainConfig) -> tuple[Model, Vocabulary, dict]:
    """Vocabulary, IDF and model from ``reviews`` alone."""
    vocab = build_vocabulary(reviews)
    idf = compute_idf(vocab)
    labels = {r.label for r in reviews}
    if len(labels) < 2:
        raise TrainingError("training partition contains a single class")
    model = train(build_matrix(reviews, vocab, idf), config)
    return model, vocab, idf


@dataclass(frozen=True)
class FoldResult:
    fold: int
    confusion: ConfusionMatrix
    n_features: int

    @property
    def metrics(self) -> Metrics:
        return compute_metrics(self.confusion)


@dataclass(frozen=True)
class CVResult:
    metrics: Metrics
    confusion: ConfusionMatrix
    folds: tuple[FoldResult, ...]
    aggregation: str = "pooled"

    def to_dict(self) -> dict:
        return {
            **self.metrics.to_dict(),
            **self.confusion.to_dict(),
            "aggregation": self.aggregation,
            "folds": [
                {"fold": f.fold, "n_features": f.n_features, **f.confusion.to_dict(), **f.metrics.to_dict()}
                for f in self.folds
            ],
        }


def _cross_validate_tagged(
    tagged: Sequence[TokenizedReview], train_config: TrainConfig, fold_plan: FoldPlan
) -> CVResult:
    folds = []
    for k in range(fold_plan.n_folds):
        train_part = [r for r in tagged if fold_plan.fold_of(r.id) != k]
        test_part = [r for r in tagged if fold_plan.fold_of(r.id) == k]
        if not test_part:
            continue
        try:
            model, vocab, idf = fit(train_part, train_config)
        except TrainingError as exc:
            raise TrainingError(f"fold {k}: {exc}") from None
        predicted = predict_many(model, build_matrix(test_part, vocab, idf))
        cm = confusion_matrix(predicted, [r.label for r in test_part])
        folds.append(FoldResult(k, cm, len(vocab)))
    pooled = sum((f.confusion for f in folds), ConfusionMatrix())
    return CVResult(compute_metrics(pooled), pooled, tuple(folds))


def cross_validate(
    corpus: LabeledCorpus,
    policy: ScopePolicy,
    train_config: TrainConfig,
    resources: Resources,
    fold_plan: FoldPlan,
) -> CVResult:
    """Train on all folds but one, test on the held-out fold, pool the confusion matrices.

    Tagging is per review and learns nothing from labels, so the whole corpus
    is tagged once; vocabulary, IDF and model come from the training folds.
    """
    missing = [r.id for r in corpus if r.id not in fold_plan.assignments]
    if missing:
        raise ValueError(f"fold plan does not cover review {missing[0]!r}")
    return _cross_validate_tagged(tag_corpus(corpus, policy, resources), train_config, fold_plan)


def tagged_type_bound(reviews: Iterable[TokenizedReview]) -> int:
    """Largest vocabulary any tagging can produce: every type plain and negated."""
    return 2 * len({t.surface for r in reviews for t in r.tokens})


@dataclass(frozen=True)
class CellResult:
    policy: PolicyKind
    classifier: Classifier
    result: CVResult


@dataclass
class ComparisonReport:
    cells: list[CellResult]
    vocabulary_sizes: dict[PolicyKind, int]
    stats: NegationStats
    seed: int
    n_folds: int
    config_digest: str
    manifest: dict = field(default_factory=dict)

    @property
    def grid(self) -> dict[tuple[PolicyKind, Classifier], Metrics]:
        return {(c.policy, c.classifier): c.result.metrics for c in self.cells}

    def to_dict(self) -> dict:
        return {
            "grid": [
                {
                    "policy": c.policy.value,
                    "classifier": c.classifier.value,
                    **c.result.metrics.to_dict(),
                    **c.result.confusion.to_dict(),
                }
                for c in self.cells
            ],
            "vocab_sizes": {p.value: n for p, n in self.vocabulary_sizes.items()},
            "stats": self.stats.to_dict(),
            "seed": self.seed,
            "n_folds": self.n_folds,
            "aggregation": "pooled",
            "config_digest": self.config_digest,
            "manifest": self.manifest,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2) + "\n"

    def to_table(self) -> str:
        def pct(v):
            return "n/a" if v is None else f"{100 * v:.2f}%"

        head = f"{'Classifier':<22}{'Scope policy':<30}{'Accuracy':>10}{'Precision':>11}{'Recall':>10}"
        lines = [head, "-" * len(head)]
        by_clf: dict[Classifier, list[CellResult]] = {}
        for c in self.cells:
            by_clf.setdefault(c.classifier, []).append(c)
        for clf, cells in by_clf.items():
            for i, c in enumerate(cells):
                m = c.result.metrics
                name = CLASSIFIER_LABELS[clf] if i == 0 else ""
                lines.append(
                    f"{name:<22}{POLICY_LABELS[c.policy]:<30}{pct(m.accuracy):>10}{pct(m.precision):>11}{pct(m.recall):>10}"
                )
        lines.append("")
        lines.append(f"{self.n_folds}-fold cross-validation, pooled confusion matrix, seed {self.seed}")
        lines.append("features: " + ", ".join(f"{p.value}={n}" for p, n in self.vocabulary_sizes.items()))
        s = self.stats
        share = "n/a" if s.negative_share is None else f"{100 * s.negative_share:.1f}% negative"
        lines.append(
            f"reviews with negation terms: {s.reviews_with_trigger}/{s.total_reviews} "
            f"({100 * s.prevalence:.1f}%, {share})"
        )
        return "\n".join(lines) + "\n"


def compare_grid(
    corpus: LabeledCorpus,
    policies: Sequence[ScopePolicy],
    classifiers: Sequence[Classifier],
    resources: Resources,
    seed: int = 0,
    n_folds: int = 10,
    stratify: bool = True,
    base_config: Optional[TrainConfig] = None,
    manifest: Optional[dict] = None,
) -> ComparisonReport:
    if not policies or not classifiers:
        raise ValueError("need at least one policy and one classifier")
    base = base_config or TrainConfig()
    plan = stratified_folds(corpus, n_folds, seed, stratify)
    cells = []
    vocab_sizes = {}
    for policy in policies:
        tagged = tag_corpus(corpus, policy, resources)
        vocab_sizes[policy.kind] = len(build_vocabulary(tagged))
        for clf in classifiers:
            config = TrainConfig(**{**base.to_dict(), "classifier": clf, "seed": seed})
            cells.append(CellResult(policy.kind, Classifier(clf), _cross_validate_tagged(tagged, config, plan)))
    stats = corpus_stats(corpus, resources.config, resources.options)
    digest_src = {
        "resources": resources.digest(),
        "policies": [[p.kind.value, p.window_length] for p in policies],
        "classifiers": [Classifier(c).value for c in classifiers],
        "train": {**base.to_dict(), "classifier": None, "seed": seed},
        "n_folds": n_folds,
        "stratify": stratify,
    }
    digest = hashlib.sha256(json.dumps(digest_src, sort_keys=True).encode()).hexdigest()
    full_manifest = {"tool_version": __version__, "kernel_backend": BACKEND, **(manifest or {})}
    return ComparisonReport(cells, vocab_sizes, stats, seed, n_folds, digest, full_manifest)
