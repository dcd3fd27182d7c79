"""Linear SVM, multinomial naive Bayes, logistic regression and KNN.

All four consume the same :class:`~negscope.features.DocumentTermMatrix`.
Ties always resolve to the positive class: a linear score of exactly 0,
equal naive Bayes posteriors, and KNN votes tied on both count and summed
similarity.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Union

import numpy as np

from negscope import _kernels
from negscope.corpus import PolarityLabel
from negscope.features import DocumentTermMatrix, SparseVector

POS, NEG = PolarityLabel.POSITIVE, PolarityLabel.NEGATIVE
MODEL_MAGIC = "negscope-model"
MODEL_VERSION = "v1"


class TrainingError(RuntimeError):
    pass


class ModelFormatError(ValueError):
    pass


class Classifier(str, enum.Enum):
    SVM = "svm"
    NB = "nb"
    LOGREG = "logreg"
    KNN = "knn"

    def __str__(self) -> str:
        return self.value


CLASSIFIER_LABELS = {
    Classifier.SVM: "SVM (linear)",
    Classifier.NB: "NB",
    Classifier.LOGREG: "Logistic Regression",
    Classifier.KNN: "K-NN",
}


@dataclass(frozen=True)
class TrainConfig:
    classifier: Classifier = Classifier.SVM
    k_neighbors: int = 50
    nb_alpha: float = 1.0
    logreg_learning_rate: float = 0.1
    logreg_l2: float = 1e-3
    epochs: int = 100
    svm_c: float = 1.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "classifier", Classifier(self.classifier))
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be >= 1")
        if not self.nb_alpha > 0:
            raise ValueError("nb_alpha must be > 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not self.logreg_learning_rate > 0:
            raise ValueError("logreg_learning_rate must be > 0")
        if self.logreg_l2 < 0:
            raise ValueError("logreg_l2 must be >= 0")
        if not self.svm_c > 0:
            raise ValueError("svm_c must be > 0")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    def to_dict(self) -> dict:
        return {
            "classifier": self.classifier.value,
            "k_neighbors": self.k_neighbors,
            "nb_alpha": self.nb_alpha,
            "logreg_learning_rate": self.logreg_learning_rate,
            "logreg_l2": self.logreg_l2,
            "epochs": self.epochs,
            "svm_c": self.svm_c,
            "seed": self.seed,
        }


@dataclass(frozen=True, eq=False)
class LinearModel:
    weights: np.ndarray
    bias: float
    kind: Classifier

    def __post_init__(self):
        if not (np.all(np.isfinite(self.weights)) and math.isfinite(self.bias)):
            raise TrainingError("model parameters are not finite")


@dataclass(frozen=True, eq=False)
class NBModel:
    class_log_prior: Mapping[PolarityLabel, float]
    feature_log_likelihood: Mapping[PolarityLabel, np.ndarray]

    @property
    def n_features(self) -> int:
        return len(self.feature_log_likelihood[POS])


@dataclass(frozen=True, eq=False)
class KNNModel:
    matrix: DocumentTermMatrix
    k: int

    def __post_init__(self):
        if len(self.matrix) == 0:
            raise TrainingError("KNN needs at least one training row")
        object.__setattr__(self, "k", min(self.k, len(self.matrix)))


Model = Union[LinearModel, NBModel, KNNModel]


def _one_row(x: SparseVector):
    indptr = np.array([0, len(x)], dtype=np.int64)
    return indptr, np.asarray(x.indices, dtype=np.int64), np.asarray(x.weights, dtype=np.float64)


def _class_rows(matrix: DocumentTermMatrix) -> dict[PolarityLabel, np.ndarray]:
    labels = np.array([l is POS for l in matrix.labels])
    out = {POS: np.flatnonzero(labels), NEG: np.flatnonzero(~labels)}
    for label, rows in out.items():
        if len(rows) == 0:
            raise TrainingError(f"no training rows with label {label.value}")
    return out


# -- naive Bayes --------------------------------------------------------------


def train_nb(matrix: DocumentTermMatrix, alpha: float = 1.0) -> NBModel:
    """Multinomial NB with TF-IDF weights read as fractional counts."""
    rows = _class_rows(matrix)
    indptr, indices, data = matrix.csr
    row_ids = np.repeat(np.arange(len(matrix)), np.diff(indptr))
    n_features = matrix.n_features
    priors, likelihood = {}, {}
    for label, members in rows.items():
        mask = np.isin(row_ids, members)
        totals = np.bincount(indices[mask], weights=data[mask], minlength=n_features)
        priors[label] = math.log(len(members) / len(matrix))
        likelihood[label] = np.log(alpha + totals) - math.log(alpha * n_features + totals.sum())
    return NBModel(priors, likelihood)


def _nb_joint(model: NBModel, indptr, indices, data) -> dict[PolarityLabel, np.ndarray]:
    return {
        label: _kernels.linear_scores(indptr, indices, data, model.feature_log_likelihood[label], model.class_log_prior[label])
        for label in (POS, NEG)
    }


def predict_nb(model: NBModel, x: SparseVector) -> tuple[PolarityLabel, dict[PolarityLabel, float]]:
    joint = _nb_joint(model, *_one_row(x))
    lp, ln = float(joint[POS][0]), float(joint[NEG][0])
    top = max(lp, ln)
    zp, zn = math.exp(lp - top), math.exp(ln - top)
    posterior = {POS: zp / (zp + zn), NEG: zn / (zp + zn)}
    return (POS if lp >= ln else NEG), posterior


# -- linear models ------------------------------------------------------------


def logreg_objective(matrix: DocumentTermMatrix, weights, bias: float, l2: float):
    """Mean negative log-likelihood + l2/2 |w|^2 and its gradient ``(loss, grad_w, grad_b)``."""
    return _kernels.logreg_loss_grad(*matrix.csr, matrix.signs, np.ascontiguousarray(weights, dtype=float), float(bias), float(l2))


def train_logreg(matrix: DocumentTermMatrix, config: TrainConfig = TrainConfig(Classifier.LOGREG)) -> LinearModel:
    _class_rows(matrix)
    w = np.zeros(matrix.n_features)
    b = 0.0
    lr = config.logreg_learning_rate
    for _ in range(config.epochs):
        loss, gw, gb = logreg_objective(matrix, w, b, config.logreg_l2)
        if not math.isfinite(loss):
            raise TrainingError("logistic loss diverged; lower the learning rate")
        w -= lr * gw
        b -= lr * gb
    if not (np.all(np.isfinite(w)) and math.isfinite(b)):
        raise TrainingError("logistic regression weights are not finite")
    return LinearModel(w, float(b), Classifier.LOGREG)


def svm_objective(matrix: DocumentTermMatrix, weights, bias: float, c: float) -> float:
    """Summed hinge loss + |w|^2 / (2C)."""
    scores = _kernels.linear_scores(*matrix.csr, np.ascontiguousarray(weights, dtype=float), float(bias))
    hinge = np.maximum(0.0, 1.0 - matrix.signs * scores).sum()
    return float(hinge + float(weights @ weights) / (2.0 * c))


def train_svm_linear(
    matrix: DocumentTermMatrix,
    config: TrainConfig = TrainConfig(Classifier.SVM),
    trace: Optional[list] = None,
) -> LinearModel:
    """Primal linear SVM by shuffled per-example subgradient steps.

    Each epoch is one seeded pass over the rows with step ``eta / sqrt(epoch)``.
    An epoch that raises the objective is rolled back and the base step halved,
    so the accepted objective never increases.  ``trace`` (if given) receives
    the objective after every epoch.
    """
    _class_rows(matrix)
    indptr, indices, data = matrix.csr
    y = matrix.signs
    n = len(matrix)
    reg = 1.0 / (config.svm_c * n)
    eta0 = min(1.0, 0.5 / reg)
    rng = np.random.default_rng(config.seed)
    v = np.zeros(matrix.n_features)
    b = 0.0
    best = svm_objective(matrix, v, b, config.svm_c)
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n).astype(np.int64)
        cand = v.copy()
        scale, cb = _kernels.svm_epoch(indptr, indices, data, y, order, cand, 1.0, b, eta0 / math.sqrt(epoch), reg)
        cand *= scale
        if not (np.all(np.isfinite(cand)) and math.isfinite(cb)):
            raise TrainingError("SVM weights are not finite")
        obj = svm_objective(matrix, cand, cb, config.svm_c)
        if obj <= best:
            v, b, best = cand, cb, obj
        else:
            eta0 *= 0.5
        if trace is not None:
            trace.append(best)
    return LinearModel(v, float(b), Classifier.SVM)


def predict_linear(model: LinearModel, x: SparseVector) -> tuple[PolarityLabel, float]:
    score = float(_kernels.linear_scores(*_one_row(x), model.weights, model.bias)[0])
    return (NEG if score < 0 else POS), score


# -- KNN ----------------------------------------------------------------------


def _knn_vote(sims: np.ndarray, labels: np.ndarray, k: int) -> PolarityLabel:
    # stable: equal similarities keep training-row order
    top = np.argsort(-sims, kind="stable")[:k]
    pos = labels[top]
    n_pos = int(pos.sum())
    n_neg = k - n_pos
    if n_pos != n_neg:
        return POS if n_pos > n_neg else NEG
    s_pos = float(sims[top][pos].sum())
    s_neg = float(sims[top][~pos].sum())
    return NEG if s_neg > s_pos else POS


def knn_predict(model: KNNModel, x: SparseVector) -> PolarityLabel:
    return knn_predict_many(model, DocumentTermMatrix((x,), (None,), model.matrix.vocabulary))[0]


def knn_predict_many(model: KNNModel, queries: DocumentTermMatrix) -> list[PolarityLabel]:
    sims = _kernels.pairwise_dot(*queries.csr, *model.matrix.csr, model.matrix.n_features)
    labels = np.array([l is POS for l in model.matrix.labels])
    return [_knn_vote(row, labels, model.k) for row in sims]


# -- dispatch -----------------------------------------------------------------


def train(matrix: DocumentTermMatrix, config: TrainConfig) -> Model:
    kind = config.classifier
    if kind is Classifier.SVM:
        return train_svm_linear(matrix, config)
    if kind is Classifier.LOGREG:
        return train_logreg(matrix, config)
    if kind is Classifier.NB:
        return train_nb(matrix, config.nb_alpha)
    _class_rows(matrix)
    return KNNModel(matrix, config.k_neighbors)


def predict_many(model: Model, matrix: DocumentTermMatrix) -> list[PolarityLabel]:
    if isinstance(model, KNNModel):
        return knn_predict_many(model, matrix)
    if isinstance(model, NBModel):
        joint = _nb_joint(model, *matrix.csr)
        return [POS if p >= q else NEG for p, q in zip(joint[POS], joint[NEG])]
    scores = _kernels.linear_scores(*matrix.csr, model.weights, model.bias)
    return [NEG if s < 0 else POS for s in scores]


# -- persistence --------------------------------------------------------------


def _floats(values) -> str:
    return " ".join(repr(float(v)) for v in values)


def _parse_floats(text: str, expected: int, what: str) -> np.ndarray:
    parts = text.split()
    if len(parts) != expected:
        raise ModelFormatError(f"{what}: expected {expected} values, got {len(parts)}")
    try:
        return np.array([float(p) for p in parts], dtype=np.float64)
    except ValueError as exc:
        raise ModelFormatError(f"{what}: {exc}") from None


def dumps_model(model: Model, manifest: Optional[dict] = None) -> str:
    if isinstance(model, KNNModel):
        raise ModelFormatError("KNN models are not serialized; export the training matrix instead")
    if isinstance(model, NBModel):
        kind, size = "nb", model.n_features
        body = [f"prior {label.value} {model.class_log_prior[label]!r}" for label in (POS, NEG)]
        body += [f"loglik {label.value} {_floats(model.feature_log_likelihood[label])}" for label in (POS, NEG)]
    else:
        kind, size = model.kind.value, len(model.weights)
        body = [f"bias {float(model.bias)!r}", f"weights {_floats(model.weights)}"]
    lines = [f"{MODEL_MAGIC} {MODEL_VERSION} {kind} |V|={size}"]
    lines.append("manifest " + json.dumps(manifest or {}, ensure_ascii=False, sort_keys=True))
    lines += body
    lines.append("end")
    return "".join(line + "\n" for line in lines)


def loads_model(text: str) -> tuple[Model, dict]:
    lines = text.split("\n")
    if not text.strip():
        raise ModelFormatError("empty model file")
    header = lines[0].split()
    if len(header) != 4 or header[0] != MODEL_MAGIC or not header[3].startswith("|V|="):
        raise ModelFormatError(f"not a model file (header {lines[0]!r})")
    if header[1] != MODEL_VERSION:
        raise ModelFormatError(f"unsupported model version {header[1]!r} (expected {MODEL_VERSION})")
    if "end" not in lines:
        raise ModelFormatError("truncated model file (no end marker)")
    kind = header[2]
    try:
        size = int(header[3][4:])
    except ValueError:
        raise ModelFormatError(f"bad vocabulary size in header {lines[0]!r}") from None
    fields: dict[str, str] = {}
    for line in lines[1 : lines.index("end")]:
        key, _, rest = line.partition(" ")
        if key in ("prior", "loglik"):
            label, _, rest = rest.partition(" ")
            key = f"{key} {label}"
        fields[key] = rest
    try:
        manifest = json.loads(fields.get("manifest", "{}"))
        if kind in ("svm", "logreg"):
            weights = _parse_floats(fields["weights"], size, "weights")
            bias = float(fields["bias"])
            return LinearModel(weights, bias, Classifier(kind)), manifest
        if kind == "nb":
            priors = {label: float(fields[f"prior {label.value}"]) for label in (POS, NEG)}
            loglik = {label: _parse_floats(fields[f"loglik {label.value}"], size, "loglik") for label in (POS, NEG)}
            return NBModel(priors, loglik), manifest
    except KeyError as exc:
        raise ModelFormatError(f"missing field {exc.args[0]!r}") from None
    except (ValueError, TrainingError) as exc:
        raise ModelFormatError(str(exc)) from None
    raise ModelFormatError(f"unknown model kind {kind!r}")


def save_model(model: Model, path, manifest: Optional[dict] = None) -> None:
    Path(path).write_text(dumps_model(model, manifest), encoding="utf-8")


def load_model(path) -> Model:
    return loads_model(Path(path).read_text(encoding="utf-8"))[0]
