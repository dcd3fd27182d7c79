import math

import numpy as np
import pytest

from conftest import dense_matrix
from negscope.classify import (
    Classifier,
    KNNModel,
    LinearModel,
    ModelFormatError,
    TrainConfig,
    TrainingError,
    dumps_model,
    knn_predict,
    knn_predict_many,
    load_model,
    loads_model,
    logreg_objective,
    predict_linear,
    predict_many,
    predict_nb,
    save_model,
    svm_objective,
    train,
    train_logreg,
    train_nb,
    train_svm_linear,
)
from negscope.corpus import PolarityLabel
from negscope.features import SparseVector

POS, NEG = PolarityLabel.POSITIVE, PolarityLabel.NEGATIVE


def random_matrix(rng, n, d, density=0.6):
    X = rng.uniform(0.1, 1.0, size=(n, d)) * (rng.random((n, d)) < density)
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    X = np.divide(X, norms, out=np.zeros_like(X), where=norms > 0)
    y = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    return X, y


def random_vector(rng, d):
    return SparseVector.from_dense(rng.uniform(0.1, 1.0, d) * (rng.random(d) < 0.5))


def separable(n_per_class=5):
    X = np.zeros((2 * n_per_class, 4))
    for i in range(n_per_class):
        X[i, i % 2] = 1.0
        X[i, 2 + (i % 2)] = 0.2 * (i % 3)
        X[n_per_class + i, 2 + (i % 2)] = 1.0
        X[n_per_class + i, i % 2] = 0.2 * (i % 3)
    y = [1.0] * n_per_class + [-1.0] * n_per_class
    return dense_matrix(X, y)


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(k_neighbors=0)
    with pytest.raises(ValueError):
        TrainConfig(nb_alpha=0)
    assert TrainConfig("nb").classifier is Classifier.NB


# -- logistic regression ---------------------------------------------------------


def test_logreg_gradient_matches_finite_differences():
    rng = np.random.default_rng(3)
    X, y = random_matrix(rng, 5, 4, density=0.8)
    m = dense_matrix(X, y)
    w, b, l2 = rng.normal(size=4), 0.3, 0.05
    _, gw, gb = logreg_objective(m, w, b, l2)
    h = 1e-5
    numeric = []
    for j in range(4):
        e = np.zeros(4)
        e[j] = h
        numeric.append((logreg_objective(m, w + e, b, l2)[0] - logreg_objective(m, w - e, b, l2)[0]) / (2 * h))
    numeric.append((logreg_objective(m, w, b + h, l2)[0] - logreg_objective(m, w, b - h, l2)[0]) / (2 * h))
    analytic = np.append(gw, gb)
    rel = np.abs(analytic - numeric) / np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-8)
    assert rel.max() <= 1e-4


def test_logreg_single_point():
    m = dense_matrix([[1.0, 0.0]], [1.0])
    # one class only cannot be trained
    with pytest.raises(TrainingError):
        train_logreg(m)
    m = dense_matrix([[1.0, 0.0], [0.0, 1.0]], [1.0, -1.0])
    model = train_logreg(m, TrainConfig(Classifier.LOGREG, epochs=50))
    assert predict_many(model, m) == [POS, NEG]


def test_logreg_l2_shrinks_weights():
    rng = np.random.default_rng(1)
    X, y = random_matrix(rng, 30, 6)
    m = dense_matrix(X, y)
    small = train_logreg(m, TrainConfig(Classifier.LOGREG, logreg_l2=1e-3))
    big = train_logreg(m, TrainConfig(Classifier.LOGREG, logreg_l2=10.0))
    assert np.linalg.norm(big.weights) < np.linalg.norm(small.weights)


@pytest.mark.parametrize("kind", [Classifier.LOGREG, Classifier.SVM, Classifier.NB, Classifier.KNN])
def test_separable_training_accuracy(kind):
    m = separable()
    model = train(m, TrainConfig(kind, k_neighbors=3))
    assert predict_many(model, m) == list(m.labels)


# -- SVM -------------------------------------------------------------------------


def test_svm_two_points():
    m = dense_matrix([[1.0, 0.0], [0.0, 1.0]], [1.0, -1.0])
    model = train_svm_linear(m)
    (l0, s0), (l1, s1) = (predict_linear(model, r) for r in m.rows)
    assert l0 is POS and s0 > 0 and l1 is NEG and s1 < 0


def test_svm_objective_trace_monotone():
    rng = np.random.default_rng(5)
    X, y = random_matrix(rng, 40, 8)
    m = dense_matrix(X, y)
    trace = []
    model = train_svm_linear(m, TrainConfig(Classifier.SVM, epochs=60), trace=trace)
    assert len(trace) == 60
    assert all(b <= a + 1e-6 for a, b in zip(trace, trace[1:]))
    assert trace[-1] == pytest.approx(svm_objective(m, model.weights, model.bias, 1.0))
    assert trace[-1] < svm_objective(m, np.zeros(8), 0.0, 1.0)


def test_svm_deterministic():
    rng = np.random.default_rng(2)
    X, y = random_matrix(rng, 30, 6)
    m = dense_matrix(X, y)
    a = train_svm_linear(m, TrainConfig(seed=4))
    b = train_svm_linear(m, TrainConfig(seed=4))
    assert np.array_equal(a.weights, b.weights) and a.bias == b.bias


# -- prediction ------------------------------------------------------------------


def test_predict_linear_examples():
    zero = LinearModel(np.zeros(3), 0.0, Classifier.SVM)
    assert predict_linear(zero, SparseVector((0,), (1.0,))) == (POS, 0.0)
    unit = LinearModel(np.array([1.0, 0.0, 0.0]), 0.0, Classifier.SVM)
    assert predict_linear(unit, SparseVector((0,), (1.0,))) == (POS, 1.0)


def test_predict_linear_sign_flip():
    rng = np.random.default_rng(9)
    for _ in range(200):
        w = rng.normal(size=6)
        x = random_vector(rng, 6)
        _, s = predict_linear(LinearModel(w, 0.0, Classifier.SVM), x)
        _, t = predict_linear(LinearModel(-w, 0.0, Classifier.SVM), x)
        assert t == -s
        if s != 0:
            assert predict_linear(LinearModel(w, 0.0, Classifier.SVM), x)[0] is not predict_linear(LinearModel(-w, 0.0, Classifier.SVM), x)[0]


def test_non_finite_model_rejected():
    with pytest.raises(TrainingError):
        LinearModel(np.array([np.nan]), 0.0, Classifier.SVM)


# -- naive Bayes -----------------------------------------------------------------


def hand_corpus():
    # 2 docs {حلو}, 2 docs {وسخ}; single-term documents have weight 1
    return dense_matrix([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 1.0]], [1, 1, -1, -1])


def test_nb_hand_oracle():
    # P(حلو|+) = (1+2)/(2+2), P(حلو|-) = (1+0)/(2+2), equal priors -> 3/4
    model = train_nb(hand_corpus(), 1.0)
    assert model.class_log_prior[POS] == pytest.approx(math.log(0.5))
    assert model.class_log_prior[NEG] == pytest.approx(math.log(0.5))
    label, post = predict_nb(model, SparseVector((0,), (1.0,)))
    assert label is POS
    assert abs(post[POS] - 0.75) <= 1e-9


def test_nb_likelihoods_normalized_and_zero_vector():
    rng = np.random.default_rng(0)
    X, y = random_matrix(rng, 20, 7)
    model = train_nb(dense_matrix(X, y))
    for label in (POS, NEG):
        assert np.exp(model.feature_log_likelihood[label]).sum() == pytest.approx(1.0, abs=1e-12)
    _, post = predict_nb(model, SparseVector())
    assert post[POS] == pytest.approx(math.exp(model.class_log_prior[POS]))


def test_nb_posteriors_sum_to_one():
    rng = np.random.default_rng(11)
    X, y = random_matrix(rng, 30, 12)
    model = train_nb(dense_matrix(X, y))
    for _ in range(1000):
        _, post = predict_nb(model, random_vector(rng, 12))
        assert abs(post[POS] + post[NEG] - 1.0) <= 1e-9


def test_nb_needs_both_classes():
    with pytest.raises(TrainingError):
        train_nb(dense_matrix([[1.0]], [1]))


# -- KNN -------------------------------------------------------------------------


def brute_force_knn(X, y, query, k):
    sims = [(float(np.dot(query, X[i])), i) for i in range(len(X))]
    sims.sort(key=lambda p: (-p[0], p[1]))
    top = sims[: min(k, len(X))]
    pos = [s for s, i in top if y[i] > 0]
    neg = [s for s, i in top if y[i] < 0]
    if len(pos) != len(neg):
        return POS if len(pos) > len(neg) else NEG
    return NEG if sum(neg) > sum(pos) else POS


@pytest.mark.parametrize("n, k, seed", [(20, 5, 0), (60, 50, 1), (20, 100, 2)])
def test_knn_matches_brute_force(n, k, seed):
    rng = np.random.default_rng(seed)
    X, y = random_matrix(rng, n, 10, density=0.4)
    for q in range(n):
        keep = [i for i in range(n) if i != q]
        model = KNNModel(dense_matrix(X[keep], y[keep]), k)
        got = knn_predict(model, SparseVector.from_dense(X[q]))
        assert got is brute_force_knn(X[keep], y[keep], X[q], k)


def test_knn_self_match_and_cap():
    m = separable()
    model = KNNModel(m, 1)
    assert knn_predict_many(model, m) == list(m.labels)
    assert KNNModel(m, 500).k == len(m)


def test_knn_tie_break():
    m = dense_matrix([[1.0, 0.0], [0.0, 1.0]], [1, -1])
    model = KNNModel(m, 2)
    # equal counts, equal similarity -> positive
    assert knn_predict(model, SparseVector()) is POS
    # equal counts, larger negative similarity -> negative
    assert knn_predict(model, SparseVector((0, 1), (0.6, 0.8))) is NEG


# -- persistence -----------------------------------------------------------------


def test_linear_round_trip(tmp_path):
    rng = np.random.default_rng(4)
    X, y = random_matrix(rng, 30, 9)
    model = train_svm_linear(dense_matrix(X, y))
    save_model(model, tmp_path / "m.model", {"seed": 0})
    back = load_model(tmp_path / "m.model")
    assert back.kind is Classifier.SVM
    for _ in range(100):
        x = random_vector(rng, 9)
        assert predict_linear(back, x) == predict_linear(model, x)


def test_nb_round_trip():
    rng = np.random.default_rng(6)
    X, y = random_matrix(rng, 20, 5)
    model = train_nb(dense_matrix(X, y))
    back, manifest = loads_model(dumps_model(model, {"a": 1}))
    assert manifest == {"a": 1}
    for _ in range(50):
        x = random_vector(rng, 5)
        assert predict_nb(back, x) == predict_nb(model, x)


def test_model_header_and_errors(tmp_path):
    text = dumps_model(LinearModel(np.array([0.5, -1.0]), 0.25, Classifier.SVM))
    assert text.startswith("negscope-model v1 svm |V|=2\n")
    (tmp_path / "empty").write_text("")
    with pytest.raises(ModelFormatError, match="empty"):
        load_model(tmp_path / "empty")
    with pytest.raises(ModelFormatError, match="version"):
        loads_model(text.replace(" v1 ", " v9 "))
    with pytest.raises(ModelFormatError, match="truncated"):
        loads_model(text.replace("end\n", ""))
    with pytest.raises(ModelFormatError, match="expected 3 values, got 2"):
        loads_model(text.replace("|V|=2", "|V|=3"))
    with pytest.raises(ModelFormatError):
        dumps_model(KNNModel(separable(), 3))
