"""numpy/scipy versions of the compiled kernels, same signatures."""

import numpy as np
from scipy import sparse


def _row_ids(indptr):
    return np.repeat(np.arange(len(indptr) - 1), np.diff(indptr))


def linear_scores(indptr, indices, data, w, b):
    n = len(indptr) - 1
    return np.bincount(_row_ids(indptr), weights=data * w[indices], minlength=n) + b


def logreg_loss_grad(indptr, indices, data, y, w, b, l2):
    n = len(indptr) - 1
    rows = _row_ids(indptr)
    m = y * (np.bincount(rows, weights=data * w[indices], minlength=n) + b)
    loss = np.logaddexp(0.0, -m).sum() / n
    coef = -y * np.exp(-np.logaddexp(0.0, m)) / n
    grad = np.bincount(indices, weights=coef[rows] * data, minlength=len(w))
    loss += 0.5 * l2 * float(w @ w)
    return float(loss), grad + l2 * w, float(coef.sum())


def svm_epoch(indptr, indices, data, y, order, v, scale, b, eta, reg):
    shrink = 1.0 - eta * reg
    for i in order:
        lo, hi = indptr[i], indptr[i + 1]
        cols = indices[lo:hi]
        x = data[lo:hi]
        s = scale * float(x @ v[cols]) + b
        scale *= shrink
        if y[i] * s < 1.0:
            v[cols] += (eta * y[i] / scale) * x
            b += eta * y[i]
        if scale < 1e-9:
            v *= scale
            scale = 1.0
    return scale, b


def pairwise_dot(a_indptr, a_indices, a_data, b_indptr, b_indices, b_data, n_features):
    a = sparse.csr_matrix((a_data, a_indices, a_indptr), shape=(len(a_indptr) - 1, n_features))
    b = sparse.csr_matrix((b_data, b_indices, b_indptr), shape=(len(b_indptr) - 1, n_features))
    return np.asarray((a @ b.T).toarray(), dtype=np.float64)
