# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops over CSR matrices (indptr, indices, data)."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log1p

cnp.import_array()

ctypedef cnp.int64_t idx_t


def linear_scores(const idx_t[::1] indptr, const idx_t[::1] indices, const double[::1] data,
                  const double[::1] w, double b):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t i, k
    cdef double s
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    for i in range(n):
        s = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            s += data[k] * w[indices[k]]
        o[i] = s + b
    return out


def logreg_loss_grad(const idx_t[::1] indptr, const idx_t[::1] indices, const double[::1] data,
                     const double[::1] y, const double[::1] w, double b, double l2):
    """Mean logistic loss + l2/2 |w|^2, with its gradient in (w, b)."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t d = w.shape[0]
    cdef Py_ssize_t i, k, j
    cdef double s, m, loss = 0.0, gb = 0.0, coef, sig
    grad = np.zeros(d, dtype=np.float64)
    cdef double[::1] g = grad
    for i in range(n):
        s = b
        for k in range(indptr[i], indptr[i + 1]):
            s += data[k] * w[indices[k]]
        m = y[i] * s
        if m > 0:
            loss += log1p(exp(-m))
            sig = exp(-m) / (1.0 + exp(-m))
        else:
            loss += -m + log1p(exp(m))
            sig = 1.0 / (1.0 + exp(m))
        coef = -y[i] * sig / n
        gb += coef
        for k in range(indptr[i], indptr[i + 1]):
            g[indices[k]] += coef * data[k]
    loss /= n
    for j in range(d):
        loss += 0.5 * l2 * w[j] * w[j]
        g[j] += l2 * w[j]
    return loss, grad, gb


def svm_epoch(const idx_t[::1] indptr, const idx_t[::1] indices, const double[::1] data,
              const double[::1] y, const idx_t[::1] order, double[::1] v,
              double scale, double b, double eta, double reg):
    """One shuffled pass of hinge-loss subgradient steps.

    The weight vector is ``scale * v`` so that the per-example shrink is O(1).
    Returns the new ``(scale, b)``; ``v`` is updated in place.
    """
    cdef Py_ssize_t t, i, k, j
    cdef Py_ssize_t d = v.shape[0]
    cdef double s, step
    cdef double shrink = 1.0 - eta * reg
    for t in range(order.shape[0]):
        i = order[t]
        s = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            s += data[k] * v[indices[k]]
        s = scale * s + b
        scale *= shrink
        if y[i] * s < 1.0:
            step = eta * y[i] / scale
            for k in range(indptr[i], indptr[i + 1]):
                v[indices[k]] += step * data[k]
            b += eta * y[i]
        if scale < 1e-9:
            for j in range(d):
                v[j] *= scale
            scale = 1.0
    return scale, b


def pairwise_dot(const idx_t[::1] a_indptr, const idx_t[::1] a_indices, const double[::1] a_data,
                 const idx_t[::1] b_indptr, const idx_t[::1] b_indices, const double[::1] b_data,
                 Py_ssize_t n_features):
    """Dense ``A @ B.T`` for two CSR matrices over the same feature space."""
    cdef Py_ssize_t na = a_indptr.shape[0] - 1
    cdef Py_ssize_t nb = b_indptr.shape[0] - 1
    cdef Py_ssize_t nnz = b_indptr[nb]
    cdef Py_ssize_t i, j, k, p, f
    cdef double v
    out = np.zeros((na, nb), dtype=np.float64)
    cdef double[:, ::1] o = out
    # postings of B by feature (CSC layout), rows ascending within a feature
    ptr_arr = np.zeros(n_features + 1, dtype=np.int64)
    cdef idx_t[::1] ptr = ptr_arr
    for k in range(nnz):
        ptr[b_indices[k] + 1] += 1
    for f in range(n_features):
        ptr[f + 1] += ptr[f]
    fill_arr = ptr_arr[:-1].copy()
    cdef idx_t[::1] fill = fill_arr
    rows_arr = np.empty(nnz, dtype=np.int64)
    vals_arr = np.empty(nnz, dtype=np.float64)
    cdef idx_t[::1] rows = rows_arr
    cdef double[::1] vals = vals_arr
    for j in range(nb):
        for k in range(b_indptr[j], b_indptr[j + 1]):
            f = b_indices[k]
            rows[fill[f]] = j
            vals[fill[f]] = b_data[k]
            fill[f] += 1
    for i in range(na):
        for k in range(a_indptr[i], a_indptr[i + 1]):
            f = a_indices[k]
            v = a_data[k]
            for p in range(ptr[f], ptr[f + 1]):
                o[i, rows[p]] += v * vals[p]
    return out
