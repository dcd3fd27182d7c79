"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--rows 2400] [--features 15000] [--repeat 5]

Matrices are random sparse TF-IDF-like rows (about 30 nonzeros each, unit
norm), roughly the shape of a 2400-review corpus.  Prints best-of-N seconds
per call for each backend and the speedup.
"""

import argparse
import timeit

import numpy as np

from negscope import _kernels


def random_csr(rng, rows, features, nnz):
    indptr = np.arange(0, rows * nnz + 1, nnz, dtype=np.int64)
    indices = np.concatenate([np.sort(rng.choice(features, nnz, replace=False)) for _ in range(rows)]).astype(np.int64)
    data = rng.uniform(0.1, 1.0, rows * nnz)
    norms = np.sqrt(np.add.reduceat(data * data, indptr[:-1]))
    data /= np.repeat(norms, nnz)
    return indptr, indices, data


def cases(rng, rows, features, nnz):
    a = random_csr(rng, rows, features, nnz)
    q = random_csr(rng, rows // 10, features, nnz)
    y = np.where(rng.random(rows) < 0.5, 1.0, -1.0)
    w = rng.normal(size=features)
    order = rng.permutation(rows).astype(np.int64)
    return {
        "linear_scores": lambda k: k.linear_scores(*a, w, 0.1),
        "logreg_loss_grad": lambda k: k.logreg_loss_grad(*a, y, w, 0.1, 1e-3),
        "svm_epoch": lambda k: k.svm_epoch(*a, y, order, np.zeros(features), 1.0, 0.0, 0.5, 1.0 / rows),
        "pairwise_dot": lambda k: k.pairwise_dot(*q, *a, features),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rows", type=int, default=2400)
    parser.add_argument("--features", type=int, default=15000)
    parser.add_argument("--nnz", type=int, default=30)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    backends = {"python": _kernels.python}
    if _kernels.compiled is not None:
        backends["cython"] = _kernels.compiled
    else:
        print("compiled kernels not built; timing the fallback only")

    rng = np.random.default_rng(args.seed)
    print(f"{args.rows} rows x {args.features} features, {args.nnz} nonzeros per row, best of {args.repeat}")
    print(f"{'kernel':<18}" + "".join(f"{name:>12}" for name in backends) + f"{'speedup':>10}")
    for name, call in cases(rng, args.rows, args.features, args.nnz).items():
        times = {b: min(timeit.repeat(lambda: call(k), number=1, repeat=args.repeat)) for b, k in backends.items()}
        speed = f"{times['python'] / times['cython']:>9.1f}x" if "cython" in times else ""
        print(f"{name:<18}" + "".join(f"{t:>11.4f}s" for t in times.values()) + speed)


if __name__ == "__main__":
    main()
