"""Hot loops for training and prediction.

The compiled extension is used when it was built; otherwise the numpy/scipy
fallback is loaded.  Set ``NEGSCOPE_PURE_PYTHON=1`` to force the fallback.
"""

import os

from negscope._kernels import _pykernels as python

if os.environ.get("NEGSCOPE_PURE_PYTHON", "") not in ("", "0"):
    compiled = None
else:
    try:
        from negscope._kernels import _ckernels as compiled
    except ImportError:
        compiled = None

_impl = compiled if compiled is not None else python
BACKEND = "cython" if compiled is not None else "python"

linear_scores = _impl.linear_scores
logreg_loss_grad = _impl.logreg_loss_grad
svm_epoch = _impl.svm_epoch
pairwise_dot = _impl.pairwise_dot

__all__ = ["BACKEND", "compiled", "python", "linear_scores", "logreg_loss_grad", "svm_epoch", "pairwise_dot"]
