"""Numeric primitives over sparse region vectors.

The affine map y = W x + b is the hot path of the whole classifier.  With
x sparse, only the columns of W at x's nonzero indices are touched, so
the arithmetic cost is O(d * nnz(x)) and does not depend on the input
dimensionality (hence not on the vocabulary size).
"""

from __future__ import annotations

import numpy as np

from swcnn.textpipe import SparseRegionVector


def sparse_affine(W: np.ndarray, b: np.ndarray, x: SparseRegionVector) -> np.ndarray:
    """W x + b touching only the columns of W at x's nonzero indices."""
    d, n = W.shape
    if b.shape != (d,):
        raise ValueError(f"bias shape {b.shape} does not match W rows {d}")
    if x.dim != n:
        raise ValueError(f"input dim {x.dim} does not match W cols {n}")
    if x.nnz == 0:
        return b.astype(np.float64, copy=True)
    return W[:, x.indices] @ x.values + b


def sparse_affine_grad(grad_out: np.ndarray, x: SparseRegionVector):
    """Gradients of sparse_affine with respect to W and b.

    Returns (indices, col_grads, b_grad): column j of W at x's k-th
    nonzero index receives col_grads[:, k] = grad_out * values[k]; the
    bias receives grad_out.  No gradient flows to x (inputs are data).
    """
    d = grad_out.shape[0]
    if grad_out.ndim != 1:
        raise ValueError("grad_out must be a vector")
    col_grads = np.outer(grad_out, x.values) if x.nnz else np.zeros((d, 0))
    return x.indices, col_grads, grad_out.copy()


def accumulate_sparse_affine_grad(dW, db, grad_out, x) -> None:
    """In-place version of sparse_affine_grad for training loops."""
    if dW.shape[0] != grad_out.shape[0] or x.dim != dW.shape[1]:
        raise ValueError("gradient buffers do not match the operands")
    if x.nnz:
        # x's indices are strictly increasing, so fancy += is safe.
        dW[:, x.indices] += np.outer(grad_out, x.values)
    db += grad_out


def relu(v: np.ndarray) -> np.ndarray:
    return np.maximum(v, 0.0)


def relu_grad(v: np.ndarray, grad_out: np.ndarray) -> np.ndarray:
    """Pass gradient where the pre-activation is > 0; the subgradient at
    exactly 0 is defined as 0."""
    return np.where(v > 0.0, grad_out, 0.0)


def softmax_xent(logits: np.ndarray, true_class: int):
    """Softmax cross-entropy with max-subtraction for overflow safety.

    Returns (loss, probs, grad_logits) where grad_logits is
    probs - onehot(true_class).
    """
    n_classes = logits.shape[0]
    if not 0 <= true_class < n_classes:
        raise ValueError(f"true_class {true_class} outside [0, {n_classes})")
    shifted = logits - np.max(logits)
    exp = np.exp(shifted)
    total = exp.sum()
    probs = exp / total
    # log-domain loss stays finite even when probs[true_class] underflows
    loss = float(np.log(total) - shifted[true_class])
    grad = probs.copy()
    grad[true_class] -= 1.0
    return loss, probs, grad
