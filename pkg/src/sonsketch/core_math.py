"""Small dense symmetric linear algebra shared by the sketchers.

Two operations live here: a top-k symmetric eigensolver and the K-weighted
Gram-Schmidt decomposition that both sparse sketchers rely on.  Matrices are
small (order at most a few times the sketch size), so a deterministic cyclic
Jacobi solver beats library eigensolvers on robustness and reproducibility;
the hot inner loops are the kernels in :mod:`sonsketch._kernels`.
"""

import numpy as np

from ._kernels import gram_schmidt_k, jacobi_eigh

#: Rows whose residual K-norm falls below this (relative to the largest row
#: norm) are treated as linearly dependent and dropped in ``decompose``.
RANK_EPS = 1e-10

_SIGN_EPS = 1e-12


def _normalize_signs(vecs):
    """Flip each row so its first entry of magnitude > 1e-12 is nonnegative."""
    for row in vecs:
        big = np.flatnonzero(np.abs(row) > _SIGN_EPS)
        if big.size and row[big[0]] < 0.0:
            row *= -1.0
    return vecs


def top_k_eig(B, k):
    """Top-``k`` eigenpairs of a symmetric matrix, values descending.

    Returns ``(values, vectors)`` with ``vectors[i]`` the unit eigenvector
    for ``values[i]``.  Ties keep the solver's original ordering and each
    vector's sign is normalized, so the output is deterministic.
    """
    B = np.asarray(B, dtype=np.float64)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {B.shape}")
    n = B.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range for order-{n} matrix")
    if not np.isfinite(B).all():
        raise ValueError("matrix contains non-finite entries")
    vals, vecs = jacobi_eigh(B)
    order = np.argsort(-vals, kind="stable")[:k]
    return vals[order].copy(), _normalize_signs(vecs[:, order].T.copy())


def decompose(P, K):
    """Factor ``P`` as ``L Q`` with the rows of ``Q`` orthonormal under ``K``.

    ``K`` must be a Gram matrix ``R R^T`` (positive semidefinite), in which
    case ``L @ Q @ R == P @ R`` and ``Q K Q^T == I``.  Rows of ``P`` that are
    linearly dependent in the K-metric are dropped, so ``L`` is ``(m, r)``
    and ``Q`` is ``(r, n)`` with ``r`` the rank of ``P @ R``.  A zero-rank
    input yields empty ``L`` and ``Q``.
    """
    P = np.asarray(P, dtype=np.float64)
    K = np.asarray(K, dtype=np.float64)
    if P.ndim != 2 or K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError("P must be (m, n) and K must be (n, n)")
    m, n = P.shape
    if K.shape[0] != n:
        raise ValueError(f"K order {K.shape[0]} does not match P columns {n}")
    if m > n:
        raise ValueError(f"P has more rows ({m}) than columns ({n})")
    scale = max(1.0, float(np.abs(K).max(initial=0.0)))
    if np.abs(K - K.T).max(initial=0.0) > 1e-8 * scale:
        raise ValueError("K is not symmetric")
    eigvals, _ = jacobi_eigh(K)
    if eigvals.size and eigvals.min() < -1e-8 * max(1.0, float(eigvals.max())):
        raise ValueError("K is not positive semidefinite")
    L, Q, keep = gram_schmidt_k(P, K, RANK_EPS)
    return L[:, keep], Q[keep]
