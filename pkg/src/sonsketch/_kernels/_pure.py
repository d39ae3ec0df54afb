"""Pure-numpy reference implementations of the two hot kernels.

Both kernels operate on small matrices (n up to a few dozen) but run inside
the per-round loop of the online learners, so a compiled twin lives in
``_compiled.pyx``.  Keep the two implementations in lockstep: tests compare
them directly.
"""

import math

import numpy as np

BACKEND = "pure"


def jacobi_eigh(B):
    """Full eigendecomposition of a symmetric matrix by cyclic Jacobi sweeps.

    Returns ``(values, vectors)`` where ``values[i]`` pairs with the column
    ``vectors[:, i]``.  No ordering or sign convention is applied here; the
    wrapper in :mod:`sonsketch.core_math` does that.
    """
    A = np.array(B, dtype=np.float64, copy=True)
    n = A.shape[0]
    V = np.eye(n)
    if n <= 1:
        return np.diag(A).copy(), V
    fro = np.linalg.norm(A)
    stop = 1e-14 * max(1.0, fro)
    for _ in range(60):
        off = math.sqrt(max(np.sum(A * A) - np.sum(np.diag(A) ** 2), 0.0))
        if off <= stop:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p = A[:, p].copy()
                col_q = A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = A[q, p] = 0.0
                vec_p = V[:, p].copy()
                vec_q = V[:, q].copy()
                V[:, p] = c * vec_p - s * vec_q
                V[:, q] = s * vec_p + c * vec_q
    return np.diag(A).copy(), V


def gram_schmidt_k(P, K, rel_eps=1e-10):
    """Row-wise Gram-Schmidt of ``P`` under the inner product ``<a,b> = a K b``.

    ``K`` must be positive semidefinite (``K is None`` means the Euclidean
    inner product).  Runs a second orthogonalization pass per row; classical
    single-pass Gram-Schmidt loses orthogonality around 1e-7.

    Returns ``(L, Q, keep)`` with ``L`` lower triangular ``(m, m)``, ``Q``
    ``(m, n)`` holding a zero row wherever a row of ``P`` was dropped as
    linearly dependent, and ``keep`` the boolean mask of surviving rows.
    ``P[i] = sum_j L[i, j] Q[j]`` plus a residual of K-norm at most the drop
    tolerance.
    """
    P = np.asarray(P, dtype=np.float64)
    m, n = P.shape
    L = np.zeros((m, m))
    Q = np.zeros((m, n))
    keep = np.zeros(m, dtype=bool)
    if m == 0:
        return L, Q, keep

    def kmul(v):
        return v if K is None else K @ v

    norms = np.empty(m)
    for i in range(m):
        norms[i] = math.sqrt(max(float(P[i] @ kmul(P[i])), 0.0))
    tol = rel_eps * max(1.0, float(norms.max()))

    for i in range(m):
        p = P[i]
        alpha = Q @ kmul(p)
        beta = p - Q.T @ alpha
        alpha2 = Q @ kmul(beta)
        beta = beta - Q.T @ alpha2
        alpha = alpha + alpha2
        c = math.sqrt(max(float(beta @ kmul(beta)), 0.0))
        if c > tol:
            Q[i] = beta / c
            keep[i] = True
            alpha[i] = c
        else:
            alpha[i] = 0.0
        L[i] = alpha
    return L, Q, keep
