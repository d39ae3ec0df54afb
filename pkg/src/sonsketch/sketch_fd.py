"""Frequent-directions sketches.

Two variants of the same deterministic sketch: the per-round form
eigendecomposes after every insertion and shrinks the whole spectrum by its
smallest eigenvalue, while the epoch form doubles the sketch (keeping a
buffer of up to ``m`` recent vectors), eigendecomposes once per epoch and
pays only an O(m d) amortized cost.  Both expose the pair ``(S, H)`` with
``H = (alpha I + S S^T)^{-1}`` maintained incrementally.
"""

import numpy as np

from ._kernels import gram_schmidt_k
from .core_math import RANK_EPS, top_k_eig


class FdSketch:
    """Per-round frequent directions over a stream of to-sketch vectors.

    State is the sketch ``S`` (m x d, its last row zero after every update)
    and the diagonal of ``H``.  ``shrink_total`` accumulates the per-update
    shrinkage, the quantity the sketch's approximation guarantee bounds.
    """

    def __init__(self, alpha, m, d):
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        if m < 2:
            raise ValueError("per-round frequent directions needs m >= 2")
        self.alpha = float(alpha)
        self.m = m
        self.d = d
        self.S = np.zeros((m, d))
        self.hdiag = np.full(m, 1.0 / alpha)
        # squared row norms of S; rows stay mutually orthogonal
        self._row_sq = np.zeros(m)
        self.shrink_total = 0.0
        self.shrink_log = []

    def update(self, ghat):
        """Insert a vector, eigendecompose, shrink by the smallest eigenvalue.

        The eigen step runs on the m x m Gram of the stacked sketch rather
        than the d x d covariance, which costs O(m^2 d + m^3).
        """
        idx, vals = ghat.idx, ghat.vals
        m = self.m
        self.S[m - 1, :] = 0.0
        self.S[m - 1, idx] = vals
        gram = np.diag(self._row_sq)
        cross = self.S[:, idx] @ vals
        gram[m - 1, :] = cross
        gram[:, m - 1] = cross
        gram[m - 1, m - 1] = float(vals @ vals)
        eigvals, eigvecs = top_k_eig(gram, m)
        eigvals = np.maximum(eigvals, 0.0)
        rho = eigvals[m - 1]
        shifted = np.maximum(eigvals - rho, 0.0)
        # rows of the new sketch are sqrt(shifted_i) * v_i where v_i is the
        # right singular vector u_i^T S / sqrt(eig_i)
        scale = np.where(eigvals > 0.0, np.sqrt(shifted / np.maximum(eigvals, 1e-300)), 0.0)
        self.S = (scale[:, None] * eigvecs) @ self.S
        self.S[m - 1, :] = 0.0
        self._row_sq = shifted
        self.hdiag = 1.0 / (self.alpha + shifted)
        self.shrink_total += float(rho)
        self.shrink_log.append(float(rho))
        return self.S, self.hdiag

    @property
    def matrix(self):
        return self.S

    def apply_h(self, v):
        return self.hdiag * v


class EpochFdSketch:
    """Epoch frequent directions with a doubled (2m-row) sketch.

    Within an epoch new vectors land in the buffer ``buf`` and ``H`` follows
    by two rank-one inverse corrections; every m-th insertion triggers the
    reduced eigendecomposition of :func:`compute_eigensystem`, shrinks the
    kept spectrum and clears the buffer.
    """

    def __init__(self, alpha, m, d):
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        if m < 1:
            raise ValueError("sketch size m must be >= 1")
        self.alpha = float(alpha)
        self.m = m
        self.d = d
        self.tau = 1
        self.scale = np.zeros(m)  # diagonal D of the kept part
        self.vecs = np.zeros((m, d))  # orthonormal rows V
        self.vecs[:, :m] = np.eye(m)
        self.buf = np.zeros((m, d))  # recent to-sketch vectors G
        self.H = np.eye(2 * m) / alpha
        self.shrink_total = 0.0
        self.shrink_log = []

    def update(self, ghat):
        m = self.m
        idx, vals = ghat.idx, ghat.vals
        row = self.tau - 1
        self.buf[row, :] = 0.0
        self.buf[row, idx] = vals
        if self.tau < m:
            gg = float(vals @ vals)
            sg = np.concatenate(
                [self.scale * (self.vecs[:, idx] @ vals), self.buf[:, idx] @ vals]
            )
            e = m + row
            q = sg
            q[e] -= 0.5 * gg
            hq = self.H @ q
            self.H -= np.outer(hq, self.H[e]) / (1.0 + hq[e])
            he = self.H[:, e].copy()
            qh = q @ self.H
            self.H -= np.outer(he, qh) / (1.0 + qh[e])
            self.tau += 1
        else:
            new_vecs, eigvals = compute_eigensystem(self.scale, self.vecs, self.buf)
            rho = max(float(eigvals[m - 1]), 0.0)
            shifted = np.maximum(eigvals - rho, 0.0)
            self.vecs = new_vecs
            self.scale = np.sqrt(shifted)
            self.H = np.diag(
                np.concatenate([1.0 / (self.alpha + shifted), np.full(m, 1.0 / self.alpha)])
            )
            self.buf = np.zeros((m, self.d))
            self.tau = 1
            self.shrink_total += rho
            self.shrink_log.append(rho)
        return self.matrix, self.H

    @property
    def matrix(self):
        return np.vstack([self.scale[:, None] * self.vecs, self.buf])

    def apply_h(self, v):
        return self.H @ v


def compute_eigensystem(scale, vecs, buf):
    """Top-m eigenpairs of ``S^T S`` for the stacked sketch ``[diag(scale) @ vecs; buf]``.

    ``vecs`` must have orthonormal rows.  The problem is reduced to an
    (m + r) x (m + r) eigendecomposition, with ``r`` the rank of the buffer
    component orthogonal to ``vecs``: writing ``buf - M @ vecs = L @ Q`` for
    orthonormal ``Q``, the stacked Gram is congruent to a small matrix in the
    ``[vecs; Q]`` basis.

    Returns ``(new_vecs, eigvals)`` where ``new_vecs`` rows are the
    eigenvectors and ``eigvals`` is descending.
    """
    scale = np.asarray(scale, dtype=np.float64)
    vecs = np.asarray(vecs, dtype=np.float64)
    buf = np.asarray(buf, dtype=np.float64)
    m = vecs.shape[0]
    mixed = buf @ vecs.T  # M
    resid = buf - mixed @ vecs
    L, Q, keep = gram_schmidt_k(resid, None, RANK_EPS)
    L, Q = L[:, keep], Q[keep]
    r = Q.shape[0]
    ml = np.hstack([mixed, L])  # (m, m + r)
    reduced = ml.T @ ml
    reduced[:m, :m] += np.diag(scale * scale)
    eigvals, U = top_k_eig(reduced, m)
    new_vecs = U[:, :m] @ vecs
    if r:
        new_vecs += U[:, m:] @ Q
    return new_vecs, np.maximum(eigvals, 0.0)
