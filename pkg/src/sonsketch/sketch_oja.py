"""Oja's rule as a sketch: streaming top-m eigenvalue/eigenvector estimates.

Each update performs one stochastic-gradient step on the eigenbasis,

    eigvals <- (1 - gamma_t) eigvals + gamma_t (V ghat)^2
    V       <- orthonormalize(V + gamma_t (V ghat) ghat^T)

and exposes the sketch ``S = sqrt(t * eigvals) V`` with diagonal
``H = 1 / (alpha + t * eigvals)``.  The default stepsize schedule is
``gamma_t = 1/t``, under which ``eigvals`` is exactly the running mean of
the squared projections.
"""

import numpy as np

from ._kernels import gram_schmidt_k
from .core_math import RANK_EPS


def _default_gamma(t):
    return 1.0 / t


class OjaSketch:
    """Streaming eigen-estimation sketch.

    ``gamma`` is a function of the (1-based) update count returning a scalar
    or per-row array of stepsizes.  ``block > 1`` freezes the basis and
    applies the buffered rank-one terms every ``block`` updates, trading
    estimate freshness for fewer orthonormalizations.
    """

    def __init__(self, alpha, m, d, gamma=None, block=1, rng=None):
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        if m > d:
            raise ValueError(f"sketch size m={m} cannot exceed dimension d={d}")
        if m < 0:
            raise ValueError("sketch size m must be nonnegative")
        self.alpha = float(alpha)
        self.m = m
        self.d = d
        self.gamma = gamma or _default_gamma
        self.block = block
        self.t = 0
        self.eigvals = np.zeros(m)
        if rng is None:
            self.vecs = np.zeros((m, d))
            self.vecs[:, :m] = np.eye(m)
        else:
            gauss = rng.standard_normal((d, m))
            q, r = np.linalg.qr(gauss)
            self.vecs = (q * np.sign(np.diag(r))).T.copy()
        self.hdiag = np.full(m, 1.0 / alpha)
        self.rank_repairs = 0
        self._pending = np.zeros((m, d)) if block > 1 else None

    def update(self, ghat):
        self.t += 1
        m = self.m
        if m == 0:
            return self.matrix, self.hdiag
        idx, vals = ghat.idx, ghat.vals
        gamma = np.broadcast_to(np.asarray(self.gamma(self.t), dtype=np.float64), (m,))
        vg = self.vecs[:, idx] @ vals
        self.eigvals = (1.0 - gamma) * self.eigvals + gamma * vg * vg
        step = gamma * vg
        if not vals.size or not float(vals @ vals):
            # zero vector: the basis update is a no-op, skip the orth pass
            self.hdiag = 1.0 / (self.alpha + self.t * self.eigvals)
            return self.matrix, self.hdiag
        if self._pending is None:
            self.vecs[:, idx] += np.outer(step, vals)
            self._orthonormalize()
        else:
            self._pending[:, idx] += np.outer(step, vals)
            if self.t % self.block == 0:
                self.vecs += self._pending
                self._pending[:] = 0.0
                self._orthonormalize()
        self.hdiag = 1.0 / (self.alpha + self.t * self.eigvals)
        return self.matrix, self.hdiag

    def _orthonormalize(self):
        _, Q, keep = gram_schmidt_k(self.vecs, None, RANK_EPS)
        if keep.all():
            self.vecs = Q
            return
        # rank loss: refill each dropped slot with the first standard basis
        # vector independent of the surviving rows, re-orthonormalized
        self.vecs = Q
        for slot in np.flatnonzero(~keep):
            live = self.vecs[keep]
            for j in range(self.d):
                cand = np.zeros(self.d)
                cand[j] = 1.0
                cand -= live.T @ (live @ cand)
                norm = np.linalg.norm(cand)
                if norm > 1e-8:
                    self.vecs[slot] = cand / norm
                    keep[slot] = True
                    self.rank_repairs += 1
                    break
            else:
                raise RuntimeError("could not repair rank loss in Oja basis")

    @property
    def matrix(self):
        return np.sqrt(self.t * self.eigvals)[:, None] * self.vecs

    def apply_h(self, v):
        return self.hdiag * v


class EmptySketch:
    """Sketch of size zero: turns the sketched learner into gradient descent."""

    def __init__(self, alpha, d):
        self.alpha = float(alpha)
        self.m = 0
        self.d = d
        self.hdiag = np.zeros(0)
        self._S = np.zeros((0, d))

    def update(self, ghat):
        return self._S, self.hdiag

    @property
    def matrix(self):
        return self._S

    def apply_h(self, v):
        return self.hdiag * v
