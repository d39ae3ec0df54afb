"""Sparsity-dependent learners.

These reproduce the dense sketched Newton learners to floating-point
tolerance while touching only O(m * nnz + m^3) coordinates per round (plus
an amortized eigen step for the frequent-directions variant).  Two tricks
make that possible:

* the eigenbasis is factored as ``V = F Z`` where ``Z`` picks up sparse
  rank-one updates and the small square ``F`` keeps ``F Z`` orthonormal via
  Gram-Schmidt in the inner product of the Gram matrix ``K = Z Z^T``;
* the weight vector is split as ``w = wbar + Z^T b`` so the dense drift
  stays in ``wbar`` (updated only at example coordinates) while the sketch
  subspace shifts ride in the small vector ``b``.

Reads and writes of d-length arrays are tallied in ``touches``, which is
how the per-round cost claims are checked without relying on wall clocks.
"""

import math

import numpy as np

from ._kernels import gram_schmidt_k
from .core_math import RANK_EPS, top_k_eig
from .losses import curvature_sigma, eval_loss
from .projection import DENOM_EPS, tau_c
from .son import eta_schedule

#: Refuse to invert small factors whose condition estimate exceeds this.
COND_LIMIT = 1e12


class NumericalDegeneracy(RuntimeError):
    """A small factor became singular; the factored state cannot continue."""


def _solve_checked(M, rhs, what):
    if M.shape[0] == 0:
        return np.zeros_like(rhs)
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise NumericalDegeneracy(f"{what} condition estimate {cond:.2e} exceeds {COND_LIMIT:.0e}")
    return np.linalg.solve(M, rhs)


def _sparse_dot(idx_a, vals_a, idx_b, vals_b):
    if not idx_a.size or not idx_b.size:
        return 0.0
    pos = np.searchsorted(idx_a, idx_b)
    ok = pos < idx_a.size
    pos = np.where(ok, pos, 0)
    hit = ok & (idx_a[pos] == idx_b)
    return float(vals_a[pos[hit]] @ vals_b[hit])


def _default_gamma(t):
    return 1.0 / t


class SparseOjaSon:
    """Sparse Oja-sketched online Newton learner.

    Mathematically identical to ``SonLearner`` with an ``OjaSketch``; the
    per-round cost is O(m^3 + m * nnz).
    """

    def __init__(self, config, d, gamma=None):
        if config.alpha <= 0:
            raise ValueError("alpha must be positive")
        if config.m > d:
            raise ValueError("sketch size cannot exceed dimension")
        self.config = config
        self.d = d
        self.m = m = config.m
        self.loss = config.loss
        self.gamma = gamma or _default_gamma
        self.t = 0
        self.eigvals = np.zeros(m)
        self.factor = np.eye(m)  # F
        self.dirs = np.zeros((m, d))  # Z, dense rows with sparse updates
        self.dirs[:, :m] = np.eye(m)
        self.gram = np.eye(m)  # K = Z Z^T
        self.hdiag = np.full(m, 1.0 / config.alpha)
        self.wbar = np.zeros(d)
        self.b = np.zeros(m)
        self.touches = 0
        self.degenerate_rounds = 0
        self._pred = None
        self._x = None

    # -- sketch ---------------------------------------------------------

    def sketch_update(self, ghat):
        """One Oja step in factored form; returns the Z-row shift ``delta``."""
        self.t += 1
        m = self.m
        idx, vals = ghat.idx, ghat.vals
        if m == 0:
            return np.zeros(0)
        gamma = np.broadcast_to(np.asarray(self.gamma(self.t), dtype=np.float64), (m,))
        zg = self.dirs[:, idx] @ vals
        self.touches += m * idx.size
        vg = self.factor @ zg
        self.eigvals = (1.0 - gamma) * self.eigvals + gamma * vg * vg
        self.hdiag = 1.0 / (self.config.alpha + self.t * self.eigvals)
        gg = float(vals @ vals)
        if gg == 0.0:
            return np.zeros(m)
        delta = _solve_checked(self.factor, gamma * vg, "sketch factor")
        self.gram += np.outer(delta, zg) + np.outer(zg, delta) + gg * np.outer(delta, delta)
        self.dirs[:, idx] += np.outer(delta, vals)
        self.touches += m * idx.size
        _, Q, keep = gram_schmidt_k(self.factor, self.gram, RANK_EPS)
        if not keep.all():
            raise NumericalDegeneracy("orthonormalization lost rank in factored Oja update")
        self.factor = Q
        return delta

    # -- learner --------------------------------------------------------

    def predict(self, x):
        if self._x is not None:
            raise RuntimeError("predict called twice without update")
        C = self.config.C
        idx, vals = x.idx, x.vals
        zx = self.dirs[:, idx] @ vals
        self.touches += self.m * idx.size
        xh = self.factor @ zx
        xx = float(vals @ vals)
        raw = float(self.wbar[idx] @ vals) + float(self.b @ zx)
        self.touches += idx.size
        lam_h = self.eigvals * self.hdiag
        denom = xx - self.t * float(xh @ (lam_h * xh))
        if xx == 0.0 or denom <= DENOM_EPS * xx:
            self.degenerate_rounds += 1
            pred = min(max(raw, -C), C)
        else:
            gamma = tau_c(raw, C) / denom
            if gamma:
                self.wbar[idx] -= gamma * vals
                self.touches += idx.size
                self.b += gamma * self.t * (self.factor.T @ (lam_h * xh))
                pred = float(self.wbar[idx] @ vals) + float(self.b @ zx)
                self.touches += idx.size
            else:
                pred = raw
        self._x = x
        self._pred = pred
        return pred

    def update(self, x, y, pred=None):
        if self._x is None:
            raise RuntimeError("update called before predict")
        pred = self._pred if pred is None else pred
        self._x = None
        self._pred = None
        cfg = self.config
        idx, vals = x.idx, x.vals
        loss_val, dloss = eval_loss(self.loss, pred, y)
        sigma = curvature_sigma(self.loss)
        eta = eta_schedule(self.t + 1, cfg.eta_mode, cfg.C, self.loss.L, self.d, sigma)
        scale = math.sqrt(sigma + eta)
        ghat = x.scaled(scale * dloss)
        delta = self.sketch_update(ghat)
        g_vals = dloss * vals
        self.wbar[idx] -= g_vals / cfg.alpha
        self.touches += idx.size
        shift = float(delta @ self.b)
        if shift:
            self.wbar[idx] -= shift * ghat.vals
            self.touches += idx.size
        if self.m:
            zg = self.dirs[:, idx] @ g_vals
            self.touches += self.m * idx.size
            lam_h = self.eigvals * self.hdiag
            self.b += (self.t / cfg.alpha) * (self.factor.T @ (lam_h * (self.factor @ zg)))
        return loss_val

    def round(self, x, y):
        pred = self.predict(x)
        return pred, self.update(x, y, pred)

    def weight_vector(self):
        """Materialize the dense weight vector wbar + Z^T b (O(m d))."""
        return self.wbar + self.dirs.T @ self.b


class SparseFdSon:
    """Sparse epoch frequent-directions online Newton learner.

    The sketch is ``[diag(scale) F Z; G]`` with ``G`` the buffer of recent
    (sparse) to-sketch vectors kept as index/value rows.  Within an epoch
    only ``H`` moves (two rank-one inverse corrections); the epoch-boundary
    eigen step rewrites ``F``, ``Z`` and ``K`` through the reduced
    eigensystem, so the amortized cost stays O(m^2 + m * nnz) per round.
    """

    def __init__(self, config, d):
        if config.alpha <= 0:
            raise ValueError("alpha must be positive")
        if config.m < 1:
            raise ValueError("sketch size m must be >= 1")
        if config.m > d:
            raise ValueError("sketch size cannot exceed dimension")
        self.config = config
        self.d = d
        self.m = m = config.m
        self.loss = config.loss
        self.rounds = 0
        self.tau = 1
        self.scale = np.zeros(m)  # D
        self.factor = np.eye(m)  # F
        self.dirs = np.zeros((m, d))  # Z
        self.dirs[:, :m] = np.eye(m)
        self.gram = np.eye(m)  # K = Z Z^T
        self.rows = [None] * m  # G as (idx, vals) pairs
        self.H = np.eye(2 * m) / config.alpha
        self.wbar = np.zeros(d)
        self.b = np.zeros(m)
        self.shrink_total = 0.0
        self.touches = 0
        self.degenerate_rounds = 0
        self._last_epoch_rows = None  # buffer consumed by the latest eigen step
        self._pred = None
        self._x = None

    # -- sketch helpers ---------------------------------------------------

    def _buf_mul(self, idx, vals):
        """G @ v for a sparse vector (idx, vals); empty rows contribute 0."""
        out = np.zeros(self.m)
        for j, row in enumerate(self.rows):
            if row is not None:
                out[j] = _sparse_dot(row[0], row[1], idx, vals)
        return out

    def _sketch_mul(self, idx, vals):
        """S @ v with S = [diag(scale) F Z; G], plus the reusable Z @ v."""
        zx = self.dirs[:, idx] @ vals
        self.touches += self.m * idx.size
        top = self.scale * (self.factor @ zx)
        return np.concatenate([top, self._buf_mul(idx, vals)]), zx

    def _add_buf_combo(self, coeffs, scale=1.0):
        """wbar += scale * G^T coeffs, touching only buffered coordinates."""
        for j, row in enumerate(self.rows):
            if row is not None and coeffs[j]:
                self.wbar[row[0]] += scale * coeffs[j] * row[1]
                self.touches += row[0].size

    def _rows_dot_dirs(self):
        """G Z^T as an m x m block (rows of G are sparse)."""
        out = np.zeros((self.m, self.m))
        for j, row in enumerate(self.rows):
            if row is not None:
                out[j] = self.dirs[:, row[0]] @ row[1]
                self.touches += self.m * row[0].size
        return out

    def _rows_gram(self):
        out = np.zeros((self.m, self.m))
        for i, ri in enumerate(self.rows):
            if ri is None:
                continue
            for j in range(i, self.m):
                rj = self.rows[j]
                if rj is not None:
                    v = _sparse_dot(ri[0], ri[1], rj[0], rj[1])
                    out[i, j] = v
                    out[j, i] = v
        return out

    def sketch_update(self, ghat):
        """Insert a to-sketch vector; returns the epoch shift ``Delta`` or None."""
        m = self.m
        idx, vals = ghat.idx, ghat.vals
        row = self.tau - 1
        self.rows[row] = (idx, vals)
        if self.tau < m:
            gg = float(vals @ vals)
            q, _ = self._sketch_mul(idx, vals)
            e = m + row
            q[e] -= 0.5 * gg
            hq = self.H @ q
            self.H -= np.outer(hq, self.H[e]) / (1.0 + hq[e])
            he = self.H[:, e].copy()
            qh = q @ self.H
            self.H -= np.outer(he, qh) / (1.0 + qh[e])
            self.tau += 1
            return None
        # epoch boundary: reduced eigensystem in the (Z, G) coordinates
        gz = self._rows_dot_dirs()
        ggram = self._rows_gram()
        n1, n2, eigvals = compute_sparse_eigensystem(
            self.scale, self.factor, self.dirs, self.rows, self.gram, gz=gz, ggram=ggram
        )
        delta = _solve_checked(n1, n2, "eigenvector factor")
        self.gram += delta @ gz + gz.T @ delta.T + delta @ ggram @ delta.T
        for j, row in enumerate(self.rows):
            if row is not None:
                self.dirs[:, row[0]] += np.outer(delta[:, j], row[1])
                self.touches += m * row[0].size
        self.factor = n1
        rho = max(float(eigvals[m - 1]), 0.0)
        shifted = np.maximum(eigvals - rho, 0.0)
        self.scale = np.sqrt(shifted)
        self.shrink_total += rho
        self.H = np.diag(
            np.concatenate(
                [1.0 / (self.config.alpha + shifted), np.full(m, 1.0 / self.config.alpha)]
            )
        )
        self._last_epoch_rows = self.rows
        self.rows = [None] * m
        self.tau = 1
        return delta

    # -- learner ----------------------------------------------------------

    def predict(self, x):
        if self._x is not None:
            raise RuntimeError("predict called twice without update")
        C = self.config.C
        idx, vals = x.idx, x.vals
        xh, zx = self._sketch_mul(idx, vals)
        xx = float(vals @ vals)
        raw = float(self.wbar[idx] @ vals) + float(self.b @ zx)
        self.touches += idx.size
        hxh = self.H @ xh
        denom = xx - float(xh @ hxh)
        if xx == 0.0 or denom <= DENOM_EPS * xx:
            self.degenerate_rounds += 1
            pred = min(max(raw, -C), C)
        else:
            gamma = tau_c(raw, C) / denom
            if gamma:
                self._add_buf_combo(gamma * hxh[self.m :])
                self.wbar[idx] -= gamma * vals
                self.touches += idx.size
                self.b += gamma * (self.factor.T @ (self.scale * hxh[: self.m]))
                pred = float(self.wbar[idx] @ vals) + float(self.b @ zx)
                self.touches += idx.size
            else:
                pred = raw
        self._x = x
        self._pred = pred
        return pred

    def update(self, x, y, pred=None):
        if self._x is None:
            raise RuntimeError("update called before predict")
        pred = self._pred if pred is None else pred
        self._x = None
        self._pred = None
        cfg = self.config
        idx, vals = x.idx, x.vals
        loss_val, dloss = eval_loss(self.loss, pred, y)
        sigma = curvature_sigma(self.loss)
        self.rounds += 1
        eta = eta_schedule(self.rounds, cfg.eta_mode, cfg.C, self.loss.L, self.d, sigma)
        scale = math.sqrt(sigma + eta)
        ghat = x.scaled(scale * dloss)
        delta = self.sketch_update(ghat)
        g_vals = dloss * vals
        sg, _ = self._sketch_mul(idx, g_vals)
        hsg = self.H @ sg
        self._add_buf_combo(hsg[self.m :], 1.0 / cfg.alpha)
        self.wbar[idx] -= g_vals / cfg.alpha
        self.touches += idx.size
        if delta is not None:
            coeffs = delta.T @ self.b
            for j, row in enumerate(self._last_epoch_rows):
                if row is not None and coeffs[j]:
                    self.wbar[row[0]] -= coeffs[j] * row[1]
                    self.touches += row[0].size
        self.b += (self.factor.T @ (self.scale * hsg[: self.m])) / cfg.alpha
        return loss_val

    def round(self, x, y):
        pred = self.predict(x)
        return pred, self.update(x, y, pred)

    def weight_vector(self):
        return self.wbar + self.dirs.T @ self.b


def compute_sparse_eigensystem(scale, factor, dirs, rows, gram, gz=None, ggram=None):
    """Top-m eigensystem of the stacked sketch in (Z, G) coordinates.

    Input is the factored sketch ``[diag(scale) factor dirs; G]`` with
    ``gram = dirs @ dirs.T``; ``rows`` holds G as (idx, vals) pairs (None
    for empty rows).  Returns ``(N1, N2, eigvals)`` such that the rows of
    ``N1 @ dirs + N2 @ G`` are the top-m eigenvectors of ``S^T S``.  All
    work happens on (2m)-sized matrices; the only d-length contact is one
    pass over the buffered rows (skipped when ``gz``/``ggram`` are given).
    """
    m = factor.shape[0]
    if gz is None:
        gz = np.zeros((m, m))
        for j, row in enumerate(rows):
            if row is not None:
                gz[j] = dirs[:, row[0]] @ row[1]
    if ggram is None:
        ggram = np.zeros((m, m))
        for i, ri in enumerate(rows):
            if ri is None:
                continue
            for j in range(i, m):
                rj = rows[j]
                if rj is not None:
                    v = _sparse_dot(ri[0], ri[1], rj[0], rj[1])
                    ggram[i, j] = v
                    ggram[j, i] = v
    mixed = gz @ factor.T  # M = G Z^T F^T
    P = np.hstack([-mixed @ factor, np.eye(m)])
    kblock = np.block([[gram, gz.T], [gz, ggram]])
    L, Q, keep = gram_schmidt_k(P, kblock, RANK_EPS)
    L, Q = L[:, keep], Q[keep]
    r = Q.shape[0]
    ml = np.hstack([mixed, L])
    reduced = ml.T @ ml
    reduced[:m, :m] += np.diag(scale * scale)
    eigvals, U = top_k_eig(reduced, m)
    n1 = U[:, :m] @ factor
    n2 = np.zeros((m, m))
    if r:
        n1 += U[:, m:] @ Q[:, :m]
        n2 = U[:, m:] @ Q[:, m:]
    return n1, n2, np.maximum(eigvals, 0.0)
