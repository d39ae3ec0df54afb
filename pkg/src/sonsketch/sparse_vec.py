"""Sparse vector carrier used for examples, gradients and to-sketch vectors."""

from dataclasses import dataclass

import numpy as np


@dataclass
class SparseVec:
    """Index/value pairs over a fixed dimension.

    Indices are 0-based, strictly increasing ``int64``; values are
    ``float64``.  Instances are treated as immutable (updates build new
    vectors sharing the index array).
    """

    idx: np.ndarray
    vals: np.ndarray
    dim: int

    @classmethod
    def from_pairs(cls, pairs, dim):
        pairs = sorted(pairs)
        idx = np.array([i for i, _ in pairs], dtype=np.int64)
        vals = np.array([v for _, v in pairs], dtype=np.float64)
        return cls(idx, vals, dim)

    @classmethod
    def from_dense(cls, x):
        x = np.asarray(x, dtype=np.float64)
        return cls(np.arange(x.size, dtype=np.int64), x.copy(), x.size)

    def to_dense(self):
        out = np.zeros(self.dim)
        out[self.idx] = self.vals
        return out

    def scaled(self, c):
        return SparseVec(self.idx, c * self.vals, self.dim)

    def norm_sq(self):
        return float(self.vals @ self.vals)

    def dot_dense(self, w):
        return float(w[self.idx] @ self.vals)

    @property
    def nnz(self):
        return self.idx.size
