"""Dataset ingestion (svmlight/libsvm text) and the synthetic generator."""

import math
from dataclasses import dataclass

import numpy as np

from .sparse_vec import SparseVec


class LibsvmParseError(ValueError):
    """Malformed svmlight/libsvm input; carries the 1-based line number."""

    def __init__(self, message, line_no):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass
class Example:
    features: SparseVec
    label: float


def parse_libsvm_line(line, line_no=1, dim=None):
    """Parse one ``label idx:val ...`` line into an :class:`Example`.

    External indices are 1-based and must be strictly increasing; labels in
    {0, 1} or {-1, +1} are normalized to -1/+1.  Text after ``#`` is a
    comment.  Returns None for blank/comment-only lines.
    """
    body = line.split("#", 1)[0].strip()
    if not body:
        return None
    tokens = body.split()
    try:
        raw_label = float(tokens[0])
    except ValueError:
        raise LibsvmParseError(f"bad label {tokens[0]!r}", line_no) from None
    label = 1.0 if raw_label > 0 else -1.0
    idx = []
    vals = []
    prev = 0
    for tok in tokens[1:]:
        try:
            pos, val = tok.split(":", 1)
            pos = int(pos)
            val = float(val)
        except ValueError:
            raise LibsvmParseError(f"bad feature token {tok!r}", line_no) from None
        if pos <= prev:
            raise LibsvmParseError(f"feature index {pos} not increasing", line_no)
        if not math.isfinite(val):
            raise LibsvmParseError(f"non-finite value in {tok!r}", line_no)
        prev = pos
        idx.append(pos - 1)
        vals.append(val)
    width = dim if dim is not None else (idx[-1] + 1 if idx else 0)
    features = SparseVec(np.array(idx, dtype=np.int64), np.array(vals), width)
    return Example(features, label)


def serialize_example(ex):
    """Canonical one-line form accepted back by :func:`parse_libsvm_line`."""
    parts = ["+1" if ex.label > 0 else "-1"]
    parts += [f"{i + 1}:{v:.17g}" for i, v in zip(ex.features.idx, ex.features.vals)]
    return " ".join(parts)


def iter_libsvm(lines, dim=None):
    """Stream examples from an iterable of text lines (constant memory)."""
    for line_no, line in enumerate(lines, start=1):
        ex = parse_libsvm_line(line, line_no, dim)
        if ex is not None:
            yield ex


def scan_dimension(lines):
    """Max 1-based feature index over a whole file (for two-pass loading)."""
    dim = 0
    for line_no, line in enumerate(lines, start=1):
        ex = parse_libsvm_line(line, line_no)
        if ex is not None and ex.features.idx.size:
            dim = max(dim, int(ex.features.idx[-1]) + 1)
    return dim


@dataclass
class SyntheticSpec:
    """Ill-conditioned binary stream: T x d Gaussian data with a planted
    spectrum whose last ten eigenvalues ramp linearly from 1 up to kappa.

    Labels come from a random hyperplane applied to the kappa = 1 instance,
    so streams generated with the same seed but different kappa are linear
    transforms of one another with identical labels.
    """

    T: int
    d: int
    kappa: float
    seed: int = 0

    def __post_init__(self):
        if self.kappa < 1:
            raise ValueError("kappa must be >= 1")
        if self.d <= 10:
            raise ValueError("spectrum construction needs d > 10")


def synthetic_matrix(spec):
    """Return ``(X, y)`` for the full stream as dense arrays."""
    rng = np.random.default_rng(spec.seed)
    Z = rng.standard_normal((spec.T, spec.d))
    basis = rng.standard_normal((spec.d, spec.d))
    V, R = np.linalg.qr(basis)
    V = V * np.sign(np.diag(R))  # fix QR sign ambiguity for determinism
    theta = rng.standard_normal(spec.d)
    theta /= np.linalg.norm(theta)
    lam = np.ones(spec.d)
    ramp = np.arange(1, 11)
    lam[spec.d - 10 :] = 1.0 + ramp * (spec.kappa - 1.0) / 10.0
    X = Z * np.sqrt(lam) @ V.T
    margins = (Z @ V.T) @ theta  # kappa-independent: the kappa = 1 stream
    y = np.where(margins >= 0, 1.0, -1.0)
    return X, y


def gen_synthetic(spec):
    """Yield the stream of :class:`Example`; deterministic per seed."""
    X, y = synthetic_matrix(spec)
    idx = np.arange(spec.d, dtype=np.int64)
    for t in range(spec.T):
        yield Example(SparseVec(idx, X[t].copy(), spec.d), float(y[t]))
