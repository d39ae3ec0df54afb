"""Closed-form projection onto the slab {w : |w @ x| <= C} in an A-norm.

The full-matrix form handles positive semidefinite ``A`` through its
pseudoinverse (with a separate branch when ``x`` leaves the range of ``A``);
the sketched form exploits the Woodbury identity so only the small factors
``S`` and ``H = (alpha I + S S^T)^{-1}`` are touched.
"""

from dataclasses import dataclass

import numpy as np

from ._kernels import jacobi_eigh

#: Relative cutoff below which the sketched projection denominator is
#: treated as zero.  With alpha > 0 the denominator is strictly positive in
#: exact arithmetic; this guards floating-point collapse only.
DENOM_EPS = 1e-12

_PINV_CUTOFF = 1e-10
_RANGE_EPS = 1e-8


class DegenerateProjection(RuntimeError):
    """Raised when the projection direction has numerically zero A-norm."""


@dataclass
class ProjectionResult:
    w: np.ndarray
    gamma: float
    clipped: bool


def tau_c(y, C):
    """Signed excess of ``y`` over the band [-C, C]."""
    if y > C:
        return y - C
    if y < -C:
        return y + C
    return 0.0


def sym_pinv(A, cutoff=_PINV_CUTOFF):
    """Moore-Penrose pseudoinverse of a symmetric PSD matrix.

    Uses a full eigendecomposition with eigenvalues below
    ``cutoff * lambda_max`` treated as zero.
    """
    vals, vecs = jacobi_eigh(np.asarray(A, dtype=np.float64))
    lam_max = float(vals.max(initial=0.0))
    inv = np.zeros_like(vals)
    alive = vals > cutoff * max(lam_max, 0.0)
    if lam_max > 0.0:
        inv[alive] = 1.0 / vals[alive]
    return (vecs * inv) @ vecs.T


def project_full(u, x, A, C):
    """Project ``u`` onto {w : |w @ x| <= C} minimizing ``||w - u||_A``.

    ``A`` may be rank deficient; when ``x`` lies outside its range the
    correction moves along ``(I - A^+ A) x``, which costs nothing in the
    A-seminorm while restoring feasibility.
    """
    u = np.asarray(u, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    xx = float(x @ x)
    if xx == 0.0:
        raise ValueError("cannot project onto a constraint with x = 0")
    shift = tau_c(float(u @ x), C)
    if shift == 0.0:
        return ProjectionResult(u.copy(), 0.0, False)
    Ap = sym_pinv(np.asarray(A, dtype=np.float64))
    in_range = np.linalg.norm(x - A @ (Ap @ x)) <= _RANGE_EPS * np.sqrt(xx)
    if in_range:
        direction = Ap @ x
    else:
        direction = x - Ap @ (A @ x)
    denom = float(x @ direction)
    gamma = shift / denom
    return ProjectionResult(u - gamma * direction, gamma, True)


def project_sketched(u, x, S, H, C):
    """Sketched projection using ``S`` and ``H = (alpha I + S S^T)^{-1}``.

    Implements the A-norm projection for ``A = alpha I + S^T S`` via the
    Woodbury identity; the ``1/alpha`` factors cancel between the multiplier
    and the direction, so ``alpha`` never appears explicitly.  ``H`` may be
    a diagonal given as a 1-d array or a full matrix.

    Raises :class:`DegenerateProjection` when the denominator
    ``x @ x - xh @ H @ xh`` falls below ``DENOM_EPS * x @ x``; the caller is
    expected to skip the shift and clamp its prediction instead.
    """
    u = np.asarray(u, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    xx = float(x @ x)
    if xx == 0.0:
        raise ValueError("cannot project onto a constraint with x = 0")
    xh = S @ x
    hxh = H * xh if H.ndim == 1 else H @ xh
    denom = xx - float(xh @ hxh)
    if denom <= DENOM_EPS * xx:
        raise DegenerateProjection(f"projection denominator {denom:.3e} ~ 0")
    shift = tau_c(float(u @ x), C)
    if shift == 0.0:
        return ProjectionResult(u.copy(), 0.0, False)
    gamma = shift / denom
    return ProjectionResult(u - gamma * (x - S.T @ hxh), gamma, True)


def woodbury_inverse(S, alpha):
    """Dense ``(alpha I + S^T S)^{-1}`` assembled from the m x m side."""
    S = np.asarray(S, dtype=np.float64)
    d = S.shape[1]
    H = np.linalg.inv(alpha * np.eye(S.shape[0]) + S @ S.T)
    return (np.eye(d) - S.T @ H @ S) / alpha
