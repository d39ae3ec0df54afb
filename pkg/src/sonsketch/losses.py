"""Scalar losses with derivative, Lipschitz constant and curvature parameter.

A loss acts on the prediction ``z = w @ x`` and a label ``y``.  Everything
the learners need is the value, the derivative in ``z``, a Lipschitz bound
``L`` valid while ``|z| <= C``, and the curvature constant that lower-bounds
the loss by its tangent plus a squared gradient term.
"""

from dataclasses import dataclass

SQUARE = "square"
ABSOLUTE = "absolute-linear"


@dataclass(frozen=True)
class LossSpec:
    kind: str
    C: float
    L: float

    def __post_init__(self):
        if self.kind not in (SQUARE, ABSOLUTE):
            raise ValueError(f"unknown loss kind {self.kind!r}")
        if self.C <= 0:
            raise ValueError("prediction bound C must be positive")
        if self.L <= 0:
            raise ValueError("Lipschitz constant L must be positive")


def square_loss(C=1.0):
    """Squared loss; with |z|, |y| <= C the derivative bound is 4C."""
    return LossSpec(SQUARE, C, 4.0 * C)


def absolute_loss(C=1.0):
    """Absolute loss |z - y|; convex with no curvature guarantee."""
    return LossSpec(ABSOLUTE, C, 1.0)


def eval_loss(spec, z, y):
    """Return ``(loss, dloss)`` at prediction ``z`` and label ``y``."""
    if spec.kind == SQUARE:
        r = z - y
        return r * r, 2.0 * r
    r = z - y
    return abs(r), 1.0 if r >= 0 else -1.0


def curvature_sigma(spec):
    """Curvature constant: 1/(8 C^2) for square loss, else 0."""
    if spec.kind == SQUARE:
        return 1.0 / (8.0 * spec.C * spec.C)
    return 0.0
