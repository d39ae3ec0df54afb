"""Sketched online Newton driver and the dense full-matrix variant.

The round protocol, in order: project the running point onto the slab of
bounded predictions for the incoming example (in the A-norm induced by the
current sketch), predict, observe the label, form the gradient and the
scaled to-sketch vector, update the sketch, then take the Newton step with
the updated sketch.  ``predict`` and ``update`` are split so a driver can
interleave them with label access; ``round`` runs both.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .losses import LossSpec, curvature_sigma, eval_loss, square_loss
from .projection import DegenerateProjection, project_full, project_sketched, sym_pinv, tau_c
from .sketch_fd import EpochFdSketch, FdSketch
from .sketch_oja import EmptySketch, OjaSketch

ETA_CONVEX = "convex"
ETA_CURVATURE = "curvature"

#: Full-matrix mode keeps a dense d x d state; refuse beyond this.
DENSE_DIM_LIMIT = 4096


def eta_schedule(t, mode, C, L, d, sigma=0.0):
    """Stepsize-like weight for round ``t``.

    The convex schedule sqrt(d / (C^2 L^2 t)) covers losses with no
    curvature; once sigma > 0 the curvature mode drops the extra weight
    entirely.
    """
    if t < 1:
        raise ValueError("rounds are 1-based")
    if mode == ETA_CONVEX:
        return math.sqrt(d / (C * C * L * L * t))
    if mode == ETA_CURVATURE:
        return 0.0
    raise ValueError(f"unknown eta mode {mode!r}")


@dataclass
class SonConfig:
    C: float = 1.0
    alpha: float = 1.0
    m: int = 0
    sketcher: str = "oja"  # "fd" | "epoch-fd" | "oja" | "none" | "full"
    eta_mode: str = ETA_CURVATURE
    loss: LossSpec = field(default_factory=square_loss)
    seed: int = 0

    def __post_init__(self):
        if self.C <= 0:
            raise ValueError("C must be positive")
        if self.sketcher == "full":
            if self.alpha < 0:
                raise ValueError("full mode needs alpha >= 0")
        elif self.alpha <= 0:
            raise ValueError("sketched modes need alpha > 0")
        if self.m < 0:
            raise ValueError("sketch size must be nonnegative")


def _make_sketcher(config, d):
    if config.m == 0 or config.sketcher == "none":
        return EmptySketch(config.alpha, d)
    if config.sketcher == "fd":
        return FdSketch(config.alpha, config.m, d)
    if config.sketcher == "epoch-fd":
        return EpochFdSketch(config.alpha, config.m, d)
    if config.sketcher == "oja":
        return OjaSketch(config.alpha, config.m, d)
    raise ValueError(f"unknown sketcher {config.sketcher!r}")


class SonLearner:
    """Online Newton step on the A-norm induced by a sketch.

    The weight state is the unprojected point ``u``; each prediction first
    projects it for the incoming example.  With ``m = 0`` the update
    degenerates to gradient descent with stepsize ``1/alpha`` (plus the
    projection).
    """

    def __init__(self, config, d, sketcher=None):
        self.config = config
        self.d = d
        self.loss = config.loss
        self.sketch = sketcher if sketcher is not None else _make_sketcher(config, d)
        self.u = np.zeros(d)
        self.t = 0  # completed rounds
        self._w = None
        self._pred = None
        self.degenerate_rounds = 0

    def predict(self, x):
        if self._w is not None:
            raise RuntimeError("predict called twice without update")
        if x.dim != self.d:
            raise ValueError(f"example dimension {x.dim} != learner dimension {self.d}")
        C = self.config.C
        S = self.sketch.matrix
        xd = x.to_dense()
        try:
            res = project_sketched(self.u, xd, S, _h_of(self.sketch), C)
            w = res.w
            pred = float(w[x.idx] @ x.vals)
        except DegenerateProjection:
            self.degenerate_rounds += 1
            w = self.u.copy()
            pred = min(max(float(w[x.idx] @ x.vals), -C), C)
        self._w = w
        self._pred = pred
        return pred

    def update(self, x, y, pred=None):
        if self._w is None:
            raise RuntimeError("update called before predict")
        pred = self._pred if pred is None else pred
        w = self._w
        self._w = None
        self._pred = None
        t = self.t + 1
        cfg = self.config
        loss_val, dloss = eval_loss(self.loss, pred, y)
        sigma = curvature_sigma(self.loss)
        eta = eta_schedule(t, cfg.eta_mode, cfg.C, self.loss.L, self.d, sigma)
        scale = math.sqrt(sigma + eta)
        ghat = x.scaled(scale * dloss)
        self.sketch.update(ghat)
        S = self.sketch.matrix
        g_vals = dloss * x.vals
        sg = S[:, x.idx] @ g_vals
        u = w.copy()
        u[x.idx] -= g_vals / cfg.alpha
        if S.shape[0]:
            u += S.T @ _apply_h(self.sketch, sg) / cfg.alpha
        self.u = u
        self.t = t
        return loss_val

    def round(self, x, y):
        pred = self.predict(x)
        return pred, self.update(x, y, pred)


def _h_of(sketch):
    return sketch.H if hasattr(sketch, "H") else sketch.hdiag


def _apply_h(sketch, v):
    return sketch.apply_h(v)


class OnsFullLearner:
    """Dense online Newton step with A_t = alpha I + sum (sigma+eta) g g^T.

    With ``alpha > 0`` the inverse is maintained by rank-one updates.  With
    ``alpha = 0`` the Moore-Penrose pseudoinverse replaces the inverse and
    the projection handles rank deficiency, which removes the only term of
    the update that is tied to a fixed coordinate system.
    """

    def __init__(self, config, d):
        if d > DENSE_DIM_LIMIT:
            raise ValueError(
                f"d={d} exceeds the dense limit {DENSE_DIM_LIMIT}; use a sketched mode"
            )
        self.config = config
        self.d = d
        self.loss = config.loss
        self.alpha = config.alpha
        self.A = config.alpha * np.eye(d)
        self.Ainv = np.eye(d) / config.alpha if config.alpha > 0 else None
        self._pinv = sym_pinv(self.A) if config.alpha == 0 else None
        self.u = np.zeros(d)
        self.t = 0
        self._w = None
        self._pred = None

    def predict(self, x):
        if self._w is not None:
            raise RuntimeError("predict called twice without update")
        C = self.config.C
        xd = x.to_dense()
        if self.alpha > 0:
            direction = self.Ainv @ xd
            shift = tau_c(float(self.u @ xd), C)
            if shift:
                w = self.u - (shift / float(xd @ direction)) * direction
            else:
                w = self.u.copy()
        else:
            w = project_full(self.u, xd, self.A, C).w
        pred = float(w[x.idx] @ x.vals)
        self._w = w
        self._pred = pred
        return pred

    def update(self, x, y, pred=None):
        if self._w is None:
            raise RuntimeError("update called before predict")
        pred = self._pred if pred is None else pred
        w = self._w
        self._w = None
        self._pred = None
        t = self.t + 1
        cfg = self.config
        loss_val, dloss = eval_loss(self.loss, pred, y)
        sigma = curvature_sigma(self.loss)
        eta = eta_schedule(t, cfg.eta_mode, cfg.C, self.loss.L, self.d, sigma)
        g = dloss * x.to_dense()
        weight = sigma + eta
        self.A += weight * np.outer(g, g)
        if self.alpha > 0:
            Ag = self.Ainv @ g
            self.Ainv -= np.outer(Ag, Ag) * (weight / (1.0 + weight * float(g @ Ag)))
            self.u = w - self.Ainv @ g
        else:
            self._pinv = sym_pinv(self.A)
            self.u = w - self._pinv @ g
        self.t = t
        return loss_val

    def round(self, x, y):
        pred = self.predict(x)
        return pred, self.update(x, y, pred)


def make_learner(config, d):
    """Build the learner named by ``config.sketcher`` for dimension ``d``."""
    if config.sketcher == "full":
        return OnsFullLearner(config, d)
    return SonLearner(config, d)
