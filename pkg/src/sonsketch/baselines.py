"""First-order baselines and the diagonal-preconditioning wrapper."""

import numpy as np

from .losses import eval_loss


class OgdLearner:
    """Plain online gradient descent, no projection."""

    def __init__(self, d, eta, loss):
        if eta <= 0:
            raise ValueError("stepsize must be positive")
        self.d = d
        self.eta = eta
        self.loss = loss
        self.w = np.zeros(d)

    def predict(self, x):
        return x.dot_dense(self.w)

    def update(self, x, y, pred):
        loss_val, dloss = eval_loss(self.loss, pred, y)
        if dloss:
            self.w[x.idx] -= self.eta * dloss * x.vals
        return loss_val

    def round(self, x, y):
        pred = self.predict(x)
        return pred, self.update(x, y, pred)


class AdaGradLearner:
    """Diagonal AdaGrad.

    The squared-gradient accumulator is bumped before the step, so a
    coordinate's first step has size exactly ``eta * sign(g)``; coordinates
    with a zero accumulator are never divided (0/0 := 0, no epsilon).
    """

    def __init__(self, d, eta, loss):
        if eta <= 0:
            raise ValueError("stepsize must be positive")
        self.d = d
        self.eta = eta
        self.loss = loss
        self.w = np.zeros(d)
        self.grad_sq = np.zeros(d)

    def predict(self, x):
        return x.dot_dense(self.w)

    def update(self, x, y, pred):
        loss_val, dloss = eval_loss(self.loss, pred, y)
        if dloss:
            g = dloss * x.vals
            live = g != 0.0
            idx = x.idx[live]
            g = g[live]
            self.grad_sq[idx] += g * g
            self.w[idx] -= self.eta * g / np.sqrt(self.grad_sq[idx])
        return loss_val

    def round(self, x, y):
        pred = self.predict(x)
        return pred, self.update(x, y, pred)


class DiagPreconditioner:
    """Feeds an inner learner diagonally rescaled examples.

    The example passed down is ``D^{-1/2} x`` where ``D`` starts at
    ``0.1 I`` and accumulates the squared per-coordinate gradients of the
    rounds seen so far, measured in the *original* coordinate system.  This
    homogenizes feature scales the way diagonal AdaGrad does while leaving
    any second-order handling to the wrapped learner.
    """

    def __init__(self, inner, d, loss):
        self.inner = inner
        self.d = d
        self.loss = loss
        self.diag = np.full(d, 0.1)
        self._scaled = None

    def transform(self, x):
        return type(x)(x.idx, x.vals / np.sqrt(self.diag[x.idx]), x.dim)

    def predict(self, x):
        self._scaled = self.transform(x)
        return self.inner.predict(self._scaled)

    def update(self, x, y, pred):
        loss_val = self.inner.update(self._scaled, y, pred)
        self._scaled = None
        _, dloss = eval_loss(self.loss, pred, y)
        if dloss:
            g = dloss * x.vals
            self.diag[x.idx] += g * g
        return loss_val

    def round(self, x, y):
        pred = self.predict(x)
        return pred, self.update(x, y, pred)
