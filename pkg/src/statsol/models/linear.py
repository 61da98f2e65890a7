"""Scalar-per-coordinate test models with closed-form solutions."""

from __future__ import annotations

import numpy as np

from ..cylinder import euclidean
from .base import ModelSpec, guard


class LinearModel(ModelSpec):
    """``u' = -rate * u - cubic * u**3`` coordinatewise.

    With ``cubic = 0`` the flow is ``u0 * exp(-rate t)``; with ``rate = 0`` and
    ``cubic = 0`` the dynamics are frozen.
    """

    energy_is_equality = True

    def __init__(self, dim: int = 1, rate: float = 1.0, cubic: float = 0.0):
        self.name = "linear"
        self.dim = dim
        self.rate = float(rate)
        self.cubic = float(cubic)
        self.pairing = euclidean(dim)

    def rhs(self, t, u):
        u = np.asarray(u, dtype=float)
        guard(u)
        return -self.rate * u - self.cubic * u**3

    def linear_operator(self):
        return -self.rate * np.eye(self.dim)

    def exact(self, t, u0):
        """Closed-form solution at time ``t`` (from ``t0 = 0``)."""
        u0 = np.asarray(u0, dtype=float)
        if self.cubic == 0.0:
            return u0 * np.exp(-self.rate * t)
        if self.rate == 0.0:
            return u0 / np.sqrt(1.0 + 2.0 * self.cubic * u0**2 * t)
        # w = u^-2 solves w' = 2 rate w + 2 cubic
        e = np.exp(2.0 * self.rate * t)
        with np.errstate(divide="ignore"):
            w = (1.0 / u0**2 + self.cubic / self.rate) * e - self.cubic / self.rate
        return np.where(u0 == 0.0, 0.0, np.sign(u0) / np.sqrt(w))

    def params(self):
        return {"dim": self.dim, "rate": self.rate, "cubic": self.cubic}
