"""Cylindrical test functions ``Phi(u) = phi(<u, v_1>, ..., <u, v_k>)``.

``phi`` and ``grad_phi`` act on batches of pairing coordinates of shape
``(n, k)``; :func:`evaluate` and :func:`grad` accept a single state or a batch
of states.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


class CylinderError(ArithmeticError):
    pass


class Pairing:
    """Diagonal bilinear form ``<a, b> = sum_i m_i a_i b_i``."""

    def __init__(self, weights):
        self.weights = np.asarray(weights, dtype=float)
        self.weights.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.weights.shape[0]

    def __call__(self, a, b) -> np.ndarray:
        return np.sum(np.asarray(a) * self.weights * np.asarray(b), axis=-1)

    def __repr__(self):
        return f"Pairing(dim={self.dim})"


def euclidean(dim: int) -> Pairing:
    return Pairing(np.ones(dim))


@dataclass(frozen=True)
class CylindricalTestFunction:
    duals: np.ndarray
    phi: Callable[[np.ndarray], np.ndarray]
    grad_phi: Callable[[np.ndarray], np.ndarray]
    support_radius: float | None = None
    name: str = "Phi"

    def __post_init__(self):
        d = np.atleast_2d(np.asarray(self.duals, dtype=float))
        d.setflags(write=False)
        object.__setattr__(self, "duals", d)
        if d.shape[0] < 1:
            raise CylinderError("need at least one dual vector")

    @property
    def k(self) -> int:
        return self.duals.shape[0]

    def coordinates(self, u, pairing: Pairing) -> np.ndarray:
        """Pairing coordinates, shape ``(..., k)``."""
        u = np.asarray(u, dtype=float)
        z = pairing(u[..., None, :], self.duals)
        if not np.all(np.isfinite(z)):
            raise CylinderError("non-finite pairing coordinate")
        return z


def evaluate(Phi: CylindricalTestFunction, u, pairing: Pairing):
    z = Phi.coordinates(u, pairing)
    out = Phi.phi(z.reshape(-1, Phi.k)).reshape(z.shape[:-1])
    return float(out) if out.ndim == 0 else out


def grad(Phi: CylindricalTestFunction, u, pairing: Pairing) -> np.ndarray:
    """Derivative ``sum_j d_j phi(z) v_j`` as a vector in pairing space."""
    z = Phi.coordinates(u, pairing)
    g = Phi.grad_phi(z.reshape(-1, Phi.k)).reshape(z.shape)
    return g @ Phi.duals


def pair_with_grad(w, Phi: CylindricalTestFunction, u, pairing: Pairing):
    out = pairing(w, grad(Phi, u, pairing))
    return float(out) if np.ndim(out) == 0 else out


def grad_check(Phi: CylindricalTestFunction, u, pairing: Pairing, h: float = 1e-5) -> float:
    """Worst mismatch between ``grad_phi`` and central differences of ``phi``.

    Errors are relative to ``max(|exact|, |fd|, 1)``, i.e. absolute for
    small derivatives.
    """
    z = np.asarray(Phi.coordinates(u, pairing), dtype=float).reshape(-1, Phi.k)
    exact = Phi.grad_phi(z)
    worst = 0.0
    for j in range(Phi.k):
        e = np.zeros(Phi.k)
        e[j] = h
        fd = (Phi.phi(z + e) - Phi.phi(z - e)) / (2 * h)
        scale = np.maximum(np.maximum(np.abs(exact[:, j]), np.abs(fd)), 1.0)
        worst = max(worst, float(np.max(np.abs(exact[:, j] - fd) / scale)))
    return worst


# -- bumps ----------------------------------------------------------------


def _bump_q(q):
    """``exp(-1/(1-q))`` for ``q < 1`` else 0, with its derivative in ``q``."""
    q = np.asarray(q, dtype=float)
    inside = q < 1.0
    qi = np.where(inside, q, 0.0)
    val = np.where(inside, np.exp(-1.0 / (1.0 - qi)), 0.0)
    dval = np.where(inside, -val / (1.0 - qi) ** 2, 0.0)
    return val, dval


@dataclass(frozen=True)
class Bump1D:
    """Smooth bump ``exp(-1/(1-s^2))``, ``s = (t - center)/half_width``."""

    center: float
    half_width: float

    def __post_init__(self):
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")

    @property
    def support(self) -> tuple[float, float]:
        return self.center - self.half_width, self.center + self.half_width

    def __call__(self, t):
        s = (np.asarray(t, dtype=float) - self.center) / self.half_width
        return _bump_q(s * s)[0]

    def derivative(self, t):
        s = (np.asarray(t, dtype=float) - self.center) / self.half_width
        dq = _bump_q(s * s)[1]
        return dq * 2.0 * s / self.half_width


def bump_1d(center: float, half_width: float) -> Bump1D:
    return Bump1D(center, half_width)


# -- built-in families ----------------------------------------------------


def _radial(z, radius):
    q = np.sum(z * z, axis=1) / radius**2
    b, db = _bump_q(q)
    return b, (db * 2.0 / radius**2)[:, None] * z


def cutoff_monomial(v, power: int, radius: float) -> CylindricalTestFunction:
    """``x^power * bump(x/radius)`` in one pairing coordinate."""

    def phi(z):
        x = z[:, 0]
        return x**power * _radial(z, radius)[0]

    def grad_phi(z):
        x = z[:, 0]
        b, db = _radial(z, radius)
        dmono = power * x ** (power - 1) if power > 0 else np.zeros_like(x)
        return (dmono * b)[:, None] + (x**power)[:, None] * db

    return CylindricalTestFunction(
        np.atleast_2d(v), phi, grad_phi, radius, f"monomial(p={power},R={radius})"
    )


def cutoff_product(v1, v2, powers: tuple[int, int], radius: float) -> CylindricalTestFunction:
    """``x^p y^q * bump(|(x, y)|/radius)`` in two pairing coordinates."""
    p, q = powers

    def mono(z):
        return z[:, 0] ** p * z[:, 1] ** q

    def phi(z):
        return mono(z) * _radial(z, radius)[0]

    def grad_phi(z):
        x, y = z[:, 0], z[:, 1]
        b, db = _radial(z, radius)
        dx = p * x ** (p - 1) * y**q if p > 0 else np.zeros_like(x)
        dy = q * x**p * y ** (q - 1) if q > 0 else np.zeros_like(y)
        return np.stack([dx, dy], axis=1) * b[:, None] + mono(z)[:, None] * db

    return CylindricalTestFunction(
        np.stack([np.ravel(v1), np.ravel(v2)]), phi, grad_phi, radius,
        f"product(p={p},q={q},R={radius})",
    )


def radial_bump(vs, radius: float) -> CylindricalTestFunction:
    def phi(z):
        return _radial(z, radius)[0]

    def grad_phi(z):
        return _radial(z, radius)[1]

    return CylindricalTestFunction(np.atleast_2d(vs), phi, grad_phi, radius, f"radial(R={radius})")


def tanh_coordinate(v) -> CylindricalTestFunction:
    """Non-compact diagnostic observable with bounded derivative."""
    return CylindricalTestFunction(
        np.atleast_2d(v),
        lambda z: np.tanh(z[:, 0]),
        lambda z: (1.0 - np.tanh(z) ** 2),
        None,
        "tanh",
    )


def constant(v, c: float) -> CylindricalTestFunction:
    return CylindricalTestFunction(
        np.atleast_2d(v),
        lambda z: np.full(z.shape[0], float(c)),
        lambda z: np.zeros_like(z),
        None,
        f"const({c})",
    )
