"""Common model interface and energy functionals."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..cylinder import Pairing

OVERFLOW_NORM = 1e8


class OverflowGuardError(FloatingPointError):
    """State left the admissible norm ball."""


class ValidationError(ValueError):
    pass


def guard(u: np.ndarray) -> None:
    norms = np.linalg.norm(np.atleast_2d(u), axis=-1)
    if not np.all(np.isfinite(norms)) or np.any(norms > OVERFLOW_NORM):
        raise OverflowGuardError(f"state norm {np.max(norms):.3e} exceeds {OVERFLOW_NORM:g}")


class ModelSpec:
    """Finite-dimensional evolution model ``u' = F(t, u)``.

    Subclasses provide :meth:`rhs`, :attr:`pairing`, a linear part for the
    integrating-factor scheme, and the energy bookkeeping used by the
    (in)equality verifiers: ``energy(u)`` is the quantity fed to ``psi`` and
    ``energy_rate(t, u)`` its time derivative along exact flows (an upper
    bound for inequality-type models).
    """

    name: str = "model"
    dim: int
    pairing: Pairing
    energy_is_equality: bool = True

    @property
    def pairing_dim(self) -> int:
        return self.pairing.dim

    def rhs(self, t: float, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def linear_operator(self) -> np.ndarray:
        """Matrix ``L`` of the stiff linear part; ``rhs - L u`` is explicit."""
        return np.zeros((self.dim, self.dim))

    def energy(self, u: np.ndarray) -> np.ndarray:
        return self.pairing(u, u)

    def energy_rate(self, t: float, u: np.ndarray) -> np.ndarray:
        return 2.0 * self.pairing(self.rhs(t, u), u)

    def mode_scale(self) -> np.ndarray:
        """Per-coordinate wavenumber magnitude, used to shape random initial data."""
        return np.ones(self.dim)

    def z_member(self, u) -> bool:
        return bool(np.all(np.isfinite(np.asarray(u, dtype=float))))

    def params(self) -> dict:
        return {}


@dataclass(frozen=True)
class Psi:
    """Nonnegative, nondecreasing C^1 weight with bounded derivative."""

    name: str
    f: Callable[[np.ndarray], np.ndarray]
    df: Callable[[np.ndarray], np.ndarray]

    def __call__(self, x):
        return self.f(x)


PSI = {
    "identity": Psi("identity", lambda x: np.asarray(x, dtype=float), lambda x: np.ones_like(np.asarray(x, dtype=float))),
    "tanh": Psi("tanh", np.tanh, lambda x: 1.0 - np.tanh(x) ** 2),
    "rational": Psi("rational", lambda x: x / (1.0 + x), lambda x: 1.0 / (1.0 + x) ** 2),
}


def get_psi(name: str) -> Psi:
    try:
        return PSI[name]
    except KeyError:
        raise ValidationError(f"unknown psi {name!r}; choose from {sorted(PSI)}") from None


def validate_psi(psi: Psi, upper: float = 100.0, n: int = 2001) -> None:
    x = np.linspace(0.0, upper, n)
    fx, dfx = np.asarray(psi.f(x)), np.asarray(psi.df(x))
    if np.any(fx < 0):
        raise ValidationError(f"psi {psi.name} takes negative values")
    if np.any(dfx < 0) or np.any(np.diff(fx) < -1e-14):
        raise ValidationError(f"psi {psi.name} is not nondecreasing")


def energy_pair(model: ModelSpec, psi: Psi):
    """Return ``(alpha, beta)`` with ``d/dt alpha + beta <= 0`` on solutions."""
    validate_psi(psi)

    def alpha(t, u):
        return psi.f(model.energy(u))

    def beta(t, u):
        return -psi.df(model.energy(u)) * model.energy_rate(t, u)

    return alpha, beta


def z_membership(model: ModelSpec, u) -> bool:
    return model.z_member(u)
