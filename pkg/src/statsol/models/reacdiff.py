"""Reaction-diffusion ``u_t = a u_xx - f(t, u) + g`` in a sine basis."""

from __future__ import annotations

import numpy as np

from ..cylinder import Pairing
from .base import ModelSpec, guard
from .sine import SineBasis


class PowerReaction:
    """``f(s, v) = coef * |v|^(p-2) v``.

    Satisfies ``eta |v|^p - C1 <= f v`` with ``eta = coef, C1 = 0`` and
    ``|f|^(p/(p-1)) <= C2 (|v|^p + 1)`` with ``C2 = coef^(p/(p-1))``.
    """

    def __init__(self, p: float = 4.0, coef: float = 1.0):
        if p < 2:
            raise ValueError("reaction exponent must be >= 2")
        self.p = float(p)
        self.coef = float(coef)
        self.eta = self.coef
        self.c1 = 0.0
        self.c2 = self.coef ** (self.p / (self.p - 1.0))

    def __call__(self, s, v):
        return self.coef * np.abs(v) ** (self.p - 2.0) * v

    def dissipative_on(self, s, v, slack=1e-12) -> bool:
        v = np.asarray(v, dtype=float)
        lhs = self.eta * np.abs(v) ** self.p - self.c1
        return bool(np.all(lhs <= self(s, v) * v + slack * (1 + np.abs(lhs))))

    def growth_on(self, s, v, slack=1e-12) -> bool:
        v = np.asarray(v, dtype=float)
        lhs = np.abs(self(s, v)) ** (self.p / (self.p - 1.0))
        rhs = self.c2 * (np.abs(v) ** self.p + 1.0)
        return bool(np.all(lhs <= rhs * (1 + slack)))


def mode_forcing(dim: int, mode: int, amplitude: float, omega: float = 0.0):
    """Single-coordinate forcing ``amplitude * cos(omega t)``."""
    e = np.zeros(dim)
    if amplitude != 0.0:
        e[mode] = 1.0

    def g(t):
        return amplitude * np.cos(omega * t) * e

    return g


class ReactionDiffusion(ModelSpec):
    energy_is_equality = True

    def __init__(self, n_modes=8, diffusivity=0.2, reaction=None, length=np.pi,
                 forcing_mode=1, forcing_amplitude=0.0, forcing_omega=0.0):
        self.name = "reacdiff"
        self.basis = SineBasis(n_modes, length)
        self.dim = n_modes
        self.a = float(diffusivity)
        if self.a <= 0:
            raise ValueError("diffusivity must be positive")
        self.reaction = reaction if reaction is not None else PowerReaction()
        self.pairing = Pairing(np.full(n_modes, self.basis.mass))
        self.lap = self.basis.wavenumbers**2
        self.forcing = mode_forcing(n_modes, forcing_mode - 1, forcing_amplitude, forcing_omega)
        self._forcing_spec = (forcing_mode, forcing_amplitude, forcing_omega)

    def mode_scale(self):
        return np.arange(1.0, self.dim + 1)

    def reaction_nodal(self, t, u):
        return self.reaction(t, self.basis.to_nodes(u))

    def rhs(self, t, u):
        u = np.asarray(u, dtype=float)
        guard(u)
        return -self.a * self.lap * u - self.basis.project(self.reaction_nodal(t, u)) + self.forcing(t)

    def linear_operator(self):
        return np.diag(-self.a * self.lap)

    def h_norm2(self, u):
        return self.pairing(u, u)

    def v_norm2(self, u):
        return self.pairing(self.lap * u, u)

    def reaction_pairing(self, t, u):
        """``(f(t, u), u)`` by node quadrature."""
        return self.basis.integrate(self.reaction_nodal(t, u) * self.basis.to_nodes(u))

    def energy_rate(self, t, u):
        u = np.asarray(u, dtype=float)
        return 2.0 * (self.pairing(self.forcing(t), u) - self.a * self.v_norm2(u)
                      - self.reaction_pairing(t, u))

    def params(self):
        m, amp, om = self._forcing_spec
        return {"modes": self.dim, "a": self.a, "p": self.reaction.p, "length": self.basis.length,
                "forcing": {"mode": m, "amplitude": amp, "omega": om}}


def reacdiff_rhs(spec: ReactionDiffusion, t, u):
    return spec.rhs(t, u)
