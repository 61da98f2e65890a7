"""Nonlinear wave ``u_tt - u_xx + |u|^r u = f`` as a first-order system.

State layout is ``U = (u, v)`` with ``v = u_t``, both as sine coefficients.
Dual vectors use the same ordering, so ``<h, U> = (h_u, u) + (h_v, v)``.
"""

from __future__ import annotations

import numpy as np

from ..cylinder import Pairing
from .base import ModelSpec, guard
from .reacdiff import mode_forcing
from .sine import SineBasis


class NonlinearWave(ModelSpec):
    energy_is_equality = False

    def __init__(self, n_modes=8, r=2.0, length=np.pi, forcing_mode=1,
                 forcing_amplitude=0.0, forcing_omega=0.0):
        if r <= 0:
            raise ValueError("r must be positive")
        self.name = "wave"
        self.n = n_modes
        self.dim = 2 * n_modes
        self.r = float(r)
        self.p = self.r + 2.0
        self.basis = SineBasis(n_modes, length)
        self.pairing = Pairing(np.full(self.dim, self.basis.mass))
        self.lap = self.basis.wavenumbers**2
        self.forcing = mode_forcing(n_modes, forcing_mode - 1, forcing_amplitude, forcing_omega)
        self._forcing_spec = (forcing_mode, forcing_amplitude, forcing_omega)

    def split(self, U):
        U = np.asarray(U, dtype=float)
        return U[..., : self.n], U[..., self.n:]

    def mode_scale(self):
        n = np.arange(1.0, self.n + 1)
        return np.concatenate([n, n])

    def nonlinear_nodal(self, u):
        x = self.basis.to_nodes(u)
        return np.abs(x) ** self.r * x

    def rhs(self, t, U):
        guard(U)
        u, v = self.split(U)
        dv = -self.lap * u - self.basis.project(self.nonlinear_nodal(u)) + self.forcing(t)
        return np.concatenate([v, dv], axis=-1)

    def linear_operator(self):
        n = self.n
        L = np.zeros((self.dim, self.dim))
        L[:n, n:] = np.eye(n)
        L[n:, :n] = -np.diag(self.lap)
        return L

    def energy(self, U):
        """``E = |u|_{H1}^2/2 + |u|_{Lp}^p/p + |v|^2/2``."""
        u, v = self.split(U)
        m = self.basis.mass
        grad2 = m * np.sum(self.lap * u * u, axis=-1)
        lp = self.basis.integrate(np.abs(self.basis.to_nodes(u)) ** self.p)
        return 0.5 * grad2 + lp / self.p + 0.5 * m * np.sum(v * v, axis=-1)

    def energy_rate(self, t, U):
        """``<G, U>`` with ``G = (f, 0)`` acting on the velocity."""
        _, v = self.split(U)
        return self.basis.mass * np.sum(self.forcing(t) * v, axis=-1)

    def params(self):
        m, amp, om = self._forcing_spec
        return {"modes": self.n, "r": self.r, "length": self.basis.length,
                "forcing": {"mode": m, "amplitude": amp, "omega": om}}


def wave_rhs(spec: NonlinearWave, t, U):
    return spec.rhs(t, U)
