"""Periodic divergence-free Fourier-Galerkin Navier-Stokes.

Velocity ``u(x) = sum_k uhat_k exp(i k'.x)`` over a finite set of nonzero
integer wavevectors closed under negation, ``k' = 2 pi k / L``. Each mode
carries ``D - 1`` complex amplitudes along a fixed real orthonormal basis of
the plane orthogonal to ``k'`` (the same basis for ``k`` and ``-k``), so
reality is simply ``a_{-k} = conj(a_k)``.

Real state layout: real parts of the half-set amplitudes followed by their
imaginary parts. Norms omit the domain-volume factor:
``|u|^2 = sum_k |uhat_k|^2`` and ``||u||^2 = sum_k |k'|^2 |uhat_k|^2``.
"""

from __future__ import annotations

import itertools

import numpy as np

from ..cylinder import Pairing
from .base import ModelSpec, ValidationError, guard


def modes_in_ball(kmax: float, ndim: int = 2) -> list[tuple[int, ...]]:
    r = int(np.floor(kmax))
    out = []
    for k in itertools.product(range(-r, r + 1), repeat=ndim):
        if any(k) and sum(c * c for c in k) <= kmax**2 + 1e-12:
            out.append(k)
    return out


def _is_positive(k) -> bool:
    for c in k:
        if c != 0:
            return c > 0
    return False


def _polarizations(kp: np.ndarray) -> np.ndarray:
    n = kp / np.linalg.norm(kp)
    if kp.shape[0] == 2:
        return np.array([[-n[1], n[0]]])
    trial = np.eye(3)[np.argmin(np.abs(n))]
    e1 = np.cross(n, trial)
    e1 /= np.linalg.norm(e1)
    return np.array([e1, np.cross(n, e1)])


class NavierStokesGalerkin(ModelSpec):
    energy_is_equality = False

    def __init__(self, modes=None, viscosity=0.1, lengths=None, kmax=2.0, ndim=2,
                 forcing_mode=None, forcing_amplitude=0.0, forcing_omega=0.0):
        if viscosity <= 0:
            raise ValueError("viscosity must be positive")
        if modes is None:
            modes = modes_in_ball(kmax, ndim)
        modes = [tuple(int(c) for c in k) for k in modes]
        ndim = len(modes[0])
        if ndim not in (2, 3):
            raise ValidationError("only 2D and 3D are supported")
        mset = set(modes)
        if (0,) * ndim in mset:
            raise ValidationError("zero mode excluded (zero average)")
        if any(tuple(-c for c in k) not in mset for k in modes):
            raise ValidationError("mode set must be closed under negation")
        self.name = "nse"
        self.ndim = ndim
        self.nu = float(viscosity)
        self.lengths = np.full(ndim, 2 * np.pi) if lengths is None else np.asarray(lengths, float)
        half = sorted(k for k in mset if _is_positive(k))
        self.half = half
        self.full = half + [tuple(-c for c in k) for k in half]
        self.index = {k: i for i, k in enumerate(self.full)}
        nh = len(half)
        self.npol = ndim - 1
        self.m = nh * self.npol
        self.dim = 2 * self.m

        self.kprime = 2 * np.pi * np.asarray(self.full, float) / self.lengths  # (Mf, D)
        self.kp2 = np.sum(self.kprime**2, axis=1)
        pol_half = np.array([_polarizations(self.kprime[i]) for i in range(nh)])
        self.pol = np.concatenate([pol_half, pol_half])  # (Mf, P, D)

        # triads p + q = k with k in the half set
        P, Q, K = [], [], []
        for ik, k in enumerate(half):
            for ip, p in enumerate(self.full):
                q = tuple(a - b for a, b in zip(k, p))
                if q in self.index:
                    P.append(ip)
                    Q.append(self.index[q])
                    K.append(ik)
        self.tP, self.tQ = np.array(P, int), np.array(Q, int)
        self.incidence = np.zeros((nh, len(P)))
        self.incidence[K, np.arange(len(P))] = 1.0

        kp2_state = np.repeat(self.kp2[:nh], self.npol)
        self.kp2_state = np.concatenate([kp2_state, kp2_state])
        self.pairing = Pairing(np.full(self.dim, 2.0))
        self.lambda1 = float(self.kp2.min())

        self.forcing_spec = (forcing_mode, float(forcing_amplitude), float(forcing_omega))
        self._fvec = np.zeros(self.dim)
        if forcing_mode is not None and forcing_amplitude != 0.0:
            k = tuple(int(c) for c in forcing_mode)
            if k not in self.index or self.index[k] >= nh:
                raise ValidationError(f"forcing mode {k} not in the positive half of the mode set")
            self._fvec[self.index[k] * self.npol] = 1.0

    # -- representation ---------------------------------------------------

    def amplitudes(self, u) -> np.ndarray:
        """Complex amplitudes on the full mode set, shape ``(..., Mf, P)``."""
        u = np.asarray(u, dtype=float)
        a = (u[..., : self.m] + 1j * u[..., self.m:]).reshape(u.shape[:-1] + (-1, self.npol))
        return np.concatenate([a, np.conj(a)], axis=-2)

    def velocity_hat(self, u) -> np.ndarray:
        """Fourier velocity vectors, shape ``(..., Mf, D)``."""
        return np.einsum("...mp,mpd->...md", self.amplitudes(u), self.pol)

    def from_half_amplitudes(self, b) -> np.ndarray:
        b = b.reshape(b.shape[:-2] + (-1,))
        return np.concatenate([b.real, b.imag], axis=-1)

    # -- operators --------------------------------------------------------

    def B(self, u, v) -> np.ndarray:
        """Galerkin projection of ``(u . grad) v`` onto the retained modes."""
        uh = self.velocity_hat(u)
        vh = self.velocity_hat(v)
        adv = np.sum(uh[..., self.tP, :] * (1j * self.kprime[self.tQ]), axis=-1)
        contrib = adv[..., None] * vh[..., self.tQ, :]
        vec = np.einsum("kt,...td->...kd", self.incidence, contrib)
        nh = len(self.half)
        b = np.einsum("kpd,...kd->...kp", self.pol[:nh], vec)
        return self.from_half_amplitudes(b)

    def A(self, u):
        return self.kp2_state * np.asarray(u, dtype=float)

    def forcing(self, t):
        _, amp, om = self.forcing_spec
        return amp * np.cos(om * t) * self._fvec

    def rhs(self, t, u):
        u = np.asarray(u, dtype=float)
        guard(u)
        return self.forcing(t) - self.nu * self.A(u) - self.B(u, u)

    def linear_operator(self):
        return np.diag(-self.nu * self.kp2_state)

    def mode_scale(self):
        return np.sqrt(self.kp2_state)

    # -- norms ------------------------------------------------------------

    def h_norm2(self, u):
        return self.pairing(u, u)

    def v_norm2(self, u):
        return self.pairing(self.A(u), u)

    def vdual_norm2(self, w):
        return self.pairing(np.asarray(w) / self.kp2_state, w)

    def energy_rate(self, t, u):
        u = np.asarray(u, dtype=float)
        return 2.0 * (self.pairing(self.forcing(t), u) - self.nu * self.v_norm2(u))

    def params(self):
        m, amp, om = self.forcing_spec
        return {"ndim": self.ndim, "modes": len(self.full), "nu": self.nu,
                "lengths": self.lengths.tolist(),
                "forcing": {"mode": None if m is None else list(m), "amplitude": amp, "omega": om}}


def nse_rhs(spec: NavierStokesGalerkin, t, u):
    return spec.rhs(t, u)


def nse_b_estimate_ratio(spec: NavierStokesGalerkin, u, v) -> float:
    """``||B(u,v)||_{V'} / (|u|^(1/4) ||u||^(3/4) |v|^(1/4) ||v||^(3/4))``."""
    hu, hv = float(spec.h_norm2(u)), float(spec.h_norm2(v))
    if hu == 0.0 or hv == 0.0:
        raise ValidationError("zero input")
    vu, vv = float(spec.v_norm2(u)), float(spec.v_norm2(v))
    num = np.sqrt(float(spec.vdual_norm2(spec.B(u, v))))
    den = (hu * hv) ** 0.125 * (vu * vv) ** 0.375
    return float(num / den)
