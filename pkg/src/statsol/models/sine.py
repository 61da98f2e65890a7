"""Sine-series collocation on (0, L) with homogeneous Dirichlet ends."""

from __future__ import annotations

import numpy as np
from scipy.fft import dst


class SineBasis:
    """Modes ``sin(n pi x / L)``, ``n = 1..N``, with ``M`` interior nodes.

    Nonlinear terms are evaluated on the nodes and projected back. With the
    default ``M = 2N + 1`` the node quadrature integrates products of up to
    four retained modes exactly.
    """

    def __init__(self, n_modes: int, length: float = np.pi, n_nodes: int | None = None):
        if n_modes < 1:
            raise ValueError("need at least one mode")
        self.n = n_modes
        self.length = float(length)
        self.m = 2 * n_modes + 1 if n_nodes is None else n_nodes
        if self.m < n_modes:
            raise ValueError("fewer nodes than modes")
        self.wavenumbers = np.arange(1, n_modes + 1) * np.pi / self.length
        self.nodes = np.arange(1, self.m + 1) * self.length / (self.m + 1)
        # |u|_{L2}^2 = (L/2) sum c_n^2
        self.mass = self.length / 2.0

    def to_nodes(self, c: np.ndarray) -> np.ndarray:
        c = np.asarray(c, dtype=float)
        pad = np.zeros(c.shape[:-1] + (self.m,))
        pad[..., : self.n] = c
        return dst(pad, type=1, axis=-1) / 2.0

    def project(self, values: np.ndarray) -> np.ndarray:
        """L2 projection of nodal values onto the retained modes."""
        return dst(np.asarray(values, dtype=float), type=1, axis=-1)[..., : self.n] / (self.m + 1)

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Node quadrature of a function vanishing at both ends."""
        return np.sum(values, axis=-1) * self.length / (self.m + 1)
