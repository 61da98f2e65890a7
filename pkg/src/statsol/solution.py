"""Trajectory statistical solutions built from Dirac ensembles of initial data."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .cylinder import Bump1D, CylindricalTestFunction, evaluate, pair_with_grad
from .measure import (DiracEnsemble, Observable, TestDictionary, default_dictionary,
                      discrepancy, discretize, expectation)
from .models.base import ModelSpec, Psi, energy_pair
from .trajectory import (GridError, IntegrationError, TimeGrid, Trajectory, cumulative_trapezoid,
                         energy_residual_curve, integrate_batch, trapezoid)


class ConstructionError(RuntimeError):
    def __init__(self, message: str, atom: int):
        super().__init__(message)
        self.atom = atom


def _wsum(weights: np.ndarray, values: np.ndarray) -> float:
    return math.fsum(weights * values)


@dataclass(frozen=True, eq=False)
class TrajectoryStatSolution:
    """Weighted ensemble of trajectories on a shared grid.

    ``paths`` has shape ``(n_atoms, steps + 1, dim)``.
    """

    model: ModelSpec
    grid: TimeGrid
    paths: np.ndarray
    weights: np.ndarray
    certification: dict = field(default_factory=dict)

    def __post_init__(self):
        self.paths.setflags(write=False)
        if abs(math.fsum(self.weights) - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1")

    def __len__(self):
        return self.paths.shape[0]

    @property
    def trajectories(self) -> list[Trajectory]:
        return [Trajectory(self.grid, p, self.model) for p in self.paths]

    @cached_property
    def rhs_paths(self) -> np.ndarray:
        """``F(t, u_j(t))`` at every node, same shape as ``paths``."""
        out = np.empty_like(self.paths)
        for i, t in enumerate(self.grid.times):
            out[:, i] = self.model.rhs(t, self.paths[:, i])
        return out

    def node(self, t: float) -> int:
        return self.grid.index(t)


def _certify(model: ModelSpec, paths: np.ndarray, rhs: np.ndarray, grid: TimeGrid) -> dict:
    # weak residual against every coordinate direction over [t0, t_k]
    dt = grid.dt
    weighted = rhs * model.pairing.weights
    incr = (paths - paths[:, :1]) * model.pairing.weights
    integ = np.moveaxis(cumulative_trapezoid(np.moveaxis(weighted, 1, 0), dt), 0, 1)
    weak = np.max(np.abs(incr - integ), axis=(1, 2))
    alpha, beta = energy_pair(model, _IDENTITY)
    a = np.stack([alpha(t, paths[:, i]) for i, t in enumerate(grid.times)], axis=1)
    b = np.stack([beta(t, paths[:, i]) for i, t in enumerate(grid.times)], axis=1)
    res = a - a[:, :1] + np.moveaxis(cumulative_trapezoid(b.T, dt), 0, 1)
    return {"weak_residual": weak.tolist(), "energy_margin": np.max(res, axis=1).tolist()}


_IDENTITY = Psi("identity", lambda x: np.asarray(x, dtype=float),
                lambda x: np.ones_like(np.asarray(x, dtype=float)))


def solve_ivp(model: ModelSpec, mu0: DiracEnsemble, grid: TimeGrid, scheme: str = "rk4",
              certify: bool = True) -> TrajectoryStatSolution:
    """Lift every atom of ``mu0`` to a trajectory; weights are kept."""
    if mu0.dim != model.dim:
        raise ValueError(f"ensemble dimension {mu0.dim} != model dimension {model.dim}")
    try:
        paths = integrate_batch(model, mu0.atoms, grid, scheme)
    except IntegrationError as exc:
        # locate the failing atom by integrating one at a time
        for j, atom in enumerate(mu0.atoms):
            try:
                integrate_batch(model, atom[None, :], grid, scheme)
            except IntegrationError as inner:
                raise ConstructionError(f"atom {j}: {inner}", j) from inner
        raise ConstructionError(str(exc), -1) from exc
    paths[:, 0] = mu0.atoms
    rho = TrajectoryStatSolution(model, grid, paths, np.array(mu0.weights))
    if certify:
        rho.certification.update(_certify(model, paths, rho.rhs_paths, grid))
    return rho


def project(rho: TrajectoryStatSolution, t: float) -> DiracEnsemble:
    i = rho.node(t)
    return DiracEnsemble(rho.paths[:, i], rho.weights)


def _node_expectations(rho: TrajectoryStatSolution, values: np.ndarray) -> np.ndarray:
    """Ensemble means per node of ``values`` shaped ``(n_atoms, nodes)``."""
    return np.array([_wsum(rho.weights, values[:, i]) for i in range(values.shape[1])])


def liouville_residual(rho: TrajectoryStatSolution, Phi: CylindricalTestFunction,
                       t1: float, t2: float) -> float:
    """Defect of the mean equation for ``Phi`` between two nodes."""
    i1, i2 = rho.node(t1), rho.node(t2)
    if i1 > i2:
        raise GridError("t1 must not exceed t2")
    if i1 == i2:
        return 0.0
    return float(abs(liouville_curve(rho, Phi, i1, i2)[-1]))


def liouville_curve(rho: TrajectoryStatSolution, Phi: CylindricalTestFunction,
                    i1: int = 0, i2: int | None = None) -> np.ndarray:
    """Signed mean-equation defect over ``[t_i1, t_k]`` for ``k = i1..i2``."""
    i2 = rho.grid.steps if i2 is None else i2
    pairing = rho.model.pairing
    sl = slice(i1, i2 + 1)
    paths, rhs = rho.paths[:, sl], rho.rhs_paths[:, sl]
    phi_vals = evaluate(Phi, paths, pairing)
    drift = pair_with_grad(rhs, Phi, paths, pairing)
    means = _node_expectations(rho, np.atleast_2d(phi_vals))
    drift_means = _node_expectations(rho, np.atleast_2d(drift))
    return means - means[0] - cumulative_trapezoid(drift_means, rho.grid.dt)


def statistic_curve(rho: TrajectoryStatSolution, phi: Observable) -> tuple[np.ndarray, float]:
    """Node values of ``t -> int phi d rho_t`` and its discrete modulus of continuity."""
    curve = np.array([expectation(DiracEnsemble(rho.paths[:, i], rho.weights), phi)
                      for i in range(rho.grid.steps + 1)])
    return curve, float(np.max(np.abs(np.diff(curve))))


def mean_energy_check(rho: TrajectoryStatSolution, psi: Psi, bump: Bump1D) -> float:
    """``-int phi' <alpha> ds + int phi <beta> ds``; <= 0 for inequality models."""
    lo, hi = bump.support
    times = rho.grid.times
    if lo < times[0] - 1e-12 or hi > times[-1] + 1e-12:
        raise GridError("bump support exceeds the time grid")
    alpha, beta = energy_pair(rho.model, psi)
    a = np.stack([alpha(t, rho.paths[:, i]) for i, t in enumerate(times)], axis=1)
    b = np.stack([beta(t, rho.paths[:, i]) for i, t in enumerate(times)], axis=1)
    ma, mb = _node_expectations(rho, a), _node_expectations(rho, b)
    dt = rho.grid.dt
    return float(-trapezoid(bump.derivative(times) * ma, dt) + trapezoid(bump(times) * mb, dt))


def psi_energy_mean(rho: TrajectoryStatSolution, psi: Psi, i: int) -> float:
    return _wsum(rho.weights, psi.f(rho.model.energy(rho.paths[:, i])))


def initial_limit_check(rho: TrajectoryStatSolution, psi: Psi,
                        mu0: DiracEnsemble | None = None) -> float:
    """``|int psi(energy) d rho_{t0+dt} - int psi(energy) d mu0|``."""
    if mu0 is None:
        base = psi_energy_mean(rho, psi, 0)
    else:
        base = math.fsum(mu0.weights * psi.f(rho.model.energy(mu0.atoms)))
    return abs(psi_energy_mean(rho, psi, 1) - base)


def initial_condition_check(rho: TrajectoryStatSolution, mu0: DiracEnsemble,
                            dictionary: TestDictionary | None = None) -> float:
    d = default_dictionary(mu0.dim) if dictionary is None else dictionary
    return discrepancy(project(rho, rho.grid.t0), mu0, d)


def z_carrier_fraction(rho: TrajectoryStatSolution) -> float:
    flags = [rho.model.z_member(u) for p in rho.paths for u in p]
    return sum(flags) / len(flags)


def energy_residuals(rho: TrajectoryStatSolution, psi: Psi) -> np.ndarray:
    """Per-trajectory energy residual over ``[t0, t_k]``, shape ``(n_atoms, nodes)``."""
    return np.stack([energy_residual_curve(rho.model, tr, psi) for tr in rho.trajectories])


# -- studies --------------------------------------------------------------


def fit_order(dts, values) -> float | None:
    """Least-squares slope of ``log2 value`` against ``log2 dt``.

    ``None`` when any value is zero or fewer than two are given.
    """
    v = np.abs(np.asarray(values, dtype=float))
    if len(v) < 2 or np.any(v == 0) or not np.all(np.isfinite(v)):
        return None
    x = np.log2(np.asarray(dts, dtype=float))
    return float(np.polyfit(x, np.log2(v), 1)[0])


def successive_orders(values) -> list[float | None]:
    v = np.abs(np.asarray(values, dtype=float))
    return [None if a == 0 or b == 0 else float(np.log2(a / b)) for a, b in zip(v[:-1], v[1:])]


def refinement_study(model: ModelSpec, sampler, ns, grid: TimeGrid, t: float,
                     dictionary: TestDictionary, seed: int, replicates: int = 8,
                     scheme: str = "rk4", factor: int = 4) -> dict:
    """Discrepancy between ``n``- and ``factor*n``-atom statistics at time ``t``.

    Each ``(n, replicate)`` pair uses independent streams spawned from
    ``seed``; the discrepancy is averaged over replicates before fitting the
    log-log slope against ``n``.
    """
    seqs = np.random.SeedSequence(seed).spawn(len(ns) * replicates * 2)
    seeds = [int(s.generate_state(1)[0]) for s in seqs]
    means = []
    for a, n in enumerate(ns):
        acc = []
        for r in range(replicates):
            base = 2 * (a * replicates + r)
            mu_n = discretize(sampler, n, seeds[base])
            mu_m = discretize(sampler, factor * n, seeds[base + 1])
            pn = project(solve_ivp(model, mu_n, grid, scheme, certify=False), t)
            pm = project(solve_ivp(model, mu_m, grid, scheme, certify=False), t)
            acc.append(discrepancy(pn, pm, dictionary))
        means.append(float(np.mean(acc)))
    slope = float(np.polyfit(np.log(ns), np.log(means), 1)[0])
    return {"ns": list(ns), "discrepancy": means, "slope": slope}
