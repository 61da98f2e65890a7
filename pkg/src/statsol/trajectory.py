"""Time integration of single solutions and per-trajectory verifiers."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import expm

from .models.base import ModelSpec, OverflowGuardError, Psi, energy_pair
from .models.nse import NavierStokesGalerkin

SCHEMES = ("rk4", "imex")


class IntegrationError(RuntimeError):
    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class TimeGrid:
    t0: float
    dt: float
    steps: int

    def __post_init__(self):
        if not (self.dt > 0 and np.isfinite(self.dt)):
            raise GridError("dt must be positive")
        if int(self.steps) != self.steps or self.steps < 1:
            raise GridError("steps must be a positive integer")

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.steps + 1)

    @property
    def t_end(self) -> float:
        return self.t0 + self.dt * self.steps

    def index(self, t: float) -> int:
        """Node index of time ``t``; off-grid times are rejected."""
        x = (t - self.t0) / self.dt
        i = int(round(x))
        if abs(x - i) > 1e-9 or not 0 <= i <= self.steps:
            raise GridError(f"t={t} is not a grid node")
        return i

    def refined(self, level: int = 1) -> "TimeGrid":
        """Same interval with ``dt / 2**level``."""
        f = 2**level
        return TimeGrid(self.t0, self.dt / f, self.steps * f)


def trapezoid(values: np.ndarray, dt: float, axis: int = 0) -> np.ndarray:
    return np.trapezoid(values, dx=dt, axis=axis)


def cumulative_trapezoid(values: np.ndarray, dt: float) -> np.ndarray:
    """Running trapezoid integral along axis 0, starting at 0."""
    v = np.asarray(values, dtype=float)
    inc = 0.5 * dt * (v[1:] + v[:-1])
    return np.concatenate([np.zeros((1,) + v.shape[1:]), np.cumsum(inc, axis=0)])


# -- integrators ----------------------------------------------------------


def _rk4_step(f, t, u, dt):
    k1 = f(t, u)
    k2 = f(t + dt / 2, u + dt / 2 * k1)
    k3 = f(t + dt / 2, u + dt / 2 * k2)
    k4 = f(t + dt, u + dt * k3)
    return u + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _imex_stepper(model: ModelSpec, dt: float) -> Callable:
    """Integrating-factor Heun: linear part exact, remainder explicit, order 2."""
    L = model.linear_operator()
    E = expm(L * dt)

    def nonlinear(t, u):
        return model.rhs(t, u) - u @ L.T

    def step(t, u):
        k1 = nonlinear(t, u)
        ustar = (u + dt * k1) @ E.T
        k2 = nonlinear(t + dt, ustar)
        return u @ E.T + dt / 2 * ((k1 @ E.T) + k2)

    return step


def integrate_batch(model: ModelSpec, u0: np.ndarray, grid: TimeGrid, scheme: str = "rk4") -> np.ndarray:
    """Integrate a batch of initial states, shape ``(n, dim)`` -> ``(n, steps+1, dim)``.

    Rows are independent; the batch is only a vectorization.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    u0 = np.asarray(u0, dtype=float)
    if u0.ndim == 1:
        u0 = u0[None, :]
    if not np.all(np.isfinite(u0)):
        raise IntegrationError("non-finite initial state", 0)
    out = np.empty((u0.shape[0], grid.steps + 1, u0.shape[1]))
    out[:, 0] = u0
    if scheme == "imex":
        step = _imex_stepper(model, grid.dt)
    else:
        def step(t, u):
            return _rk4_step(model.rhs, t, u, grid.dt)
    u = u0.copy()
    times = grid.times
    for i in range(grid.steps):
        try:
            u = step(times[i], u)
        except OverflowGuardError as exc:
            raise IntegrationError(f"overflow guard at step {i}: {exc}", i) from exc
        if not np.all(np.isfinite(u)):
            raise IntegrationError(f"non-finite state at step {i + 1}", i + 1)
        out[:, i + 1] = u
    return out


@dataclass(frozen=True, eq=False)
class Trajectory:
    grid: TimeGrid
    states: np.ndarray
    model: ModelSpec

    def at(self, t: float) -> np.ndarray:
        return self.states[self.grid.index(t)]

    def rhs_values(self) -> np.ndarray:
        return np.stack([self.model.rhs(t, u) for t, u in zip(self.grid.times, self.states)])

    def to_csv(self, path) -> None:
        write_csv(path, self.grid.times, self.states)


def write_csv(path, times, rows) -> None:
    rows = np.asarray(rows)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"u_{i}" for i in range(rows.shape[1])])
        for t, row in zip(times, rows):
            w.writerow([f"{t:.17g}"] + [f"{x:.17g}" for x in row])


def integrate(model: ModelSpec, u0, grid: TimeGrid, scheme: str = "rk4") -> Trajectory:
    u0 = np.asarray(u0, dtype=float).ravel()
    states = integrate_batch(model, u0[None, :], grid, scheme)[0]
    states[0] = u0
    states.setflags(write=False)
    return Trajectory(grid, states, model)


# -- verifiers ------------------------------------------------------------


def _span(traj: Trajectory, t1: float, t2: float) -> tuple[int, int]:
    i1, i2 = traj.grid.index(t1), traj.grid.index(t2)
    if i1 > i2:
        raise GridError("t1 must not exceed t2")
    return i1, i2


def weak_residual(model: ModelSpec, traj: Trajectory, v, t1: float, t2: float) -> float:
    """``|<u(t2) - u(t1), v> - int_t1^t2 <F(s, u(s)), v> ds|`` (trapezoid)."""
    i1, i2 = _span(traj, t1, t2)
    if i1 == i2:
        return 0.0
    times = traj.grid.times[i1 : i2 + 1]
    states = traj.states[i1 : i2 + 1]
    F = np.stack([model.rhs(t, u) for t, u in zip(times, states)])
    lhs = model.pairing(states[-1] - states[0], v)
    return float(abs(lhs - trapezoid(model.pairing(F, v), traj.grid.dt)))


def alpha_beta_series(model: ModelSpec, states: np.ndarray, times: np.ndarray, psi: Psi):
    """``alpha`` and ``beta`` along node states (leading axis = time)."""
    alpha, beta = energy_pair(model, psi)
    a = np.stack([alpha(t, u) for t, u in zip(times, states)])
    b = np.stack([beta(t, u) for t, u in zip(times, states)])
    return a, b


def energy_residual(model: ModelSpec, traj: Trajectory, psi: Psi, t1: float, t2: float) -> float:
    """Signed ``alpha(t2) - alpha(t1) + int beta``; should be <= 0 (or ~0 for equalities)."""
    i1, i2 = _span(traj, t1, t2)
    if i1 == i2:
        return 0.0
    times = traj.grid.times[i1 : i2 + 1]
    a, b = alpha_beta_series(model, traj.states[i1 : i2 + 1], times, psi)
    return float(a[-1] - a[0] + trapezoid(b, traj.grid.dt))


def energy_residual_curve(model: ModelSpec, traj: Trajectory, psi: Psi) -> np.ndarray:
    """Energy residual over ``[t0, t_k]`` for every node ``k``."""
    a, b = alpha_beta_series(model, traj.states, traj.grid.times, psi)
    return a - a[0] + cumulative_trapezoid(b, traj.grid.dt)


def apriori_margin_curve(model: NavierStokesGalerkin, states: np.ndarray, grid: TimeGrid) -> np.ndarray:
    """Slack of the classical energy estimates from ``t0`` to every node.

    ``|u(t)|^2 <= |u0|^2 + ||f||^2/nu`` and
    ``int ||u||^2 <= |u0|^2/nu + ||f||^2/nu^2``, with ``||f||^2`` the squared
    ``L2(t0, t; V')`` norm of the forcing. ``states`` has time on axis 0;
    the minimum of the two slacks is returned per node.
    """
    dt, nu = grid.dt, model.nu
    times = grid.times[: states.shape[0]]
    f2 = cumulative_trapezoid(np.array([model.vdual_norm2(model.forcing(s)) for s in times]), dt)
    h = model.h_norm2(states)
    dissip = cumulative_trapezoid(model.v_norm2(states), dt)
    if states.ndim == 3:
        f2 = f2[:, None]
    m1 = h[0] + f2 / nu - h
    m2 = h[0] / nu + f2 / nu**2 - dissip
    return np.minimum(m1, m2)


def apriori_bound_check(model: NavierStokesGalerkin, traj: Trajectory, t: float) -> float:
    """Smallest slack of the two classical energy estimates at time ``t``."""
    i = traj.grid.index(t)
    return float(apriori_margin_curve(model, traj.states[: i + 1], traj.grid)[-1])


def continuity_margin(traj: Trajectory, safety: float = 10.0) -> float:
    """Min over steps of ``safety * dt * max|F| - |u_{i+1} - u_i|`` (>= 0 expected)."""
    F = np.linalg.norm(traj.rhs_values(), axis=1)
    bound = safety * traj.grid.dt * np.maximum(F[1:], F[:-1])
    jumps = np.linalg.norm(np.diff(traj.states, axis=0), axis=1)
    return float(np.min(bound - jumps))
