"""Verification checks run by the experiment driver.

Every check returns a list of report records with the keys
``check, model, params, value, tolerance, order_estimate, pass, seed``.
Checks that compare against a refined run use the tolerance rule
``10 * |value(dt) - value(dt/2)|``.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig
from .cylinder import bump_1d, evaluate
from .measure import DiracEnsemble, EvaluationError, default_dictionary
from .models import ModelSpec, OverflowGuardError, ValidationError, get_psi, nse_b_estimate_ratio
from .solution import (ConstructionError, TrajectoryStatSolution, energy_residuals, fit_order,
                       initial_condition_check, initial_limit_check, liouville_curve,
                       mean_energy_check, project, refinement_study, solve_ivp, statistic_curve,
                       successive_orders, z_carrier_fraction)
from .trajectory import (IntegrationError, TimeGrid, apriori_margin_curve, continuity_margin,
                         write_csv)

NUMERICAL_ERRORS = (IntegrationError, ConstructionError, OverflowGuardError, EvaluationError,
                    FloatingPointError)


@dataclass
class Context:
    config: ExperimentConfig
    model: ModelSpec
    mu0: DiracEnsemble
    dictionary: list
    halvings_override: int | None = None
    _cache: dict = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def grid(self) -> TimeGrid:
        return self.config.grid

    def solution(self, level: int = 0) -> TrajectoryStatSolution:
        with self._lock:
            if level not in self._cache:
                try:
                    self._cache[level] = solve_ivp(self.model, self.mu0, self.grid.refined(level),
                                                   self.config.scheme)
                except NUMERICAL_ERRORS as exc:
                    self._cache[level] = exc
            hit = self._cache[level]
        if isinstance(hit, Exception):
            raise hit
        return hit

    def halvings(self, params: dict, default: int = 1) -> int:
        if self.halvings_override is not None:
            return self.halvings_override
        return int(params.get("halvings", default))


def record(ctx: Context, check: str, params: dict, value, tolerance, order, passed: bool) -> dict:
    return {
        "check": check,
        "model": ctx.model.name,
        "params": params,
        "value": _num(value),
        "tolerance": _num(tolerance),
        "order_estimate": _num(order),
        "pass": bool(passed),
        "seed": ctx.config.seed,
    }


def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _base_params(ctx: Context, params: dict) -> dict:
    return {**params, "dt": ctx.grid.dt, "scheme": ctx.config.scheme}


def _refinement(ctx: Context, check: str, params: dict, value_fn, kind: str = "abs",
                default_halvings: int = 1) -> dict:
    """Evaluate ``value_fn`` on ``dt, dt/2, ...`` and judge the base value.

    ``kind="abs"``: the value is a defect that must vanish with ``dt``;
    ``kind="upper"``: a signed quantity that must not exceed the tolerance.
    """
    h = max(1, ctx.halvings(params, default_halvings))
    values, dts = [], []
    for level in range(h + 1):
        rho = ctx.solution(level)
        values.append(float(value_fn(rho)))
        dts.append(rho.grid.dt)
    v0 = values[0]
    tol = 10.0 * abs(values[0] - values[1])
    order = fit_order(dts, values)
    if kind == "abs":
        if all(v == 0.0 for v in values):
            passed = True
        else:
            passed = abs(v0) <= tol
            min_order = params.get("min_order")
            if min_order is not None:
                passed = passed and order is not None and order >= min_order
    else:
        passed = v0 <= tol
    p = _base_params(ctx, params)
    p.update(values=values, dts=dts, successive_orders=successive_orders(values))
    return record(ctx, check, p, v0, tol, order, passed)


def _span(ctx: Context, params: dict, rho: TrajectoryStatSolution) -> tuple[int, int]:
    g = rho.grid
    t1 = params.get("t1", g.t0)
    t2 = params.get("t2", g.t_end)
    return g.index(t1), g.index(t2)


def _psi(params):
    return get_psi(params.get("psi", "tanh"))


# -- individual checks ----------------------------------------------------


def check_initial_condition(ctx, params):
    rho = ctx.solution(0)
    v = initial_condition_check(rho, ctx.mu0)
    return [record(ctx, "initial_condition", _base_params(ctx, params), v, 0.0, None, v == 0.0)]


def check_liouville(ctx, params):
    which = params.get("phi")
    indices = range(len(ctx.dictionary)) if which is None else [which]
    out = []
    for i in indices:
        Phi = ctx.dictionary[i]

        def value(rho, Phi=Phi):
            i1, i2 = _span(ctx, params, rho)
            return abs(liouville_curve(rho, Phi, i1, i2)[-1])

        rec = _refinement(ctx, "liouville", params, value)
        rec["params"].update(phi=Phi.name, phi_index=i)
        out.append(rec)
    return out


def check_weak_residual(ctx, params):
    def value(rho):
        return max(rho.certification["weak_residual"])

    return [_refinement(ctx, "weak_residual", params, value)]


def check_energy_residual(ctx, params):
    psi = _psi(params)
    equality = ctx.model.energy_is_equality

    def value(rho):
        res = energy_residuals(rho, psi)[:, 1:]  # node 0 is identically zero
        return np.max(np.abs(res)) if equality else np.max(res)

    rec = _refinement(ctx, "energy_residual", params, value, "abs" if equality else "upper")
    rec["params"]["equality"] = equality
    return [rec]


def _bump(ctx, params):
    g = ctx.grid
    center = params.get("center", 0.5 * (g.t0 + g.t_end))
    half = params.get("half_width", 0.45 * (g.t_end - g.t0))
    return bump_1d(center, half)


def check_mean_energy(ctx, params):
    psi = _psi(params)
    bump = _bump(ctx, params)
    equality = ctx.model.energy_is_equality
    rec = _refinement(ctx, "mean_energy", params,
                      lambda rho: mean_energy_check(rho, psi, bump),
                      "abs" if equality else "upper")
    rec["params"]["equality"] = equality
    return [rec]


def check_initial_limit(ctx, params):
    psi = _psi(params)
    p = {"min_order": 0.8, **params}
    return [_refinement(ctx, "initial_limit", p,
                        lambda rho: initial_limit_check(rho, psi, ctx.mu0), default_halvings=3)]


def check_energy_drift(ctx, params):
    def value(rho):
        e = rho.model.energy(rho.paths)
        return np.max(np.abs(e[:, -1] - e[:, 0]))

    return [_refinement(ctx, "energy_drift", params, value, default_halvings=3)]


def check_oracle(ctx, params):
    """Distance to the closed-form push-forward (models with an ``exact`` flow)."""
    if not hasattr(ctx.model, "exact"):
        raise ConfigError("oracle check needs a model with a closed-form solution")

    def value(rho):
        g = rho.grid
        exact = ctx.model.exact(g.t_end - g.t0, ctx.mu0.atoms)
        return np.max(np.abs(project(rho, g.t_end).atoms - exact))

    tol = params.get("tolerance", 1e-6)
    rec = _refinement(ctx, "oracle", params, value, default_halvings=1)
    rec["tolerance"] = tol
    rec["pass"] = rec["value"] is not None and rec["value"] <= tol
    if params.get("min_order") is not None:
        rec["pass"] = rec["pass"] and (rec["order_estimate"] or 0.0) >= params["min_order"]
    return [rec]


def check_apriori(ctx, params):
    rho = ctx.solution(0)
    margins = apriori_margin_curve(ctx.model, np.moveaxis(rho.paths, 1, 0), rho.grid)
    v = float(np.min(margins[1:]))
    tol = params.get("tolerance", 1e-8)
    return [record(ctx, "apriori", _base_params(ctx, params), v, tol, None, v >= -tol)]


def _random_states(ctx, params):
    rng = np.random.default_rng(params.get("seed", 0))
    n = params.get("samples", 100)
    scale = ctx.model.mode_scale() ** -1.0
    return rng.standard_normal((n, ctx.model.dim)) * scale


def check_orthogonality(ctx, params):
    m = ctx.model
    u = _random_states(ctx, params)
    B = m.B(u, u)
    rel = np.abs(m.pairing(B, u)) / np.sqrt(m.pairing(B, B) * m.pairing(u, u))
    v = float(np.max(rel))
    tol = params.get("tolerance", 1e-10)
    return [record(ctx, "orthogonality", _base_params(ctx, params), v, tol, None, v <= tol)]


def check_b_estimate(ctx, params):
    u = _random_states(ctx, params)
    v = _random_states(ctx, {**params, "seed": params.get("seed", 0) + 1})
    ratios = [nse_b_estimate_ratio(ctx.model, a, b) for a, b in zip(u, v)]
    val = max(ratios)
    p = _base_params(ctx, params)
    p["mean_ratio"] = float(np.mean(ratios))
    return [record(ctx, "b_estimate", p, val, None, None, math.isfinite(val))]


def check_z_carrier(ctx, params):
    v = z_carrier_fraction(ctx.solution(0))
    return [record(ctx, "z_carrier", _base_params(ctx, params), v, 0.0, None, v == 1.0)]


def check_continuity(ctx, params):
    rho = ctx.solution(0)
    v = min(continuity_margin(tr) for tr in rho.trajectories)
    return [record(ctx, "continuity", _base_params(ctx, params), v, 0.0, None, v >= 0.0)]


def check_statistic_curve(ctx, params):
    rho = ctx.solution(0)
    which = params.get("phi", "energy")
    if which == "energy":
        psi = _psi(params)

        def phi(x):
            return psi.f(ctx.model.energy(x))
    else:
        Phi = ctx.dictionary[which]

        def phi(x):
            return np.atleast_1d(evaluate(Phi, x, ctx.model.pairing))

    curve, modulus = statistic_curve(rho, phi)
    p = _base_params(ctx, params)
    if ctx.config.curves:
        out = Path(ctx.config.curves)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{ctx.config.name}_statistic_{which}.csv"
        write_csv(path, rho.grid.times, curve[:, None])
        p["csv"] = str(path)
    return [record(ctx, "statistic_curve", p, modulus, None, None, bool(np.all(np.isfinite(curve))))]


def check_mc_refinement(ctx, params):
    ns = params.get("ns", [64, 256, 1024])
    t = params.get("t", ctx.grid.t_end)
    steps = ctx.grid.index(t)
    grid = TimeGrid(ctx.grid.t0, ctx.grid.dt, max(1, steps))
    sampler = ctx.config.build_sampler(ctx.model)
    study = refinement_study(ctx.model, sampler, ns, grid, grid.t_end,
                             default_dictionary(ctx.model.dim), ctx.config.seed,
                             params.get("replicates", 8), ctx.config.scheme,
                             params.get("factor", 4))
    lo, hi = params.get("slope_range", [-0.7, -0.3])
    p = _base_params(ctx, params)
    p.update(discrepancy=study["discrepancy"])
    slope = study["slope"]
    return [record(ctx, "mc_refinement", p, slope, None, slope, lo <= slope <= hi)]


_COMMON = {"halvings", "min_order"}

REGISTRY = {
    "initial_condition": (check_initial_condition, set(), None),
    "liouville": (check_liouville, _COMMON | {"phi", "t1", "t2"}, None),
    "weak_residual": (check_weak_residual, _COMMON, None),
    "energy_residual": (check_energy_residual, _COMMON | {"psi"}, None),
    "mean_energy": (check_mean_energy, _COMMON | {"psi", "center", "half_width"}, None),
    "initial_limit": (check_initial_limit, _COMMON | {"psi"}, None),
    "energy_drift": (check_energy_drift, _COMMON, None),
    "oracle": (check_oracle, _COMMON | {"tolerance"}, {"linear"}),
    "apriori": (check_apriori, {"tolerance"}, {"nse"}),
    "orthogonality": (check_orthogonality, {"samples", "seed", "tolerance"}, {"nse"}),
    "b_estimate": (check_b_estimate, {"samples", "seed"}, {"nse"}),
    "z_carrier": (check_z_carrier, set(), None),
    "continuity": (check_continuity, set(), None),
    "statistic_curve": (check_statistic_curve, {"phi", "psi"}, None),
    "mc_refinement": (check_mc_refinement, {"ns", "t", "replicates", "factor", "slope_range"}, None),
}


def validate_check(name: str, params: dict, model_name: str) -> None:
    if name not in REGISTRY:
        raise ConfigError(f"unknown check {name!r}")
    _, allowed, models = REGISTRY[name]
    extra = set(params) - allowed
    if extra:
        raise ConfigError(f"check {name!r}: unknown parameter(s) {sorted(extra)}")
    if models is not None and model_name not in models:
        raise ConfigError(f"check {name!r} is not available for model {model_name!r}")
    if "psi" in params:
        try:
            get_psi(params["psi"])
        except ValidationError as exc:
            raise ConfigError(f"check {name!r}: {exc}") from None


def run_check(ctx: Context, name: str, params: dict) -> tuple[list[dict], bool]:
    """Run one check; returns its records and whether a numerical failure occurred."""
    fn = REGISTRY[name][0]
    try:
        return fn(ctx, params), False
    except NUMERICAL_ERRORS as exc:
        rec = record(ctx, name, _base_params(ctx, params), None, None, None, False)
        rec["error"] = f"{type(exc).__name__}: {exc}"
        return [rec], True
