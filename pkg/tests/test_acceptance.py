"""Acceptance criteria, each at its stated tolerance and runtime budget.

Every test records a single PASS/FAIL line, collected in the
"acceptance criteria" section of the pytest terminal summary.
"""

import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from statsol.checks import Context, run_check
from statsol.cli import build_context, execute
from statsol.config import load_config
from statsol.cylinder import (Pairing, constant, cutoff_monomial, cutoff_product, evaluate, grad_check,
                              pair_with_grad, radial_bump, tanh_coordinate)
from statsol.measure import ensemble_new, expectation, pushforward
from statsol.solution import (fit_order, initial_condition_check, liouville_residual, project,
                              solve_ivp)
from statsol.trajectory import TimeGrid, apriori_margin_curve

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
SUITES = ["linear_oracle", "reacdiff", "nse", "wave", "mc_refinement"]


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


def context(name: str) -> Context:
    return build_context(load_config(CONFIGS / f"{name}.json"))


def only(records_and_flag):
    records, numerical = records_and_flag
    assert not numerical, records
    return records


# -- 1 --------------------------------------------------------------------


def _random_map(rng, d):
    kind = rng.integers(4)
    A = rng.normal(size=(d, d))
    b = rng.normal(size=d)
    if kind == 0:
        return lambda x: x @ A.T + b
    if kind == 1:
        return lambda x: np.sin(x @ A.T) + b * x
    if kind == 2:
        return lambda x: np.tanh(x) ** 3 - b
    return lambda x: x * np.exp(-0.1 * np.sum(x * x, axis=1, keepdims=True))


def _random_observable(rng, d):
    kind = rng.integers(3)
    c = rng.normal(size=d)
    if kind == 0:
        return lambda y: y @ c
    if kind == 1:
        return lambda y: np.cos(y @ c) + np.sum(y * y, axis=1)
    return lambda y: 1.0 / (1.0 + np.sum(np.abs(y), axis=1))


def test_criterion_1_change_of_variables(criterion):
    rng = np.random.default_rng(20240101)
    worst = 0.0
    with Timer() as t:
        for _ in range(1000):
            n, d = int(rng.integers(1, 40)), int(rng.integers(1, 6))
            mu = ensemble_new(rng.normal(size=(n, d)) * rng.uniform(0.1, 5), rng.random(n) + 1e-3)
            F, phi = _random_map(rng, d), _random_observable(rng, d)
            lhs = expectation(pushforward(mu, F), phi)
            rhs = expectation(mu, lambda x: phi(F(x)))
            worst = max(worst, abs(lhs - rhs) / max(abs(rhs), np.finfo(float).tiny))
    criterion("1 change of variables",
              {"relative error <= 1e-12": worst <= 1e-12, "runtime < 5 s": t.seconds < 5},
              f"worst_rel={worst:.2e} runtime={t.seconds:.2f}s")


# -- 2 --------------------------------------------------------------------


def test_criterion_2_cylindrical_gradient(criterion):
    rng = np.random.default_rng(7)
    dim = 6
    pairing = Pairing(rng.uniform(0.5, 2.0, size=dim))  # non-Euclidean on purpose
    v = rng.normal(size=(4, dim))
    families = {
        "monomial": cutoff_monomial(v[0], 3, 6.0),
        "product": cutoff_product(v[1], v[2], (2, 1), 6.0),
        "radial": radial_bump(v[:3], 5.0),
        "tanh": tanh_coordinate(v[3]),
        "constant": constant(v[0], 1.5),
    }
    worst_coord, worst_state = 0.0, 0.0
    with Timer() as t:
        for Phi in families.values():
            u = rng.normal(size=(100, dim))
            worst_coord = max(worst_coord, grad_check(Phi, u, pairing))
            # the full state-space derivative: d/dh Phi(u + h e_i) = <e_i, Phi'(u)>
            h = 1e-5
            for i in range(dim):
                e = np.zeros(dim)
                e[i] = h
                fd = (evaluate(Phi, u + e, pairing) - evaluate(Phi, u - e, pairing)) / (2 * h)
                exact = pair_with_grad(np.eye(dim)[i], Phi, u, pairing)
                scale = np.maximum(np.maximum(np.abs(fd), np.abs(exact)), 1.0)
                worst_state = max(worst_state, float(np.max(np.abs(fd - exact) / scale)))
    criterion("2 cylindrical gradient",
              {"grad_check < 1e-6": worst_coord < 1e-6, "state derivative < 1e-6": worst_state < 1e-6,
               "runtime < 5 s": t.seconds < 5},
              f"grad_check={worst_coord:.2e} state={worst_state:.2e} runtime={t.seconds:.2f}s")


# -- 3 --------------------------------------------------------------------


def test_criterion_3_linear_oracle(criterion):
    with Timer() as t:
        ctx = context("linear_oracle")
        assert ctx.grid.dt == 0.01 and ctx.grid.t_end == pytest.approx(1.0)
        rho = solve_ivp(ctx.model, ctx.mu0, ctx.grid, "rk4")
        oracle = pushforward(ctx.mu0, lambda x: x * np.exp(-1.0))
        observables = [lambda x: x[:, 0], lambda x: x[:, 0] ** 2, lambda x: np.tanh(x[:, 0])]
        stat_err = max(abs(expectation(project(rho, 1.0), f) - expectation(oracle, f)) for f in observables)
        atom_err = float(np.max(np.abs(project(rho, 1.0).atoms - oracle.atoms)))
        orders = []
        for Phi in ctx.dictionary:
            vals, dts = [], []
            for level in range(4):
                r = ctx.solution(level)
                vals.append(liouville_residual(r, Phi, r.grid.t0, r.grid.t_end))
                dts.append(r.grid.dt)
            orders.append((Phi.name, vals, fit_order(dts, vals)))
    fitted = [o for _, vals, o in orders if o is not None]
    exact_zero = [name for name, vals, o in orders if o is None and all(v == 0.0 for v in vals)]
    criterion("3 linear oracle",
              {"statistics error <= 1e-6": stat_err <= 1e-6 and atom_err <= 1e-6,
               "Liouville order >= 1.8": len(fitted) > 0 and min(fitted) >= 1.8,
               "unfitted residuals are exactly zero": len(fitted) + len(exact_zero) == len(orders),
               "runtime < 10 s": t.seconds < 10},
              f"stat_err={stat_err:.2e} min_order={min(fitted):.3f} runtime={t.seconds:.2f}s")


# -- 4 --------------------------------------------------------------------


def test_criterion_4_reaction_diffusion(criterion):
    with Timer() as t:
        ctx = context("reacdiff")
        m = ctx.model
        setup_ok = (m.dim == 8 and m.reaction.p == 4 and m.reaction.coef == 1.0 and len(ctx.mu0) == 16
                    and ctx.grid.t_end == pytest.approx(1.0) and len(ctx.dictionary) == 5)
        energy = only(run_check(ctx, "energy_residual", {"psi": "tanh", "halvings": 3}))[0]
        liou = only(run_check(ctx, "liouville", {"halvings": 3}))
        mean = only(run_check(ctx, "mean_energy", {"psi": "tanh", "halvings": 3}))[0]
    liou_orders = [r["order_estimate"] for r in liou]
    criterion("4 reaction-diffusion",
              {"setup": setup_ok,
               "(a) energy equality order >= 1.8": (energy["order_estimate"] or 0) >= 1.8,
               "(b) Liouville order >= 1.8 for 5 Phi": len(liou) == 5
               and all(o is not None and o >= 1.8 for o in liou_orders),
               "(c) mean energy equality order >= 1.8": (mean["order_estimate"] or 0) >= 1.8
               and abs(mean["params"]["values"][-1]) < abs(mean["params"]["values"][0]),
               "runtime < 60 s": t.seconds < 60},
              f"energy={energy['order_estimate']:.2f} liouville_min={min(liou_orders):.2f} "
              f"mean={mean['order_estimate']:.2f} runtime={t.seconds:.2f}s")


# -- 5 --------------------------------------------------------------------


def test_criterion_5_navier_stokes(criterion):
    with Timer() as t:
        ctx = context("nse")
        m = ctx.model
        setup_ok = (m.ndim == 2 and len(m.full) == 12 and m.nu == 0.1 and np.count_nonzero(m.forcing(0.3)) == 1
                    and np.array_equal(m.forcing(0.0), m.forcing(0.7)) and len(ctx.mu0) == 16
                    and ctx.grid.t_end == pytest.approx(1.0))
        rng = np.random.default_rng(99)
        u = rng.standard_normal((100, m.dim)) / m.mode_scale()
        B = m.B(u, u)
        ortho = float(np.max(np.abs(m.pairing(B, u)) / np.sqrt(m.pairing(B, B) * m.pairing(u, u))))
        rho = ctx.solution(0)
        margins = apriori_margin_curve(m, np.moveaxis(rho.paths, 1, 0), rho.grid)
        mean = {psi: only(run_check(ctx, "mean_energy", {"psi": psi}))[0] for psi in ("tanh", "rational")}
        limit = only(run_check(ctx, "initial_limit", {"psi": "tanh", "halvings": 3}))[0]
    criterion("5 navier-stokes galerkin",
              {"setup": setup_ok,
               "(a) orthogonality <= 1e-10": ortho <= 1e-10,
               "(b) a-priori margins >= -1e-8": float(np.min(margins)) >= -1e-8,
               "(c) mean energy <= 10x quadrature estimate": all(r["value"] <= r["tolerance"] for r in mean.values()),
               "(d) initial limit order >= 0.8": (limit["order_estimate"] or 0) >= 0.8,
               "runtime < 60 s": t.seconds < 60},
              f"ortho={ortho:.1e} min_margin={np.min(margins):.3f} "
              f"mean_tanh={mean['tanh']['value']:.2e}<= {mean['tanh']['tolerance']:.2e} "
              f"mean_rational={mean['rational']['value']:.2e}<= {mean['rational']['tolerance']:.2e} "
              f"limit_order={limit['order_estimate']:.2f} runtime={t.seconds:.2f}s")


# -- 6 --------------------------------------------------------------------


def test_criterion_6_wave(criterion):
    with Timer() as t:
        ctx = context("wave")
        m = ctx.model
        setup_ok = m.n == 8 and m.r == 2.0 and not np.any(m.forcing(0.5)) and len(ctx.mu0) == 16
        # drift over one period of the fundamental mode, per trajectory
        drifts, dts = [], []
        for level in range(4):
            steps = 64 * 2**level
            g = TimeGrid(0.0, 2 * np.pi / steps, steps)
            e = m.energy(solve_ivp(m, ctx.mu0, g, certify=False).paths)
            drifts.append(np.abs(e[:, -1] - e[:, 0]))
            dts.append(g.dt)
        drifts = np.array(drifts)
        drift_orders = [fit_order(dts, drifts[:, j]) for j in range(drifts.shape[1])]
        mean = only(run_check(ctx, "mean_energy", {"psi": "tanh"}))[0]
        liou = only(run_check(ctx, "liouville", {"halvings": 3}))
    liou_orders = [r["order_estimate"] for r in liou]
    criterion("6 nonlinear wave",
              {"setup": setup_ok,
               "(a) per-trajectory drift order >= 3.8": all(o is not None and o >= 3.8 for o in drift_orders),
               "(b) mean energy <= tolerance": mean["value"] <= mean["tolerance"],
               "(c) Liouville order >= 1.8": all(o is not None and o >= 1.8 for o in liou_orders),
               "runtime < 60 s": t.seconds < 60},
              f"min_drift_order={min(drift_orders):.2f} mean={mean['value']:.2e}<= {mean['tolerance']:.2e} "
              f"liouville_min={min(liou_orders):.2f} runtime={t.seconds:.2f}s")


# -- 7 --------------------------------------------------------------------


def test_criterion_7_initial_condition(criterion):
    values = []
    for name in SUITES:
        ctx = context(name)
        for level in range(3):
            rho = ctx.solution(level)
            values.append(initial_condition_check(rho, ctx.mu0))
    criterion("7 initial condition",
              {"every value exactly 0.0": all(v == 0.0 for v in values)},
              f"solutions={len(values)} max={max(values)}")


# -- 8 --------------------------------------------------------------------


def test_criterion_8_monte_carlo(criterion):
    with Timer() as t:
        ctx = context("mc_refinement")
        rec = only(run_check(ctx, "mc_refinement", {"ns": [64, 256, 1024]}))[0]
    slope = rec["value"]
    criterion("8 monte carlo refinement",
              {"model is reaction-diffusion": ctx.model.name == "reacdiff",
               "slope in [-0.7, -0.3]": -0.7 <= slope <= -0.3,
               "runtime < 120 s": t.seconds < 120},
              f"slope={slope:.3f} discrepancy={[round(x, 5) for x in rec['params']['discrepancy']]} "
              f"runtime={t.seconds:.2f}s")


# -- 9 --------------------------------------------------------------------


def test_criterion_9_determinism(criterion, tmp_path):
    identical = {}
    for name in SUITES:
        cfg = load_config(CONFIGS / f"{name}.json")
        a, b = tmp_path / f"{name}.a.ndjson", tmp_path / f"{name}.b.ndjson"
        execute(cfg, a, threads=1)
        execute(cfg, b, threads=4)
        identical[name] = a.read_bytes() == b.read_bytes() and len(a.read_bytes()) > 0
        for line in a.read_text().splitlines():
            rec = json.loads(line)
            assert all(x is None or math.isfinite(x) for x in (rec["value"], rec["tolerance"]))
    criterion("9 determinism",
              {f"{k} byte-identical": v for k, v in identical.items()},
              f"suites={len(identical)}")
