"""Richardson tables: integrator error and Liouville residual under dt halving.

Prints, for each model, the residual at dt, dt/2, ... with successive log2
ratios and the least-squares order.
"""

import argparse

import numpy as np

from statsol.cylinder import cutoff_monomial, cutoff_product
from statsol.measure import discretize, gaussian_sampler
from statsol.models import LinearModel, NavierStokesGalerkin, NonlinearWave, ReactionDiffusion
from statsol.solution import fit_order, liouville_residual, solve_ivp, successive_orders
from statsol.trajectory import TimeGrid, integrate


def table(title, dts, values):
    print(f"\n{title}")
    orders = [None] + successive_orders(values)
    for dt, v, o in zip(dts, values, orders):
        print(f"  dt={dt:<10.6g} value={v:<12.4e} ratio_order={'' if o is None else f'{o:.3f}'}")
    fit = fit_order(dts, values)
    print(f"  fitted order: {'n/a' if fit is None else f'{fit:.3f}'}")


def integrator_tables(halvings):
    for scheme, model in (("rk4", LinearModel()), ("imex", LinearModel(rate=1.0, cubic=1.0))):
        dts, errs = [], []
        for level in range(halvings + 1):
            g = TimeGrid(0.0, 0.1 / 2**level, 10 * 2**level)
            tr = integrate(model, [1.0], g, scheme)
            dts.append(g.dt)
            errs.append(abs(tr.states[-1, 0] - float(model.exact(1.0, np.array([1.0]))[0])))
        table(f"{scheme} error at t=1 on u' = -{model.rate:g}u - {model.cubic:g}u^3", dts, errs)


def liouville_tables(halvings, seed):
    models = [LinearModel(2, cubic=0.5), ReactionDiffusion(8, forcing_amplitude=1.0),
              NonlinearWave(8), NavierStokesGalerkin(kmax=2, forcing_mode=(1, 1), forcing_amplitude=1.0)]
    for m in models:
        sampler = gaussian_sampler(np.zeros(m.dim), 0.5 / m.mode_scale())
        mu0 = discretize(sampler, 16, seed)
        eye = np.eye(m.dim)
        Phi = cutoff_product(eye[0], eye[1], (1, 2), 6.0) if m.dim > 1 else cutoff_monomial(eye[0], 2, 6.0)
        dts, vals = [], []
        for level in range(halvings + 1):
            g = TimeGrid(0.0, 0.05 / 2**level, 20 * 2**level)
            rho = solve_ivp(m, mu0, g, certify=False)
            dts.append(g.dt)
            vals.append(liouville_residual(rho, Phi, 0.0, g.t_end))
        table(f"Liouville residual, {m.name}, Phi={Phi.name}", dts, vals)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--halvings", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    integrator_tables(args.halvings)
    liouville_tables(args.halvings, args.seed)


if __name__ == "__main__":
    main()
