"""Trajectory and phase-space statistical solutions as weighted Dirac ensembles."""

from .cylinder import (CylindricalTestFunction, Pairing, bump_1d, cutoff_monomial, cutoff_product,
                       evaluate, grad, grad_check, pair_with_grad, radial_bump)
from .measure import (DiracEnsemble, TestDictionary, default_dictionary, discrepancy, discretize,
                      ensemble_new, expectation, pushforward, tightness_truncate)
from .models import (LinearModel, NavierStokesGalerkin, NonlinearWave, ReactionDiffusion,
                     build_model, energy_pair, get_psi)
from .solution import (TrajectoryStatSolution, initial_condition_check, initial_limit_check,
                       liouville_residual, mean_energy_check, project, solve_ivp, statistic_curve)
from .trajectory import (TimeGrid, Trajectory, apriori_bound_check, energy_residual, integrate,
                         weak_residual)

__all__ = [
    "CylindricalTestFunction", "Pairing", "bump_1d", "cutoff_monomial", "cutoff_product",
    "evaluate", "grad", "grad_check", "pair_with_grad", "radial_bump", "DiracEnsemble",
    "TestDictionary", "default_dictionary", "discrepancy", "discretize", "ensemble_new",
    "expectation", "pushforward", "tightness_truncate", "LinearModel", "NavierStokesGalerkin",
    "NonlinearWave", "ReactionDiffusion", "build_model", "energy_pair", "get_psi",
    "TrajectoryStatSolution", "initial_condition_check", "initial_limit_check",
    "liouville_residual", "mean_energy_check", "project", "solve_ivp", "statistic_curve",
    "TimeGrid", "Trajectory", "apriori_bound_check", "energy_residual", "integrate",
    "weak_residual",
]

__version__ = "0.1.0"
