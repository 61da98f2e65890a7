from .base import (PSI, ModelSpec, OverflowGuardError, Psi, ValidationError, energy_pair,
                   get_psi, validate_psi, z_membership)
from .linear import LinearModel
from .nse import NavierStokesGalerkin, modes_in_ball, nse_b_estimate_ratio, nse_rhs
from .reacdiff import PowerReaction, ReactionDiffusion, reacdiff_rhs
from .wave import NonlinearWave, wave_rhs

__all__ = [
    "PSI", "ModelSpec", "OverflowGuardError", "Psi", "ValidationError", "energy_pair",
    "get_psi", "validate_psi", "z_membership", "LinearModel", "NavierStokesGalerkin",
    "modes_in_ball", "nse_b_estimate_ratio", "nse_rhs", "PowerReaction", "ReactionDiffusion",
    "reacdiff_rhs", "NonlinearWave", "wave_rhs", "build_model",
]


def build_model(block: dict) -> ModelSpec:
    """Instantiate a model from its config block (``name`` plus parameters)."""
    kw = {k: v for k, v in block.items() if k != "name"}
    name = block["name"]
    forcing = kw.pop("forcing", None) or {}
    if name == "linear":
        return LinearModel(**kw)
    if name == "reacdiff":
        p = kw.pop("p", 4.0)
        coef = kw.pop("reaction_coef", 1.0)
        return ReactionDiffusion(reaction=PowerReaction(p, coef),
                                 forcing_mode=forcing.get("mode", 1),
                                 forcing_amplitude=forcing.get("amplitude", 0.0),
                                 forcing_omega=forcing.get("omega", 0.0), **kw)
    if name == "wave":
        return NonlinearWave(forcing_mode=forcing.get("mode", 1),
                             forcing_amplitude=forcing.get("amplitude", 0.0),
                             forcing_omega=forcing.get("omega", 0.0), **kw)
    if name == "nse":
        return NavierStokesGalerkin(forcing_mode=forcing.get("mode"),
                                    forcing_amplitude=forcing.get("amplitude", 0.0),
                                    forcing_omega=forcing.get("omega", 0.0), **kw)
    raise ValidationError(f"unknown model {name!r}")
