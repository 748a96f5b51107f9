"""One-parameter single-diode model (SDM-1) for photovoltaic I-V curves."""

__version__ = "0.1.0"

from .numerics import Bracket, RootConfig, find_root_bracketed
from .sdm_core import (CardinalPoints, IVPoint, ModuleMetadata, SdmParameters,
                       ValidationError, sample_curve, sdm_residual,
                       solve_current_at_voltage)
from .sdm1 import (DomainResult, SelectionRule, compute_domain, f_mp, f_sh,
                   r_s_mp_of_a, r_s_sh_of_a, reconstruct_parameters,
                   reduced_solution)
from .uncertainty import (DomainInterval, Realization, UncertainCardinalPoints,
                          domain_interval, realize)

__all__ = [
    "Bracket", "CardinalPoints", "DomainInterval", "DomainResult", "IVPoint",
    "ModuleMetadata", "Realization", "RootConfig", "SdmParameters",
    "SelectionRule", "UncertainCardinalPoints", "ValidationError",
    "compute_domain", "domain_interval", "f_mp", "f_sh", "find_root_bracketed",
    "r_s_mp_of_a", "r_s_sh_of_a", "realize", "reconstruct_parameters",
    "reduced_solution", "sample_curve", "sdm_residual",
    "solve_current_at_voltage",
]
