"""Magnetically tunable Lambda systems in Zeeman-split Kramers doublets.

The package models the four-level scheme formed by splitting a ground
and an excited Kramers doublet in a magnetic field: branching ratios
from an effective spin-1/2 model, polarized four-line Voigt absorption
spectra with fitting, and rate-equation simulation of swept-laser
optical pumping.
"""

from .branching import (
    BranchingResult,
    LambdaCoefficients,
    Transition,
    TransitionTable,
    branching_ratios,
    branching_scan,
    lambda_coefficients,
    lambda_system,
    optimal_angle,
    transition_table,
)
from .constants import BOHR_MAGNETON_GHZ_PER_T
from .fitting import (
    FitResult,
    FittingError,
    FourVoigtModel,
    fit_exponential_recovery,
    fit_four_voigt,
    fit_polarization_model,
    least_squares,
)
from .pump import (
    PumpConfig,
    PumpResult,
    PumpState,
    SimulationError,
    hole_spectrum,
    residual_fraction,
    simulate_pump,
    sweep_schedule,
)
from .spectrum import (
    AbsorptionSpectrum,
    LineShapeParams,
    polarization_depth,
    synthesize_spectrum,
    transmission,
    voigt_depth,
)
from .zeeman import (
    DoubletEigensystem,
    FieldConfig,
    GTensor,
    doublet_eigensystem,
    effective_g,
    zeeman_splitting,
)

__version__ = "0.1.0"

__all__ = [
    "AbsorptionSpectrum",
    "BOHR_MAGNETON_GHZ_PER_T",
    "BranchingResult",
    "DoubletEigensystem",
    "FieldConfig",
    "FitResult",
    "FittingError",
    "FourVoigtModel",
    "GTensor",
    "LambdaCoefficients",
    "LineShapeParams",
    "PumpConfig",
    "PumpResult",
    "PumpState",
    "SimulationError",
    "Transition",
    "TransitionTable",
    "branching_ratios",
    "branching_scan",
    "doublet_eigensystem",
    "effective_g",
    "fit_exponential_recovery",
    "fit_four_voigt",
    "fit_polarization_model",
    "hole_spectrum",
    "lambda_coefficients",
    "lambda_system",
    "least_squares",
    "optimal_angle",
    "polarization_depth",
    "residual_fraction",
    "simulate_pump",
    "sweep_schedule",
    "synthesize_spectrum",
    "transition_table",
    "transmission",
    "voigt_depth",
    "zeeman_splitting",
]
