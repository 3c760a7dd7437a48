"""Gaussian simulation of a harmonic detector coupled to thermal bosonic baths."""

from .gaussian import (
    QuadraticHamiltonian,
    entropy,
    mutual_information,
    reduced_state,
    symplectic_eigenvalues,
    symplectic_form,
    thermal_state,
    williamson,
)
from .models import CavityModelSpec, ChainModelSpec, SwitchingProfile, initial_joint_state

__version__ = "0.1.0"

__all__ = [
    "CavityModelSpec",
    "ChainModelSpec",
    "QuadraticHamiltonian",
    "SwitchingProfile",
    "entropy",
    "initial_joint_state",
    "mutual_information",
    "reduced_state",
    "symplectic_eigenvalues",
    "symplectic_form",
    "thermal_state",
    "williamson",
    "__version__",
]
