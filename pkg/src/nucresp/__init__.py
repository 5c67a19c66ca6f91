"""Resource estimates for lattice nuclear dynamics on quantum computers, plus a
three-nucleon toy model with simulated noise and error mitigation."""

from __future__ import annotations

__version__ = "0.1.0"

from .lattice_model import LatticeSpec, Split, build_kinetic, build_potential, norms
from .pauli import PauliString, PauliSum
from .trotter_bounds import Bound, TrotterPlan, qpe_schedule
from .triton import TritonParams

__all__ = [
    "Bound",
    "LatticeSpec",
    "PauliString",
    "PauliSum",
    "Split",
    "TritonParams",
    "TrotterPlan",
    "__version__",
    "build_kinetic",
    "build_potential",
    "norms",
    "qpe_schedule",
]
