"""Double-well proton dynamics under measurement and thermal coupling.

Two pictures of the same open system: full position-grid density-matrix
propagation punctuated by partial pointer measurements, and an
eigenbasis master equation whose dissipator comes from a harmonic-bath
spectral density.  The harness compares them and sweeps measurement
frequency against bath temperature.
"""

__version__ = "0.1.0"

from .bath import BathParams, RateMatrix, coupling_matrix, rate_matrix, spectral_density
from .eigensolver import (
    EigenBasis,
    MassScale,
    SpatialGrid,
    build_hamiltonian,
    solve_eigenpairs,
)
from .lindblad import EigenDensityMatrix, StabilityError
from .observables import Trajectory
from .pointer import DensityMatrixGrid, GridHamiltonian, MeasurementSchedule
from .potential import DoubleWellParams, WellPartition, barrier_top, partition
from .units import UNITS, UnitSystem

__all__ = [
    "BathParams",
    "DensityMatrixGrid",
    "DoubleWellParams",
    "EigenBasis",
    "EigenDensityMatrix",
    "GridHamiltonian",
    "MassScale",
    "MeasurementSchedule",
    "RateMatrix",
    "SpatialGrid",
    "StabilityError",
    "Trajectory",
    "UNITS",
    "UnitSystem",
    "WellPartition",
    "barrier_top",
    "build_hamiltonian",
    "coupling_matrix",
    "partition",
    "rate_matrix",
    "solve_eigenpairs",
    "spectral_density",
]
