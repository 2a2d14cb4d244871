"""Finite-difference eigenbasis of the double-well Hamiltonian.

The kinetic operator is discretized with the three-point Laplacian on a
uniform grid in zeta, which makes H real symmetric tridiagonal:

    H[n, n]   = hbar^2 / (m dX^2) + V(zeta_n)
    H[n, n+1] = -hbar^2 / (2 m dX^2)

with dX the *physical* spacing, spacing_in_zeta * length_scale.  The
eigenpairs come from a direct tridiagonal solve, eigenvectors are
normalized against the grid weight (sum phi_i phi_j dzeta = delta_ij)
and sign-fixed so runs are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import potential as pot
from .units import HBAR_CM1_PS, PROTON_MASS, mass_from_kg, PROTON_MASS_KG


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform grid on the dimensionless transfer coordinate."""

    n_points: int
    zeta_min: float
    zeta_max: float

    def __post_init__(self):
        if self.n_points < 3:
            raise ValueError(f"grid needs at least 3 points, got {self.n_points}")
        if not self.zeta_max > self.zeta_min:
            raise ValueError("zeta_max must exceed zeta_min")

    @property
    def spacing(self) -> float:
        return (self.zeta_max - self.zeta_min) / (self.n_points - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.zeta_min, self.zeta_max, self.n_points)


@dataclass(frozen=True)
class MassScale:
    """Tunnelling particle mass and the physical size of one zeta unit.

    mass is in internal units (cm^-1 ps^2 / cm^2, see units module);
    length_scale in metres per unit zeta.
    """

    mass: float = PROTON_MASS
    length_scale: float = 0.9525e-10

    def __post_init__(self):
        if not (self.mass > 0.0 and self.length_scale > 0.0):
            raise ValueError("mass and length_scale must both be positive")

    @classmethod
    def proton(cls, length_scale_m: float) -> "MassScale":
        return cls(mass=mass_from_kg(PROTON_MASS_KG), length_scale=length_scale_m)

    def kinetic_coefficient(self, grid: SpatialGrid) -> float:
        """hbar^2 / (2 m dX_phys^2) in cm^-1 for the given grid."""
        dx_cm = grid.spacing * self.length_scale * 1e2
        return HBAR_CM1_PS**2 / (2.0 * self.mass * dx_cm**2)


def tridiagonal_hamiltonian(
    grid: SpatialGrid, v_values: np.ndarray, scale: MassScale
) -> tuple[np.ndarray, np.ndarray]:
    """Three-point Hamiltonian for an arbitrary sampled potential."""
    kin = scale.kinetic_coefficient(grid)
    diag = 2.0 * kin + np.asarray(v_values, dtype=float)
    off = np.full(grid.n_points - 1, -kin)
    return diag, off


def build_hamiltonian(
    grid: SpatialGrid, params: pot.DoubleWellParams, scale: MassScale
) -> tuple[np.ndarray, np.ndarray]:
    """Three-point double-well Hamiltonian as (diagonal, off-diagonal), cm^-1."""
    return tridiagonal_hamiltonian(grid, pot.evaluate(grid.points, params), scale)


@dataclass(frozen=True)
class EigenBasis:
    """Lowest eigenpairs of the discrete Hamiltonian.

    energies ascend; states[:, i] is phi_i sampled on the grid with
    sum(phi_i * phi_j) * spacing = delta_ij.
    """

    grid: SpatialGrid
    energies: np.ndarray          # (n_basis,), cm^-1
    states: np.ndarray            # (n_points, n_basis)
    kinetic_coefficient: float = field(repr=False, default=0.0)

    @property
    def n_basis(self) -> int:
        return len(self.energies)

    def project(self, psi: np.ndarray) -> np.ndarray:
        """Expansion coefficients <phi_i|psi> of a grid wave function."""
        return self.states.T @ psi * self.grid.spacing

    def position_operator(self) -> np.ndarray:
        """Matrix elements <phi_i| zeta |phi_j>, symmetric."""
        z = self.grid.points
        return (self.states.T * z) @ self.states * self.grid.spacing

    def side_projector(self, mask: np.ndarray) -> np.ndarray:
        """<phi_i| P_side |phi_j> for the grid points selected by mask."""
        sub = self.states[mask]
        return sub.T @ sub * self.grid.spacing


def solve_tridiagonal(
    ham: tuple[np.ndarray, np.ndarray], grid: SpatialGrid, n_basis: int
) -> EigenBasis:
    """Lowest n_basis eigenpairs of a (diag, off) Hamiltonian on the grid."""
    diag, off = ham
    if n_basis > grid.n_points:
        raise ValueError(f"n_basis={n_basis} exceeds grid size {grid.n_points}")
    try:
        energies, vecs = eigh_tridiagonal(
            diag, off, select="i", select_range=(0, n_basis - 1)
        )
    except np.linalg.LinAlgError as err:
        raise RuntimeError(
            f"tridiagonal eigensolver failed for the lowest {n_basis} states: {err}"
        ) from err
    vecs = vecs / np.sqrt(grid.spacing)
    # deterministic global sign: the point of largest magnitude is positive
    for i in range(n_basis):
        peak = np.argmax(np.abs(vecs[:, i]))
        if vecs[peak, i] < 0.0:
            vecs[:, i] = -vecs[:, i]
    return EigenBasis(
        grid=grid,
        energies=energies,
        states=vecs,
        kinetic_coefficient=float(-off[0]),
    )


def solve_eigenpairs(
    grid: SpatialGrid,
    params: pot.DoubleWellParams,
    scale: MassScale,
    n_basis: int = 16,
) -> EigenBasis:
    """Diagonalize the double-well grid Hamiltonian, keep the lowest pairs."""
    return solve_tridiagonal(build_hamiltonian(grid, params, scale), grid, n_basis)


def apply_hamiltonian(ham: tuple[np.ndarray, np.ndarray], vec: np.ndarray) -> np.ndarray:
    """H @ vec for a (diag, off) tridiagonal pair."""
    diag, off = ham
    out = diag * vec
    out[:-1] += off * vec[1:]
    out[1:] += off * vec[:-1]
    return out
