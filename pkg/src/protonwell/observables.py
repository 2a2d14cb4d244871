"""Observables and trajectory bookkeeping shared by both propagators.

The quantity of interest everywhere is the probability of finding the
proton on the shallow side of the barrier; occupations of the energy
eigenstates and numerical health indicators (trace defect, Hermiticity
defect, energy expectation) ride along in every recorded trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eigensolver import EigenBasis
from .potential import WellPartition

_IMAG_TOL = 1e-12


def shallow_probability_grid(state, part: WellPartition) -> float:
    """Sum of the diagonal over shallow-side grid points, times the spacing."""
    rho = state.elements
    if rho.shape[0] != part.shallow_mask.shape[0]:
        raise ValueError(
            f"partition built for {part.shallow_mask.shape[0]} points, "
            f"state has {rho.shape[0]}"
        )
    diag = np.diag(rho)[part.shallow_mask]
    if diag.size and np.max(np.abs(diag.imag)) > _IMAG_TOL:
        raise RuntimeError(
            f"diagonal developed imaginary parts up to {np.max(np.abs(diag.imag)):.3e}"
        )
    return float(np.sum(diag.real) * state.grid.spacing)


def shallow_probability_eigen(
    rho: np.ndarray, basis: EigenBasis, part: WellPartition
) -> float:
    """Tr(rho Theta) with Theta the shallow-side projector in the eigenbasis."""
    theta = basis.side_projector(part.shallow_mask)
    n = rho.shape[0]
    val = np.sum(rho * theta[:n, :n].T)
    if abs(val.imag) > _IMAG_TOL:
        raise RuntimeError(f"shallow probability has imaginary residue {val.imag:.3e}")
    return float(val.real)


def occupations_grid(state, basis: EigenBasis) -> np.ndarray:
    """<phi_i| rho |phi_i> dzeta^2 for a grid density matrix."""
    phi = basis.states
    dz = basis.grid.spacing
    occ = np.einsum("ni,nm,mi->i", phi, state.elements, phi).real * dz * dz
    return occ


def occupations_eigen(rho: np.ndarray) -> np.ndarray:
    """Diagonal of an eigenbasis density matrix."""
    return np.diag(rho).real.copy()


@dataclass
class Trajectory:
    """Recorded time series of one run.

    occupations is (n_records, n_states) when an eigenbasis was
    available, else None; min_eigenvalue likewise optional.
    """

    times: np.ndarray
    p_shallow: np.ndarray
    trace_defect: np.ndarray
    hermiticity_defect: np.ndarray
    energy: np.ndarray
    occupations: np.ndarray | None = None
    min_eigenvalue: np.ndarray | None = None

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0.0):
            raise ValueError("trajectory times must be strictly increasing")
        if np.any(self.p_shallow < -1e-8) or np.any(self.p_shallow > 1.0 + 1e-8):
            raise ValueError("p_shallow left [0, 1] beyond tolerance")

    @property
    def n_records(self) -> int:
        return len(self.times)

    def at_time(self, t: float) -> int:
        """Index of the record closest to time t."""
        return int(np.argmin(np.abs(self.times - t)))


class TrajectoryRecorder:
    """Accumulates records from a grid-basis evolution."""

    def __init__(self, part: WellPartition, basis: EigenBasis | None = None,
                 track_min_eigenvalue: bool = False):
        self.part = part
        self.basis = basis
        self.track_min = track_min_eigenvalue
        self._rows = {k: [] for k in
                      ("t", "p", "trace", "herm", "energy", "occ", "mineig")}

    def record(self, state):
        r = self._rows
        r["t"].append(state.time)
        r["p"].append(shallow_probability_grid(state, self.part))
        r["trace"].append(state.trace_defect())
        r["herm"].append(state.hermiticity_defect())
        r["energy"].append(state.energy_expectation())
        if self.basis is not None:
            r["occ"].append(occupations_grid(state, self.basis))
        if self.track_min:
            r["mineig"].append(state.min_eigenvalue())

    def build(self) -> Trajectory:
        r = self._rows
        return Trajectory(
            times=np.array(r["t"]),
            p_shallow=np.array(r["p"]),
            trace_defect=np.array(r["trace"]),
            hermiticity_defect=np.array(r["herm"]),
            energy=np.array(r["energy"]),
            occupations=np.array(r["occ"]) if r["occ"] else None,
            min_eigenvalue=np.array(r["mineig"]) if r["mineig"] else None,
        )


class EigenTrajectoryRecorder:
    """Accumulates records from an eigenbasis evolution."""

    def __init__(self, part: WellPartition, basis: EigenBasis):
        self.part = part
        self.basis = basis
        self.theta = basis.side_projector(part.shallow_mask)
        self._rows = {k: [] for k in ("t", "p", "trace", "herm", "energy", "occ")}

    def record(self, state):
        rho = state.elements
        n = rho.shape[0]
        r = self._rows
        r["t"].append(state.time)
        p = np.sum(rho * self.theta[:n, :n].T)
        r["p"].append(float(p.real))
        r["trace"].append(state.trace_defect())
        r["herm"].append(state.hermiticity_defect())
        r["energy"].append(state.energy_expectation())
        r["occ"].append(occupations_eigen(rho))

    def build(self) -> Trajectory:
        r = self._rows
        return Trajectory(
            times=np.array(r["t"]),
            p_shallow=np.array(r["p"]),
            trace_defect=np.array(r["trace"]),
            hermiticity_defect=np.array(r["herm"]),
            energy=np.array(r["energy"]),
            occupations=np.array(r["occ"]),
        )
