"""Position-basis density-matrix evolution with periodic pointer measurements.

The state is the full complex N x N matrix rho_nm on the spatial grid,
normalized so that trace(rho) * dzeta = 1.  Closed evolution integrates
the commutator equation for the tridiagonal grid Hamiltonian with
classical RK4; a measurement multiplies the elements whose row and
column fall in different diagonal blocks by exp(-y (n-m)^2) and leaves
the in-block elements alone.  Nothing here is stochastic: a measurement
is a deterministic map on the density matrix, so identical runs produce
identical trajectories.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from . import observables as obs
from .eigensolver import EigenBasis, MassScale, SpatialGrid
from .potential import DoubleWellParams, WellPartition, evaluate
from .units import HBAR_CM1_PS

log = logging.getLogger(__name__)

# relative mismatch between 1/f and its rounded step count beyond which the
# schedule is rejected instead of silently rounded
_SCHEDULE_TOL = 0.2


@dataclass(frozen=True)
class GridHamiltonian:
    """Potential samples and kinetic prefactor defining H on the grid."""

    grid: SpatialGrid
    v: np.ndarray          # cm^-1 at each grid point
    kinetic: float         # hbar^2 / (2 m dX_phys^2), cm^-1
    hbar: float = HBAR_CM1_PS

    @classmethod
    def build(cls, grid: SpatialGrid, params: DoubleWellParams, scale: MassScale):
        return cls(
            grid=grid,
            v=evaluate(grid.points, params),
            kinetic=scale.kinetic_coefficient(grid),
        )

    def tridiagonal(self) -> tuple[np.ndarray, np.ndarray]:
        return 2.0 * self.kinetic + self.v, np.full(self.grid.n_points - 1, -self.kinetic)


@dataclass
class DensityMatrixGrid:
    """rho(x, x', t) on the grid, with the Hamiltonian it evolves under."""

    elements: np.ndarray   # complex (N, N)
    ham: GridHamiltonian
    time: float = 0.0

    @property
    def grid(self) -> SpatialGrid:
        return self.ham.grid

    def copy(self) -> "DensityMatrixGrid":
        return DensityMatrixGrid(self.elements.copy(), self.ham, self.time)

    def trace_defect(self) -> float:
        return abs(np.trace(self.elements) * self.grid.spacing - 1.0)

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.elements - self.elements.conj().T)))

    def energy_expectation(self) -> float:
        """Tr(rho H) * dzeta in cm^-1."""
        r = self.elements
        diag_term = np.sum((2.0 * self.ham.kinetic + self.ham.v) * np.real(np.diag(r)))
        hop_term = -self.ham.kinetic * np.sum(
            np.real(np.diagonal(r, 1)) + np.real(np.diagonal(r, -1))
        )
        return float((diag_term + hop_term) * self.grid.spacing)

    def min_eigenvalue(self) -> float:
        """Smallest eigenvalue of rho * dzeta (negativity diagnostic)."""
        w = np.linalg.eigvalsh(self.elements * self.grid.spacing)
        return float(w[0])


def gaussian_wavefunction(grid: SpatialGrid, centre: float, width: float) -> np.ndarray:
    """Normalized real Gaussian amplitudes, |psi|^2 of standard deviation `width`.

    Raises when the analytic probability mass outside the box exceeds
    1e-10, since the hard-wall boundary would clip such a state.
    """
    if width <= 0.0:
        raise ValueError(f"width must be > 0, got {width}")
    if not (grid.zeta_min < centre < grid.zeta_max):
        raise ValueError(f"gaussian centre {centre} lies outside the grid")
    lo = (grid.zeta_min - centre) / (width * math.sqrt(2.0))
    hi = (grid.zeta_max - centre) / (width * math.sqrt(2.0))
    inside = 0.5 * (math.erf(hi) - math.erf(lo))
    if inside < 1.0 - 1e-10:
        raise ValueError(
            f"gaussian (centre={centre}, width={width}) leaks off the grid: "
            f"probability inside = {inside:.12f}"
        )
    z = grid.points
    psi = np.exp(-((z - centre) ** 2) / (4.0 * width**2))
    return psi / math.sqrt(np.sum(psi**2) * grid.spacing)


def init_gaussian(
    ham: GridHamiltonian, centre: float, width: float
) -> DensityMatrixGrid:
    """Pure-state Gaussian wave packet, |psi|^2 having standard deviation `width`."""
    psi = gaussian_wavefunction(ham.grid, centre, width).astype(np.complex128)
    return DensityMatrixGrid(np.outer(psi, psi.conj()), ham)


def init_from_eigenstate(
    basis: EigenBasis, index: int, ham: GridHamiltonian
) -> DensityMatrixGrid:
    """Pure state built from eigenstate `index` of the same grid problem."""
    if not 0 <= index < basis.n_basis:
        raise ValueError(f"eigenstate index {index} out of range 0..{basis.n_basis - 1}")
    phi = basis.states[:, index].astype(np.complex128)
    return DensityMatrixGrid(np.outer(phi, phi.conj()), ham)


def liouville_rhs(rho: np.ndarray, ham: GridHamiltonian) -> np.ndarray:
    """Reference numpy right-hand side of the commutator equation.

    Identical in exact arithmetic to the jitted kernel used by the time
    loop; kept vectorized and allocation-friendly so tests can verify the
    kernel against an independently written implementation.
    """
    acc = np.zeros_like(rho)
    acc[1:, :] += rho[:-1, :]
    acc[:-1, :] += rho[1:, :]
    acc[:, 1:] -= rho[:, :-1]
    acc[:, :-1] -= rho[:, 1:]
    dv = ham.v[:, None] - ham.v[None, :]
    return (-1j / ham.hbar) * (-ham.kinetic * acc + dv * rho)


def rk4_step(state: DensityMatrixGrid, dt: float) -> DensityMatrixGrid:
    """Single classical RK4 step (out of place)."""
    if dt <= 0.0:
        raise ValueError(f"dt must be > 0, got {dt}")
    out = state.copy()
    _kernels.rk4_advance(out.elements, out.ham.v, out.ham.kinetic, out.ham.hbar, dt, 1)
    out.time = state.time + dt
    return out


@dataclass(frozen=True)
class MeasurementSchedule:
    """Periodic partial position measurement.

    frequency in 1/ps; harshness y >= 0 sets the decay factor
    exp(-y (n-m)^2); block_size grid points per diagonal block (None
    means N/2).  With gate_blocks the factor only touches elements whose
    indices fall in different blocks, so a coarse measurement leaves
    each block's internal coherences alone; gate_blocks=False applies
    the factor to every off-diagonal element, for sensitivity studies.
    """

    frequency: float
    harshness: float = 1e-4
    block_size: int | None = None
    gate_blocks: bool = True

    def __post_init__(self):
        if self.frequency <= 0.0:
            raise ValueError(f"measurement frequency must be > 0, got {self.frequency}")
        if self.harshness < 0.0:
            raise ValueError(f"harshness must be >= 0, got {self.harshness}")

    def resolved_block(self, n_points: int) -> int:
        block = n_points // 2 if self.block_size is None else self.block_size
        if block <= 0 or n_points % block != 0:
            raise ValueError(
                f"block_size {block} does not divide the grid size {n_points}"
            )
        return block

    def decay_matrix(self, n_points: int) -> np.ndarray:
        """The elementwise factor a measurement multiplies rho by."""
        block = self.resolved_block(n_points)
        idx = np.arange(n_points)
        dist2 = (idx[:, None] - idx[None, :]).astype(float) ** 2
        with np.errstate(under="ignore"):
            decay = np.exp(-self.harshness * dist2)
        if self.gate_blocks:
            same_block = (idx[:, None] // block) == (idx[None, :] // block)
            return np.where(same_block, 1.0, decay)
        return decay


def apply_measurement(
    state: DensityMatrixGrid, sched: MeasurementSchedule
) -> DensityMatrixGrid:
    """Apply one pointer measurement; trace and Hermiticity are exact."""
    out = state.copy()
    out.elements *= sched.decay_matrix(state.grid.n_points)
    return out


def _resolve_steps(interval: float, dt: float, what: str) -> int:
    steps = int(round(interval / dt))
    if steps < 1:
        raise ValueError(f"{what} interval {interval} ps is below the step size {dt} ps")
    mismatch = abs(steps * dt - interval) / interval
    if mismatch > _SCHEDULE_TOL:
        raise ValueError(
            f"{what} interval {interval} ps is incommensurate with dt={dt} ps "
            f"(relative rounding error {mismatch:.3f})"
        )
    if mismatch > 1e-12:
        log.warning(
            "%s interval %.6g ps rounded to %d steps of %.6g ps (actual %.6g ps)",
            what, interval, steps, dt, steps * dt,
        )
    return steps


def evolve_with_schedule(
    state0: DensityMatrixGrid,
    sched: MeasurementSchedule | None,
    t_end: float,
    dt: float,
    record_every: float,
    partition: WellPartition,
    basis: EigenBasis | None = None,
    track_min_eigenvalue: bool = False,
) -> obs.Trajectory:
    """Alternate RK4 integration with scheduled measurements.

    sched=None (or a measurement interval longer than t_end) degenerates
    to closed evolution.  Observables are recorded at t=0 and then every
    `record_every` ps; when a record instant coincides with a measurement
    the post-measurement state is recorded.
    """
    if t_end <= 0.0 or dt <= 0.0:
        raise ValueError("t_end and dt must be positive")
    total_steps = int(round(t_end / dt))
    rec_steps = _resolve_steps(record_every, dt, "record")
    meas_steps = None
    decay = None
    if sched is not None:
        if dt > 1.0 / sched.frequency:
            raise ValueError(
                f"dt={dt} ps exceeds the measurement interval {1.0 / sched.frequency} ps"
            )
        meas_steps = _resolve_steps(1.0 / sched.frequency, dt, "measurement")
        decay = sched.decay_matrix(state0.grid.n_points)

    state = state0.copy()
    rec = obs.TrajectoryRecorder(partition, basis, track_min_eigenvalue)
    rec.record(state)
    step = 0
    while step < total_steps:
        nxt = min(total_steps, step + rec_steps - step % rec_steps)
        if meas_steps is None:
            _kernels.rk4_advance(
                state.elements, state.ham.v, state.ham.kinetic, state.ham.hbar,
                dt, nxt - step,
            )
        else:
            _kernels.rk4_advance_measured(
                state.elements, state.ham.v, state.ham.kinetic, state.ham.hbar,
                dt, nxt - step, step, meas_steps, decay,
            )
        step = nxt
        state.time = step * dt
        rec.record(state)
    return rec.build()
