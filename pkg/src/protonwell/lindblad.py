"""Eigenbasis master equation: free phases plus bath-induced transitions.

In the energy eigenbasis the closed part of the evolution is diagonal,

    d(rho_ij)/dt = (E_i - E_j) rho_ij / (i hbar),

and the bath adds classical gain/loss on the diagonal and pure damping
on the coherences:

    d(rho_ii)/dt += sum_k W[i, k] rho_kk - rho_ii sum_k W[k, i]
    d(rho_ij)/dt -= rho_ij (Gamma_i + Gamma_j) / 2,   Gamma_i = sum_k W[k, i]

with all sums over k != i (resp. k != j).  A diagonal initial state
therefore stays diagonal, and the diagonal dynamics alone is the Markov
jump process generated by the rate matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import observables as obs
from .bath import RateMatrix
from .eigensolver import EigenBasis
from .potential import WellPartition
from .units import HBAR_CM1_PS


class StabilityError(RuntimeError):
    """Raised when the requested step size cannot integrate the rates stably."""


@dataclass
class EigenDensityMatrix:
    """Density matrix in the retained energy eigenbasis."""

    elements: np.ndarray   # complex (n, n)
    basis: EigenBasis
    time: float = 0.0

    def copy(self) -> "EigenDensityMatrix":
        return EigenDensityMatrix(self.elements.copy(), self.basis, self.time)

    @property
    def n_states(self) -> int:
        return self.elements.shape[0]

    def trace_defect(self) -> float:
        return abs(np.trace(self.elements) - 1.0)

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.elements - self.elements.conj().T)))

    def energy_expectation(self) -> float:
        e = self.basis.energies[: self.n_states]
        return float(np.sum(e * np.diag(self.elements).real))


def init_from_coefficients(basis: EigenBasis, alpha: np.ndarray) -> EigenDensityMatrix:
    """Pure state from expansion coefficients, renormalized to unit trace."""
    a = np.asarray(alpha, dtype=np.complex128)
    norm = np.sum(np.abs(a) ** 2)
    if norm <= 0.0:
        raise ValueError("coefficients have zero norm")
    a = a / np.sqrt(norm)
    return EigenDensityMatrix(np.outer(a, a.conj()), basis)


def init_from_eigenstate(basis: EigenBasis, index: int) -> EigenDensityMatrix:
    if not 0 <= index < basis.n_basis:
        raise ValueError(f"eigenstate index {index} out of range 0..{basis.n_basis - 1}")
    a = np.zeros(basis.n_basis)
    a[index] = 1.0
    return init_from_coefficients(basis, a)


def _rhs(rho, phase, damp, w):
    out = (phase - damp) * rho
    d = np.diag(rho).real
    out[np.diag_indices_from(out)] = w @ d
    return out


def _generator_parts(rates: RateMatrix | None, energies: np.ndarray, n: int):
    e = energies[:n]
    phase = (e[:, None] - e[None, :]) / (1j * HBAR_CM1_PS)
    if rates is None:
        return phase, np.zeros((n, n)), np.zeros((n, n))
    w = rates.rates[:n, :n]
    gamma = rates.out_rates()[:n]
    damp = 0.5 * (gamma[:, None] + gamma[None, :])
    np.fill_diagonal(damp, 0.0)
    return phase, damp, w


def master_rhs(state: EigenDensityMatrix, rates: RateMatrix | None) -> np.ndarray:
    """d(rho)/dt for the current state; rates=None means closed evolution."""
    n = state.n_states
    if rates is not None and rates.n_states < n:
        raise ValueError(
            f"rate matrix covers {rates.n_states} states, state has {n}"
        )
    phase, damp, w = _generator_parts(rates, state.basis.energies, n)
    return _rhs(state.elements, phase, damp, w)


def rk4_step(
    state: EigenDensityMatrix, rates: RateMatrix | None, dt: float
) -> EigenDensityMatrix:
    """Single RK4 step with a stiffness guard on the rate scale."""
    if dt <= 0.0:
        raise ValueError(f"dt must be > 0, got {dt}")
    _check_stability(rates, dt)
    phase, damp, w = _generator_parts(rates, state.basis.energies, state.n_states)
    out = state.copy()
    _advance(out.elements, phase, damp, w, dt, 1)
    out.time = state.time + dt
    return out


def _check_stability(rates: RateMatrix | None, dt: float):
    if rates is not None:
        stiff = dt * float(np.max(np.abs(np.diag(rates.rates))))
        if stiff >= 0.1:
            raise StabilityError(
                f"dt * max|W_kk| = {stiff:.3g} >= 0.1; reduce dt or the coupling"
            )


def _advance(rho, phase, damp, w, dt, nsteps):
    for _ in range(nsteps):
        k1 = _rhs(rho, phase, damp, w)
        k2 = _rhs(rho + 0.5 * dt * k1, phase, damp, w)
        k3 = _rhs(rho + 0.5 * dt * k2, phase, damp, w)
        k4 = _rhs(rho + dt * k3, phase, damp, w)
        rho += (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)


def evolve(
    state0: EigenDensityMatrix,
    rates: RateMatrix | None,
    t_end: float,
    dt: float,
    record_every: float,
    partition: WellPartition,
) -> obs.Trajectory:
    """Deterministic eigenbasis trajectory; rates=None runs the closed system."""
    if t_end <= 0.0 or dt <= 0.0:
        raise ValueError("t_end and dt must be positive")
    _check_stability(rates, dt)
    total_steps = int(round(t_end / dt))
    rec_steps = max(1, int(round(record_every / dt)))
    phase, damp, w = _generator_parts(rates, state0.basis.energies, state0.n_states)
    state = state0.copy()
    rec = obs.EigenTrajectoryRecorder(partition, state.basis)
    rec.record(state)
    step = 0
    while step < total_steps:
        nxt = min(total_steps, step + rec_steps - step % rec_steps)
        _advance(state.elements, phase, damp, w, dt, nxt - step)
        step = nxt
        state.time = step * dt
        if step % rec_steps == 0 or step == total_steps:
            rec.record(state)
    return rec.build()
