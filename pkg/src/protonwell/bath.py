"""Thermal environment: spectral density and eigenstate transition rates.

The bath enters only through its power spectral density

    J(w) = 4 sqrt(2) dVr hbar wp w^3 / ((wp^4 + w^4) (exp(hbar w / kT) - 1))

(w in rad/ps, dVr the bath rearrangement energy in cm^-1, wp the
characteristic phonon frequency in rad/ps) and the golden-rule rates it
induces between energy eigenstates,

    W[j, k] = (2 pi / hbar^2) |<j| zeta |k>|^2 J(w_jk),   w_jk = (E_j - E_k)/hbar,

for j != k, closed on the diagonal by W[k, k] = -sum_j W[j, k].  W[j, k]
is the rate of the k -> j transition in 1/ps.  Because J(-w)/J(w) is
exactly exp(hbar w / kT) and the coupling matrix is symmetric, the rates
satisfy detailed balance identically, making the Boltzmann distribution
over the retained spectrum the unique fixed point of the generator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eigensolver import EigenBasis
from .units import HBAR_CM1_PS, KB_CM1_PER_K


@dataclass(frozen=True)
class BathParams:
    """Temperature (K), phonon cutoff (rad/ps), rearrangement energy (cm^-1)."""

    temperature: float
    phonon_frequency: float
    rearrangement_energy: float

    def __post_init__(self):
        if self.temperature < 0.0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")
        if self.phonon_frequency <= 0.0:
            raise ValueError(f"phonon frequency must be > 0, got {self.phonon_frequency}")
        if self.rearrangement_energy < 0.0:
            raise ValueError(
                f"rearrangement energy must be >= 0, got {self.rearrangement_energy}"
            )


def spectral_density(omega, bath: BathParams):
    """J(omega); scalar or array, continuous through omega = 0.

    For omega -> 0 the Bose factor cancels one power of omega and the
    w^3 numerator drives the limit to zero, which is returned exactly.
    Negative frequencies are the emission side: J(-w) = exp(hbar w/kT) J(w).
    """
    if bath.temperature <= 0.0:
        raise ValueError("spectral density needs T > 0; T = 0 disables the bath")
    w = np.asarray(omega, dtype=float)
    kt = KB_CM1_PER_K * bath.temperature
    x = HBAR_CM1_PS * w / kt
    wp = bath.phonon_frequency
    num = 4.0 * np.sqrt(2.0) * bath.rearrangement_energy * HBAR_CM1_PS * wp * w**3
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        val = np.where(w == 0.0, 0.0, num / ((wp**4 + w**4) * np.expm1(x)))
    return float(val) if np.isscalar(omega) else val


def coupling_matrix(basis: EigenBasis) -> np.ndarray:
    """Squared position matrix elements q2[j, k] = <j|zeta|k>^2.

    Symmetrized explicitly: the matrix product leaves ~1 ulp asymmetry,
    which would otherwise leak into the detailed-balance ratio of the
    weakest cross-well rates.
    """
    q = basis.position_operator()
    q = 0.5 * (q + q.T)
    return q * q


@dataclass(frozen=True)
class RateMatrix:
    """Markov generator on eigenstate occupations (column convention)."""

    rates: np.ndarray      # (n, n), 1/ps; rates[j, k] is k -> j for j != k
    energies: np.ndarray   # (n,), cm^-1, for stationary-state checks

    @property
    def n_states(self) -> int:
        return self.rates.shape[0]

    def out_rates(self) -> np.ndarray:
        """Total escape rate from each state, sum_j!=k W[j, k]."""
        return -np.diag(self.rates)

    def boltzmann_distribution(self, temperature: float) -> np.ndarray:
        kt = KB_CM1_PER_K * temperature
        p = np.exp(-(self.energies - self.energies[0]) / kt)
        return p / p.sum()


def rate_matrix(basis: EigenBasis, bath: BathParams) -> RateMatrix:
    """Golden-rule transition-rate matrix for the basis in this bath."""
    if basis.n_basis < 2:
        raise ValueError("need at least two states for transitions")
    e = basis.energies
    omega = (e[:, None] - e[None, :]) / HBAR_CM1_PS
    q2 = coupling_matrix(basis)
    w = 2.0 * np.pi / HBAR_CM1_PS**2 * q2 * spectral_density(omega, bath)
    np.fill_diagonal(w, 0.0)
    np.fill_diagonal(w, -w.sum(axis=0))
    return RateMatrix(rates=w, energies=e.copy())


def detailed_balance_violation(rm: RateMatrix, temperature: float) -> float:
    """Largest relative deviation from W_jk/W_kj = exp(-(E_j-E_k)/kT)."""
    kt = KB_CM1_PER_K * temperature
    w = rm.rates
    worst = 0.0
    n = rm.n_states
    for j in range(n):
        for k in range(j + 1, n):
            if w[j, k] > 0.0 and w[k, j] > 0.0:
                expected = np.exp(-(rm.energies[j] - rm.energies[k]) / kt)
                worst = max(worst, abs(w[j, k] / w[k, j] / expected - 1.0))
    return worst
