"""Numba hot loops for the position-basis density-matrix propagation.

The N x N complex propagation at sub-femtosecond steps is the only part
of the engine where Python-level array chatter matters (a 30 ps run is
600k RK4 steps), so the RK4 inner loop lives here as a jitted kernel.
pointer.py keeps a pure-numpy right-hand side that the tests compare
against this kernel element-by-element.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, fastmath=True)
def commutator_rhs(rho, out, v, kin, hbar):
    """d(rho)/dt for the tridiagonal Hamiltonian, Dirichlet boundaries.

    out[n,m] = (-i/hbar) * ( -kin*(rho[n-1,m]+rho[n+1,m]-rho[n,m-1]-rho[n,m+1])
                             + (v[n]-v[m])*rho[n,m] )
    """
    n = rho.shape[0]
    c = -1j / hbar
    for i in range(n):
        for j in range(n):
            acc = 0.0 + 0.0j
            if i > 0:
                acc += rho[i - 1, j]
            if i < n - 1:
                acc += rho[i + 1, j]
            if j > 0:
                acc -= rho[i, j - 1]
            if j < n - 1:
                acc -= rho[i, j + 1]
            out[i, j] = c * (-kin * acc + (v[i] - v[j]) * rho[i, j])


@njit(cache=True, fastmath=True)
def _rk4_step_inplace(rho, k1, k2, k3, k4, tmp, v, kin, hbar, dt):
    n = rho.shape[0]
    commutator_rhs(rho, k1, v, kin, hbar)
    for i in range(n):
        for j in range(n):
            tmp[i, j] = rho[i, j] + 0.5 * dt * k1[i, j]
    commutator_rhs(tmp, k2, v, kin, hbar)
    for i in range(n):
        for j in range(n):
            tmp[i, j] = rho[i, j] + 0.5 * dt * k2[i, j]
    commutator_rhs(tmp, k3, v, kin, hbar)
    for i in range(n):
        for j in range(n):
            tmp[i, j] = rho[i, j] + dt * k3[i, j]
    commutator_rhs(tmp, k4, v, kin, hbar)
    for i in range(n):
        for j in range(n):
            rho[i, j] += (dt / 6.0) * (
                k1[i, j] + 2.0 * (k2[i, j] + k3[i, j]) + k4[i, j]
            )


@njit(cache=True, fastmath=True)
def rk4_advance(rho, v, kin, hbar, dt, nsteps):
    """Advance rho in place by nsteps classical RK4 steps of size dt."""
    n = rho.shape[0]
    k1 = np.empty((n, n), np.complex128)
    k2 = np.empty((n, n), np.complex128)
    k3 = np.empty((n, n), np.complex128)
    k4 = np.empty((n, n), np.complex128)
    tmp = np.empty((n, n), np.complex128)
    for _ in range(nsteps):
        _rk4_step_inplace(rho, k1, k2, k3, k4, tmp, v, kin, hbar, dt)


@njit(cache=True, fastmath=True)
def rk4_advance_measured(rho, v, kin, hbar, dt, nsteps, step0, meas_steps, decay):
    """Advance with a measurement after every meas_steps-th global step.

    step0 is the global step index already completed, so measurement
    instants stay aligned across chunked calls; decay is the elementwise
    factor applied at each measurement.
    """
    n = rho.shape[0]
    k1 = np.empty((n, n), np.complex128)
    k2 = np.empty((n, n), np.complex128)
    k3 = np.empty((n, n), np.complex128)
    k4 = np.empty((n, n), np.complex128)
    tmp = np.empty((n, n), np.complex128)
    for s in range(nsteps):
        _rk4_step_inplace(rho, k1, k2, k3, k4, tmp, v, kin, hbar, dt)
        if (step0 + s + 1) % meas_steps == 0:
            for i in range(n):
                for j in range(n):
                    rho[i, j] *= decay[i, j]
