import numpy as np
import pytest

from protonwell import lindblad, observables as obs, pointer, potential
from protonwell import eigensolver as es

BENZOIC = potential.DoubleWellParams(barrier=620.0, asymmetry=63.6)
SYMMETRIC = potential.DoubleWellParams(barrier=620.0, asymmetry=0.0)
SCALE = es.MassScale()


@pytest.fixture(scope="module")
def system():
    grid = es.SpatialGrid(128, -2.0, 2.0)
    ham = pointer.GridHamiltonian.build(grid, BENZOIC, SCALE)
    basis = es.solve_eigenpairs(grid, BENZOIC, SCALE, 16)
    part = potential.partition(grid, BENZOIC)
    return grid, ham, basis, part


def test_deep_only_state_has_zero_shallow_probability(system):
    grid, ham, _, part = system
    psi = np.zeros(grid.n_points, dtype=np.complex128)
    psi[10:30] = 1.0
    psi /= np.sqrt(np.sum(np.abs(psi) ** 2) * grid.spacing)
    st = pointer.DensityMatrixGrid(np.outer(psi, psi.conj()), ham)
    assert obs.shallow_probability_grid(st, part) <= 1e-10


def test_uniform_diagonal_half_half():
    grid = es.SpatialGrid(128, -2.0, 2.0)
    ham = pointer.GridHamiltonian.build(grid, SYMMETRIC, SCALE)
    part = potential.partition(grid, SYMMETRIC)
    rho = np.eye(128, dtype=np.complex128) / (128 * grid.spacing)
    st = pointer.DensityMatrixGrid(rho, ham)
    assert obs.shallow_probability_grid(st, part) == pytest.approx(0.5, abs=1e-12)


def test_ground_state_shallow_mass_small_but_nonzero():
    # independent oracle: plain quadrature of |phi_0|^2 on the N=512 grid
    grid = es.SpatialGrid(512, -2.0, 2.0)
    ham = pointer.GridHamiltonian.build(grid, BENZOIC, SCALE)
    basis = es.solve_eigenpairs(grid, BENZOIC, SCALE, 1)
    part = potential.partition(grid, BENZOIC)
    st = pointer.init_from_eigenstate(basis, 0, ham)
    p = obs.shallow_probability_grid(st, part)
    quad = float(np.sum(basis.states[part.shallow_mask, 0] ** 2) * grid.spacing)
    assert p == pytest.approx(quad, rel=1e-12)
    assert 1e-5 < p < 1e-2


def test_grid_and_eigen_agree_for_pure_eigenstate(system):
    grid, ham, basis, part = system
    st = pointer.init_from_eigenstate(basis, 0, ham)
    p_grid = obs.shallow_probability_grid(st, part)
    rho_e = np.zeros((16, 16), dtype=np.complex128)
    rho_e[0, 0] = 1.0
    p_eig = obs.shallow_probability_eigen(rho_e, basis, part)
    assert abs(p_grid - p_eig) <= 1e-10


def test_projector_exact_in_complete_basis(system):
    # the sharp well cut has grid-scale frequency content, so the truncated
    # theta is only approximately idempotent at any small basis size; in the
    # complete basis it is a projector to machine precision
    grid, _, _, part = system
    full = es.solve_eigenpairs(grid, BENZOIC, SCALE, grid.n_points)
    theta = full.side_projector(part.shallow_mask)
    assert np.linalg.norm(theta @ theta - theta, ord=2) <= 1e-12
    small = es.solve_eigenpairs(grid, BENZOIC, SCALE, 16)
    theta16 = small.side_projector(part.shallow_mask)
    resid = np.linalg.norm(theta16 @ theta16 - theta16, ord=2)
    assert resid < 0.2   # bounded leakage; exactness only matters on the span


def test_mixed_symmetric_pair_is_half():
    grid = es.SpatialGrid(128, -2.0, 2.0)
    basis = es.solve_eigenpairs(grid, SYMMETRIC, SCALE, 2)
    part = potential.partition(grid, SYMMETRIC)
    rho = 0.5 * np.eye(2, dtype=np.complex128)
    assert obs.shallow_probability_eigen(rho, basis, part) == pytest.approx(0.5, abs=1e-9)


def test_occupations_of_pure_eigenstate(system):
    grid, ham, basis, _ = system
    for k in (0, 3):
        st = pointer.init_from_eigenstate(basis, k, ham)
        occ = obs.occupations_grid(st, basis)
        expected = np.zeros(16)
        expected[k] = 1.0
        assert np.max(np.abs(occ - expected)) <= 1e-10


def test_occupations_sum_bounded(system):
    grid, ham, basis, _ = system
    st = pointer.init_gaussian(ham, -1.0, 0.15)
    occ = obs.occupations_grid(st, basis)
    assert occ.sum() <= 1.0 + 1e-8


def test_occupations_constant_under_closed_evolution(system):
    grid, ham, basis, part = system
    st = pointer.init_gaussian(ham, -1.0, 0.15)
    traj = pointer.evolve_with_schedule(
        st, None, t_end=0.2, dt=1e-4, record_every=0.05, partition=part, basis=basis
    )
    assert np.max(np.abs(traj.occupations - traj.occupations[0])) <= 1e-8


def test_shallow_plus_deep_equals_trace(system):
    grid, ham, basis, part = system
    st = pointer.init_gaussian(ham, -1.0, 0.15)
    p_sh = obs.shallow_probability_grid(st, part)
    flipped = potential.WellPartition(
        divider=part.divider, deep_is_left=part.deep_is_left,
        shallow_mask=~part.shallow_mask,
    )
    p_deep = obs.shallow_probability_grid(st, flipped)
    trace = np.trace(st.elements).real * grid.spacing
    assert p_sh + p_deep == pytest.approx(trace, abs=1e-10)


def test_representation_consistency_for_retained_states(system):
    grid, ham, basis, part = system
    rng = np.random.default_rng(12)
    alpha = rng.normal(size=16) + 1j * rng.normal(size=16)
    alpha /= np.linalg.norm(alpha)
    psi = (basis.states @ alpha).astype(np.complex128)
    st = pointer.DensityMatrixGrid(np.outer(psi, psi.conj()), ham)
    p_grid = obs.shallow_probability_grid(st, part)
    rho_e = np.outer(alpha, alpha.conj())
    p_eig = obs.shallow_probability_eigen(rho_e, basis, part)
    assert abs(p_grid - p_eig) <= 1e-6


def test_partition_grid_mismatch_rejected(system):
    _, ham, _, part = system
    small_grid = es.SpatialGrid(64, -2.0, 2.0)
    small_ham = pointer.GridHamiltonian.build(small_grid, BENZOIC, SCALE)
    st = pointer.DensityMatrixGrid(
        np.eye(64, dtype=np.complex128) / (64 * small_grid.spacing), small_ham
    )
    with pytest.raises(ValueError):
        obs.shallow_probability_grid(st, part)


def test_trajectory_validation():
    with pytest.raises(ValueError):
        obs.Trajectory(
            times=np.array([0.0, 0.0]),
            p_shallow=np.array([0.1, 0.1]),
            trace_defect=np.zeros(2),
            hermiticity_defect=np.zeros(2),
            energy=np.zeros(2),
        )
    with pytest.raises(ValueError):
        obs.Trajectory(
            times=np.array([0.0, 1.0]),
            p_shallow=np.array([0.1, 1.5]),
            trace_defect=np.zeros(2),
            hermiticity_defect=np.zeros(2),
            energy=np.zeros(2),
        )
