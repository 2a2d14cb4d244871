import numpy as np
import pytest

from protonwell import bath, lindblad
from protonwell import eigensolver as es
from protonwell import potential
from protonwell.units import HBAR_CM1_PS

BENZOIC = potential.DoubleWellParams(barrier=620.0, asymmetry=63.6)
SCALE = es.MassScale()


@pytest.fixture(scope="module")
def system():
    grid = es.SpatialGrid(128, -2.2, 2.2)
    basis = es.solve_eigenpairs(grid, BENZOIC, SCALE, 16)
    part = potential.partition(grid, BENZOIC)
    rates = bath.rate_matrix(basis, bath.BathParams(200.0, 5.0, 9.604))
    return basis, part, rates


def coherent_state(basis, seed=0):
    rng = np.random.default_rng(seed)
    alpha = rng.normal(size=basis.n_basis) + 1j * rng.normal(size=basis.n_basis)
    return lindblad.init_from_coefficients(basis, alpha)


def test_closed_rhs_is_pure_phase(system):
    basis, _, _ = system
    st = coherent_state(basis)
    rhs = lindblad.master_rhs(st, None)
    e = basis.energies
    expected = (e[:, None] - e[None, :]) / (1j * HBAR_CM1_PS) * st.elements
    np.fill_diagonal(expected, 0.0)
    assert np.max(np.abs(np.diag(rhs))) == 0.0
    assert np.allclose(rhs, expected, rtol=1e-13, atol=1e-18)


def test_boltzmann_diagonal_state_is_stationary(system):
    basis, _, rates = system
    pi = rates.boltzmann_distribution(200.0)
    st = lindblad.EigenDensityMatrix(np.diag(pi).astype(np.complex128), basis)
    rhs = lindblad.master_rhs(st, rates)
    assert np.max(np.abs(rhs)) <= 1e-14 * np.max(np.abs(rates.rates))


def test_ground_state_outflow_feeds_first_excited(system):
    basis, _, rates = system
    st = lindblad.init_from_eigenstate(basis, 0)
    rhs = lindblad.master_rhs(st, rates)
    gains = np.diag(rhs).real.copy()
    gains[0] = -np.inf   # ignore the loss term on the ground state itself
    assert int(np.argmax(gains)) == 1


def test_rk4_step_doubling_order(system):
    # a coherent initial state, so the phase error is measurable above roundoff
    basis, part, rates = system
    from protonwell.pointer import gaussian_wavefunction

    psi = gaussian_wavefunction(basis.grid, -1.0, 0.18)
    st = lindblad.init_from_coefficients(basis, basis.project(psi))
    vals = []
    for dt in (0.002, 0.001, 0.0005):
        traj = lindblad.evolve(st, rates, t_end=4.096, dt=dt,
                               record_every=4.096, partition=part)
        vals.append(traj.p_shallow[-1])
    e1, e2 = abs(vals[0] - vals[1]), abs(vals[1] - vals[2])
    assert e2 > 0.0
    assert 8.0 <= e1 / e2 <= 32.0


def test_stability_guard_raises(system):
    basis, part, rates = system
    st = lindblad.init_from_eigenstate(basis, 0)
    stiff_dt = 0.11 / float(np.max(np.abs(np.diag(rates.rates))))
    with pytest.raises(lindblad.StabilityError):
        lindblad.rk4_step(st, rates, stiff_dt)
    with pytest.raises(lindblad.StabilityError):
        lindblad.evolve(st, rates, 1.0, stiff_dt, 0.5, part)


def test_long_time_diagonal_reaches_boltzmann(system):
    basis, part, _ = system
    # triple the coupling so the slowest mode fully relaxes within 100 ps
    rates = bath.rate_matrix(basis, bath.BathParams(200.0, 5.0, 30.0))
    st = lindblad.init_from_eigenstate(basis, 0)
    traj = lindblad.evolve(st, rates, t_end=100.0, dt=1e-3,
                           record_every=10.0, partition=part)
    pi = rates.boltzmann_distribution(200.0)
    assert np.max(np.abs(traj.occupations[-1] - pi)) <= 1e-6


def test_coherences_decay_exponentially(system):
    basis, part, rates = system
    st = coherent_state(basis, seed=3)
    t_end = 2.0
    gamma = rates.out_rates()
    out = st.copy()
    phase, damp, w = lindblad._generator_parts(rates, basis.energies, st.n_states)
    lindblad._advance(out.elements, phase, damp, w, 1e-3, 2000)
    expected01 = abs(st.elements[0, 1]) * np.exp(-0.5 * (gamma[0] + gamma[1]) * t_end)
    assert abs(out.elements[0, 1]) == pytest.approx(expected01, rel=1e-6)
    # magnitudes never grow
    assert abs(out.elements[0, 1]) < abs(st.elements[0, 1])


def test_diagonal_dynamics_is_stochastic_semigroup(system):
    basis, part, rates = system
    rng = np.random.default_rng(11)
    p0 = rng.random(16)
    p0 /= p0.sum()
    st = lindblad.EigenDensityMatrix(np.diag(p0).astype(np.complex128), basis)
    traj = lindblad.evolve(st, rates, t_end=20.0, dt=1e-3,
                           record_every=1.0, partition=part)
    occ = traj.occupations
    assert np.all(occ >= -1e-10)
    assert np.all(occ <= 1.0 + 1e-10)
    assert np.max(np.abs(occ.sum(axis=1) - 1.0)) <= 1e-10


def test_trace_conserved_over_long_run(system):
    basis, part, rates = system
    st = coherent_state(basis, seed=4)
    traj = lindblad.evolve(st, rates, t_end=100.0, dt=1e-3,
                           record_every=20.0, partition=part)
    assert np.max(traj.trace_defect) <= 1e-10


def test_zero_rates_equals_closed_evolution(system):
    basis, part, _ = system
    st = coherent_state(basis, seed=5)
    a = lindblad.evolve(st, None, t_end=1.0, dt=1e-3, record_every=0.5, partition=part)
    zero = bath.RateMatrix(rates=np.zeros((16, 16)), energies=basis.energies.copy())
    b = lindblad.evolve(st, zero, t_end=1.0, dt=1e-3, record_every=0.5, partition=part)
    assert np.array_equal(a.p_shallow, b.p_shallow)
    # diagonals constant under pure phases
    assert np.max(np.abs(a.occupations - a.occupations[0])) <= 1e-12


def test_dimension_mismatch_rejected(system):
    basis, _, rates = system
    small = lindblad.EigenDensityMatrix(np.eye(4, dtype=np.complex128) / 4.0, basis)
    # a 4-state density matrix against 16-state rates is fine (sliced), but
    # rates below the state count are not
    lindblad.master_rhs(small, rates)
    big = lindblad.EigenDensityMatrix(np.eye(16, dtype=np.complex128) / 16.0, basis)
    small_rates = bath.RateMatrix(rates=rates.rates[:4, :4].copy(),
                                  energies=rates.energies[:4].copy())
    with pytest.raises(ValueError):
        lindblad.master_rhs(big, small_rates)


def test_initial_state_validation(system):
    basis, _, _ = system
    with pytest.raises(ValueError):
        lindblad.init_from_eigenstate(basis, 16)
    with pytest.raises(ValueError):
        lindblad.init_from_coefficients(basis, np.zeros(16))
