"""Acceptance criteria for the engine, one test per criterion.

Each test prints a PASS/FAIL line with the measured number next to its
tolerance (run with -s to see them live).  The expensive grid
propagations are session fixtures shared between criteria.  Total
runtime is dominated by the measurement-frequency sweep (seven 10 ps
full-matrix runs) and the 30 ps conservation run, about 20 minutes on a
laptop-class core.
"""

import numpy as np
import pytest
from scipy.linalg import null_space

from protonwell import bath, cli, config, harness, lindblad, reports
from protonwell import eigensolver as es

# closed-system cross-validation setup: gaussian start, both methods
CROSS_CHECK = {
    "grid": {"n_points": 128, "zeta_min": -2.2, "zeta_max": 2.2},
    "initial_state": {"kind": "gaussian", "centre": -1.0, "width": 0.18},
    "method": {"kind": "compare", "pointer": None, "lindblad": None, "n_basis": 16},
    "integration": {"dt_ps": 5e-5, "t_end_ps": 3.0, "record_every_ps": 0.05},
}

# measured-pointer production setup (frequency studies)
POINTER_GRID = {"n_points": 192, "zeta_min": -2.0, "zeta_max": 2.0}

SWEEP_FREQUENCIES = (20.0, 100.0, 500.0, 1000.0, 2000.0, 3300.0, 5000.0)


def report(num: int, ok: bool, detail: str):
    print(f"\nACCEPTANCE {num:2d}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


def pointer_config(frequency: float, t_end: float, record_every: float = 1.0,
                   dt: float = 5e-5):
    return config.resolve({
        "grid": dict(POINTER_GRID),
        "initial_state": {"kind": "eigenstate", "index": 0},
        "method": {"kind": "pointer", "frequency_per_ps": frequency,
                   "harshness": 1e-4},
        "integration": {"dt_ps": dt, "t_end_ps": t_end,
                        "record_every_ps": record_every},
    })


@pytest.fixture(scope="session")
def cross_check_trajectories():
    cfg = config.resolve(CROSS_CHECK)
    return harness.compare(cfg)


@pytest.fixture(scope="session")
def thirty_ps_measured():
    return harness.run(pointer_config(100.0, 30.0, record_every=0.5))


@pytest.fixture(scope="session")
def hundred_ps_lindblad():
    cfg = config.resolve({"integration": {"t_end_ps": 100.0, "record_every_ps": 0.5}})
    return harness.run(cfg)


@pytest.fixture(scope="session")
def frequency_sweep_trajectories():
    return {f: harness.run(pointer_config(f, 10.0)) for f in SWEEP_FREQUENCIES}


@pytest.fixture(scope="session")
def production_rates():
    cfg = config.resolve({})
    basis = es.solve_eigenpairs(cfg.grid, cfg.potential, cfg.mass, 16)
    return {
        t: bath.rate_matrix(basis, bath.BathParams(t, 5.0, 9.604))
        for t in (115.0, 155.0, 200.0)
    }


def test_criterion_1_cross_basis_agreement(cross_check_trajectories):
    tg, te = cross_check_trajectories
    assert np.array_equal(tg.times, te.times)
    diff = float(np.max(np.abs(tg.p_shallow - te.p_shallow)))
    report(1, diff <= 1e-5,
           f"closed 3 ps pointer(N=128, dt=0.05 fs) vs eigen(16): "
           f"max|dP|={diff:.3e} (tol 1e-5)")


def test_criterion_2_trace_and_hermiticity(thirty_ps_measured, hundred_ps_lindblad):
    tr = float(np.max(thirty_ps_measured.trace_defect))
    he = float(np.max(thirty_ps_measured.hermiticity_defect))
    tl = float(np.max(hundred_ps_lindblad.trace_defect))
    ok = tr <= 1e-8 and he <= 1e-10 and tl <= 1e-10
    report(2, ok,
           f"30 ps measured pointer: trace defect {tr:.2e} (tol 1e-8), "
           f"hermiticity {he:.2e} (tol 1e-10); 100 ps lindblad trace {tl:.2e} "
           f"(tol 1e-10)")


def test_criterion_3_detailed_balance(production_rates):
    worst = max(
        bath.detailed_balance_violation(rm, t) for t, rm in production_rates.items()
    )
    report(3, worst <= 1e-12,
           f"calibrated bath at 115/155/200 K: max relative detailed-balance "
           f"violation {worst:.2e} (tol 1e-12)")


def test_criterion_4_boltzmann_stationarity(production_rates):
    rm = production_rates[200.0]
    ns = null_space(rm.rates)
    assert ns.shape[1] == 1
    oracle = ns[:, 0] / ns[:, 0].sum()
    pi = rm.boltzmann_distribution(200.0)
    d_null = float(np.max(np.abs(oracle - pi)))

    cfg = config.resolve({"integration": {"t_end_ps": 200.0, "record_every_ps": 50.0}})
    traj = harness.run(cfg)
    d_evolved = float(np.max(np.abs(traj.occupations[-1] - pi)))
    ok = d_null <= 1e-6 and d_evolved <= 1e-6
    report(4, ok,
           f"lindblad fixed point vs Boltzmann: null-space oracle diff "
           f"{d_null:.2e}, 200 ps evolved diff {d_evolved:.2e} (tol 1e-6)")


def test_criterion_5_thermal_ordering():
    ps = []
    for t in (115.0, 155.0, 200.0):
        cfg = config.resolve({
            "method": {"temperature_K": t},
            "integration": {"t_end_ps": 10.0, "record_every_ps": 0.5},
        })
        ps.append(float(harness.run(cfg).p_shallow[-1]))
    ok = ps[0] < ps[1] < ps[2]
    report(5, ok,
           f"P(10 ps) at 115/155/200 K = {ps[0]:.4f}/{ps[1]:.4f}/{ps[2]:.4f} "
           f"(strictly increasing)")


def test_criterion_6_zeno_turnover(frequency_sweep_trajectories):
    freqs = list(SWEEP_FREQUENCIES)
    ps = [float(frequency_sweep_trajectories[f].p_shallow[-1]) for f in freqs]
    kmax = int(np.argmax(ps))
    rising = all(ps[i] < ps[i + 1] for i in range(kmax))
    falling = all(ps[i] > ps[i + 1] for i in range(kmax, len(ps) - 1))
    interior = 0 < kmax < len(ps) - 1
    turnover = freqs[kmax]
    in_band = 1000.0 / 3.0 <= turnover <= 3000.0
    ok = rising and falling and interior and in_band
    detail = ", ".join(f"{f:g}:{p:.4f}" for f, p in zip(freqs, ps))
    report(6, ok,
           f"P(10 ps) vs frequency [{detail}]; single interior max at "
           f"{turnover:g}/ps within factor 3 of 1000/ps")


def test_frequent_measurement_curve_dominates_rare(frequency_sweep_trajectories):
    # the high-frequency curve sits above the low-frequency one at every
    # recorded instant past the first measurement transient
    fast = frequency_sweep_trajectories[3300.0]
    slow = frequency_sweep_trajectories[20.0]
    sel = fast.times >= 1.0
    assert np.all(fast.p_shallow[sel] > slow.p_shallow[sel])


def test_criterion_7_plateau_bound(hundred_ps_lindblad):
    traj = hundred_ps_lindblad
    k_end = traj.at_time(100.0)
    k_ref = traj.at_time(95.0)
    p_end = float(traj.p_shallow[k_end])
    slope = float(
        (traj.p_shallow[k_end] - traj.p_shallow[k_ref])
        / (traj.times[k_end] - traj.times[k_ref])
    )
    ok = p_end <= 0.5 and abs(slope) <= 1e-4
    report(7, ok,
           f"lindblad 200 K: P(100 ps)={p_end:.4f} (<=0.5), |dP/dt| near 100 ps "
           f"{abs(slope):.2e} /ps (tol 1e-4)")


def test_criterion_8_basis_robustness():
    base = {"integration": {"t_end_ps": 20.0, "record_every_ps": 0.25}}
    t16 = harness.run(config.resolve(base))
    t4 = harness.run(config.resolve({**base, "method": {"n_basis": 4}}))
    dmax = float(np.max(np.abs(t16.p_shallow - t4.p_shallow)))
    high_occ = float(np.sum(t16.occupations[-1, 4:]))
    ok = dmax <= 0.1 and high_occ < 0.15
    report(8, ok,
           f"n_basis 4 vs 16 over 20 ps: max|dP|={dmax:.3e} (tol 0.1); "
           f"occupation of states 5-16 at 20 ps {high_occ:.4f} (tol 0.15)")


def test_criterion_9_measurement_identity():
    from protonwell import pointer

    cfg = pointer_config(100.0, 1.0)
    prob = harness.build_problem(cfg)
    basis = prob.basis(16)
    st = pointer.init_from_eigenstate(basis, 0, prob.ham)
    st.elements += 0.01 * (np.random.default_rng(1).normal(size=(192, 192)) * 1j)
    st.elements = 0.5 * (st.elements + st.elements.conj().T)

    identity = pointer.apply_measurement(st, pointer.MeasurementSchedule(100.0, 0.0))
    d_ident = float(np.max(np.abs(identity.elements - st.elements)))

    crushed = pointer.apply_measurement(st, pointer.MeasurementSchedule(100.0, 1e6))
    off = np.abs(crushed.elements[:96, 96:])
    d_off = float(np.max(off))
    ok = d_ident <= 1e-15 and d_off < 1e-300
    report(9, ok,
           f"y=0 changes elements by {d_ident:.1e} (tol 1e-15); y=1e6 leaves "
           f"off-blocks at {d_off:.1e} (tol 1e-300)")


def test_criterion_10_step_halving(cross_check_trajectories):
    tg, _ = cross_check_trajectories
    p_coarse = float(tg.p_shallow[-1])
    cfg_half = config.resolve({
        **CROSS_CHECK,
        "method": {"kind": "closed", "basis": "grid"},
        "integration": {"dt_ps": 2.5e-5, "t_end_ps": 3.0, "record_every_ps": 3.0},
    })
    p_fine = float(harness.run(cfg_half).p_shallow[-1])
    d_pointer = abs(p_coarse - p_fine)

    base_li = {"integration": {"t_end_ps": 3.0, "record_every_ps": 3.0}}
    p1 = float(harness.run(config.resolve(base_li)).p_shallow[-1])
    p2 = float(harness.run(config.resolve(
        {**base_li, "integration": {"dt_ps": 5e-4, "t_end_ps": 3.0,
                                    "record_every_ps": 3.0}})).p_shallow[-1])
    d_lindblad = abs(p1 - p2)

    ok_p, det_p = harness.check_pointer_convergence()
    ok_l, det_l = harness.check_lindblad_convergence()
    ok = d_pointer <= 1e-6 and d_lindblad <= 1e-6 and ok_p and ok_l
    report(10, ok,
           f"halving dt changes P(3 ps) by {d_pointer:.2e} (grid) / "
           f"{d_lindblad:.2e} (eigen), tol 1e-6; ratio checks: {det_p}; {det_l}")


def test_criterion_11_determinism(tmp_path):
    files = []
    for name in ("a.csv", "b.csv"):
        path = tmp_path / name
        rc = cli.main(["run", "--set", "integration.t_end_ps=1.0",
                       "--output", str(path)])
        assert rc == 0
        files.append(path.read_bytes())
    ok = files[0] == files[1]
    report(11, ok, "two identical run invocations produce byte-identical CSV")
