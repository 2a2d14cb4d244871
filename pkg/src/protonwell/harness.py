"""Experiment drivers: single runs, sweeps, method comparison, calibration.

Everything here is deterministic: given the same resolved configuration
the trajectories, CSV bytes, and calibration outputs are identical
between invocations.  Sweep points are independent and can execute in a
process pool (capped by the PROTONWELL_WORKERS environment variable);
results are assembled in axis order regardless of completion order.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import lindblad, pointer
from .bath import BathParams, detailed_balance_violation, rate_matrix
from .config import ConfigError, RunConfig, merge, resolve
from .eigensolver import EigenBasis, solve_eigenpairs
from .observables import Trajectory
from .potential import WellPartition, barrier_top, partition


class CalibrationError(RuntimeError):
    """The calibration search could not meet its objective."""


@dataclass
class Problem:
    """Constructed domain objects for one configuration."""

    cfg: RunConfig
    part: WellPartition
    ham: pointer.GridHamiltonian
    _basis: EigenBasis | None = field(default=None, repr=False)

    def basis(self, n_basis: int) -> EigenBasis:
        if self._basis is None or self._basis.n_basis < n_basis:
            self._basis = solve_eigenpairs(
                self.cfg.grid, self.cfg.potential, self.cfg.mass, n_basis
            )
        if self._basis.n_basis == n_basis:
            return self._basis
        return EigenBasis(
            grid=self._basis.grid,
            energies=self._basis.energies[:n_basis],
            states=self._basis.states[:, :n_basis],
            kinetic_coefficient=self._basis.kinetic_coefficient,
        )


def build_problem(cfg: RunConfig) -> Problem:
    part = partition(cfg.grid, cfg.potential)
    ham = pointer.GridHamiltonian.build(cfg.grid, cfg.potential, cfg.mass)
    return Problem(cfg=cfg, part=part, ham=ham)


def _grid_initial(prob: Problem, n_basis: int = 16) -> pointer.DensityMatrixGrid:
    init = prob.cfg.initial_state
    if init["kind"] == "gaussian":
        return pointer.init_gaussian(prob.ham, init["centre"], init["width"])
    basis = prob.basis(max(n_basis, init["index"] + 1))
    return pointer.init_from_eigenstate(basis, init["index"], prob.ham)


def _eigen_initial(prob: Problem, n_basis: int) -> lindblad.EigenDensityMatrix:
    init = prob.cfg.initial_state
    basis = prob.basis(n_basis)
    if init["kind"] == "gaussian":
        psi = pointer.gaussian_wavefunction(prob.cfg.grid, init["centre"], init["width"])
        return lindblad.init_from_coefficients(basis, basis.project(psi))
    return lindblad.init_from_eigenstate(basis, init["index"])


def run_pointer(cfg: RunConfig, sched=None) -> Trajectory:
    """Grid-basis run; sched overrides the configured schedule if given."""
    prob = build_problem(cfg)
    state0 = _grid_initial(prob)
    if sched is None and cfg.method_kind == "pointer":
        sched = cfg.measurement_schedule()
    return pointer.evolve_with_schedule(
        state0, sched, cfg.t_end, cfg.dt, cfg.record_every, prob.part,
        track_min_eigenvalue=cfg.track_min_eigenvalue,
    )


def run_lindblad(cfg: RunConfig, bath: BathParams | None = None,
                 n_basis: int | None = None) -> Trajectory:
    """Eigenbasis run; bath=None with a T=0 or closed config runs closed."""
    prob = build_problem(cfg)
    nb = n_basis if n_basis is not None else cfg.n_basis()
    state0 = _eigen_initial(prob, nb)
    if bath is None and cfg.method_kind == "lindblad":
        bath = cfg.bath_params()
    rates = None if bath is None else rate_matrix(prob.basis(nb), bath)
    return lindblad.evolve(
        state0, rates, cfg.t_end, cfg.dt, cfg.record_every, prob.part
    )


def run(cfg: RunConfig) -> Trajectory:
    """Dispatch a single-trajectory run on the configured method."""
    kind = cfg.method_kind
    if kind == "pointer":
        return run_pointer(cfg)
    if kind == "lindblad":
        return run_lindblad(cfg)
    if kind == "closed":
        if cfg.method.get("basis", "grid") == "grid":
            return run_pointer(cfg, sched=None)
        return run_lindblad(cfg, bath=None)
    raise ConfigError(f"method.kind: cannot run() a '{kind}' config directly")


def compare(cfg: RunConfig) -> tuple[Trajectory, Trajectory]:
    """Run the grid and eigenbasis methods on one shared configuration.

    The method block may carry 'pointer' and 'lindblad' sub-objects; a
    null sub-object means that side runs closed.  The eigenbasis side
    integrates with the same dt as the grid side so the recorded times
    align exactly.
    """
    m = cfg.method
    if m["kind"] != "compare":
        raise ConfigError("method.kind: compare() needs a compare config")
    sched = None
    if m.get("pointer"):
        p = m["pointer"]
        sched = pointer.MeasurementSchedule(
            frequency=p["frequency_per_ps"],
            harshness=p.get("harshness", 1e-4),
            block_size=p.get("block_size"),
            gate_blocks=p.get("gate_blocks", True),
        )
    bath = None
    if m.get("lindblad"):
        li = m["lindblad"]
        if li.get("temperature_K", 0.0) > 0.0:
            bath = BathParams(
                temperature=li["temperature_K"],
                phonon_frequency=li["phonon_frequency_rad_per_ps"],
                rearrangement_energy=li["rearrangement_energy_cm1"],
            )
    traj_grid = run_pointer(cfg, sched=sched)
    traj_eigen = run_lindblad(cfg, bath=bath, n_basis=cfg.n_basis())
    return traj_grid, traj_eigen


@dataclass(frozen=True)
class SweepSpec:
    """One swept axis (temperature in K or frequency in 1/ps) plus snapshots."""

    axis: str
    values: tuple
    snapshots: tuple

    def __post_init__(self):
        if self.axis not in ("temperature", "frequency"):
            raise ConfigError(f"sweep.axis: must be temperature or frequency, got {self.axis!r}")
        if len(self.values) == 0:
            raise ConfigError("sweep.values: must be non-empty")
        if any(v <= 0.0 for v in self.values) and self.axis == "frequency":
            raise ConfigError("sweep.values: frequencies must be positive")
        if any(v < 0.0 for v in self.values):
            raise ConfigError("sweep.values: must be non-negative")
        if len(self.snapshots) == 0 or any(s <= 0.0 for s in self.snapshots):
            raise ConfigError("sweep.snapshots: must be non-empty and positive")


def _sweep_point(args) -> tuple[float, list[float]]:
    raw, axis, value, snapshots = args
    if axis == "temperature":
        over = {"method": {"kind": "lindblad", "temperature_K": value}}
    else:
        over = {"method": {"kind": "pointer", "frequency_per_ps": value}}
    cfg = resolve(merge(raw, over))
    traj = run(cfg)
    out = []
    for snap in snapshots:
        k = traj.at_time(snap)
        if abs(traj.times[k] - snap) > 0.5 * cfg.record_every + 1e-12:
            raise ConfigError(
                f"sweep.snapshots: {snap} ps not reachable with "
                f"record_every={cfg.record_every} ps and t_end={cfg.t_end} ps"
            )
        out.append(float(traj.p_shallow[k]))
    return value, out


def worker_count() -> int:
    env = os.environ.get("PROTONWELL_WORKERS", "1")
    try:
        n = int(env)
    except ValueError:
        raise ConfigError(f"PROTONWELL_WORKERS: expected an integer, got {env!r}")
    return max(1, n)


def sweep(spec: SweepSpec, base: RunConfig) -> list[tuple]:
    """Rows (axis_value, snapshot_ps, p_shallow, first_difference).

    Rows are ordered by axis value then snapshot; the first difference
    is taken along the axis within each snapshot (None for the first).
    """
    t_need = max(spec.snapshots)
    raw = merge(base.raw, {"integration": {"t_end_ps": max(base.t_end, t_need)}})
    values = sorted(spec.values)
    jobs = [(raw, spec.axis, v, spec.snapshots) for v in values]
    nworkers = worker_count()
    if nworkers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=nworkers) as pool:
            results = dict(pool.map(_sweep_point, jobs))
    else:
        results = dict(map(_sweep_point, jobs))
    rows = []
    for si, snap in enumerate(spec.snapshots):
        prev = None
        for v in values:
            p = results[v][si]
            rows.append((v, snap, p, None if prev is None else p - prev))
            prev = p
    # order by axis value then snapshot for the file
    rows.sort(key=lambda r: (r[0], r[1]))
    return rows


# ---------------------------------------------------------------------------
# calibration

LENGTH_SCAN_ANGSTROM = np.arange(0.50, 1.50001, 0.005)
CAL_GRID = {"n_points": 512, "zeta_min": -2.0, "zeta_max": 2.0}
CAL_BAND = (0.18, 0.24)           # target for P_shallow(10 ps) at 200 K
CAL_PHONON_CANDIDATES = (8.0, 6.0, 5.0, 4.0, 3.0)   # rad/ps, scanned in order
CAL_DOMINANCE_MARGIN = 0.8        # require W[2,0] <= margin * W[1,0]


def _sub_barrier_count(length_m: float, base: RunConfig) -> tuple[int, float, float]:
    cfg = resolve(merge(base.raw, {"grid": CAL_GRID, "mass": {"length_scale_m": length_m}}))
    basis = solve_eigenpairs(cfg.grid, cfg.potential, cfg.mass, 6)
    _, v_star = barrier_top(cfg.potential)
    n_sub = int(np.sum(basis.energies < v_star))
    return n_sub, float(basis.energies[3] / v_star), v_star


def calibrate_length_scale(base: RunConfig) -> dict:
    """Scan for scales giving exactly 4 sub-barrier states, 4th near the top.

    Returns the midpoint of the feasible interval plus the residuals of
    the objective there.
    """
    feasible = []
    for l_angstrom in LENGTH_SCAN_ANGSTROM:
        n_sub, ratio, _ = _sub_barrier_count(l_angstrom * 1e-10, base)
        if n_sub == 4 and ratio >= 0.9:
            feasible.append(l_angstrom)
    if not feasible:
        best = min(
            LENGTH_SCAN_ANGSTROM,
            key=lambda l: abs(_sub_barrier_count(l * 1e-10, base)[0] - 4),
        )
        raise CalibrationError(
            f"no length scale in [{LENGTH_SCAN_ANGSTROM[0]:.2f}, "
            f"{LENGTH_SCAN_ANGSTROM[-1]:.2f}] A meets the level-structure "
            f"objective; closest candidate {best:.4f} A"
        )
    mid = round(0.5 * (feasible[0] + feasible[-1]), 4)
    n_sub, ratio, v_star = _sub_barrier_count(mid * 1e-10, base)
    return {
        "length_scale_m": mid * 1e-10,
        "feasible_angstrom": (feasible[0], feasible[-1]),
        "n_sub_barrier": n_sub,
        "fourth_state_over_barrier_top": ratio,
        "barrier_top_cm1": v_star,
    }


def _p10_lindblad(base: RunConfig, length_m: float, wp: float, dvr: float,
                  temperature: float = 200.0) -> float:
    over = {
        "mass": {"length_scale_m": length_m},
        "initial_state": {"kind": "eigenstate", "index": 0},
        "method": {
            "kind": "lindblad", "temperature_K": temperature,
            "phonon_frequency_rad_per_ps": wp, "rearrangement_energy_cm1": dvr,
            "n_basis": 16,
        },
        "integration": {"dt_ps": 1e-3, "t_end_ps": 10.0, "record_every_ps": 0.5},
    }
    cfg = resolve(merge(base.raw, over))
    traj = run_lindblad(cfg)
    return float(traj.p_shallow[-1])


def calibrate_bath(base: RunConfig, length_m: float,
                   bracket: tuple[float, float] = (0.5, 40.0)) -> dict:
    """Pick (phonon frequency, rearrangement energy) for the thermal model.

    The phonon cutoff is the largest candidate for which the bath drives
    the ground state predominantly into the first excited state (the
    shallow-well doorway); the rearrangement energy is then bisected so
    the 200 K shallow-well probability at 10 ps lands in the target band
    matching the high-frequency pointer result.
    """
    cfg = resolve(merge(base.raw, {"grid": CAL_GRID, "mass": {"length_scale_m": length_m}}))
    basis = solve_eigenpairs(cfg.grid, cfg.potential, cfg.mass, 16)
    chosen_wp = None
    for wp in CAL_PHONON_CANDIDATES:
        rm = rate_matrix(basis, BathParams(200.0, wp, 1.0))
        out0 = rm.rates[:, 0].copy()
        out0[0] = 0.0
        if np.argmax(out0) == 1 and out0[2] <= CAL_DOMINANCE_MARGIN * out0[1]:
            chosen_wp = wp
            break
    if chosen_wp is None:
        raise CalibrationError(
            "no phonon-frequency candidate makes the 0->1 transition dominant"
        )

    # default bracket stays inside the 1 fs stability guard (dt * max|W_kk| < 0.1)
    lo, hi = bracket
    target = 0.5 * (CAL_BAND[0] + CAL_BAND[1])
    p_lo = _p10_lindblad(base, length_m, chosen_wp, lo)
    p_hi = _p10_lindblad(base, length_m, chosen_wp, hi)
    if not (p_lo < target < p_hi):
        raise CalibrationError(
            f"rearrangement-energy bracket [{lo}, {hi}] cm^-1 does not span the "
            f"target band (P={p_lo:.4f}..{p_hi:.4f}, target {target:.3f}); "
            "zero or runaway coupling makes the objective infeasible"
        )
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        p_mid = _p10_lindblad(base, length_m, chosen_wp, mid)
        if abs(p_mid - target) < 0.002:
            lo = hi = mid
            break
        if p_mid < target:
            lo = mid
        else:
            hi = mid
    dvr = round(0.5 * (lo + hi), 3)
    p_final = _p10_lindblad(base, length_m, chosen_wp, dvr)
    if not (CAL_BAND[0] <= p_final <= CAL_BAND[1]):
        raise CalibrationError(
            f"bisection ended at P(10 ps, 200 K) = {p_final:.4f}, outside the "
            f"band {CAL_BAND}; best rearrangement energy {dvr} cm^-1"
        )
    return {
        "phonon_frequency_rad_per_ps": chosen_wp,
        "rearrangement_energy_cm1": dvr,
        "p10_200K": p_final,
        "band": CAL_BAND,
    }


def calibrate(base: RunConfig | None = None) -> dict:
    """Full deterministic calibration; returns a config fragment + residuals."""
    if base is None:
        base = resolve({})
    stage_a = calibrate_length_scale(base)
    stage_b = calibrate_bath(base, stage_a["length_scale_m"])
    return {
        "fragment": {
            "mass": {"length_scale_m": stage_a["length_scale_m"]},
            "method": {
                "phonon_frequency_rad_per_ps": stage_b["phonon_frequency_rad_per_ps"],
                "rearrangement_energy_cm1": stage_b["rearrangement_energy_cm1"],
            },
        },
        "residuals": {
            "n_sub_barrier": stage_a["n_sub_barrier"],
            "fourth_state_over_barrier_top": stage_a["fourth_state_over_barrier_top"],
            "feasible_angstrom": stage_a["feasible_angstrom"],
            "p10_200K": stage_b["p10_200K"],
            "band": stage_b["band"],
        },
    }


# ---------------------------------------------------------------------------
# self test

def check_trace_hermiticity() -> tuple[bool, str]:
    cfg = resolve({
        "grid": {"n_points": 64, "zeta_min": -2.0, "zeta_max": 2.0},
        "initial_state": {"kind": "eigenstate", "index": 0},
        "method": {"kind": "pointer", "frequency_per_ps": 100.0},
        "integration": {"dt_ps": 5e-5, "t_end_ps": 0.2, "record_every_ps": 0.05},
    })
    traj = run(cfg)
    tmax = float(np.max(traj.trace_defect))
    hmax = float(np.max(traj.hermiticity_defect))
    ok = tmax <= 1e-8 and hmax <= 1e-10
    return ok, f"trace defect {tmax:.2e} (<=1e-8), hermiticity {hmax:.2e} (<=1e-10)"


def check_detailed_balance(rm=None, temperature: float = 200.0) -> tuple[bool, str]:
    if rm is None:
        cfg = resolve({})
        basis = solve_eigenpairs(cfg.grid, cfg.potential, cfg.mass, 8)
        rm = rate_matrix(basis, BathParams(temperature, 5.0, 10.0))
    off = rm.rates.copy()
    np.fill_diagonal(off, 0.0)
    if np.any(off < 0.0):
        return False, "negative off-diagonal transition rate"
    worst = detailed_balance_violation(rm, temperature)
    return worst <= 1e-12, f"max relative violation {worst:.2e} (<=1e-12)"


def check_boltzmann_stationarity(rm=None, temperature: float = 200.0) -> tuple[bool, str]:
    if rm is None:
        cfg = resolve({})
        basis = solve_eigenpairs(cfg.grid, cfg.potential, cfg.mass, 8)
        rm = rate_matrix(basis, BathParams(temperature, 5.0, 10.0))
    pi = rm.boltzmann_distribution(temperature)
    gross_flux = float(np.max(np.abs(rm.rates) @ pi))
    resid = float(np.max(np.abs(rm.rates @ pi))) / gross_flux
    return resid <= 1e-10, f"relative stationarity residual {resid:.2e} (<=1e-10)"


def check_cross_basis(t_end: float = 0.5) -> tuple[bool, str]:
    cfg = resolve({
        "initial_state": {"kind": "gaussian", "centre": -1.0, "width": 0.18},
        "method": {"kind": "compare", "pointer": None, "lindblad": None, "n_basis": 16},
        "integration": {"dt_ps": 5e-5, "t_end_ps": t_end, "record_every_ps": 0.05},
    })
    tg, te = compare(cfg)
    diff = float(np.max(np.abs(tg.p_shallow - te.p_shallow)))
    return diff <= 1e-5, f"max |dP| {diff:.2e} (<=1e-5) over {t_end} ps"


def _step_doubling(make_cfg, dt: float) -> tuple[bool, str]:
    ps = []
    for d in (dt, dt / 2.0, dt / 4.0):
        try:
            traj = run(resolve(make_cfg(d)))
        except Exception as err:
            return False, f"run failed at dt={d:.3g} ps: {type(err).__name__}: {err}"
        p = float(traj.p_shallow[-1])
        if not math.isfinite(p):
            return False, f"non-finite observable at dt={d:.3g} ps (unstable step)"
        ps.append(p)
    e1, e2 = abs(ps[0] - ps[1]), abs(ps[1] - ps[2])
    if e2 == 0.0:
        return True, f"differences below roundoff ({e1:.2e}, {e2:.2e})"
    ratio = e1 / e2
    ok = 8.0 <= ratio <= 32.0
    return ok, f"step-doubling ratio {ratio:.1f} (expect [8, 32]); diffs {e1:.2e}/{e2:.2e}"


def check_pointer_convergence(dt: float = 2e-4) -> tuple[bool, str]:
    """Step-doubling order check on a short closed grid run."""
    def make(d):
        return {
            "grid": {"n_points": 64, "zeta_min": -2.2, "zeta_max": 2.2},
            "initial_state": {"kind": "gaussian", "centre": -1.0, "width": 0.18},
            "method": {"kind": "closed", "basis": "grid"},
            "integration": {"dt_ps": d, "t_end_ps": 0.2, "record_every_ps": 0.2},
        }
    return _step_doubling(make, dt)


def check_lindblad_convergence(dt: float = 0.002) -> tuple[bool, str]:
    # gaussian start keeps coherences in play so the dt^4 error is measurable
    def make(d):
        return {
            "initial_state": {"kind": "gaussian", "centre": -1.0, "width": 0.18},
            "integration": {"dt_ps": d, "t_end_ps": 4.096, "record_every_ps": 4.096},
        }
    return _step_doubling(make, dt)


SELFTEST_CHECKS = (
    ("trace-hermiticity", check_trace_hermiticity),
    ("detailed-balance", check_detailed_balance),
    ("boltzmann-stationarity", check_boltzmann_stationarity),
    ("cross-basis", check_cross_basis),
    ("pointer-convergence", check_pointer_convergence),
    ("lindblad-convergence", check_lindblad_convergence),
)


def selftest() -> list[tuple[str, bool, str]]:
    """Run the reduced invariant suite; returns (name, passed, detail) rows."""
    results = []
    for name, fn in SELFTEST_CHECKS:
        try:
            ok, detail = fn()
        except Exception as err:  # a crashed check is a failed check
            ok, detail = False, f"raised {type(err).__name__}: {err}"
        results.append((name, ok, detail))
    return results
