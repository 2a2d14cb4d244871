"""Run configuration: JSON schema, validation, and defaults.

A run is fully described by a nested dict (or JSON file) with the
sections potential / grid / mass / initial_state / method / integration
/ output.  Validation reports the offending field by its dotted path.
CLI flags override file values which override the shipped defaults; the
fully resolved dict is embedded in every output file so a result can be
reproduced from its own header.

The shipped bath and length-scale numbers come from `harness.calibrate`
(see that module); they are data, not physics constants.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from typing import Any

from .bath import BathParams
from .eigensolver import MassScale, SpatialGrid
from .pointer import MeasurementSchedule
from .potential import DoubleWellParams
from .units import PROTON_MASS_KG, mass_from_kg


class ConfigError(ValueError):
    """A configuration field failed validation; message names the field."""


# calibrated values (harness.calibrate reproduces them; see README)
CALIBRATED_LENGTH_SCALE_M = 0.9525e-10
CALIBRATED_PHONON_FREQUENCY = 5.0          # rad/ps
CALIBRATED_REARRANGEMENT_ENERGY = 9.604    # cm^-1

DEFAULTS: dict[str, Any] = {
    "potential": {"barrier_cm1": 620.0, "asymmetry_cm1": 63.6},
    "grid": {"n_points": 128, "zeta_min": -2.2, "zeta_max": 2.2},
    "mass": {"mass_kg": PROTON_MASS_KG, "length_scale_m": CALIBRATED_LENGTH_SCALE_M},
    "initial_state": {"kind": "eigenstate", "index": 0},
    "method": {
        "kind": "lindblad",
        "temperature_K": 200.0,
        "phonon_frequency_rad_per_ps": CALIBRATED_PHONON_FREQUENCY,
        "rearrangement_energy_cm1": CALIBRATED_REARRANGEMENT_ENERGY,
        "n_basis": 16,
    },
    "integration": {"dt_ps": None, "t_end_ps": 10.0, "record_every_ps": 0.05},
    "output": {"track_min_eigenvalue": False},
}

# per-method fallback when integration.dt_ps is left null: the grid
# propagator needs the sub-fs step, the small eigenbasis system does not
DT_DEFAULT_GRID = 5e-5     # ps (0.05 fs)
DT_DEFAULT_EIGEN = 1e-3    # ps (1 fs)

_METHOD_KEYS = {
    "pointer": {"kind", "frequency_per_ps", "harshness", "block_size", "gate_blocks"},
    "lindblad": {"kind", "temperature_K", "phonon_frequency_rad_per_ps",
                 "rearrangement_energy_cm1", "n_basis"},
    "closed": {"kind", "basis", "n_basis"},
    "compare": {"kind", "pointer", "lindblad", "n_basis"},
}


def _require(cond: bool, path: str, msg: str):
    if not cond:
        raise ConfigError(f"{path}: {msg}")


def _get_number(section: dict, path: str, key: str, allow_none=False):
    val = section.get(key)
    if val is None and allow_none:
        return None
    _require(isinstance(val, (int, float)) and not isinstance(val, bool),
             f"{path}.{key}", f"expected a number, got {val!r}")
    return float(val)


def merge(base: dict, override: dict) -> dict:
    """Recursive dict merge; override wins, sections merge key-by-key.

    A section that carries a `kind` discriminator is replaced outright
    when the override changes the kind, so switching methods does not
    drag stale fields along.
    """
    out = copy.deepcopy(base)
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            if "kind" in val and val["kind"] != out[key].get("kind"):
                out[key] = copy.deepcopy(val)
            else:
                out[key] = merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


@dataclass(frozen=True)
class RunConfig:
    """Validated, resolved configuration plus constructed domain objects."""

    raw: dict
    potential: DoubleWellParams
    grid: SpatialGrid
    mass: MassScale
    dt: float
    t_end: float
    record_every: float
    track_min_eigenvalue: bool

    @property
    def method_kind(self) -> str:
        return self.raw["method"]["kind"]

    @property
    def initial_state(self) -> dict:
        return self.raw["initial_state"]

    @property
    def method(self) -> dict:
        return self.raw["method"]

    def measurement_schedule(self) -> MeasurementSchedule | None:
        m = self.method
        if m["kind"] != "pointer":
            raise ConfigError("method.kind: not a pointer run")
        if m.get("frequency_per_ps") is None:
            return None
        return MeasurementSchedule(
            frequency=m["frequency_per_ps"],
            harshness=m.get("harshness", 1e-4),
            block_size=m.get("block_size"),
            gate_blocks=m.get("gate_blocks", True),
        )

    def bath_params(self) -> BathParams | None:
        m = self.method
        if m["kind"] != "lindblad":
            raise ConfigError("method.kind: not a lindblad run")
        if m["temperature_K"] == 0.0:
            return None
        return BathParams(
            temperature=m["temperature_K"],
            phonon_frequency=m["phonon_frequency_rad_per_ps"],
            rearrangement_energy=m["rearrangement_energy_cm1"],
        )

    def n_basis(self) -> int:
        return int(self.method.get("n_basis", 16))

    def canonical_json(self) -> str:
        return json.dumps(self.raw, sort_keys=True, separators=(",", ":"))


def _validate_initial(init: dict):
    kind = init.get("kind")
    _require(kind in ("gaussian", "eigenstate"), "initial_state.kind",
             f"must be 'gaussian' or 'eigenstate', got {kind!r}")
    if kind == "gaussian":
        width = _get_number(init, "initial_state", "width")
        _require(width > 0.0, "initial_state.width", "must be > 0")
        _get_number(init, "initial_state", "centre")
    else:
        idx = init.get("index")
        _require(isinstance(idx, int) and idx >= 0, "initial_state.index",
                 f"must be a non-negative integer, got {idx!r}")


def _validate_method(method: dict):
    kind = method.get("kind")
    _require(kind in _METHOD_KEYS, "method.kind",
             f"must be one of {sorted(_METHOD_KEYS)}, got {kind!r}")
    unknown = set(method) - _METHOD_KEYS[kind]
    _require(not unknown, "method", f"unknown keys for kind={kind}: {sorted(unknown)}")
    if kind == "pointer":
        f = _get_number(method, "method", "frequency_per_ps", allow_none=True)
        if f is not None:
            _require(f > 0.0, "method.frequency_per_ps", "must be > 0")
        y = _get_number(method, "method", "harshness", allow_none=True)
        if y is not None:
            _require(y >= 0.0, "method.harshness", "must be >= 0")
    elif kind == "lindblad":
        t = _get_number(method, "method", "temperature_K")
        _require(t >= 0.0, "method.temperature_K", "must be >= 0")
        wp = _get_number(method, "method", "phonon_frequency_rad_per_ps")
        _require(wp > 0.0, "method.phonon_frequency_rad_per_ps", "must be > 0")
        dvr = _get_number(method, "method", "rearrangement_energy_cm1")
        _require(dvr >= 0.0, "method.rearrangement_energy_cm1", "must be >= 0")
    elif kind == "closed":
        basis = method.get("basis", "grid")
        _require(basis in ("grid", "eigen"), "method.basis",
                 f"must be 'grid' or 'eigen', got {basis!r}")
    elif kind == "compare":
        for side in ("pointer", "lindblad"):
            sub = method.get(side)
            if sub is not None:
                _require(isinstance(sub, dict), f"method.{side}", "must be an object or null")


def resolve(overrides: dict | None = None, base: dict | None = None) -> RunConfig:
    """Merge overrides onto defaults, validate, and build domain objects."""
    raw = merge(base if base is not None else DEFAULTS, overrides or {})

    pot_sec = raw["potential"]
    barrier = _get_number(pot_sec, "potential", "barrier_cm1")
    asym = _get_number(pot_sec, "potential", "asymmetry_cm1")
    try:
        params = DoubleWellParams(barrier=barrier, asymmetry=asym)
    except ValueError as err:
        raise ConfigError(f"potential: {err}") from err

    grid_sec = raw["grid"]
    n = grid_sec.get("n_points")
    _require(isinstance(n, int) and n >= 3, "grid.n_points",
             f"must be an integer >= 3, got {n!r}")
    try:
        grid = SpatialGrid(
            n_points=n,
            zeta_min=_get_number(grid_sec, "grid", "zeta_min"),
            zeta_max=_get_number(grid_sec, "grid", "zeta_max"),
        )
    except ValueError as err:
        raise ConfigError(f"grid: {err}") from err

    mass_sec = raw["mass"]
    mass_kg = _get_number(mass_sec, "mass", "mass_kg")
    length_m = _get_number(mass_sec, "mass", "length_scale_m")
    _require(mass_kg > 0.0, "mass.mass_kg", "must be > 0")
    _require(length_m > 0.0, "mass.length_scale_m", "must be > 0")
    mass = MassScale(mass=mass_from_kg(mass_kg), length_scale=length_m)

    _validate_initial(raw["initial_state"])
    _validate_method(raw["method"])

    integ = raw["integration"]
    dt = _get_number(integ, "integration", "dt_ps", allow_none=True)
    if dt is None:
        kind = raw["method"]["kind"]
        grid_side = kind in ("pointer", "compare") or (
            kind == "closed" and raw["method"].get("basis", "grid") == "grid"
        )
        dt = DT_DEFAULT_GRID if grid_side else DT_DEFAULT_EIGEN
        raw = merge(raw, {"integration": {"dt_ps": dt}})
    _require(dt > 0.0, "integration.dt_ps", "must be > 0")
    t_end = _get_number(integ, "integration", "t_end_ps")
    _require(t_end > 0.0, "integration.t_end_ps", "must be > 0")
    rec = _get_number(integ, "integration", "record_every_ps")
    _require(rec > 0.0, "integration.record_every_ps", "must be > 0")

    track = raw["output"].get("track_min_eigenvalue", False)
    _require(isinstance(track, bool), "output.track_min_eigenvalue", "must be a boolean")

    nb = raw["method"].get("n_basis")
    if nb is not None:
        _require(isinstance(nb, int) and 2 <= nb <= n, "method.n_basis",
                 f"must be an integer in [2, n_points], got {nb!r}")

    return RunConfig(
        raw=raw,
        potential=params,
        grid=grid,
        mass=mass,
        dt=dt,
        t_end=t_end,
        record_every=rec,
        track_min_eigenvalue=track,
    )


def load_file(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as err:
        raise ConfigError(f"config file {path}: invalid JSON ({err})") from err
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path}: top level must be an object")
    return data
