"""Delimited output with embedded provenance.

Every file starts with comment lines carrying the package version and
the fully resolved configuration as canonical JSON, so any result can be
reproduced from its own header.  Numbers are written with 17 significant
digits (lossless for binary64), which also makes identical runs produce
byte-identical files.
"""

from __future__ import annotations

import csv
import io

import numpy as np

from . import __version__
from .observables import Trajectory


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _header_lines(config_json: str | None, extra: dict | None = None) -> list[str]:
    lines = [f"# protonwell {__version__}"]
    if config_json is not None:
        lines.append(f"# config {config_json}")
    for key, val in (extra or {}).items():
        lines.append(f"# {key} {val}")
    return lines


def _write(path: str, header_lines: list[str], columns: list[str], rows) -> None:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(row)
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def write_trajectory(path: str, traj: Trajectory, config_json: str | None = None,
                     extra: dict | None = None) -> None:
    cols = ["t_ps", "p_shallow", "trace_defect", "hermiticity_defect",
            "energy_expectation_cm1"]
    if traj.min_eigenvalue is not None:
        cols.append("min_eigenvalue")
    n_occ = 0 if traj.occupations is None else traj.occupations.shape[1]
    cols += [f"occ_{i + 1}" for i in range(n_occ)]

    def rows():
        for k in range(traj.n_records):
            row = [_fmt(traj.times[k]), _fmt(traj.p_shallow[k]),
                   _fmt(traj.trace_defect[k]), _fmt(traj.hermiticity_defect[k]),
                   _fmt(traj.energy[k])]
            if traj.min_eigenvalue is not None:
                row.append(_fmt(traj.min_eigenvalue[k]))
            for i in range(n_occ):
                row.append(_fmt(traj.occupations[k, i]))
            yield row

    _write(path, _header_lines(config_json, extra), cols, rows())


def write_compare(path: str, times, p_grid, p_eigen,
                  config_json: str | None = None, extra: dict | None = None) -> None:
    cols = ["t_ps", "p_shallow_pointer", "p_shallow_lindblad", "abs_diff"]
    rows = (
        [_fmt(t), _fmt(a), _fmt(b), _fmt(abs(a - b))]
        for t, a, b in zip(times, p_grid, p_eigen)
    )
    _write(path, _header_lines(config_json, extra), cols, rows)


def write_sweep(path: str, axis: str, rows, config_json: str | None = None,
                extra: dict | None = None) -> None:
    """rows: iterable of (axis_value, snapshot_ps, p_shallow, first_difference)."""
    cols = [axis, "snapshot_ps", "p_shallow", "first_difference"]
    out = (
        [_fmt(v), _fmt(s), _fmt(p), "" if d is None else _fmt(d)]
        for v, s, p, d in rows
    )
    _write(path, _header_lines(config_json, extra), cols, out)


def write_eigens(path: str, basis, v_values, config_json: str | None = None) -> None:
    energies = " ".join(_fmt(e) for e in basis.energies)
    extra = {"energies_cm1": energies}
    cols = ["zeta", "v_cm1"] + [f"phi_{i + 1}" for i in range(basis.n_basis)]
    z = basis.grid.points
    rows = (
        [_fmt(z[n]), _fmt(v_values[n])] + [_fmt(basis.states[n, i]) for i in range(basis.n_basis)]
        for n in range(basis.grid.n_points)
    )
    _write(path, _header_lines(config_json, extra), cols, rows)


def write_rate_matrix(path: str, rm, config_json: str | None = None) -> None:
    """Transition-rate matrix with eigenstate-index row/column headers."""
    n = rm.n_states
    cols = ["state"] + [f"to_{j + 1}" for j in range(n)]
    extra = {"energies_cm1": " ".join(_fmt(e) for e in rm.energies)}
    rows = (
        [f"from_{k + 1}"] + [_fmt(rm.rates[j, k]) for j in range(n)]
        for k in range(n)
    )
    _write(path, _header_lines(config_json, extra), cols, rows)


def read_table(path: str) -> tuple[dict, list[str], np.ndarray]:
    """Read back a protonwell CSV: (header comments, columns, float matrix).

    Blank cells come back as NaN.
    """
    meta = {}
    with open(path) as fh:
        pos = fh.tell()
        line = fh.readline()
        while line.startswith("#"):
            body = line[1:].strip()
            key, _, val = body.partition(" ")
            meta[key] = val
            pos = fh.tell()
            line = fh.readline()
        fh.seek(pos)
        reader = csv.reader(fh)
        columns = next(reader)
        data = [[float(c) if c else np.nan for c in row] for row in reader]
    return meta, columns, np.array(data)
