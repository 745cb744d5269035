"""CSV and JSON serialization of trajectories and sweep results.

All numbers are printed with 17 significant digits so a written value
parses back to the identical double.  Schemas:

trajectory CSV
    s, re_<ket>, im_<ket> ... (one pair per amplitude, index order),
    k1..kN (Bloch lengths), tau columns, then the full Bloch components
    (k<n>x, k<n>y, k<n>z for qubits; k<n>c<j> otherwise).

sweep CSV
    eps1, eps2, k1, k2, k3, tau23, tau31, tau12, basin, status
    (tau column set generalizes to all unordered pairs for N != 3).

For three subsystems the tau columns follow the complement convention
tau23, tau31, tau12; for other N they are lexicographic tau<i><j>.
Metadata sidecars are JSON with the resolved run configuration echoed
under the "config" key, so a sidecar can be fed back as a config file.
"""

from __future__ import annotations

import csv
import json
from typing import Sequence

import numpy as np

from .dynamics import Trajectory
from .entanglement import EntanglementReport
from .hilbert import SubsystemDims, as_dims, index_digits
from .sweep import SweepResult


def fmt(x: float) -> str:
    return "%.17g" % x


def amplitude_labels(dims) -> list:
    """Ket digit strings (sN..s1) for every basis index, in index order."""
    dims = as_dims(dims)
    return ["".join(str(d) for d in index_digits(i, dims)) for i in range(dims.total_dim)]


def tau_pairs(dims) -> list:
    """Unordered pairs in CSV column order."""
    dims = as_dims(dims)
    n = len(dims)
    if n == 3:
        return [(2, 3), (1, 3), (1, 2)]  # complement order: tau23, tau31, tau12
    return [(a, b) for a in range(1, n + 1) for b in range(a + 1, n + 1)]


def tau_column_names(dims) -> list:
    names = []
    for a, b in tau_pairs(dims):
        if (a, b) == (1, 3) and len(as_dims(dims)) == 3:
            names.append("tau31")
        else:
            names.append("tau%d%d" % (a, b))
    return names


def bloch_column_names(dims) -> list:
    dims = as_dims(dims)
    names = []
    for n in range(1, len(dims) + 1):
        if dims.dim(n) == 2:
            names.extend(["k%dx" % n, "k%dy" % n, "k%dz" % n])
        else:
            names.extend(["k%dc%d" % (n, j) for j in range(1, dims.dim(n) ** 2)])
    return names


def _report_numbers(report: EntanglementReport, dims) -> list:
    values = [l for l in report.bloch_lengths]
    values.extend(report.tau_of(a, b) for a, b in tau_pairs(dims))
    for vec in report.bloch_vectors:
        values.extend(float(v) for v in vec)
    return values


def trajectory_header(dims) -> list:
    dims = as_dims(dims)
    header = ["s"]
    for label in amplitude_labels(dims):
        header.extend(["re_%s" % label, "im_%s" % label])
    header.extend("k%d" % n for n in range(1, len(dims) + 1))
    header.extend(tau_column_names(dims))
    header.extend(bloch_column_names(dims))
    return header


def write_trajectory_csv(path, trajectory: Trajectory):
    dims = trajectory.samples[0].state.dims
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(trajectory_header(dims))
        for sample in trajectory.samples:
            row = [fmt(sample.s)]
            for amp in sample.state.amplitudes:
                row.extend([fmt(amp.real), fmt(amp.imag)])
            row.extend(fmt(v) for v in _report_numbers(sample.report, dims))
            writer.writerow(row)


SWEEP_FIXED_COLUMNS = ["eps1", "eps2"]


def sweep_header(dims) -> list:
    dims = as_dims(dims)
    header = list(SWEEP_FIXED_COLUMNS)
    header.extend("k%d" % n for n in range(1, len(dims) + 1))
    header.extend(tau_column_names(dims))
    header.extend(["basin", "status"])
    return header


def write_sweep_csv(path, result: SweepResult):
    dims = result.spec.dims
    n_measures = len(dims) + len(tau_pairs(dims))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(sweep_header(dims))
        for cell in result.cells:
            row = [fmt(cell.eps1), fmt(cell.eps2)]
            if cell.report is None:
                row.extend(["nan"] * n_measures)
            else:
                row.extend(fmt(l) for l in cell.report.bloch_lengths)
                row.extend(fmt(cell.report.tau_of(a, b)) for a, b in tau_pairs(dims))
            row.extend([cell.basin, cell.status])
            writer.writerow(row)


def write_json(path, payload: dict):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_csv_columns(path) -> dict:
    """Read a CSV produced here back into {column: list-of-strings}."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        columns = {name: [] for name in header}
        for row in reader:
            for name, value in zip(header, row):
                columns[name].append(value)
    return columns


def read_numeric_columns(path) -> dict:
    """Like :func:`read_csv_columns` but parsing floats where possible."""
    columns = read_csv_columns(path)
    out = {}
    for name, values in columns.items():
        try:
            out[name] = np.array([float(v) for v in values])
        except ValueError:
            out[name] = values
    return out
