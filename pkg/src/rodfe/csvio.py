"""CSV emission/parsing for the benchmark outputs.

Numbers are written in decimal scientific notation with 17 significant
digits, which round-trips IEEE doubles exactly.
"""

import csv

import numpy as np

CENTERLINE_COLUMNS = ("xi", "r_x", "r_y", "r_z", "p0", "p1", "p2", "p3")
STRESS_COLUMNS = ("xi", "n_x", "n_y", "n_z", "m_x", "m_y", "m_z")
CONVERGENCE_COLUMNS = ("formulation", "N", "error")
NEWTON_COLUMNS = ("increment", "iterations", "rate")
TIP_COLUMNS = ("t", "dr_x", "dr_y", "dr_z")
RING_MOMENT_COLUMNS = ("t", "theta", "moment")
TIP_CURVE_COLUMNS = ("alpha2", "tip_x", "tip_y")


def format_number(x):
    return f"{float(x):.16e}"


def _write(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _write_numeric(path, header, rows):
    _write(path, header, [[format_number(v) for v in row] for row in rows])


def write_centerline(path, rows):
    _write_numeric(path, CENTERLINE_COLUMNS, rows)


def write_stress(path, rows):
    _write_numeric(path, STRESS_COLUMNS, rows)


def write_convergence(path, rows):
    _write(
        path,
        CONVERGENCE_COLUMNS,
        [[label, str(int(N)), format_number(err)] for label, N, err in rows],
    )


def write_newton(path, report):
    rows = []
    for k, inc in enumerate(report.increments, start=1):
        rate = format_number(inc.rate) if inc.rate is not None else "nan"
        rows.append([str(k), str(inc.iterations), rate])
    _write(path, NEWTON_COLUMNS, rows)


def write_tip_displacement(path, rows):
    _write_numeric(path, TIP_COLUMNS, rows)


def write_ring_moment(path, data):
    _write_numeric(path, RING_MOMENT_COLUMNS, data[:, :3])


def write_tip_curve(path, rows):
    _write_numeric(path, TIP_CURVE_COLUMNS, rows)


def read_table(path):
    """Header tuple and list of string rows."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        return header, [tuple(row) for row in reader]


def read_numeric(path):
    """Header tuple and float array of an all-numeric CSV."""
    header, rows = read_table(path)
    return header, np.array([[float(v) for v in row] for row in rows])
