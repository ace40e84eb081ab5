"""Plot kinds for the benchmark CSV schemas.

Each kind validates the input columns exactly against the schema of the
producing benchmark CLI and renders a deterministic PNG.
"""

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


class SchemaMismatch(Exception):
    """CSV columns do not match the expected schema."""

    def __init__(self, missing, path=None, note=""):
        self.missing = list(missing)
        self.path = path
        where = f" in {path}" if path else ""
        detail = f"missing columns{where}: {', '.join(self.missing)}" if self.missing else note
        super().__init__(detail)


SCHEMAS = {
    "centerline": ("xi", "r_x", "r_y", "r_z", "p0", "p1", "p2", "p3"),
    "stress": ("xi", "n_x", "n_y", "n_z", "m_x", "m_y", "m_z"),
    "convergence": ("formulation", "N", "error"),
    "newton": ("increment", "iterations", "rate"),
    "tip": ("t", "dr_x", "dr_y", "dr_z"),
}

_FIGURE_DPI = 150


@dataclass(frozen=True)
class PlotSpec:
    kind: str
    inputs: tuple
    output: str


def _read(path, schema_name):
    expected = SCHEMAS[schema_name]
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(next(reader))
        except StopIteration:
            raise SchemaMismatch(expected, path=path) from None
        rows = [tuple(r) for r in reader]
    if header != expected:
        missing = [c for c in expected if c not in header]
        raise SchemaMismatch(
            missing, path=path,
            note=f"unexpected column layout in {path}: {header}",
        )
    return rows


def _read_numeric(path, schema_name):
    rows = _read(path, schema_name)
    return np.array([[float(v) for v in row] for row in rows]) if rows else np.empty(
        (0, len(SCHEMAS[schema_name]))
    )


def _label(path):
    return Path(path).stem


def _plot_convergence(inputs, ax):
    n_all = []
    for path in inputs:
        rows = _read(path, "convergence")
        series = {}
        for formulation, N, error in rows:
            series.setdefault(formulation, []).append((int(N), float(error)))
        for formulation, cells in sorted(series.items()):
            cells.sort()
            N = np.array([c[0] for c in cells], dtype=float)
            e = np.array([c[1] for c in cells])
            n_all.extend(N)
            name = formulation if len(inputs) == 1 else f"{_label(path)}:{formulation}"
            ax.loglog(N, e, "o-", label=name)
    if n_all:
        N = np.array(sorted(set(n_all)))
        anchor = ax.get_ylim()[1]
        ax.loglog(N, anchor * (N / N[0]) ** -2.0, "k--", lw=0.8, label="~N^-2")
        ax.loglog(N, anchor * (N / N[0]) ** -3.0, "k:", lw=0.8, label="~N^-3")
    ax.set_xlabel("nodes N")
    ax.set_ylabel("twist error")
    ax.legend(fontsize=7)
    ax.grid(True, which="both", alpha=0.3)


def _plot_stress_profile(inputs, fig):
    axes = fig.subplots(2, len(inputs), squeeze=False)
    for col, path in enumerate(inputs):
        data = _read_numeric(path, "stress")
        top, bottom = axes[0][col], axes[1][col]
        for i, name in enumerate(("n_x", "n_y", "n_z")):
            top.plot(data[:, 0], data[:, 1 + i], label=name, lw=0.9)
        for i, name in enumerate(("m_x", "m_y", "m_z")):
            bottom.plot(data[:, 0], data[:, 4 + i], label=name, lw=0.9)
        top.set_title(_label(path), fontsize=8)
        top.set_ylabel("contact forces")
        bottom.set_ylabel("contact moments")
        bottom.set_xlabel("xi")
        for ax in (top, bottom):
            ax.legend(fontsize=7)
            ax.grid(True, alpha=0.3)


def _plot_tip_displacement(inputs, ax):
    for path in inputs:
        data = _read_numeric(path, "tip")
        prefix = "" if len(inputs) == 1 else _label(path) + ":"
        for i, name in enumerate(("dr_x", "dr_y", "dr_z")):
            ax.plot(data[:, 0], data[:, 1 + i], label=prefix + name)
    ax.set_xlabel("load parameter t")
    ax.set_ylabel("tip displacement")
    ax.legend(fontsize=7)
    ax.grid(True, alpha=0.3)


def _plot_centerline3d(inputs, fig):
    ax = fig.add_subplot(projection="3d")
    for path in inputs:
        data = _read_numeric(path, "centerline")
        ax.plot(data[:, 1], data[:, 2], data[:, 3], label=_label(path))
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_zlabel("z")
    ax.legend(fontsize=7)


def _plot_newton_stats(inputs, fig):
    ax_it, ax_rate = fig.subplots(1, 2)
    for path in inputs:
        data = _read_numeric(path, "newton")
        prefix = _label(path) if len(inputs) > 1 else None
        ax_it.bar(
            data[:, 0], data[:, 1], width=0.9, alpha=0.6,
            label=prefix or "iterations",
        )
        defined = np.isfinite(data[:, 2]) & (data[:, 2] > 0)
        ax_rate.semilogy(
            data[defined, 0], data[defined, 2], "o",
            ms=3, label=prefix or "rate",
        )
    ax_it.set_xlabel("increment")
    ax_it.set_ylabel("Newton iterations")
    ax_rate.set_xlabel("increment")
    ax_rate.set_ylabel("local quadratic rate")
    for ax in (ax_it, ax_rate):
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=7)


def render(spec: PlotSpec):
    """Render one figure; returns the output path."""
    if spec.kind not in PLOT_KINDS:
        raise ValueError(f"unknown plot kind {spec.kind!r}; have {sorted(PLOT_KINDS)}")
    if not spec.inputs:
        raise ValueError("need at least one input CSV")
    fig = plt.figure(
        figsize=(4.0 * (len(spec.inputs) if spec.kind == "stress_profile" else 1.6),
                 4.8 if spec.kind in ("stress_profile", "newton_stats") else 4.0),
        dpi=_FIGURE_DPI,
    )
    try:
        if spec.kind == "convergence":
            _plot_convergence(spec.inputs, fig.subplots())
        elif spec.kind == "stress_profile":
            _plot_stress_profile(spec.inputs, fig)
        elif spec.kind == "tip_displacement":
            _plot_tip_displacement(spec.inputs, fig.subplots())
        elif spec.kind == "centerline3d":
            _plot_centerline3d(spec.inputs, fig)
        elif spec.kind == "newton_stats":
            _plot_newton_stats(spec.inputs, fig)
        fig.tight_layout()
        fig.savefig(spec.output, metadata={"Software": "rodplot"})
    finally:
        plt.close(fig)
    return spec.output


PLOT_KINDS = (
    "convergence",
    "stress_profile",
    "tip_displacement",
    "centerline3d",
    "newton_stats",
)
