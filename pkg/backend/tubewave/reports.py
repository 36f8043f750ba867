"""
CSV tables and optional SVG plots for solves and sweeps.

Floats are written with 17 significant digits, LF line endings, and every
file goes through a temp file plus os.replace, so a reader never sees a
half-written table.
"""

import csv
import io
import logging
import os
import shutil

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from errors import GateError  # noqa: E402
from fields import time_series  # noqa: E402

logger = logging.getLogger(__name__)

FIELD_COLUMNS = [
    "x", "Q1_re", "Q1_im", "u1_re", "u1_im", "w1_re", "w1_im",
    "sigma1_re", "sigma1_im", "p1_re", "p1_im", "abs_q",
]
DISPERSION_COLUMNS = ["omega", "delta_re", "delta_im", "phase_speed", "attenuation", "status"]
SWEEP_COLUMNS = ["omega", "status", "n_terms", "q_l1", "tail_bound", "max_residual", "error"]
SNAPSHOT_COLUMNS = ["t", "x", "Q", "u", "w", "sigma", "p"]


class GoldenMismatch(GateError):
    pass


def fmt(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def atomic_write_text(path, text):
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
        f.flush()
        os.fsync(f.fileno())
    os.replace(tmp, path)


def write_csv(path, header, rows):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    atomic_write_text(path, buffer.getvalue())
    logger.debug(f"wrote {path}")
    return path


def write_fields(path, fields, abs_q):
    rows = []
    for i, x in enumerate(fields.grid):
        row = [x]
        for name in ("Q1", "u1", "w1", "sigma1", "p1"):
            value = getattr(fields, name)[i]
            row += [value.real, value.imag]
        rows.append(row + [abs_q[i]])
    return write_csv(path, FIELD_COLUMNS, rows)


def summary_rows(ctx, jost, fields, residuals, boundary_error):
    rows = [
        ("delta_re", ctx.delta.real),
        ("delta_im", ctx.delta.imag),
        ("delta_sq_re", complex(ctx.delta_sq).real),
        ("delta_sq_im", complex(ctx.delta_sq).imag),
        ("k0", ctx.k0),
        ("k1", ctx.k1),
        ("q_l1", ctx.q_l1),
        ("n_terms", jost.n_terms),
        ("tail_bound", jost.tail_bound),
        ("y0_re", fields.y0.real),
        ("y0_im", fields.y0.imag),
    ]
    rows += [(f"residual_{name}", value) for name, value in residuals.items()]
    rows.append(("boundary_error", boundary_error))
    return rows


def write_summary(path, rows):
    return write_csv(path, ["quantity", "value"], rows)


def write_dispersion(path, results):
    rows = []
    for r in results:
        delta = r.get("delta")
        if delta is None:
            rows.append([r["omega"], None, None, None, None, r["status"]])
            continue
        speed = r["omega"] / delta.real if delta.real else float("inf")
        rows.append([r["omega"], delta.real, delta.imag, speed, -delta.imag, r["status"]])
    return write_csv(path, DISPERSION_COLUMNS, rows)


def write_sweep_summary(path, results):
    rows = [[r["omega"], r["status"], r.get("n_terms"), r.get("q_l1"), r.get("tail_bound"),
             r.get("max_residual"), r.get("error")] for r in results]
    return write_csv(path, SWEEP_COLUMNS, rows)


def write_snapshots(path, fields, n_phases):
    rows = []
    for t, snap in time_series(fields, n_phases):
        for i, x in enumerate(fields.grid):
            rows.append([t, x] + [snap[name][i] for name in ("Q1", "u1", "w1", "sigma1", "p1")])
    return write_csv(path, SNAPSHOT_COLUMNS, rows)


def plot_pressure(out_dir, fields, title=""):
    """|p1(x)| and its phase as two static SVG files."""
    plt.rcParams["svg.hashsalt"] = "tubewave"
    written = []
    for name, values, label in (
        ("p1_abs.svg", np.abs(fields.p1), "|p1| [Pa]"),
        ("p1_phase.svg", np.unwrap(np.angle(fields.p1)), "arg p1 [rad]"),
    ):
        fig, ax = plt.subplots(figsize=(6, 3.5))
        ax.plot(fields.grid, values, lw=1.2)
        ax.set_xlabel("x [m]")
        ax.set_ylabel(label)
        if title:
            ax.set_title(title)
        ax.grid(alpha=0.3)
        fig.tight_layout()
        path = os.path.join(out_dir, name)
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        written.append(path)
    return written


def compare_golden(out_dir, golden_dir, names=("fields.csv",)):
    """
    Byte comparison against golden copies. A missing golden file is recorded
    from the current run; returns the list of recorded names.
    """
    os.makedirs(golden_dir, exist_ok=True)
    recorded, mismatched = [], []
    for name in names:
        current = os.path.join(out_dir, name)
        golden = os.path.join(golden_dir, name)
        if not os.path.exists(golden):
            shutil.copyfile(current, golden)
            recorded.append(name)
            logger.info(f"📌 recorded golden {golden}")
            continue
        with open(current, "rb") as a, open(golden, "rb") as b:
            if a.read() != b.read():
                mismatched.append(name)
    if mismatched:
        raise GoldenMismatch(f"output differs from golden copy in {golden_dir}: {mismatched}")
    return recorded
