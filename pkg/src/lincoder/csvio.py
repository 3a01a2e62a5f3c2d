"""External file formats: trajectory CSV, rate-curve CSV, family JSON.

Floats are printed with 17 significant digits so every file round-trips
losslessly, and files are written with LF newlines so repeated runs are
byte-identical.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .coderate import RateCurve
from .emulation import AffineField, ConstantField, SourceFamily
from .trajectories import TrajectoryDataset


def format_float(value: float) -> str:
    return f"{float(value):.17g}"


def write_trajectories(dataset: TrajectoryDataset, path) -> None:
    """Dataset as CSV: header trial,k,t,x1..xn; rows sorted by (trial, k)."""
    n = dataset.dimension
    header = "trial,k,t," + ",".join(f"x{i + 1}" for i in range(n))
    lines = [header]
    for trial in range(dataset.trials):
        for k in range(dataset.steps + 1):
            row = [str(trial), str(k), format_float(k * dataset.dt)]
            row.extend(format_float(v) for v in dataset.states[trial, k])
            lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")


def read_trajectories(path) -> TrajectoryDataset:
    """Parse a dataset CSV; requires a complete uniform (trial, k) grid."""
    text = Path(path).read_text()
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise ValueError(f"dataset file {path} is empty")
    header = lines[0].split(",")
    if header[:3] != ["trial", "k", "t"] or len(header) < 4:
        raise ValueError(f"dataset file {path} has an unexpected header")
    n = len(header) - 3
    rows = []
    for line in lines[1:]:
        parts = line.split(",")
        if len(parts) != len(header):
            raise ValueError(f"dataset file {path} has a malformed row: {line!r}")
        rows.append((int(parts[0]), int(parts[1]), [float(v) for v in parts[2:]]))
    if not rows:
        raise ValueError(f"dataset file {path} contains no data rows")
    trials = max(r[0] for r in rows) + 1
    steps = max(r[1] for r in rows)
    if steps < 1:
        raise ValueError(f"dataset file {path} holds a single time point per trial")
    states = np.full((trials, steps + 1, n), np.nan)
    dt = None
    for trial, k, values in rows:
        states[trial, k] = values[1:]
        if k == 1 and dt is None:
            dt = values[0]
    if dt is None or not np.isfinite(dt) or dt <= 0.0:
        raise ValueError(f"dataset file {path} has no usable time column")
    if np.any(np.isnan(states)):
        raise ValueError(f"dataset file {path} does not cover a complete grid")
    return TrajectoryDataset(dt, states)


def write_rate_curve(curve: RateCurve, path) -> None:
    """Rate curve as CSV with a comment line carrying run metadata."""
    asymptote = "none" if curve.asymptote_bits is None else format_float(curve.asymptote_bits)
    lines = [
        f"# distortion={format_float(curve.distortion)}"
        f" asymptote_bits={asymptote} model={curve.model_hash}",
        "dt,fs,rate_bits",
    ]
    for dt, fs, rate in curve.rows():
        lines.append(f"{format_float(dt)},{format_float(fs)},{format_float(rate)}")
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")


def load_family(path) -> SourceFamily:
    """Family JSON: an array whose entries are vectors or {M, b} objects."""
    data = json.loads(Path(path).read_text())
    if not isinstance(data, list) or not data:
        raise ValueError(f"family file {path} must hold a non-empty array")
    fields = []
    for entry in data:
        if isinstance(entry, dict):
            try:
                fields.append(AffineField(np.asarray(entry["M"], dtype=float),
                                          np.asarray(entry["b"], dtype=float)))
            except KeyError as exc:
                raise ValueError(f"family file {path}: affine entries need M and b") from exc
        else:
            fields.append(ConstantField(np.asarray(entry, dtype=float)))
    return SourceFamily(tuple(fields))


def dump_family(family: SourceFamily, path) -> None:
    entries = []
    for field in family.fields:
        if isinstance(field, ConstantField):
            entries.append(list(field.vector))
        else:
            entries.append({"M": field.matrix.tolist(), "b": list(field.offset)})
    Path(path).write_text(json.dumps(entries, indent=2) + "\n", newline="\n")
