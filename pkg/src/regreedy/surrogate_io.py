"""CSV and JSON interchange for candidate sets, models, traces and power reports.

Floats are written with ``repr``, the shortest decimal string that reads
back to the same double, in every file format.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .diagnostics import PowerReport
from .geometry import CandidateSet
from .greedy import RunTrace, SurrogateModel, TraceRecord
from .kernels import KernelSpec

SCHEMA_VERSION = 1

TRACE_FIELDS = (
    "n",
    "selected_index",
    "max_power",
    "max_residual",
    "fill_distance",
    "separation_distance",
    "elapsed_ms",
)


class FormatError(ValueError):
    """Malformed or incompatible input file."""


def fmt(x) -> str:
    return repr(float(x))


def _write_text(path, text: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(text)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _read_table(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise FormatError(f"{path}: missing header")
    header = [h.strip() for h in rows[0]]
    has_f = header[-1] == "f"
    coords = header[:-1] if has_f else header
    if not coords or coords != [f"x{i + 1}" for i in range(len(coords))]:
        raise FormatError(f"{path}: header must be x1,...,xd[,f], got {','.join(header)}")
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise FormatError(f"{path}:{lineno}: expected {len(header)} columns, got {len(row)}")
        try:
            data.append([float(v) for v in row])
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from None
    arr = np.array(data, dtype=float).reshape(-1, len(header))
    return arr[:, : len(coords)], (arr[:, -1] if has_f else None)


def read_points_csv(path) -> CandidateSet:
    """Read ``x1,...,xd[,f]`` rows; values are attached iff the last column is ``f``."""
    pts, values = _read_table(path)
    seen = {}
    for i, p in enumerate(map(tuple, pts)):
        if p in seen:
            # file line numbers, the header is line 1
            raise FormatError(f"{path}: duplicate points on lines {seen[p] + 2} and {i + 2}")
        seen[p] = i
    return CandidateSet(pts, values)


def read_query_csv(path) -> np.ndarray:
    """Coordinates of a query CSV; duplicates allowed, an ``f`` column is ignored."""
    return _read_table(path)[0]


def write_points_csv(omega_h: CandidateSet, path) -> None:
    header = [f"x{i + 1}" for i in range(omega_h.dim)]
    rows = [[fmt(v) for v in p] for p in omega_h.points]
    if omega_h.values is not None:
        header.append("f")
        rows = [r + [fmt(v)] for r, v in zip(rows, omega_h.values)]
    _write_text(path, _csv_text(header, rows))


def write_trace_csv(trace: RunTrace, path) -> None:
    rows = []
    for r in trace.records:
        rows.append(
            [str(r.n), str(r.selected_index)]
            + [fmt(getattr(r, f)) for f in TRACE_FIELDS[2:]]
        )
    _write_text(path, _csv_text(TRACE_FIELDS, rows))


def read_trace_csv(path) -> RunTrace:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != TRACE_FIELDS:
            raise FormatError(f"{path}: not a trace file")
        records = []
        for row in reader:
            if not row:
                continue
            records.append(
                TraceRecord(int(row[0]), int(row[1]), *(float(v) for v in row[2:]))
            )
    return RunTrace(records)


def model_to_dict(model: SurrogateModel) -> dict:
    spec = model.spec
    return {
        "schema_version": SCHEMA_VERSION,
        "kernel": {
            "family": spec.family,
            "eps": spec.shape,
            "wendland_k": spec.wendland_k,
            "dim": spec.dim,
        },
        "lambda": spec.lam,
        "points": model.points.tolist(),
        "alpha": model.alpha.tolist(),
        "newton_coeffs": model.newton_coeffs.tolist(),
        "selection_order": [int(i) for i in model.selection_order],
    }


def model_from_dict(doc: dict) -> SurrogateModel:
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise FormatError(f"unsupported schema_version {version!r}, expected {SCHEMA_VERSION}")
    try:
        k = doc["kernel"]
        spec = KernelSpec(
            family=k["family"],
            shape=float(k["eps"]),
            dim=int(k["dim"]),
            lam=float(doc["lambda"]),
            wendland_k=int(k.get("wendland_k", 2)),
        )
        pts = np.array(doc["points"], dtype=float).reshape(-1, spec.dim)
        alpha = np.array(doc["alpha"], dtype=float)
        coeffs = np.array(doc["newton_coeffs"], dtype=float)
        order = tuple(int(i) for i in doc.get("selection_order", ()))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed model document: {exc}") from None
    if alpha.shape[0] != pts.shape[0]:
        raise FormatError("alpha and points have different lengths")
    return SurrogateModel(spec, pts, coeffs, alpha, order)


def write_model_json(model: SurrogateModel, path) -> None:
    _write_text(path, json.dumps(model_to_dict(model), indent=1) + "\n")


def read_model_json(path) -> SurrogateModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: malformed JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: expected a JSON object")
    return model_from_dict(doc)


def write_power_report_csv(report: PowerReport, path, footer=None) -> None:
    """Columns ``x1..xd,P,P_lambda,Q_lambda,Lebesgue2``; ``footer`` lines are appended as ``# ...``."""
    d = report.points.shape[1]
    header = [f"x{i + 1}" for i in range(d)] + ["P", "P_lambda", "Q_lambda", "Lebesgue2"]
    cols = np.column_stack([report.points, report.P, report.P_lambda, report.Q_lambda, report.lebesgue])
    text = _csv_text(header, [[fmt(v) for v in row] for row in cols])
    if footer:
        text += "".join(f"# {line}\n" for line in footer)
    _write_text(path, text)


def read_power_report_csv(path) -> dict:
    """Columns of a power-report CSV as arrays, comment lines skipped."""
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    rows = [[float(v) for v in r] for r in reader if r]
    arr = np.array(rows, dtype=float).reshape(-1, len(header))
    return {h: arr[:, i] for i, h in enumerate(header)}
