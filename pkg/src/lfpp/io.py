"""Artifact persistence: binary field files, CSV tables, JSON reports.

The binary field format is fixed and versioned:
magic "LFPF", version u16, n u32, spacing f64, origin 2 x f64, kind u8,
seed u64, followed by n*n little-endian f64 values in row-major order.
"""

from __future__ import annotations

import csv
import json
import struct
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .field import COMPOSITE, DETERMINISTIC, WHOLE_PLANE, ZERO_BOUNDARY, GridSpec, LatticeField

MAGIC = b"LFPF"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<4sHIdddBQ")

_KIND_CODES = {
    ZERO_BOUNDARY: 0,
    WHOLE_PLANE: 1,
    DETERMINISTIC: 2,
    COMPOSITE: 3,
}
_CODE_KINDS = {v: k for k, v in _KIND_CODES.items()}


def save_field(path: str, field: LatticeField) -> None:
    spec = field.spec
    header = _HEADER.pack(
        MAGIC,
        FORMAT_VERSION,
        spec.n,
        spec.spacing,
        spec.origin[0],
        spec.origin[1],
        _KIND_CODES[field.kind],
        field.seed if field.seed is not None else 0,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())


def load_field(path: str) -> LatticeField:
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
        if len(raw) != _HEADER.size:
            raise ValueError("truncated field file header")
        magic, version, n, spacing, ox, oy, kind_code, seed = _HEADER.unpack(raw)
        if magic != MAGIC:
            raise ValueError(f"bad magic {magic!r}; not a field file")
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported field file version {version}")
        if kind_code not in _CODE_KINDS:
            raise ValueError(f"unknown field kind code {kind_code}")
        payload = fh.read(8 * n * n)
        if len(payload) != 8 * n * n:
            raise ValueError("truncated field file payload")
    values = np.frombuffer(payload, dtype="<f8").reshape(n, n).astype(np.float64)
    spec = GridSpec(n=int(n), spacing=float(spacing), origin=(float(ox), float(oy)))
    return LatticeField(spec=spec, values=values, kind=_CODE_KINDS[kind_code], seed=int(seed))


def _comment_line(fh, comment: Optional[str]) -> None:
    if comment is not None:
        fh.write(f"# {comment}\n")


def write_geodesic_csv(path: str, spec: GridSpec, geodesic: Sequence[Tuple[int, int]], costs: Sequence[float],
                       comment: Optional[str] = None) -> None:
    """Geodesic table: (step, x, y, cumulative_cost), physical coordinates."""
    if len(geodesic) != len(costs):
        raise ValueError("geodesic and cumulative costs must have equal length")
    with open(path, "w", newline="") as fh:
        _comment_line(fh, comment)
        w = csv.writer(fh)
        w.writerow(["step", "x", "y", "cumulative_cost"])
        for k, ((i, j), c) in enumerate(zip(geodesic, costs)):
            x = spec.origin[0] + spec.spacing * i
            y = spec.origin[1] + spec.spacing * j
            w.writerow([k, repr(x), repr(y), repr(float(c))])


def write_scale_series_csv(path: str, series, comment: Optional[str] = None) -> None:
    with open(path, "w", newline="") as fh:
        _comment_line(fh, comment)
        w = csv.writer(fh)
        w.writerow(["eps", "median", "iqr", "replicas"])
        for s, m, q in zip(series.scales, series.medians, series.iqr):
            w.writerow([repr(float(s)), repr(float(m)), repr(float(q)), series.replicas])


def write_circle_trace_csv(path: str, ts: Sequence[float], values: Sequence[float],
                           comment: Optional[str] = None) -> None:
    """Circle-average trace: columns (t, h_r, r) with r = e^{-t}."""
    with open(path, "w", newline="") as fh:
        _comment_line(fh, comment)
        w = csv.writer(fh)
        w.writerow(["t", "h_r", "r"])
        for t, v in zip(ts, values):
            w.writerow([repr(float(t)), repr(float(v)), repr(float(np.exp(-t)))])


def fit_to_dict(fit) -> Dict[str, float]:
    return {
        "slope": fit.slope,
        "intercept": fit.intercept,
        "stderr": fit.stderr,
        "r2": fit.r2,
        "residual_rms": fit.residual_rms,
        "n_scales": fit.n_scales,
    }


def write_json(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_suite_summary_csv(path: str, rows: List[dict], comment: Optional[str] = None) -> None:
    """Suite table: one row per experiment metric checked against a target."""
    with open(path, "w", newline="") as fh:
        _comment_line(fh, comment)
        w = csv.writer(fh)
        w.writerow(["experiment", "metric", "value", "target", "tolerance", "pass", "seconds"])
        for r in rows:
            w.writerow(
                [
                    r["experiment"],
                    r["metric"],
                    repr(float(r["value"])),
                    "" if r.get("target") is None else repr(float(r["target"])),
                    "" if r.get("tolerance") is None else repr(float(r["tolerance"])),
                    int(bool(r["pass"])),
                    repr(float(r["seconds"])),
                ]
            )
