"""Canonical serialization of reports and fields.

JSON output is diffable: keys sorted, floats rendered with 17 significant
digits, no locale or timestamp dependence, so a fixed seed and config yield
byte-identical artifacts.  Fields serialize to CSV (node coordinates plus m
values) and to a flat binary format:

    magic "FSF1" | int32 n | int32 m | int32 dims[n] | float64 h |
    float64 values, C order, shape dims x m, little endian

Grids are origin centered, so coordinates are implied by dims and h.
"""

from __future__ import annotations

import dataclasses
import json
import struct
from pathlib import Path

import numpy as np

from .errors import DomainError
from .fields import GridSpec, SampledField, parse_rule

__all__ = [
    "canonical_json",
    "emit_report",
    "write_field_csv",
    "write_field_fsf1",
    "read_field_fsf1",
    "write_csv",
]

_MAGIC = b"FSF1"


def _canonicalize(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        d = {}
        for f in dataclasses.fields(obj):
            d[f.name] = _canonicalize(getattr(obj, f.name))
        return d
    if isinstance(obj, dict):
        return {str(k): _canonicalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonicalize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_canonicalize(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return _FloatLiteral(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, SampledField):
        return {"grid": _canonicalize(obj.grid), "m": obj.m,
                "exterior": obj.exterior.kind}
    return obj


class _FloatLiteral(float):
    pass


def _format_float(x: float) -> str:
    # JSON has no nan/inf literals; render them as strings, still diffable
    if x != x:
        return '"nan"'
    if x in (float("inf"), float("-inf")):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def canonical_json(obj) -> str:
    """Serialize with sorted keys and fixed 17-significant-digit floats."""
    tree = _canonicalize(obj)

    def render(node):
        if isinstance(node, _FloatLiteral):
            return _format_float(node)
        if isinstance(node, dict):
            items = sorted(node.items())
            return "{" + ", ".join(f"{json.dumps(k)}: {render(v)}" for k, v in items) + "}"
        if isinstance(node, list):
            return "[" + ", ".join(render(v) for v in node) + "]"
        return json.dumps(node)

    return render(tree) + "\n"


def write_csv(path, header, rows):
    """CSV with canonical float formatting."""
    path = Path(path)
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, (float, np.floating)):
                cells.append(format(float(v), ".17g"))
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n")
    return path


def emit_report(report, path) -> Path:
    """Write any report (dataclass or dict) as canonical JSON; known tabular
    reports get a CSV companion next to the JSON file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(canonical_json(report))
    name = type(report).__name__
    if name == "DecayLedger":
        rows = [
            (int(k), float(r), float(m), *map(float, np.atleast_1d(c)))
            for k, r, m, c in zip(report.levels, report.ball_radii,
                                  report.radii, report.centers)
        ]
        mdim = np.atleast_2d(report.centers).shape[-1]
        header = ["k", "ball_radius", "M_k"] + [f"rho_k_{i}" for i in range(mdim)]
        write_csv(path.with_suffix(".csv"), header, rows)
    elif name == "HarnackReport":
        rows = list(zip(map(float, report.s_values), map(float, report.ratios_by_s)))
        write_csv(path.with_suffix(".csv"), ["s", "ratio"], rows)
    return path


def write_field_csv(path, field: SampledField) -> Path:
    pts = field.grid.points().reshape(-1, field.grid.dim)
    vals = np.asarray(field.values).reshape(-1, field.m)
    header = [f"x{i}" for i in range(field.grid.dim)] + [f"u{i}" for i in range(field.m)]
    rows = np.hstack([pts, vals])
    return write_csv(path, header, rows)


def write_evaluation_csv(path, grid, values, estimate) -> Path:
    """Pointwise operator evaluations as (x, value, truncation_error_estimate)
    rows over the grid nodes."""
    pts = grid.points().reshape(-1, grid.dim)
    vals = np.asarray(values).reshape(pts.shape[0], -1)
    est = np.broadcast_to(np.asarray(estimate, dtype=float), (pts.shape[0], 1))
    header = ([f"x{i}" for i in range(grid.dim)]
              + [f"value{i}" for i in range(vals.shape[1])]
              + ["truncation_error_estimate"])
    return write_csv(path, header, np.hstack([pts, vals, est]))


def write_field_fsf1(path, field: SampledField) -> Path:
    path = Path(path)
    grid = field.grid
    dims = grid.shape
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<i", grid.dim))
        fh.write(struct.pack("<i", field.m))
        for d in dims:
            fh.write(struct.pack("<i", d))
        fh.write(struct.pack("<d", grid.h))
        fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())
    return path


def read_field_fsf1(path, exterior="zero") -> SampledField:
    """Read a binary field; the exterior rule is not stored and must be
    resupplied (config rule name or ExteriorRule)."""
    raw = Path(path).read_bytes()
    if raw[:4] != _MAGIC:
        raise DomainError("not a field file (bad magic)")
    off = 4
    n, m = struct.unpack_from("<ii", raw, off)
    off += 8
    dims = struct.unpack_from(f"<{n}i", raw, off)
    off += 4 * n
    (h,) = struct.unpack_from("<d", raw, off)
    off += 8
    vals = np.frombuffer(raw, dtype="<f8", offset=off).reshape(*dims, m)
    # reconstruct the centered grid: odd dims => free space (ball + collar)
    if dims[0] % 2 == 1:
        radius = (dims[0] - 1) // 2 * h / 2.0
        grid = GridSpec(dim=n, h=h, radius=radius)
    else:
        grid = GridSpec(dim=n, h=h, radius=dims[0] * h / 2.0, periodic=True)
    rule = parse_rule(exterior) if isinstance(exterior, str) else exterior
    return SampledField(grid, vals.copy(), rule)
