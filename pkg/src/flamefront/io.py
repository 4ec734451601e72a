"""CSV/JSON writers and the run manifest.

Floats are written with 17 significant digits so every double round-trips.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        return format(v, ".17g")
    return str(value)


def write_csv(path: Path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return path


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with Path(path).open(newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    return rows[0], rows[1:]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_json(path: Path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(output_dir: Path, config: dict, outputs, version: str, wall_clock: float) -> Path:
    """manifest.json listing every output with its sha256; written only for completed runs."""
    output_dir = Path(output_dir)
    files = [{"path": Path(p).relative_to(output_dir).as_posix(), "sha256": sha256_file(p)}
             for p in outputs]
    return write_json(output_dir / "manifest.json", {
        "config": config,
        "version": version,
        "wall_clock_seconds": wall_clock,
        "outputs": files,
    })


# ---------------------------------------------------------------------------
# row builders
# ---------------------------------------------------------------------------

STEADY_HEADER = ["x", "v", "v_x", "theta", "residual"]


def steady_rows(state):
    from .spectral import derivative, product

    v = state.v
    eps = state.epsilon
    r = eps * derivative(v, 2).values - product(v, derivative(v, 1)).values + v.values
    dv = derivative(v, 1).values
    theta = state.theta
    return [(x, a, b, t, abs(c)) for x, a, b, t, c in zip(v.x, v.values, dv, theta, r)]


DIAGRAM_HEADER = ["epsilon", "j", "sign", "w0", "delta_phi", "V", "verdict"]


def diagram_rows(rows):
    return [(r.epsilon, r.j, r.sign, r.w0, r.delta_phi, r.V, r.verdict) for r in rows]


CATALOG_HEADER = ["j", "k", "sign", "n_poles", "heights", "delta_phi", "V", "residual", "classification"]


def catalog_rows(entries, epsilon=None):
    out = []
    for e in entries:
        heights = ";".join(fmt(h) for h in e.heights)
        row = (e.j, e.k, e.sign, e.n_poles, heights, e.delta_phi, e.V, e.residual, e.classification)
        out.append(row if epsilon is None else (epsilon,) + row)
    return out


def pole_trajectory_header(n: int):
    return ["t"] + [f"y_{i + 1}" for i in range(n)] + ["U"]


def pole_trajectory_rows(report):
    return [(t, *y, u) for t, y, u in zip(report.times, report.trajectory, report.liapunov_values)]
