"""Deterministic serialization: 17-digit JSON, CSV fields, binary snapshots with JSON sidecars."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .grid import Grid1D
from .manybody import ManyBodyWavefunction

CSV_COLUMNS = {"x": "grid coordinate", "re": "real part", "im": "imaginary part"}
SNAPSHOT_LAYOUT = "little-endian float64 (re, im) pairs, C order over (x1, ..., xN)"


def _format(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return json.dumps(str(x))
        return format(x, ".17g")
    if isinstance(obj, (complex, np.complexfloating)):
        return _format({"re": obj.real, "im": obj.imag}, indent, level)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _format(obj.tolist(), indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_format(v, indent, level + 1)}" for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + _format(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with sorted keys and every float written with 17 significant digits."""
    return _format(obj, indent, 0) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def write_csv(path, x: np.ndarray, values: np.ndarray) -> None:
    values = np.asarray(values, dtype=complex)
    lines = ["x,re,im"]
    for xi, v in zip(np.asarray(x, dtype=float), values):
        lines.append(f"{xi:.17g},{v.real:.17g},{v.imag:.17g}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_csv(path) -> tuple[np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1] + 1j * data[:, 2]


def write_snapshot(path, psi: ManyBodyWavefunction) -> tuple[Path, Path]:
    """Write ``path``.bin (raw amplitudes) and ``path``.json (metadata)."""
    path = Path(path)
    bin_path, meta_path = path.with_suffix(".bin"), path.with_suffix(".json")
    np.ascontiguousarray(psi.amplitudes, dtype="<c16").tofile(bin_path)
    write_json(meta_path, {
        "grid": psi.grid.to_dict(),
        "N": psi.N,
        "statistics": psi.statistics,
        "time": psi.time,
        "shape": list(psi.amplitudes.shape),
        "layout": SNAPSHOT_LAYOUT,
        "file": bin_path.name,
    })
    return bin_path, meta_path


def read_snapshot(path) -> ManyBodyWavefunction:
    path = Path(path)
    meta = read_json(path.with_suffix(".json"))
    g = meta["grid"]
    grid = Grid1D(g["x_min"], g["x_max"], g["n_points"])
    amps = np.fromfile(path.with_suffix(".bin"), dtype="<c16")
    shape = tuple(meta["shape"])
    if amps.size != int(np.prod(shape)):
        raise ConfigurationError(f"snapshot {path} has {amps.size} amplitudes, expected {shape}")
    return ManyBodyWavefunction(grid, meta["N"], amps.reshape(shape).astype(complex), meta["statistics"], meta["time"])
