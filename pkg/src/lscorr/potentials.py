"""Single-particle potentials with annotated local symmetries, and pair interactions."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, SymmetryViolation
from .grid import Grid1D, SymmetryMap

SYMMETRY_TOL = 1e-12
SYMMETRY_CLASSES = ("global", "nongapped-local", "gapped-local", "complete-local")
POTENTIAL_KINDS = ("multilayer", "wells", "harmonic", "table")
INTERACTION_KINDS = ("none", "contact", "gaussian")


def smooth_bump(u: np.ndarray) -> np.ndarray:
    """C-infinity bump, 1 at u=0 and identically 0 for |u| >= 1."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    m = np.abs(u) < 1
    out[m] = np.exp(1.0 - 1.0 / (1.0 - u[m] ** 2))
    return out


@dataclass(frozen=True)
class SymmetryAnnotation:
    sigma: int
    L: float
    start: float
    stop: float
    kind: str = "nongapped-local"
    label: str = ""

    def __post_init__(self):
        if self.kind not in SYMMETRY_CLASSES:
            raise ConfigurationError(f"unknown symmetry class {self.kind!r}")

    def bind(self, grid: Grid1D) -> SymmetryMap:
        return SymmetryMap.from_positions(
            grid, self.sigma, self.L, self.start, self.stop, self.label or self.kind
        )

    @classmethod
    def from_dict(cls, d: dict) -> "SymmetryAnnotation":
        return cls(
            sigma=int(d["sigma"]),
            L=float(d["L"]),
            start=float(d["start"]),
            stop=float(d["stop"]),
            kind=d.get("class", "nongapped-local"),
            label=d.get("label", ""),
        )


@dataclass(frozen=True)
class PotentialSpec:
    """Tabulation recipe for U(x).

    ``segments`` depends on ``kind``:

    * multilayer: dicts ``{start, stop, value}``; steps are sharp unless
      ``edge_width > 0``, in which case each edge is a smooth ramp of that
      width (exactly flat outside the ramp).
    * wells: dicts ``{center, depth, half_width, shape}`` with shape
      ``bump`` (smooth, compact) or ``square``.  Depth is positive for a well.
    * harmonic: single dict ``{omega, center}``.
    * table: single dict ``{values}`` with one entry per grid point.

    ``walls`` optionally adds ``strength*(x - right)**2`` beyond ``right`` and
    the mirror image below ``left``.
    """

    kind: str
    segments: tuple = ()
    symmetries: tuple = ()
    walls: dict | None = None
    edge_width: float = 0.0
    background: float = 0.0

    def __post_init__(self):
        if self.kind not in POTENTIAL_KINDS:
            raise ConfigurationError(f"unknown potential kind {self.kind!r}")
        object.__setattr__(self, "segments", tuple(self.segments))
        syms = tuple(
            s if isinstance(s, SymmetryAnnotation) else SymmetryAnnotation.from_dict(s)
            for s in self.symmetries
        )
        object.__setattr__(self, "symmetries", syms)

    @classmethod
    def from_dict(cls, d: dict) -> "PotentialSpec":
        return cls(
            kind=d["kind"],
            segments=tuple(d.get("segments", ())),
            symmetries=tuple(d.get("symmetries", ())),
            walls=d.get("walls"),
            edge_width=float(d.get("edge_width", 0.0)),
            background=float(d.get("background", 0.0)),
        )

    def maps(self, grid: Grid1D) -> list[SymmetryMap]:
        return [s.bind(grid) for s in self.symmetries]


def smooth_step(u: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for u <= -1/2, 1 for u >= 1/2, exact constants outside."""
    s = np.asarray(u, dtype=float) + 0.5
    f = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
    g = np.where(s < 1, np.exp(-1.0 / np.where(s < 1, 1.0 - s, 1.0)), 0.0)
    return f / (f + g)


def _tabulate(spec: PotentialSpec, x: np.ndarray) -> np.ndarray:
    U = np.full_like(x, spec.background)
    if spec.kind == "multilayer":
        for seg in spec.segments:
            a, b, v = float(seg["start"]), float(seg["stop"]), float(seg["value"])
            if spec.edge_width > 0:
                w = spec.edge_width
                U += v * (smooth_step((x - a) / w) - smooth_step((x - b) / w))
            else:
                # a jump landing on a grid point takes the mean of both sides
                inside = (x > a) & (x < b)
                U[inside] += v
                U[np.isclose(x, a, rtol=0, atol=1e-12)] += 0.5 * v
                U[np.isclose(x, b, rtol=0, atol=1e-12)] += 0.5 * v
    elif spec.kind == "wells":
        for seg in spec.segments:
            c, depth, hw = float(seg["center"]), float(seg["depth"]), float(seg["half_width"])
            if seg.get("shape", "bump") == "bump":
                U -= depth * smooth_bump((x - c) / hw)
            else:
                U[np.abs(x - c) <= hw] -= depth
    elif spec.kind == "harmonic":
        seg = spec.segments[0] if spec.segments else {}
        om, c = float(seg.get("omega", 1.0)), float(seg.get("center", 0.0))
        U += 0.5 * om**2 * (x - c) ** 2
    elif spec.kind == "table":
        vals = np.asarray(spec.segments[0]["values"], dtype=float)
        if vals.shape != x.shape:
            raise ConfigurationError("table potential length does not match the grid")
        U += vals
    if spec.walls:
        k = float(spec.walls.get("strength", 1.0))
        lo, hi = float(spec.walls["left"]), float(spec.walls["right"])
        U += np.where(x > hi, k * (x - hi) ** 2, 0.0) + np.where(x < lo, k * (lo - x) ** 2, 0.0)
    return U


def verify_local_symmetry(U: np.ndarray, map: SymmetryMap) -> float:
    """Max over the domain of |U(F(x)) - U(x)|."""
    U = np.asarray(U)
    return float(np.max(np.abs(U[map.image_indices] - U[map.domain_indices])))


def _symmetrize(U: np.ndarray, map: SymmetryMap) -> None:
    i, j = map.domain_indices, map.image_indices
    if map.sigma == -1:
        avg = 0.5 * (U[i] + U[j])
        U[i] = avg
        U[j] = avg
    else:
        # ascending sweep so chains x -> F(x) -> F(F(x)) inside D stay consistent
        for a, b in zip(i, j):
            U[b] = U[a]


def build_locally_symmetric_potential(spec: PotentialSpec, grid: Grid1D) -> np.ndarray:
    """Tabulate U on the grid and enforce every annotated symmetry.

    Each annotation is checked at ``SYMMETRY_TOL`` before the rounding-level
    remainder is removed, so a genuinely asymmetric input raises
    :class:`SymmetryViolation` instead of being silently repaired.
    """
    U = _tabulate(spec, grid.x)
    maps = spec.maps(grid)
    for m in maps:
        dev = verify_local_symmetry(U, m)
        if dev > SYMMETRY_TOL:
            raise SymmetryViolation(m.label or f"sigma={m.sigma}, L={m.L}", dev)
        _symmetrize(U, m)
    for m in maps:
        dev = verify_local_symmetry(U, m)
        if dev > SYMMETRY_TOL:
            raise SymmetryViolation(m.label or f"sigma={m.sigma}, L={m.L}", dev)
    return U


@dataclass(frozen=True)
class InteractionSpec:
    kind: str = "none"
    g: float = 0.0
    V0: float = 0.0
    w: float = 1.0
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in INTERACTION_KINDS:
            raise ConfigurationError(f"unknown interaction kind {self.kind!r}")
        if self.kind == "gaussian" and not self.w > 0:
            raise ConfigurationError("gaussian interaction range w must be positive")

    @classmethod
    def from_dict(cls, d: dict | None) -> "InteractionSpec":
        d = d or {"kind": "none"}
        return cls(
            kind=d.get("kind", "none"),
            g=float(d.get("g", 0.0)),
            V0=float(d.get("V0", 0.0)),
            w=float(d.get("w", 1.0)),
        )

    def to_dict(self) -> dict:
        return {"kind": self.kind, "g": self.g, "V0": self.V0, "w": self.w}

    @property
    def is_zero(self) -> bool:
        return (
            self.kind == "none"
            or (self.kind == "contact" and self.g == 0)
            or (self.kind == "gaussian" and self.V0 == 0)
        )

    def matrix(self, grid: Grid1D) -> np.ndarray:
        """V(x_i, z_j) on the full grid (read-only, cached per grid)."""
        key = (grid.x_min, grid.x_max, grid.n_points)
        if key not in self._cache:
            # built from index differences so that isometric maps give bitwise equal values
            k = np.arange(grid.n_points)
            d = (k[:, None] - k[None, :]) * grid.dx
            V = eval_interaction(self, d, np.zeros(1), grid.dx)
            V = np.broadcast_to(V, (grid.n_points, grid.n_points)).copy()
            V.setflags(write=False)
            self._cache[key] = V
        return self._cache[key]


def eval_interaction(spec: InteractionSpec, x, z, dx: float):
    """Pair interaction V(x, z); contact is the on-grid Kronecker delta over dx."""
    x, z = np.asarray(x, dtype=float), np.asarray(z, dtype=float)
    if spec.kind == "none":
        out = np.zeros(np.broadcast(x, z).shape)
    elif spec.kind == "contact":
        same = np.abs(x - z) < 0.5 * dx
        out = np.where(same, spec.g / dx, 0.0)
    else:
        out = spec.V0 * np.exp(-((x - z) ** 2) / (2 * spec.w**2))
    return float(out) if out.ndim == 0 else out
