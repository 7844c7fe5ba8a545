"""Uniform 1D grids, finite differences, quadrature and grid-exact symmetry maps.

All two-point quantities in the package are evaluated at pairs of grid points
``(x, F(x))`` with ``F(x) = sigma * x + L``.  Maps are only accepted when ``F``
sends grid points onto grid points, so no interpolation ever enters a
correlator.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ConfigurationError, DomainError

MIN_POINTS = 8
_EXACT_TOL = 1e-9


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ConfigurationError(
                f"degenerate grid bounds: x_min={self.x_min}, x_max={self.x_max}"
            )
        if int(self.n_points) != self.n_points or self.n_points < MIN_POINTS:
            raise ConfigurationError(
                f"n_points must be an integer >= {MIN_POINTS}, got {self.n_points}"
            )

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @cached_property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_points)

    @cached_property
    def weights(self) -> np.ndarray:
        """Trapezoid weights over the full grid."""
        w = np.full(self.n_points, self.dx)
        w[0] = w[-1] = 0.5 * self.dx
        return w

    def index_of(self, x: float) -> int:
        """Index of the grid point at position ``x`` (must be on the grid)."""
        r = (x - self.x_min) / self.dx
        i = int(round(r))
        if abs(r - i) > _EXACT_TOL * max(1.0, abs(r)) or not 0 <= i < self.n_points:
            raise DomainError(f"position {x} is not a grid point of {self}")
        return i

    def refined(self) -> "Grid1D":
        """Grid with half the spacing; every old point is kept."""
        return Grid1D(self.x_min, self.x_max, 2 * self.n_points - 1)

    def to_dict(self) -> dict:
        return {"x_min": self.x_min, "x_max": self.x_max, "n_points": self.n_points}


def make_grid(x_min: float, x_max: float, n_points: int) -> Grid1D:
    if int(n_points) != n_points:
        raise ConfigurationError(f"n_points must be an integer, got {n_points}")
    return Grid1D(float(x_min), float(x_max), int(n_points))


@dataclass(frozen=True)
class SymmetryMap:
    """Grid-exact transform ``F(x) = sigma*x + L`` restricted to an index interval.

    ``domain`` is an inclusive index interval ``(a, b)``.  On the index level
    the map reads ``i -> sigma*i + offset``.
    """

    grid: Grid1D
    sigma: int
    L: float
    domain: tuple[int, int]
    label: str = ""
    offset: int = field(init=False, repr=False)

    def __post_init__(self):
        if self.sigma not in (1, -1):
            raise ConfigurationError(f"sigma must be +1 or -1, got {self.sigma!r}")
        a, b = (int(v) for v in self.domain)
        if a > b or a < 0 or b >= self.grid.n_points:
            raise DomainError(f"domain {self.domain} is not an index interval of the grid")
        object.__setattr__(self, "domain", (a, b))
        # x_min + j dx = sigma (x_min + i dx) + L  =>  j = sigma i + (L + (sigma-1) x_min)/dx
        r = (self.L + (self.sigma - 1) * self.grid.x_min) / self.grid.dx
        offset = int(round(r))
        if abs(r - offset) > _EXACT_TOL * max(1.0, abs(r)):
            raise ConfigurationError(
                f"map sigma={self.sigma}, L={self.L} is not grid-exact (index shift {r:.6f})"
            )
        object.__setattr__(self, "offset", offset)
        for i in (a, b):
            j = self.sigma * i + offset
            if not 0 <= j < self.grid.n_points:
                raise DomainError(
                    f"image of x={self.grid.x[i]:.6g} under map lies outside the grid"
                )

    @classmethod
    def from_positions(cls, grid, sigma, L, start, stop, label=""):
        return cls(grid, int(sigma), float(L), (grid.index_of(start), grid.index_of(stop)), label)

    @property
    def domain_indices(self) -> np.ndarray:
        return np.arange(self.domain[0], self.domain[1] + 1)

    @property
    def image_indices(self) -> np.ndarray:
        return self.sigma * self.domain_indices + self.offset

    @property
    def codomain(self) -> tuple[int, int]:
        img = self.image_indices
        return int(img.min()), int(img.max())

    def apply(self, i: int) -> int:
        return apply_symmetry_map(self, i)

    def interior(self, margin: int = 1) -> np.ndarray:
        """Domain indices at least ``margin`` points away from the domain ends."""
        a, b = self.domain
        return np.arange(a + margin, b - margin + 1)

    def overlaps_image(self) -> bool:
        a, b = self.domain
        c, d = self.codomain
        return not (d < a or c > b)

    def gap(self) -> float:
        """Distance between D and its image (0 when they touch or overlap)."""
        a, b = self.domain
        c, d = self.codomain
        if d < a:
            return (a - d) * self.grid.dx
        if c > b:
            return (c - b) * self.grid.dx
        return 0.0

    @property
    def is_gapped(self) -> bool:
        return self.gap() > 1.5 * self.grid.dx

    def rebind(self, grid: Grid1D) -> "SymmetryMap":
        """Same physical map on another grid (e.g. a refined one)."""
        x = self.grid.x
        return SymmetryMap.from_positions(
            grid, self.sigma, self.L, x[self.domain[0]], x[self.domain[1]], self.label
        )

    def to_dict(self) -> dict:
        x = self.grid.x
        return {
            "label": self.label,
            "sigma": self.sigma,
            "L": self.L,
            "start": float(x[self.domain[0]]),
            "stop": float(x[self.domain[1]]),
        }


def apply_symmetry_map(map: SymmetryMap, i: int) -> int:
    j = map.sigma * int(i) + map.offset
    if not 0 <= j < map.grid.n_points:
        raise DomainError(
            f"image of index {i} (x={map.grid.x_min + i * map.grid.dx:.6g}) is off the grid"
        )
    return j


def central_diff(f: np.ndarray, dx: float, axis: int = 0, order: int = 1) -> np.ndarray:
    """Central 3-point derivative along ``axis``; the two edge layers are NaN."""
    f = np.asarray(f)
    out = np.full(f.shape, np.nan, dtype=np.result_type(f.dtype, float))
    fwd = [slice(None)] * f.ndim
    bwd = [slice(None)] * f.ndim
    mid = [slice(None)] * f.ndim
    fwd[axis], bwd[axis], mid[axis] = slice(2, None), slice(None, -2), slice(1, -1)
    if order == 1:
        out[tuple(mid)] = (f[tuple(fwd)] - f[tuple(bwd)]) / (2 * dx)
    elif order == 2:
        out[tuple(mid)] = (f[tuple(fwd)] - 2 * f[tuple(mid)] + f[tuple(bwd)]) / dx**2
    else:
        raise ConfigurationError(f"derivative order must be 1 or 2, got {order}")
    return out


def differentiate(f: np.ndarray, grid: Grid1D, order: int = 1) -> np.ndarray:
    """Central finite-difference derivative of a rank-1 field.

    Boundary values are marked invalid (NaN) instead of using one-sided stencils.
    """
    f = np.asarray(f)
    if f.shape != (grid.n_points,):
        raise ConfigurationError("differentiate expects a rank-1 field on the grid")
    return central_diff(f, grid.dx, order=order)


def integrate(f: np.ndarray, grid: Grid1D, region: tuple[int, int] | None = None):
    """Trapezoidal integral of ``f`` over the inclusive index interval ``region``."""
    f = np.asarray(f)
    a, b = (0, grid.n_points - 1) if region is None else region
    if not (0 <= a < grid.n_points and 0 <= b < grid.n_points):
        raise DomainError(f"region {region} outside grid")
    if b <= a:
        warnings.warn("empty integration region, returning 0", RuntimeWarning, stacklevel=2)
        return 0.0 * f.flat[0]
    seg = f[a : b + 1]
    return grid.dx * (seg.sum() - 0.5 * (seg[0] + seg[-1]))


def write_field_csv(path, grid: Grid1D, values, indices=None) -> None:
    """CSV with columns x, re, im at 17 significant digits."""
    values = np.asarray(values)
    idx = np.arange(grid.n_points) if indices is None else np.asarray(indices)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "re", "im"])
        for i, v in zip(idx, values):
            v = complex(v)
            w.writerow([f"{grid.x[i]:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}"])


def read_field_csv(path):
    """Inverse of :func:`write_field_csv`; returns ``(x, values)``."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1] + 1j * data[:, 2]
