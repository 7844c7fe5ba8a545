"""Two-point correlators C(x) = rho1(x; F(x)) and their current densities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, DecompositionFailure, DomainError
from ..grid import SymmetryMap, central_diff
from ..rdm import AnomalousOneBody, NaturalSpectrum, OneBodyRDM, anomalous_decomposition

KINDS = ("canonical", "anomalous", "per-orbital canonical", "per-orbital anomalous")


@dataclass
class CorrelatorField:
    kind: str
    values: np.ndarray
    indices: np.ndarray
    map: SymmetryMap
    time: float = 0.0

    @property
    def x(self) -> np.ndarray:
        return self.map.grid.x[self.indices]


@dataclass
class CurrentField:
    kind: str
    values: np.ndarray
    indices: np.ndarray
    map: SymmetryMap


def image(map: SymmetryMap, idx: np.ndarray) -> np.ndarray:
    return map.sigma * np.asarray(idx) + map.offset


def correlator_field(source, map: SymmetryMap, orbital: int | None = None, margin: int = 1) -> CorrelatorField:
    """Correlator on the domain interior.

    * OneBodyRDM: N * rho1(x, F(x)), the N-scaled canonical total.
    * NaturalSpectrum: sum_i lambda_i phi_i(x) conj(phi_i(F(x))), or one
      orbital's product when ``orbital`` is given.
    * AnomalousOneBody: sum_i mu_i chi_i(x) chi_i(F(x)) (decomposing first if
      needed), or one mode's product.
    """
    idx = map.interior(margin)
    jdx = image(map, idx)
    if isinstance(source, OneBodyRDM):
        vals = source.N * source.matrix[idx, jdx]
        kind = "canonical"
    elif isinstance(source, NaturalSpectrum):
        P = source.orbitals
        if orbital is None:
            vals = (source.populations[:, None] * P[:, idx] * P[:, jdx].conj()).sum(axis=0)
            kind = "canonical"
        else:
            vals = P[orbital, idx] * np.conj(P[orbital, jdx])
            kind = "per-orbital canonical"
    elif isinstance(source, AnomalousOneBody):
        dec = source if source.modes is not None else anomalous_decomposition(source)
        Z = dec.modes
        if orbital is None:
            vals = (dec.mu[:, None] * Z[:, idx] * Z[:, jdx]).sum(axis=0)
            kind = "anomalous"
        else:
            vals = Z[orbital, idx] * Z[orbital, jdx]
            kind = "per-orbital anomalous"
    else:
        raise ConfigurationError(f"unsupported correlator source {type(source).__name__}")
    return CorrelatorField(kind, vals, idx, map, getattr(source, "time", 0.0))


def _current_rows(phi: np.ndarray, dphi: np.ndarray, idx, jdx, sigma: int, kind: str):
    """Current density for orbitals stored as rows (or a single 1D orbital)."""
    px, py = phi[..., idx], phi[..., jdx]
    dx_, dy_ = dphi[..., idx], dphi[..., jdx]
    if kind == "canonical":
        return sigma * np.conj(dy_) * px - np.conj(py) * dx_
    if kind == "anomalous":
        return sigma * px * dy_ - py * dx_
    raise ConfigurationError(f"unknown current kind {kind!r}")


def orbital_current(
    phi: np.ndarray, map: SymmetryMap, kind: str = "canonical", margin: int = 1, dphi: np.ndarray | None = None
) -> CurrentField:
    """j(x) for x in the domain interior with y = F(x).

    canonical:  sigma * conj(phi')(y) phi(x) - conj(phi)(y) phi'(x)
    anomalous:  sigma * phi(x) phi'(y) - phi(y) phi'(x)

    ``phi`` may be one orbital or a stack of orbitals along axis 0.  The
    derivative defaults to central differences; pass ``dphi`` to use another
    rule (e.g. the integrator derivative of a stationary state).
    """
    phi = np.asarray(phi)
    idx = map.interior(margin)
    jdx = image(map, idx)
    n = map.grid.n_points
    for arr in (idx, jdx):
        if arr.min() < 1 or arr.max() > n - 2:
            raise DomainError("domain interior touches the grid boundary; increase the margin")
    if dphi is None:
        dphi = central_diff(phi, map.grid.dx, axis=phi.ndim - 1)
    return CurrentField(kind, _current_rows(phi, dphi, idx, jdx, map.sigma, kind), idx, map)


def kernel_line_current(kernel: np.ndarray, map: SymmetryMap, idx: np.ndarray, dx: float) -> np.ndarray:
    """(sigma d2 - d1) kernel at (x, F(x)) by central differences of the kernel."""
    jdx = image(map, idx)
    n = kernel.shape[0]
    if min(idx.min(), jdx.min()) < 1 or max(idx.max(), jdx.max()) > n - 2:
        raise DomainError("kernel derivative requested at the grid boundary")
    d1 = (kernel[idx + 1, jdx] - kernel[idx - 1, jdx]) / (2 * dx)
    d2 = (kernel[idx, jdx + 1] - kernel[idx, jdx - 1]) / (2 * dx)
    return map.sigma * d2 - d1


def line_divergence(values_ext: np.ndarray, dx: float) -> np.ndarray:
    """Central derivative along the map line; input carries one extra point per side."""
    return (values_ext[2:] - values_ext[:-2]) / (2 * dx)


def kinetic_term_from_kernel(kernel: np.ndarray, map: SymmetryMap, idx: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """1/2 d/dx [scale * (sigma d2 - d1) kernel](x, F(x)) at the points ``idx``.

    For the N-scaled canonical correlator ``scale = N`` and ``kernel = rho1``
    this is the convex-sum current divergence 1/2 grad sum_i lambda_i j_i.
    """
    dx = map.grid.dx
    ext = np.arange(idx[0] - 1, idx[-1] + 2)
    g = scale * kernel_line_current(kernel, map, ext, dx)
    return 0.5 * line_divergence(g, dx)


def kinetic_term_from_orbitals(
    orbitals: np.ndarray, weights: np.ndarray, map: SymmetryMap, idx: np.ndarray, kind: str = "canonical"
) -> np.ndarray:
    """1/2 d/dx sum_i w_i j_i(x, F(x)) with orbital currents from central differences."""
    dx = map.grid.dx
    ext = np.arange(idx[0] - 1, idx[-1] + 2)
    phi = np.atleast_2d(orbitals)
    dphi = central_diff(phi, dx, axis=1)
    j = _current_rows(phi, dphi, ext, image(map, ext), map.sigma, kind)
    g = (np.asarray(weights)[:, None] * j).sum(axis=0)
    return 0.5 * line_divergence(g, dx)


def momentum_matrix(n: int, dx: float) -> np.ndarray:
    """Discrete momentum P = -i D1 with the central stencil (antisymmetric D1)."""
    D1 = (np.eye(n, k=1) - np.eye(n, k=-1)) / (2 * dx)
    return -1j * D1


def momentum_structure(rho: np.ndarray, sigma: int, dx: float) -> np.ndarray:
    """P rho + sigma rho P: the anticommutator for sigma = +1, commutator for -1."""
    P = momentum_matrix(rho.shape[0], dx)
    return P @ rho + sigma * (rho @ P)


def kinetic_divergence_repfree(rho: OneBodyRDM, map: SymmetryMap, margin: int = 2) -> CorrelatorField:
    """(1/2i) d/dx d(x, F(x)) with d = -i <x| P rho + sigma rho P |F(x)>.

    Works on the operator level (matrix products with the discrete momentum)
    instead of orbital derivatives.  Trace-one normalization: the N-scaled
    kinetic term of the canonical equation is i N times this field.
    """
    idx = map.interior(margin)
    ext = np.arange(idx[0] - 1, idx[-1] + 2)
    M = momentum_structure(rho.matrix, map.sigma, rho.dx)
    d = -1j * M[ext, image(map, ext)]
    return CorrelatorField("canonical", line_divergence(d, rho.dx) / 2j, idx, map, rho.time)


def kinetic_divergence_orbitals(spectrum: NaturalSpectrum, map: SymmetryMap, margin: int = 2) -> CorrelatorField:
    """Same quantity as :func:`kinetic_divergence_repfree` via 1/(2iN) grad sum lambda_i j_i."""
    idx = map.interior(margin)
    kin = kinetic_term_from_orbitals(spectrum.orbitals, spectrum.populations, map, idx)
    return CorrelatorField("canonical", kin / (1j * spectrum.N), idx, map, spectrum.time)


def anomalous_field_or_none(gamma: AnomalousOneBody):
    try:
        return anomalous_decomposition(gamma)
    except DecompositionFailure as exc:
        return exc
