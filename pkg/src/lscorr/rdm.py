"""Reduced density matrices, natural orbitals and the anomalous (unconjugated) analogs.

Conventions
-----------
* All reduced density matrices are trace one:  dx * trace(rho1) = 1.
* Natural populations are scaled so that sum(lambda) = N.
* Orbitals are continuum normalized:  dx * sum |phi|^2 = 1.

The interaction enters the one-body equation through the kernel

    K(x, x') = int (V(x, z) - V(x', z)) rho2(x, z; x', z) dz,

which is formed with two matrix products instead of a three-index tensor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eig, eigh, sqrtm

from .errors import DecompositionFailure, IntegrityError
from .grid import Grid1D, SymmetryMap
from .manybody import ManyBodyWavefunction
from .potentials import InteractionSpec

DEGENERACY_TOL = 1e-8
POPULATION_FLOOR = 1e-8
BOUND_TOL = 1e-8
BILINEAR_TOL = 1e-8
RECON_TOL = 1e-8


def collision_prefactor(N: int, scaled: bool) -> float:
    """(N - 1) against the trace-one rho1, N (N - 1) against sum lambda phi phi* = N rho1."""
    return float(N * (N - 1)) if scaled else float(N - 1)


def _matricize(psi: ManyBodyWavefunction) -> np.ndarray:
    n = psi.grid.n_points
    return psi.amplitudes.reshape(n, -1)


@dataclass
class OneBodyRDM:
    grid: Grid1D
    matrix: np.ndarray
    N: int
    statistics: str = "bosonic"
    time: float = 0.0

    @property
    def dx(self) -> float:
        return self.grid.dx

    def trace(self) -> float:
        return float(self.dx * np.trace(self.matrix).real)

    def hermiticity_error(self) -> float:
        return float(np.abs(self.matrix - self.matrix.conj().T).max())

    def min_eigenvalue(self) -> float:
        return float(eigh(self.dx * self.matrix, eigvals_only=True)[0])


def reduce_rho1(psi: ManyBodyWavefunction) -> OneBodyRDM:
    """rho1(x; x') = int Psi(x, X) conj(Psi(x', X)) dX."""
    A = _matricize(psi)
    rho = psi.dx ** (psi.N - 1) * (A @ A.conj().T)
    return OneBodyRDM(psi.grid, rho, psi.N, psi.statistics, psi.time)


@dataclass
class TwoBodyRDMSlice:
    """rho2(x, z; F(x), z) for x over the whole map domain and z over the grid."""

    map: SymmetryMap
    indices: np.ndarray
    values: np.ndarray
    N: int
    conjugated: bool = True


def _pair_rows(psi: ManyBodyWavefunction, rows_x, rows_y, conjugate: bool) -> np.ndarray:
    """sum over the remaining coordinates of Psi(x, z, W) (conj) Psi(y, z, W)."""
    n = psi.grid.n_points
    A = psi.amplitudes.reshape(n, n, -1)
    ax, ay = A[rows_x], A[rows_y]
    if conjugate:
        ay = ay.conj()
    return psi.dx ** (psi.N - 2) * np.einsum("izw,izw->iz", ax, ay)


def reduce_rho2_slice(psi: ManyBodyWavefunction, map: SymmetryMap) -> TwoBodyRDMSlice:
    if psi.N < 2:
        raise IntegrityError("two-body reduction needs at least two particles")
    idx = map.domain_indices
    vals = _pair_rows(psi, idx, map.image_indices, conjugate=True)
    return TwoBodyRDMSlice(map, idx, vals, psi.N, True)


def reduce_gamma2_slice(psi: ManyBodyWavefunction, map: SymmetryMap) -> TwoBodyRDMSlice:
    idx = map.domain_indices
    vals = _pair_rows(psi, idx, map.image_indices, conjugate=False)
    return TwoBodyRDMSlice(map, idx, vals, psi.N, False)


def pair_density_kernel(psi: ManyBodyWavefunction) -> np.ndarray:
    """Full diagonal-pair kernel rho2(x, z; x', z) as an (n, n, n) array [x, x', z].

    Memory grows like n^3; meant for small grids and cross-checks.
    """
    n = psi.grid.n_points
    A = psi.amplitudes.reshape(n, n, -1)
    return psi.dx ** (psi.N - 2) * np.einsum("azw,bzw->abz", A, A.conj())


def collision_kernel(psi: ManyBodyWavefunction, V: InteractionSpec, conjugate: bool = True) -> np.ndarray:
    """K(x, x') = int (V(x,z) - V(x',z)) rho2(x,z; x',z) dz for all grid pairs.

    With ``conjugate=False`` the anomalous analog built on gamma2 is returned.
    Trace-one normalization: no particle-number prefactor is applied.
    """
    n = psi.grid.n_points
    if V.is_zero:
        return np.zeros((n, n), dtype=complex)
    Vm = V.matrix(psi.grid)
    A3 = psi.amplitudes.reshape(n, n, -1)
    B = (Vm[:, :, None] * A3).reshape(n, -1)
    A = A3.reshape(n, -1)
    scale = psi.dx ** (psi.N - 1)
    if conjugate:
        return scale * (B @ A.conj().T - A @ B.conj().T)
    return scale * (B @ A.T - A @ B.T)


@dataclass
class NaturalSpectrum:
    grid: Grid1D
    populations: np.ndarray
    orbitals: np.ndarray  # rows, dx-normalized
    N: int
    statistics: str = "bosonic"
    time: float = 0.0

    def reconstruct(self) -> np.ndarray:
        """(1/N) sum_i lambda_i phi_i(x) conj(phi_i(x'))."""
        P = self.orbitals
        return (P.T * self.populations) @ P.conj() / self.N

    def significant(self, floor: float = POPULATION_FLOOR) -> np.ndarray:
        return np.flatnonzero(self.populations >= floor)

    def degenerate_pairs(self, indices=None, tol: float = DEGENERACY_TOL) -> list[tuple[int, int]]:
        lam = self.populations
        idx = range(len(lam)) if indices is None else indices
        out = []
        for n in idx:
            for p in np.flatnonzero(np.abs(lam - lam[n]) < tol):
                if p != n:
                    out.append((int(n), int(p)))
        return out


def fix_phase(vecs: np.ndarray, rel: float = 1e-6) -> np.ndarray:
    """Rotate each row so its first significant component is real positive."""
    out = vecs.copy()
    for k, v in enumerate(out):
        mag = np.abs(v)
        first = np.flatnonzero(mag > rel * mag.max())[0]
        out[k] = v * np.exp(-1j * np.angle(v[first]))
    return out


def natural_decomposition(rho: OneBodyRDM, N: int | None = None, statistics: str | None = None) -> NaturalSpectrum:
    """Hermitian eigendecomposition of dx * rho1, populations descending."""
    N = rho.N if N is None else N
    statistics = rho.statistics if statistics is None else statistics
    dx = rho.dx
    M = dx * 0.5 * (rho.matrix + rho.matrix.conj().T)
    w, v = eigh(M)
    order = np.argsort(w)[::-1]
    lam = N * w[order]
    orbs = fix_phase(v[:, order].T.astype(complex)) / np.sqrt(dx)
    upper = float(N) if statistics == "bosonic" else 1.0
    if lam.max() > upper + BOUND_TOL or lam.min() < -BOUND_TOL:
        raise IntegrityError(
            f"natural populations outside [0, {upper}] for {statistics} statistics: "
            f"min {lam.min():.3e}, max {lam.max():.3e}"
        )
    return NaturalSpectrum(rho.grid, lam, orbs, N, statistics, rho.time)


@dataclass
class AnomalousOneBody:
    grid: Grid1D
    matrix: np.ndarray
    N: int
    time: float = 0.0
    mu: np.ndarray | None = None
    modes: np.ndarray | None = None  # rows chi_i with dx * sum chi_i chi_j = delta_ij
    report: dict = field(default_factory=dict)

    def symmetry_error(self) -> float:
        return float(np.abs(self.matrix - self.matrix.T).max())

    def reconstruct(self) -> np.ndarray:
        Z = self.modes
        return (Z.T * self.mu) @ Z


def reduce_gamma(psi: ManyBodyWavefunction) -> AnomalousOneBody:
    """gamma1(x; x') = int Psi(x, X) Psi(x', X) dX (no conjugation)."""
    A = _matricize(psi)
    g = psi.dx ** (psi.N - 1) * (A @ A.T)
    return AnomalousOneBody(psi.grid, g, psi.N, psi.time)


def _clusters(values: np.ndarray, tol: float) -> list[np.ndarray]:
    order = np.argsort(-np.abs(values))
    groups: list[list[int]] = []
    for k in order:
        for grp in groups:
            if abs(values[grp[0]] - values[k]) <= tol:
                grp.append(int(k))
                break
        else:
            groups.append([int(k)])
    return [np.array(g) for g in groups]


def anomalous_decomposition(
    gamma: AnomalousOneBody,
    retain: float = 1e-10,
    bilinear_tol: float = BILINEAR_TOL,
    recon_tol: float = RECON_TOL,
) -> AnomalousOneBody:
    """Complex-orthogonal eigendecomposition dx*gamma1 = Z diag(mu) Z^T.

    Modes with |mu| <= retain * max|mu| are dropped.  Inside each cluster of
    (numerically) equal eigenvalues the eigenvectors are re-combined with the
    inverse square root of their bilinear Gram matrix W^T W.  Raises
    :class:`DecompositionFailure` when a retained mode is quasi-null
    (|w^T w| <= bilinear_tol for unit w) or the reconstruction misses by more
    than ``recon_tol`` relative to max|gamma1|.
    """
    dx = gamma.grid.dx
    M = dx * 0.5 * (gamma.matrix + gamma.matrix.T)
    mu, W = eig(M)
    scale = np.abs(mu).max()
    keep = np.abs(mu) > retain * scale
    mu, W = mu[keep], W[:, keep]
    W = W / np.linalg.norm(W, axis=0)
    report = {"retained": int(keep.sum()), "dropped": int((~keep).sum()), "min_bilinear": None}
    Z = np.empty_like(W)
    min_bil = np.inf
    for grp in _clusters(mu, 1e-8 * scale):
        Wg = W[:, grp]
        G = Wg.T @ Wg
        sv = np.abs(np.linalg.eigvals(G)) if len(grp) > 1 else np.abs(np.diag(G))
        min_bil = min(min_bil, float(sv.min()))
        if sv.min() <= bilinear_tol:
            report["min_bilinear"] = float(sv.min())
            raise DecompositionFailure(
                "non-diagonalizable within tolerance: quasi-null mode with |w^T w| = "
                f"{sv.min():.3e} at eigenvalue {mu[grp[0]]:.6g}",
                eigenvalue=complex(mu[grp[0]]),
                report=report,
            )
        if len(grp) == 1:
            Z[:, grp] = Wg / np.sqrt(G[0, 0])
        else:
            Z[:, grp] = Wg @ np.linalg.inv(sqrtm(G))
    report["min_bilinear"] = min_bil
    order = np.argsort(-np.abs(mu), kind="stable")
    mu, Z = mu[order], Z[:, order]
    recon = (Z * mu) @ Z.T
    err = float(np.abs(recon - M).max() / np.abs(M).max())
    report["reconstruction_error"] = err
    if err > recon_tol:
        raise DecompositionFailure(
            f"reconstruction error {err:.3e} exceeds {recon_tol:g}",
            eigenvalue=complex(mu[0]),
            report=report,
        )
    return AnomalousOneBody(
        gamma.grid, gamma.matrix, gamma.N, gamma.time, mu, Z.T / np.sqrt(dx), report
    )
