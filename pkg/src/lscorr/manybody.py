"""Exact N-particle (N = 2, 3) dynamics on a tensor-product grid.

The grid end points are hard walls (psi = 0).  Unknowns are the interior
points; amplitude tensors are still stored on the full grid with zero faces so
that every downstream reduction can use plain grid sums.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import ConfigurationError, ConvergenceError, IntegrityError, SizingError
from .grid import Grid1D
from .potentials import InteractionSpec, PotentialSpec, build_locally_symmetric_potential

DEFAULT_BUDGET = 2**24
STATISTICS = ("bosonic", "fermionic")


@dataclass
class ManyBodyWavefunction:
    grid: Grid1D
    N: int
    amplitudes: np.ndarray
    statistics: str = "bosonic"
    time: float = 0.0

    def __post_init__(self):
        if self.statistics not in STATISTICS:
            raise ConfigurationError(f"unknown statistics {self.statistics!r}")
        shape = (self.grid.n_points,) * self.N
        if self.amplitudes.shape != shape:
            raise ConfigurationError(f"amplitudes must have shape {shape}")

    @property
    def dx(self) -> float:
        return self.grid.dx

    def norm(self) -> float:
        return float(self.dx**self.N * np.vdot(self.amplitudes, self.amplitudes).real)

    def exchange_error(self) -> float:
        sign = 1.0 if self.statistics == "bosonic" else -1.0
        A = self.amplitudes
        err = 0.0
        for i, j in itertools.combinations(range(self.N), 2):
            err = max(err, float(np.abs(A - sign * np.swapaxes(A, i, j)).max()))
        return err

    def interior_vector(self) -> np.ndarray:
        core = (slice(1, -1),) * self.N
        return self.amplitudes[core].ravel()

    def with_vector(self, v: np.ndarray, time: float | None = None) -> "ManyBodyWavefunction":
        amps = np.zeros_like(self.amplitudes, dtype=complex)
        m = self.grid.n_points - 2
        amps[(slice(1, -1),) * self.N] = v.reshape((m,) * self.N)
        return replace(self, amplitudes=amps, time=self.time if time is None else time)

    def copy(self) -> "ManyBodyWavefunction":
        return replace(self, amplitudes=self.amplitudes.copy())


def symmetrize(amps: np.ndarray, statistics: str) -> np.ndarray:
    """Project onto the bosonic (symmetric) or fermionic (antisymmetric) sector."""
    N = amps.ndim
    out = np.zeros_like(amps, dtype=np.result_type(amps, float))
    for perm in itertools.permutations(range(N)):
        sign = 1.0
        if statistics == "fermionic":
            sign = float(np.linalg.det(np.eye(N)[list(perm)]))
        out += sign * np.transpose(amps, perm)
    return out / math.factorial(N)


@dataclass(frozen=True)
class HamiltonianSpec:
    U: PotentialSpec | np.ndarray
    V: InteractionSpec = field(default_factory=InteractionSpec)
    N: int = 2


@dataclass
class Hamiltonian:
    grid: Grid1D
    N: int
    U: np.ndarray
    V: InteractionSpec
    matrix: sp.csr_matrix
    one_body: sp.csr_matrix

    @property
    def m(self) -> int:
        return self.grid.n_points - 2

    def apply(self, psi: ManyBodyWavefunction) -> np.ndarray:
        return self.matrix @ psi.interior_vector()


def one_body_operator(U: np.ndarray, grid: Grid1D) -> sp.csr_matrix:
    """-1/2 d^2/dx^2 + U on the interior points (3-point stencil, walls at the ends)."""
    m = grid.n_points - 2
    h2 = grid.dx**2
    lap = sp.diags([np.ones(m - 1), -2.0 * np.ones(m), np.ones(m - 1)], [-1, 0, 1]) / h2
    return (-0.5 * lap + sp.diags(U[1:-1])).tocsr()


def _pair_diagonal(Vmat: np.ndarray, N: int, i: int, j: int) -> np.ndarray:
    m = Vmat.shape[0]
    Vij = Vmat.reshape([m if k in (i, j) else 1 for k in range(N)])
    return np.broadcast_to(Vij, (m,) * N).ravel()


def build_hamiltonian(spec: HamiltonianSpec, grid: Grid1D, budget: int = DEFAULT_BUDGET) -> Hamiltonian:
    """Sparse H = sum_i h(x_i) + sum_{i<j} V(x_i, x_j) over interior grid^N."""
    N = spec.N
    if N not in (2, 3):
        raise ConfigurationError(f"particle number must be 2 or 3, got {N}")
    size = grid.n_points**N
    if size > budget:
        suggest = int(budget ** (1.0 / N))
        raise SizingError(
            f"{grid.n_points}^{N} = {size} amplitudes exceed the budget {budget}; "
            f"use at most {suggest} grid points"
        )
    if isinstance(spec.U, PotentialSpec):
        U = build_locally_symmetric_potential(spec.U, grid)
    else:
        U = np.asarray(spec.U, dtype=float)
        if U.shape != (grid.n_points,):
            raise ConfigurationError("tabulated U does not match the grid")
    h1 = one_body_operator(U, grid)
    m = grid.n_points - 2
    eye = sp.identity(m, format="csr")
    H = sp.csr_matrix((m**N, m**N))
    for k in range(N):
        ops = [eye] * N
        ops[k] = h1
        term = ops[0]
        for op in ops[1:]:
            term = sp.kron(term, op, format="csr")
        H = H + term
    if not spec.V.is_zero:
        Vmat = spec.V.matrix(grid)[1:-1, 1:-1]
        diag = np.zeros(m**N)
        for i, j in itertools.combinations(range(N), 2):
            diag += _pair_diagonal(Vmat, N, i, j)
        H = H + sp.diags(diag)
    return Hamiltonian(grid, N, U, spec.V, H.tocsr(), h1)


def energy(psi: ManyBodyWavefunction, H: Hamiltonian) -> float:
    v = psi.interior_vector()
    return float(np.vdot(v, H.matrix @ v).real / np.vdot(v, v).real)


def _initial_guess(H: Hamiltonian, statistics: str) -> np.ndarray:
    from scipy.linalg import eigh_tridiagonal

    h1 = H.one_body
    d = h1.diagonal()
    e = h1.diagonal(1)
    _, vecs = eigh_tridiagonal(d, e, select="i", select_range=(0, H.N - 1))
    if statistics == "bosonic":
        amps = vecs[:, 0]
        for _ in range(H.N - 1):
            amps = np.multiply.outer(amps, vecs[:, 0])
    else:
        amps = vecs[:, 0]
        for k in range(1, H.N):
            amps = np.multiply.outer(amps, vecs[:, k])
        amps = symmetrize(amps, statistics)
    return amps.ravel().astype(complex)


def ground_state(
    H: Hamiltonian,
    statistics: str = "bosonic",
    tol: float = 1e-8,
    max_iter: int = 200,
    initial: ManyBodyWavefunction | None = None,
) -> ManyBodyWavefunction:
    """Lowest state of the requested exchange sector by implicit imaginary time.

    Each step applies (1 + dtau (H - E))^-1 with dtau = 1 / r, r the current
    residual ||H psi - E psi||, then symmetrizes and renormalizes.  Stops when
    the residual (for unit dx-norm) falls below ``tol``.
    """
    grid, N, m = H.grid, H.N, H.m
    dx = grid.dx
    shape = (m,) * N
    v = _initial_guess(H, statistics) if initial is None else initial.interior_vector().astype(complex)
    eye = sp.identity(m**N, format="csc")
    history = []

    def normalize(w):
        w = symmetrize(w.reshape(shape), statistics).ravel()
        return w / np.sqrt(dx**N * np.vdot(w, w).real)

    v = normalize(v)
    for it in range(max_iter):
        Hv = H.matrix @ v
        E = float(np.vdot(v, Hv).real * dx**N)
        r = float(np.sqrt(dx**N) * np.linalg.norm(Hv - E * v))
        history.append((E, r))
        if r <= tol:
            amps = np.zeros((grid.n_points,) * N, dtype=complex)
            amps[(slice(1, -1),) * N] = v.reshape(shape)
            # fixed global phase: real positive largest component
            k = np.argmax(np.abs(amps))
            amps *= np.exp(-1j * np.angle(amps.flat[k]))
            if np.abs(amps.imag).max() < 1e-12 * np.abs(amps).max():
                amps = amps.real.astype(complex)
            return ManyBodyWavefunction(grid, N, amps, statistics, 0.0)
        dtau = 1.0 / max(r, 1e-9)
        lu = splu((eye + dtau * (H.matrix - E * eye)).tocsc())
        w = lu.solve(np.ascontiguousarray(v.real))
        if np.any(v.imag):
            w = w + 1j * lu.solve(np.ascontiguousarray(v.imag))
        v = normalize(w.astype(complex))
    raise ConvergenceError(
        f"imaginary-time iteration did not reach residual {tol} in {max_iter} steps", history
    )


class CrankNicolson:
    """Reusable CN stepper psi(t+dt) = (1 + i dt H/2)^-1 (1 - i dt H/2) psi(t)."""

    def __init__(self, H: Hamiltonian, dt: float):
        if not dt > 0:
            raise ConfigurationError("time step must be positive")
        self.H, self.dt = H, dt
        eye = sp.identity(H.matrix.shape[0], format="csc")
        A = (eye + 0.5j * dt * H.matrix).tocsc()
        self._fwd_rhs = (eye - 0.5j * dt * H.matrix).tocsr()
        self._bwd_rhs = A.tocsr()
        try:
            self._lu_fwd = splu(A)
            self._lu_bwd = splu(self._fwd_rhs.tocsc())
        except RuntimeError as exc:
            raise IntegrityError(f"Crank-Nicolson factorization failed: {exc}") from exc

    def forward(self, v: np.ndarray) -> np.ndarray:
        return self._lu_fwd.solve(self._fwd_rhs @ v)

    def backward(self, v: np.ndarray) -> np.ndarray:
        return self._lu_bwd.solve(self._bwd_rhs @ v)


def propagate(
    psi: ManyBodyWavefunction,
    H: Hamiltonian,
    dt: float,
    n_steps: int,
    snapshot_stride: int = 1,
    stepper: CrankNicolson | None = None,
) -> list[ManyBodyWavefunction]:
    """Crank-Nicolson trajectory; snapshots at t0 and every ``snapshot_stride`` steps."""
    cn = stepper or CrankNicolson(H, dt)
    v = psi.interior_vector().astype(complex)
    snaps = [psi.with_vector(v, psi.time)]
    for k in range(1, n_steps + 1):
        v = cn.forward(v)
        if not np.all(np.isfinite(v)):
            raise IntegrityError(f"non-finite amplitudes after step {k}")
        if k % snapshot_stride == 0 or k == n_steps:
            snaps.append(psi.with_vector(v, psi.time + k * dt))
    return snaps


def snapshot_triple(psi: ManyBodyWavefunction, H: Hamiltonian, dt: float, stepper=None):
    """States at t - dt, t, t + dt consistent with a CN trajectory through ``psi``."""
    cn = stepper or CrankNicolson(H, dt)
    v = psi.interior_vector().astype(complex)
    return (
        psi.with_vector(cn.backward(v), psi.time - dt),
        psi,
        psi.with_vector(cn.forward(v), psi.time + dt),
    )


def product_state(orbital: np.ndarray, N: int, grid: Grid1D) -> ManyBodyWavefunction:
    """phi(x1) ... phi(xN) for a dx-normalized orbital."""
    amps = np.asarray(orbital, dtype=complex)
    for _ in range(N - 1):
        amps = np.multiply.outer(amps, orbital)
    return ManyBodyWavefunction(grid, N, amps, "bosonic")


def slater_state(orbitals: np.ndarray, grid: Grid1D) -> ManyBodyWavefunction:
    """Antisymmetrized product of dx-orthonormal orbitals (rows), unit norm."""
    orbitals = np.asarray(orbitals, dtype=complex)
    N = orbitals.shape[0]
    amps = orbitals[0]
    for k in range(1, N):
        amps = np.multiply.outer(amps, orbitals[k])
    amps = symmetrize(amps, "fermionic") * math.sqrt(math.factorial(N))
    return ManyBodyWavefunction(grid, N, amps, "fermionic")
