"""Closed mean-field dynamics: Gross-Pitaevskii (condensed bosons) and time-dependent Hartree-Fock.

GPE states live on a periodic grid: the first ``n_points - 1`` points carry
the data and the last point repeats the first.  Kinetic energy is spectral.
HF states share the hard-wall finite-difference one-body operator of the
many-body solver, so HF and exact energies are directly comparable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import eigh, lu_factor, lu_solve

from .correlators.fields import image, kinetic_term_from_orbitals
from .correlators.residuals import ResidualReport, potential_term, unpack_triple
from .errors import ConfigurationError, ConvergenceError, IntegrityError, SymmetryViolation
from .grid import Grid1D, SymmetryMap
from .manybody import ManyBodyWavefunction, one_body_operator, product_state
from .potentials import SYMMETRY_TOL, InteractionSpec, verify_local_symmetry

KINDS = ("gpe", "hf")
SEAM_DENSITY = 1e-12
_YOSHIDA_W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_YOSHIDA_W0 = -(2.0 ** (1.0 / 3.0)) * _YOSHIDA_W1


@dataclass
class MeanFieldState:
    kind: str
    grid: Grid1D
    orbitals: np.ndarray  # rows on the full grid
    N: int
    g: float = 0.0
    time: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown mean-field kind {self.kind!r}")
        self.orbitals = np.atleast_2d(np.asarray(self.orbitals, dtype=complex))
        if self.orbitals.shape[1] != self.grid.n_points:
            raise ConfigurationError("orbital length does not match the grid")
        if self.kind == "hf" and self.orbitals.shape[0] != self.N:
            raise ConfigurationError("Hartree-Fock needs one orbital per particle")

    @property
    def phi(self) -> np.ndarray:
        return self.orbitals[0]

    def norm(self) -> float:
        """GPE: periodic dx-norm of the condensate orbital."""
        return float(self.grid.dx * np.sum(np.abs(self.phi[:-1]) ** 2))

    def gram(self) -> np.ndarray:
        P = self.orbitals
        return self.grid.dx * (P.conj() @ P.T)

    def gram_error(self) -> float:
        return float(np.abs(self.gram() - np.eye(len(self.orbitals))).max())


def _check_symmetry(U: np.ndarray, map: SymmetryMap) -> None:
    dev = verify_local_symmetry(U, map)
    if dev > SYMMETRY_TOL:
        raise SymmetryViolation(map.label, dev)


# ---------------------------------------------------------------- GPE

def _wavenumbers(grid: Grid1D) -> np.ndarray:
    m = grid.n_points - 1
    return 2 * np.pi * np.fft.fftfreq(m, d=grid.dx)


def spectral_kinetic_matrix(grid: Grid1D) -> np.ndarray:
    """Dense -1/2 d^2/dx^2 on the periodic points (real symmetric)."""
    m = grid.n_points - 1
    k2 = 0.5 * _wavenumbers(grid) ** 2
    T = np.fft.ifft(k2[:, None] * np.fft.fft(np.eye(m), axis=0), axis=0).real
    return 0.5 * (T + T.T)


def _periodic(core: np.ndarray) -> np.ndarray:
    return np.concatenate([core, core[:1]])


def gpe_energy(state: MeanFieldState, U: np.ndarray) -> float:
    """Energy per particle: <T> + <U> + (N - 1) g / 2 int |phi|^4."""
    grid = state.grid
    phi = state.phi[:-1]
    m = len(phi)
    k = _wavenumbers(grid)
    kin = 0.5 * np.sum(k**2 * np.abs(np.fft.fft(phi)) ** 2) * grid.dx / m
    dens = np.abs(phi) ** 2
    pot = grid.dx * np.sum(U[:-1] * dens)
    inter = 0.5 * (state.N - 1) * state.g * grid.dx * np.sum(dens**2)
    return float(kin + pot + inter)


def gpe_chemical_potential(state: MeanFieldState, U: np.ndarray) -> float:
    """<T> + <U> + (N - 1) g int |phi|^4."""
    dens = np.abs(state.phi[:-1]) ** 2
    return gpe_energy(state, U) + 0.5 * (state.N - 1) * state.g * state.grid.dx * float(np.sum(dens**2))


def _gpe_hamiltonian(T: np.ndarray, U: np.ndarray, phi: np.ndarray, N: int, g: float) -> np.ndarray:
    return T + np.diag(U + (N - 1) * g * np.abs(phi) ** 2)


def gpe_ground_state(
    U: np.ndarray, grid: Grid1D, N: int, g: float, tol: float = 1e-12,
    max_iter: int = 3000, dtau: float = 1.0,
) -> MeanFieldState:
    """Lowest stationary GPE orbital by implicit (backward Euler) imaginary time.

    Each step solves (1 + dtau (H[phi] - e0)) phi_new = phi with e0 the lowest
    eigenvalue of the current mean-field operator, which steers the flow to
    the ground state.  A fixed point satisfies the discrete GPE exactly (no
    splitting bias).  Large dtau approaches plain SCF, which oscillates
    between the wells of a double well; dtau of order one is safe there.
    """
    U = np.asarray(U, dtype=float)[:-1]
    T = spectral_kinetic_matrix(grid)
    m = len(U)
    dx = grid.dx
    phi = eigh(T + np.diag(U), subset_by_index=[0, 0])[1][:, 0]
    phi = phi / math.sqrt(dx * np.sum(phi**2))
    history = []
    for _ in range(max_iter):
        H = _gpe_hamiltonian(T, U, phi, N, g)
        Hphi = H @ phi
        mu = dx * float(phi @ Hphi)
        r = math.sqrt(dx) * float(np.linalg.norm(Hphi - mu * phi))
        history.append((mu, r))
        if r <= tol:
            phi = phi * np.sign(phi[np.argmax(np.abs(phi))])
            return MeanFieldState("gpe", grid, _periodic(phi), N, g, 0.0)
        shift = eigh(H, eigvals_only=True, subset_by_index=[0, 0])[0]
        phi = np.linalg.solve(np.eye(m) + dtau * (H - shift * np.eye(m)), phi)
        phi = phi / math.sqrt(dx * np.sum(phi**2))
    raise ConvergenceError("GPE imaginary-time iteration did not converge", history)


def _strang(phi: np.ndarray, U: np.ndarray, k2: np.ndarray, dt: float, c: float) -> np.ndarray:
    phi = phi * np.exp(-0.5j * dt * (U + c * np.abs(phi) ** 2))
    phi = np.fft.ifft(np.exp(-1j * dt * k2) * np.fft.fft(phi))
    return phi * np.exp(-0.5j * dt * (U + c * np.abs(phi) ** 2))


def _gpe_step(phi, U, k2, dt, c, order):
    if order == 2:
        return _strang(phi, U, k2, dt, c)
    for w in (_YOSHIDA_W1, _YOSHIDA_W0, _YOSHIDA_W1):
        phi = _strang(phi, U, k2, w * dt, c)
    return phi


def gpe_propagate(
    state: MeanFieldState,
    U: np.ndarray,
    dt: float,
    n_steps: int,
    snapshot_stride: int = 1,
    order: int = 4,
    check_seam: bool = True,
) -> list[MeanFieldState]:
    """Split-step Fourier evolution of i phi_t = [-1/2 d^2 + U + (N-1) g |phi|^2] phi.

    ``order`` 2 is the symmetric (Strang) splitting; 4 composes three Strang
    steps with the triple-jump weights.  Negative ``dt`` runs backwards
    (both schemes are time symmetric).  Snapshots include the initial state.
    The starting density at the periodic seam must stay below SEAM_DENSITY
    unless ``check_seam`` is off.
    """
    if state.kind != "gpe":
        raise ConfigurationError("gpe_propagate needs a GPE state")
    if order not in (2, 4):
        raise ConfigurationError("splitting order must be 2 or 4")
    grid = state.grid
    Uc = np.asarray(U, dtype=float)[:-1]
    k2 = 0.5 * _wavenumbers(grid) ** 2
    c = (state.N - 1) * state.g
    phi = state.phi[:-1].copy()
    if check_seam and max(abs(phi[0]), abs(phi[-1])) ** 2 > SEAM_DENSITY:
        raise ConfigurationError(
            f"density at the periodic seam exceeds {SEAM_DENSITY:g}; enlarge the box"
        )
    snaps = [state]
    for k in range(1, n_steps + 1):
        phi = _gpe_step(phi, Uc, k2, dt, c, order)
        if not np.all(np.isfinite(phi)):
            raise IntegrityError(f"non-finite GPE orbital after step {k}")
        if k % snapshot_stride == 0 or k == n_steps:
            snaps.append(replace(state, orbitals=_periodic(phi)[None, :], time=state.time + k * dt))
    return snaps


def gpe_triple(state: MeanFieldState, U: np.ndarray, dt: float, order: int = 4):
    back = gpe_propagate(state, U, -dt, 1, order=order, check_seam=False)[-1]
    fwd = gpe_propagate(state, U, dt, 1, order=order, check_seam=False)[-1]
    return back, state, fwd


def gpe_product_state(state: MeanFieldState) -> ManyBodyWavefunction:
    """N-body product state of the condensate for cross-checks with the generic machinery.

    The repeated seam point is zeroed so that full-grid reductions apply the
    periodic rectangle rule instead of counting the seam twice.
    """
    phi = state.phi.copy()
    phi[-1] = 0.0
    psi = product_state(phi, state.N, state.grid)
    psi.time = state.time
    return psi


def gpe_source_term(phi: np.ndarray, map: SymmetryMap, idx: np.ndarray, N: int, g: float) -> np.ndarray:
    """(N - 1) g (|phi(x)|^2 - |phi(y)|^2) phi(x) conj(phi(y))."""
    jdx = image(map, idx)
    px, py = phi[idx], phi[jdx]
    return (N - 1) * g * (np.abs(px) ** 2 - np.abs(py) ** 2) * px * np.conj(py)


def gpe_correlator_residual(snapshots, map: SymmetryMap, U: np.ndarray, margin: int = 2) -> ResidualReport:
    """r = i d/dt [phi phi*(y)] - 1/2 grad j - (U(x)-U(y)) phi phi*(y) - source."""
    _check_symmetry(U, map)
    m, c, p, dt = unpack_triple(snapshots)
    idx = map.interior(margin)
    jdx = image(map, idx)
    lhs = 1j * (p.phi[idx] * np.conj(p.phi[jdx]) - m.phi[idx] * np.conj(m.phi[jdx])) / (2 * dt)
    kin = kinetic_term_from_orbitals(c.phi, [1.0], map, idx)
    uterm, uinfo = potential_term(U, map, idx, c.phi[idx] * np.conj(c.phi[jdx]))
    src = gpe_source_term(c.phi, map, idx, c.N, c.g)
    return ResidualReport(
        "gpe-correlator", map.grid.x[idx], lhs - kin - uterm - src, map.grid.dx, dt, map.to_dict(),
        extra={**uinfo, "source_max": float(np.abs(src).max())},
    )


def gpe_stationary_check(state: MeanFieldState, map: SymmetryMap, U: np.ndarray, margin: int = 2) -> ResidualReport:
    """Stationary balance: 1/2 grad j = (N-1) g (|phi(y)|^2 - |phi(x)|^2) phi phi*(y)."""
    _check_symmetry(U, map)
    idx = map.interior(margin)
    kin = kinetic_term_from_orbitals(state.phi, [1.0], map, idx)
    src = gpe_source_term(state.phi, map, idx, state.N, state.g)
    return ResidualReport(
        "gpe-stationary", map.grid.x[idx], kin + src, map.grid.dx, None, map.to_dict(),
        extra={"source_max": float(np.abs(src).max()), "kinetic_max": float(np.abs(kin).max())},
    )


# ---------------------------------------------------------------- Hartree-Fock

def _hf_fields(P: np.ndarray, Vm: np.ndarray, dx: float):
    """Direct potential and exchange kernel for orbitals P (rows, interior points)."""
    dens = np.sum(np.abs(P) ** 2, axis=0)
    direct = dx * (Vm @ dens)
    R = P.T @ P.conj()  # sum_j phi_j(x) conj(phi_j(x'))
    return direct, dx * Vm * R


def fock_matrix(P: np.ndarray, h: np.ndarray, Vm: np.ndarray, dx: float) -> np.ndarray:
    direct, exch = _hf_fields(P, Vm, dx)
    return h + np.diag(direct) - exch


def _hf_setup(U: np.ndarray, V: InteractionSpec, grid: Grid1D):
    h = one_body_operator(np.asarray(U, dtype=float), grid).toarray()
    Vm = np.asarray(V.matrix(grid))[1:-1, 1:-1]
    return h, Vm


def hf_energy(state: MeanFieldState, U: np.ndarray, V: InteractionSpec) -> float:
    """sum_i <i|h|i> + 1/2 sum_ij (<ij|V|ij> - <ij|V|ji>)."""
    grid = state.grid
    dx = grid.dx
    h, Vm = _hf_setup(U, V, grid)
    P = state.orbitals[:, 1:-1]
    direct, exch = _hf_fields(P, Vm, dx)
    one = dx * np.einsum("ix,xy,iy->", P.conj(), h, P).real
    two = 0.5 * dx * np.einsum("ix,xy,iy->", P.conj(), np.diag(direct) - exch, P).real
    return float(one + two)


def hf_ground_state(
    U: np.ndarray, V: InteractionSpec, grid: Grid1D, N: int, tol: float = 1e-10,
    max_iter: int = 500, mixing: float = 0.5,
) -> MeanFieldState:
    """Self-consistent field iteration with density-matrix mixing."""
    h, Vm = _hf_setup(U, V, grid)
    dx = grid.dx
    _, vecs = eigh(h, subset_by_index=[0, N - 1])
    P = vecs.T / math.sqrt(dx)
    D = P.T @ P.conj()
    history = []
    for _ in range(max_iter):
        direct = dx * (Vm @ np.diag(D).real)
        F = h + np.diag(direct) - dx * Vm * D
        eps, vecs = eigh(F, subset_by_index=[0, N - 1])
        P_new = vecs.T / math.sqrt(dx)
        D_new = P_new.T @ P_new.conj()
        # residual of the current orbitals in their own Fock operator
        Fs = fock_matrix(P_new, h, Vm, dx)
        r = float(np.abs(Fs @ P_new.T - P_new.T @ (dx * P_new.conj() @ Fs @ P_new.T)).max())
        history.append((float(eps.sum()), r))
        if r <= tol:
            orbs = np.zeros((N, grid.n_points), dtype=complex)
            orbs[:, 1:-1] = P_new
            return MeanFieldState("hf", grid, orbs, N, 0.0, 0.0)
        D = (1 - mixing) * D + mixing * D_new
    raise ConvergenceError("Hartree-Fock SCF did not converge", history)


def _hf_step(P, h, Vm, dx, dt, tol=1e-13, max_iter=100):
    """One time-symmetric Cayley step with the Fock operator of the averaged density matrix."""
    m = P.shape[1]
    eye = np.eye(m)
    F0 = fock_matrix(P, h, Vm, dx)
    Q = P
    for _ in range(max_iter):
        F = 0.5 * (F0 + fock_matrix(Q, h, Vm, dx))
        lu = lu_factor(eye + 0.5j * dt * F)
        Q_new = lu_solve(lu, (eye - 0.5j * dt * F) @ P.T).T
        if np.abs(Q_new - Q).max() <= tol * max(1.0, np.abs(Q_new).max()):
            return Q_new
        Q = Q_new
    raise ConvergenceError("TDHF midpoint iteration did not converge", [])


def tdhf_propagate(
    state: MeanFieldState,
    U: np.ndarray,
    V: InteractionSpec,
    dt: float,
    n_steps: int,
    snapshot_stride: int = 1,
) -> list[MeanFieldState]:
    """Crank-Nicolson steps with the Fock operator averaged over both ends of the step.

    The averaged operator is Hermitian, so orthonormality is kept to solver
    precision, and because the HF energy is quadratic in the density matrix
    the energy is conserved as well.  Negative ``dt`` runs backwards.
    """
    if state.kind != "hf":
        raise ConfigurationError("tdhf_propagate needs a Hartree-Fock state")
    grid = state.grid
    h, Vm = _hf_setup(U, V, grid)
    P = state.orbitals[:, 1:-1].copy()
    snaps = [state]
    for k in range(1, n_steps + 1):
        P = _hf_step(P, h, Vm, grid.dx, dt)
        if k % snapshot_stride == 0 or k == n_steps:
            orbs = np.zeros_like(state.orbitals)
            orbs[:, 1:-1] = P
            snaps.append(replace(state, orbitals=orbs, time=state.time + k * dt))
    return snaps


def hf_triple(state: MeanFieldState, U: np.ndarray, V: InteractionSpec, dt: float):
    back = tdhf_propagate(state, U, V, -dt, 1)[-1]
    fwd = tdhf_propagate(state, U, V, dt, 1)[-1]
    return back, state, fwd


def hf_collision_term(orbitals: np.ndarray, map: SymmetryMap, V: InteractionSpec, idx: np.ndarray) -> np.ndarray:
    """int (V(x,z) - V(y,z)) sum_ij [phi_i(x) phi_i*(y) |phi_j(z)|^2 - phi_j(x) phi_i*(y) phi_i(z) phi_j*(z)] dz."""
    grid = map.grid
    jdx = image(map, idx)
    Vm = V.matrix(grid)
    w = grid.weights
    P = np.asarray(orbitals)
    dV = (Vm[idx] - Vm[jdx]) * w  # [x, z]
    dens = np.sum(np.abs(P) ** 2, axis=0)
    rho_xy = np.sum(P[:, idx] * np.conj(P[:, jdx]), axis=0)
    direct = rho_xy * (dV @ dens)
    pair = P.conj()[:, None, :] * P[None, :, :]  # [i, j, z] = phi_i*(z) phi_j(z)
    # exchange: sum_ij phi_j(x) phi_i*(y) int dV phi_i(z) phi_j*(z)
    M = np.einsum("xz,ijz->xij", dV, pair.conj())
    exch = np.einsum("jx,ix,xij->x", P[:, idx], np.conj(P[:, jdx]), M)
    return direct - exch


def hf_correlator_residual(snapshots, map: SymmetryMap, V: InteractionSpec, U: np.ndarray, margin: int = 2) -> ResidualReport:
    """r = i d/dt sum_i phi_i phi_i*(y) - 1/2 grad sum_i j_i - (U(x)-U(y)) C - direct + exchange."""
    _check_symmetry(U, map)
    m, c, p, dt = unpack_triple(snapshots)
    idx = map.interior(margin)
    jdx = image(map, idx)

    def corr(s):
        return np.sum(s.orbitals[:, idx] * np.conj(s.orbitals[:, jdx]), axis=0)

    lhs = 1j * (corr(p) - corr(m)) / (2 * dt)
    kin = kinetic_term_from_orbitals(c.orbitals, np.ones(c.N), map, idx)
    uterm, uinfo = potential_term(U, map, idx, corr(c))
    T = hf_collision_term(c.orbitals, map, V, idx)
    return ResidualReport(
        "hf-correlator", map.grid.x[idx], lhs - kin - uterm - T, map.grid.dx, dt, map.to_dict(),
        extra={**uinfo, "collision_max": float(np.abs(T).max())},
    )


def hf_stationary_check(state: MeanFieldState, map: SymmetryMap, V: InteractionSpec, U: np.ndarray, margin: int = 2) -> ResidualReport:
    """Stationary balance 1/2 grad sum_i j_i + (direct - exchange) = 0 on interior(D)."""
    _check_symmetry(U, map)
    idx = map.interior(margin)
    kin = kinetic_term_from_orbitals(state.orbitals, np.ones(state.N), map, idx)
    T = hf_collision_term(state.orbitals, map, V, idx)
    return ResidualReport(
        "hf-stationary", map.grid.x[idx], kin + T, map.grid.dx, None, map.to_dict(),
        extra={"collision_max": float(np.abs(T).max()), "kinetic_max": float(np.abs(kin).max())},
    )


__all__ = [
    "MeanFieldState",
    "fock_matrix",
    "gpe_chemical_potential",
    "gpe_correlator_residual",
    "gpe_energy",
    "gpe_ground_state",
    "gpe_product_state",
    "gpe_propagate",
    "gpe_source_term",
    "gpe_stationary_check",
    "gpe_triple",
    "hf_collision_term",
    "hf_correlator_residual",
    "hf_energy",
    "hf_ground_state",
    "hf_stationary_check",
    "hf_triple",
    "spectral_kinetic_matrix",
    "tdhf_propagate",
]
