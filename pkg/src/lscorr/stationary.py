"""Stationary one-particle states in 1D and their invariant two-point currents.

Units: m = hbar = 1, so psi'' + S psi = 0 with S = 2 (E - U).

Scattering and Bloch states come from the Numerov recursion.  Its discrete
flux ``Im(conj(w_n) w_{n+1})`` with ``w = (1 + h^2 S / 12) psi`` is conserved
exactly, which is what makes T + R = 1 hold to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import ConfigurationError, DomainError
from .grid import Grid1D, SymmetryMap

FLAT_POINTS = 10


@dataclass
class StationaryState:
    grid: Grid1D
    energy: float
    psi: np.ndarray
    psi_prime: np.ndarray
    boundary: dict
    U: np.ndarray | None = None
    transmission: float | None = None
    reflection: float | None = None
    extra: dict = field(default_factory=dict)

    @property
    def kind(self) -> str:
        return self.boundary["kind"]


def numerov_factors(S: np.ndarray, h: float):
    return 1.0 + h * h * S / 12.0, 2.0 * (1.0 - 5.0 * h * h * S / 12.0)


def numerov_sweep(S: np.ndarray, h: float, start0, start1) -> np.ndarray:
    """Run the Numerov recursion from index 0 upward.

    ``S`` may carry leading batch axes (e.g. one row per energy); ``start0``
    and ``start1`` are psi at indices 0 and 1.
    """
    S = np.asarray(S, dtype=float)
    a, b = numerov_factors(S, h)
    psi = np.empty(S.shape, dtype=complex)
    psi[..., 0] = start0
    psi[..., 1] = start1
    for n in range(1, S.shape[-1] - 1):
        psi[..., n + 1] = (b[..., n] * psi[..., n] - a[..., n - 1] * psi[..., n - 1]) / a[..., n + 1]
    return psi


def discrete_wavenumber(S: float | np.ndarray, h: float):
    """q with cos(qh) = (1 - 5h^2S/12)/(1 + h^2S/12): the exact Numerov plane wave."""
    a, b = numerov_factors(np.asarray(S, dtype=float), h)
    c = 0.5 * b / a
    if np.any(np.abs(c) >= 1):
        raise DomainError("no propagating discrete plane wave at this energy/spacing")
    return np.arccos(c) / h


def numerov_derivative(psi: np.ndarray, S: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order derivative from a Numerov solution; NaN at the two ends.

    Uses psi' = [(1 + h^2 S/6) psi]_{n+1} - [(1 + h^2 S/6) psi]_{n-1} over 2h,
    whose h^2 term cancels against psi''' = -(S psi)'.
    """
    v = (1.0 + h * h * S / 6.0) * psi
    out = np.full(psi.shape, np.nan + 0j)
    out[..., 1:-1] = (v[..., 2:] - v[..., :-2]) / (2 * h)
    return out


def state_derivative(psi, S, h, method: str = "central") -> np.ndarray:
    """psi' by central differences (second order) or the Numerov-consistent rule."""
    if method == "numerov":
        return numerov_derivative(psi, S, h)
    if method != "central":
        raise ConfigurationError(f"unknown derivative method {method!r}")
    out = np.full(psi.shape, np.nan + 0j)
    out[..., 1:-1] = (psi[..., 2:] - psi[..., :-2]) / (2 * h)
    return out


def _check_flat(U: np.ndarray) -> None:
    for name, seg in (("left", U[:FLAT_POINTS]), ("right", U[-FLAT_POINTS:])):
        if np.ptp(seg) > 1e-14 * max(1.0, abs(seg[0])):
            raise ConfigurationError(
                f"potential must be constant over the last {FLAT_POINTS} points on the {name} end"
            )


def _scatter_left(U: np.ndarray, grid: Grid1D, energies: np.ndarray):
    """Left-incident scattering for a batch of energies.

    Returns psi (normalized to unit incident amplitude), T, R.
    """
    h = grid.dx
    x = grid.x
    E = np.asarray(energies, dtype=float)[:, None]
    S = 2.0 * (E - U[None, :])
    SL, SR = S[:, 0], S[:, -1]
    if np.any(SL <= 0) or np.any(SR <= 0):
        raise DomainError("energy below the asymptotic potential: no propagating solution")
    qL, qR = discrete_wavenumber(SL, h), discrete_wavenumber(SR, h)
    # transmitted wave exp(i qR x) seeded on the right, integrated leftward
    Srev = S[:, ::-1]
    start0 = np.exp(1j * qR * x[-1])
    start1 = np.exp(1j * qR * x[-2])
    psi = numerov_sweep(Srev, h, start0, start1)[:, ::-1]
    # split the left asymptote into exp(+-i qL x) using the first two points
    e0p, e1p = np.exp(1j * qL * x[0]), np.exp(1j * qL * x[1])
    det = e0p * np.conj(e1p) - np.conj(e0p) * e1p
    A = (psi[:, 0] * np.conj(e1p) - np.conj(e0p) * psi[:, 1]) / det
    B = (e0p * psi[:, 1] - psi[:, 0] * e1p) / det
    aL, _ = numerov_factors(SL, h)
    aR, _ = numerov_factors(SR, h)
    flux_in = np.abs(A) ** 2 * aL**2 * np.sin(qL * h)
    flux_out = aR**2 * np.sin(qR * h)
    T = flux_out / flux_in
    R = np.abs(B / A) ** 2
    psi = psi / A[:, None]
    return psi, T, R, S


def transmission_scan(U: np.ndarray, grid: Grid1D, energies) -> tuple[np.ndarray, np.ndarray]:
    """T(E) and R(E) for left incidence, vectorized over energies."""
    U = np.asarray(U, dtype=float)
    _check_flat(U)
    _, T, R, _ = _scatter_left(U, grid, np.atleast_1d(energies))
    return T, R


def solve_scattering(
    U: np.ndarray, grid: Grid1D, E: float, incoming: str = "left", derivative: str = "central"
) -> StationaryState:
    """Scattering state with unit incident amplitude from ``incoming``.

    ``derivative="central"`` keeps psi' second order, so invariance deviations
    of Q and Q-tilde shrink like dx^2; ``"numerov"`` is fourth order and
    typically sits at the rounding floor for dx <= 2e-3.
    """
    U = np.asarray(U, dtype=float)
    _check_flat(U)
    if incoming not in ("left", "right"):
        raise ConfigurationError("incoming must be 'left' or 'right'")
    if incoming == "left":
        psi, T, R, S = _scatter_left(U, grid, np.array([E]))
        psi, S = psi[0], S[0]
    else:
        # mirror the problem; psi_right(x) = psi_left of the mirrored potential at -x
        mirrored = Grid1D(-grid.x_max, -grid.x_min, grid.n_points)
        psi, T, R, S = _scatter_left(U[::-1].copy(), mirrored, np.array([E]))
        psi, S = psi[0, ::-1], S[0, ::-1]
    dpsi = state_derivative(psi, S, grid.dx, derivative)
    return StationaryState(
        grid, float(E), psi, dpsi, {"kind": "scattering", "incoming": incoming}, U,
        transmission=float(T[0]), reflection=float(R[0]),
    )


def solve_bound(U: np.ndarray, grid: Grid1D, n_states: int) -> list[StationaryState]:
    """Lowest eigenpairs of -1/2 d^2/dx^2 + U with psi = 0 at both grid ends."""
    U = np.asarray(U, dtype=float)
    m = grid.n_points - 2
    if n_states < 1 or n_states > m // 4:
        raise ConfigurationError(
            f"{n_states} states requested but the grid resolves at most {m // 4}"
        )
    h2 = grid.dx**2
    d = 1.0 / h2 + U[1:-1]
    e = np.full(m - 1, -0.5 / h2)
    vals, vecs = eigh_tridiagonal(d, e, select="i", select_range=(0, n_states - 1))
    kmax = np.sqrt(max(2.0 * (vals[-1] - U[1:-1].min()), 0.0))
    if kmax * grid.dx > np.pi / 4:
        raise ConfigurationError(
            f"grid too coarse for {n_states} states (k*dx = {kmax * grid.dx:.2f}); refine the grid"
        )
    out = []
    for n in range(n_states):
        v = vecs[:, n]
        # one step of inverse iteration polishes the residual to rounding level
        E = vals[n]
        for _ in range(2):
            v = _tridiag_shift_solve(d - E - 1e-10 * abs(E + 1.0), e, v)
            v /= np.linalg.norm(v)
            Hv = d * v
            Hv[:-1] += e * v[1:]
            Hv[1:] += e * v[:-1]
            E = float(v @ Hv)
        psi = np.zeros(grid.n_points)
        psi[1:-1] = v / np.sqrt(grid.dx)
        first = np.flatnonzero(np.abs(psi) > 1e-8 * np.abs(psi).max())[0]
        if psi[first] < 0:
            psi = -psi
        psi = psi.astype(complex)
        dpsi = state_derivative(psi, None, grid.dx)
        out.append(StationaryState(grid, E, psi, dpsi, {"kind": "bound", "index": n}, U))
    return out


def _tridiag_shift_solve(diag, off, rhs):
    from scipy.linalg import solve_banded

    ab = np.zeros((3, diag.size))
    ab[0, 1:] = off
    ab[1] = diag
    ab[2, :-1] = off
    return solve_banded((1, 1), ab, rhs)


def bound_residual(state: StationaryState) -> float:
    """||H psi - E psi|| / ||psi|| on the interior points."""
    psi, U, h = state.psi.real, state.U, state.grid.dx
    Hpsi = -0.5 * (psi[2:] - 2 * psi[1:-1] + psi[:-2]) / h**2 + U[1:-1] * psi[1:-1]
    return float(np.linalg.norm(Hpsi - state.energy * psi[1:-1]) / np.linalg.norm(psi[1:-1]))


def solve_bloch(
    U: np.ndarray, grid: Grid1D, E: float, period: float,
    start: float | None = None, derivative: str = "central",
) -> StationaryState:
    """Right-moving Bloch state of a periodic potential at energy ``E``.

    The one-period Numerov transfer matrix is built starting at ``start``
    (default: the left grid end); its eigenvector with eigenvalue exp(ikL),
    k > 0, seeds the integration over the whole grid.
    """
    U = np.asarray(U, dtype=float)
    h = grid.dx
    p = int(round(period / h))
    if abs(p * h - period) > 1e-9 * period or p < 2:
        raise ConfigurationError("period must be a whole number of grid spacings")
    i0 = 0 if start is None else grid.index_of(start)
    if i0 + p + 1 >= grid.n_points:
        raise ConfigurationError("grid shorter than one period past the start point")
    S = 2.0 * (E - U)
    seg = S[i0 : i0 + p + 2]
    cols = [numerov_sweep(seg, h, 1.0, 0.0), numerov_sweep(seg, h, 0.0, 1.0)]
    M = np.array([[c[p] for c in cols], [c[p + 1] for c in cols]])
    evals, evecs = np.linalg.eig(M)
    if np.all(np.abs(np.abs(evals) - 1.0) > 1e-8):
        raise DomainError(f"energy {E} lies in a band gap: no Bloch state")
    kL = np.angle(evals)
    # right mover: positive flux Im(conj(w0) w1)
    a = numerov_factors(seg[:2], h)[0]
    flux = np.imag(np.conj(a[0] * evecs[0]) * a[1] * evecs[1])
    pick = int(np.argmax(flux))
    k = kL[pick] / period
    v = evecs[:, pick]
    fwd = numerov_sweep(S[i0:], h, v[0], v[1])
    psi = np.empty(grid.n_points, dtype=complex)
    psi[i0:] = fwd
    if i0 > 0:
        back = numerov_sweep(S[: i0 + 2][::-1], h, v[1], v[0])[::-1]
        psi[:i0] = back[:i0]
    psi /= np.abs(psi).max()
    dpsi = state_derivative(psi, S, h, derivative)
    return StationaryState(
        grid, float(E), psi, dpsi,
        {"kind": "bloch", "k": float(k), "period": float(period), "eigenvalue": complex(evals[pick])}, U,
    )


@dataclass
class TwoPointCurrents:
    map: SymmetryMap
    indices: np.ndarray
    J: np.ndarray
    Q: np.ndarray
    Qtilde: np.ndarray

    @property
    def x(self) -> np.ndarray:
        return self.map.grid.x[self.indices]


def two_point_currents(state: StationaryState, map: SymmetryMap, margin: int = 1) -> TwoPointCurrents:
    """J, Q and Q-tilde at the interior domain points x, paired with y = F(x)."""
    if map.grid != state.grid:
        raise ConfigurationError("symmetry map and state live on different grids")
    idx = map.interior(margin)
    jdx = map.sigma * idx + map.offset
    ok = np.isfinite(state.psi_prime[idx]) & np.isfinite(state.psi_prime[jdx])
    idx, jdx = idx[ok], jdx[ok]
    s = map.sigma
    px, py = state.psi[idx], state.psi[jdx]
    dx_, dy_ = state.psi_prime[idx], state.psi_prime[jdx]
    J = np.imag(np.conj(px) * dx_)
    Q = (s * px * dy_ - py * dx_) / 2j
    Qt = (s * np.conj(px) * dy_ - py * np.conj(dx_)) / 2j
    return TwoPointCurrents(map, idx, J, Q, Qt)


def check_invariance(currents: TwoPointCurrents) -> dict:
    """(mean, max deviation from mean) for Q, Q-tilde and J over the domain."""
    out = {}
    for name in ("Q", "Qtilde", "J"):
        v = getattr(currents, name)
        mean = v.mean()
        out[name] = (complex(mean) if np.iscomplexobj(v) else float(mean), float(np.abs(v - mean).max()))
    return out


def map_wavefield(state: StationaryState, map: SymmetryMap, currents: TwoPointCurrents):
    """Remainder psi(F(x)) - (Qt psi(x) - Q conj(psi(x))) / J with domain means.

    Returns ``(max |remainder|, remainder field over currents.indices)``.
    """
    J = currents.J.mean()
    if abs(J) < 1e-12:
        raise DomainError("mapping undefined for zero-current states")
    Q, Qt = currents.Q.mean(), currents.Qtilde.mean()
    idx = currents.indices
    px = state.psi[idx]
    py = state.psi[map.sigma * idx + map.offset]
    rem = py - (Qt * px - Q * np.conj(px)) / J
    return float(np.abs(rem).max()), rem
