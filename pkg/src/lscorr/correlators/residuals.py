"""Residuals of the correlator equations of motion evaluated on exact snapshots.

Every residual takes a snapshot triple (t - dt, t, t + dt).  Time
derivatives are central differences over the triple; everything else is
evaluated at the middle time.  Spatial derivatives are central differences,
so residuals of smooth trajectories scale like dx^2 + dt^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError, DomainError
from ..grid import SymmetryMap
from ..potentials import SYMMETRY_TOL, InteractionSpec, verify_local_symmetry
from ..rdm import (
    DEGENERACY_TOL,
    POPULATION_FLOOR,
    NaturalSpectrum,
    anomalous_decomposition,
    collision_kernel,
    collision_prefactor,
    natural_decomposition,
    reduce_gamma,
    reduce_gamma2_slice,
    reduce_rho1,
    reduce_rho2_slice,
)
from ..stationary import StationaryState, two_point_currents
from .collision import collision_integral, collision_matrix_elements
from .fields import (
    image,
    kernel_line_current,
    kinetic_term_from_kernel,
    kinetic_term_from_orbitals,
    orbital_current,
)

MARGIN = 2


@dataclass
class ResidualReport:
    equation: str
    x: np.ndarray
    residual: np.ndarray
    dx: float
    dt: float | None = None
    map: dict | None = None
    slope: float | None = None
    truncation: dict = field(default_factory=dict)
    skipped_pairs: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def norms(self) -> dict:
        r = np.abs(np.asarray(self.residual))
        if r.size == 0:
            return {"max": 0.0, "l2": 0.0}
        return {"max": float(r.max()), "l2": float(math.sqrt(self.dx * float((r**2).sum())))}

    @property
    def max(self) -> float:
        return self.norms["max"]

    def to_dict(self) -> dict:
        return {
            "equation": self.equation,
            "map": self.map,
            "norms": self.norms,
            "dx": self.dx,
            "dt": self.dt,
            "slope": self.slope,
            "truncation": self.truncation,
            "skipped_pairs": [list(p) for p in self.skipped_pairs],
            "extra": _jsonable(self.extra),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def unpack_triple(snapshots):
    """Validate an equally spaced snapshot triple and return (m, c, p, dt)."""
    if len(snapshots) != 3:
        raise ConfigurationError("a snapshot triple (t - dt, t, t + dt) is required")
    m, c, p = snapshots
    dt1, dt2 = c.time - m.time, p.time - c.time
    if not dt1 > 0 or abs(dt1 - dt2) > 1e-9 * max(dt1, dt2):
        raise ConfigurationError(f"snapshots not equally spaced: steps {dt1} and {dt2}")
    return m, c, p, 0.5 * (dt1 + dt2)


def potential_term(U: np.ndarray, map: SymmetryMap, idx: np.ndarray, C: np.ndarray):
    """(U(x) - U(F(x))) C(x) plus bookkeeping on whether it vanishes identically."""
    U = np.asarray(U, dtype=float)
    jdx = image(map, idx)
    term = (U[idx] - U[jdx]) * C
    symmetric = verify_local_symmetry(U, map) <= SYMMETRY_TOL
    info = {
        "local_symmetry": bool(symmetric),
        "u_term_max": float(np.abs(term).max()) if term.size else 0.0,
        "u_term_identically_zero": bool(np.all(term == 0)),
    }
    return term, info


def _interior(map: SymmetryMap, margin: int) -> np.ndarray:
    idx = map.interior(margin)
    if idx.size == 0:
        raise DomainError("domain too small for the requested boundary margin")
    return idx


def residual_canonical_total(
    snapshots,
    map: SymmetryMap,
    V: InteractionSpec,
    U: np.ndarray,
    prefactor: float | None = None,
    margin: int = MARGIN,
) -> ResidualReport:
    """Residual of the N-scaled canonical correlator equation on interior(D).

    r = i dC/dt - 1/2 grad sum lambda j - (U(x) - U(y)) C - T,
    C = N rho1(x, F(x)).  ``prefactor`` overrides N (N - 1) in T (used as a
    deliberately wrong convention in negative controls).
    """
    m, c, p, dt = unpack_triple(snapshots)
    N = c.N
    idx = _interior(map, margin)
    jdx = image(map, idx)
    rho_m, rho_c, rho_p = (reduce_rho1(s) for s in (m, c, p))
    dC = 1j * N * (rho_p.matrix[idx, jdx] - rho_m.matrix[idx, jdx]) / (2 * dt)
    kin = kinetic_term_from_kernel(rho_c.matrix, map, idx, scale=N)
    C = N * rho_c.matrix[idx, jdx]
    uterm, uinfo = potential_term(U, map, idx, C)
    T = collision_integral(reduce_rho2_slice(c, map), V, map, "generic", indices=idx).T
    if prefactor is not None:
        T = T * prefactor / collision_prefactor(N, True)
    res = dC - kin - uterm - T
    return ResidualReport(
        "canonical-total",
        map.grid.x[idx],
        res,
        map.grid.dx,
        dt,
        map.to_dict(),
        extra={
            **uinfo,
            "prefactor": collision_prefactor(N, True) if prefactor is None else prefactor,
            "time_term_max": float(np.abs(dC).max()),
            "kinetic_max": float(np.abs(kin).max()),
            "collision_max": float(np.abs(T).max()),
        },
    )


def _spectra(snapshots):
    return [natural_decomposition(reduce_rho1(s)) for s in snapshots]


def match_orbital(target: np.ndarray, spectrum: NaturalSpectrum, dx: float, candidates=None):
    """Orbital of ``spectrum`` with the largest overlap with ``target``, phase aligned.

    Returns (index, orbital rotated so that <target|orbital> is real positive).
    """
    P = spectrum.orbitals if candidates is None else spectrum.orbitals[candidates]
    ov = dx * (P @ np.conj(target))
    k = int(np.argmax(np.abs(ov)))
    # ov[k] = <target|P_k>
    orb = P[k] * (abs(ov[k]) / ov[k])
    index = k if candidates is None else int(np.asarray(candidates)[k])
    return index, orb


def _orbital_series(specs, n: int, dx: float):
    sm, sc, sp_ = specs
    target = sc.orbitals[n]
    km, phim = match_orbital(target, sm, dx)
    kp, phip = match_orbital(target, sp_, dx)
    return (phim, target, phip), (km, kp)


def _degeneracy(lam: np.ndarray, n: int, tol: float) -> list[tuple[int, int]]:
    return [(int(n), int(p)) for p in np.flatnonzero(np.abs(lam - lam[n]) < tol) if p != n]


def _coupling_coefficients(I: np.ndarray, lam: np.ndarray, n: int, p_floor: float | None, tol: float):
    """N(N-1)-free coefficients I_pn / (lam_n - lam_p) over the admissible p."""
    gap = lam[n] - lam
    ok = np.abs(gap) >= tol
    ok[n] = False
    if p_floor is not None:
        ok &= lam >= p_floor
    safe = np.where(ok, gap, 1.0)
    return np.where(ok, I[:, n] / safe, 0.0), np.where(ok, I[n, :] / safe, 0.0), ok


def _truncation_info(lam, floor, p_floor, ok):
    below = lam < floor
    return {
        "population_floor": floor,
        "coupling_basis": "full" if p_floor is None else f"lambda >= {p_floor:g}",
        "coupled_orbitals": int(ok.sum()),
        "orbitals_below_floor": int(below.sum()),
        "population_below_floor": float(np.clip(lam[below], 0, None).sum()),
    }


def residual_orbital(
    snapshots,
    map: SymmetryMap,
    V: InteractionSpec,
    U: np.ndarray,
    n: int,
    floor: float = POPULATION_FLOOR,
    p_floor: float | None = None,
    margin: int = MARGIN,
    tol: float = DEGENERACY_TOL,
) -> ResidualReport:
    """Residual of the single natural-orbital correlator equation for orbital ``n``.

    r = i d/dt [phi_n(x) phi_n*(y)] - 1/2 grad j_n - (U(x)-U(y)) phi_n phi_n*(y)
        - N(N-1) sum_{p != n} [I_pn phi_p(x) phi_n*(y) + I_np phi_n(x) phi_p*(y)] / (lam_n - lam_p)

    The p sum runs over every grid orbital unless ``p_floor`` restricts it.
    Orbital ``n`` itself must carry a population >= ``floor`` and be
    non-degenerate; otherwise the report is returned empty with the reason.
    """
    m, c, p, dt = unpack_triple(snapshots)
    N = c.N
    dx = map.grid.dx
    idx = _interior(map, margin)
    jdx = image(map, idx)
    specs = _spectra((m, c, p))
    lam = specs[1].populations
    degenerate = _degeneracy(lam, n, tol)
    if lam[n] < floor or degenerate:
        reason = "population below floor" if lam[n] < floor else "degenerate population"
        return ResidualReport(
            f"orbital-{n}", np.empty(0), np.empty(0), dx, dt, map.to_dict(),
            skipped_pairs=degenerate, extra={"skipped": reason, "population": float(lam[n])},
        )
    (phim, phi, phip), matched = _orbital_series(specs, n, dx)
    lhs = 1j * (phip[idx] * np.conj(phip[jdx]) - phim[idx] * np.conj(phim[jdx])) / (2 * dt)
    kin = kinetic_term_from_orbitals(phi, [1.0], map, idx)
    uterm, uinfo = potential_term(U, map, idx, phi[idx] * np.conj(phi[jdx]))
    K = collision_kernel(c, V)
    I, _ = collision_matrix_elements(specs[1], K)
    a, b, ok = _coupling_coefficients(I, lam, n, p_floor, tol)
    P = specs[1].orbitals
    pref = collision_prefactor(N, True)
    src = pref * (
        (a[:, None] * P[:, idx]).sum(axis=0) * np.conj(phi[jdx])
        + phi[idx] * (b[:, None] * np.conj(P[:, jdx])).sum(axis=0)
    )
    res = lhs - kin - uterm - src
    return ResidualReport(
        f"orbital-{n}", map.grid.x[idx], res, dx, dt, map.to_dict(),
        truncation=_truncation_info(lam, floor, p_floor, ok),
        extra={**uinfo, "population": float(lam[n]), "matched_indices": list(matched),
               "source_max": float(np.abs(src).max())},
    )


def orbital_source_integral(snapshots, V: InteractionSpec, n: int, tol: float = DEGENERACY_TOL) -> complex:
    """Space integral of the interaction source of orbital n's density (trivial map).

    With y = x the source is N(N-1) sum_p [I_pn phi_p phi_n* + I_np phi_n phi_p*]/(lam_n-lam_p);
    its integral vanishes by orthonormality.
    """
    _, c, _, _ = unpack_triple(snapshots)
    spec = natural_decomposition(reduce_rho1(c))
    I, _ = collision_matrix_elements(spec, collision_kernel(c, V))
    a, b, _ = _coupling_coefficients(I, spec.populations, n, None, tol)
    P, phi = spec.orbitals, spec.orbitals[n]
    src = (a[:, None] * P).sum(axis=0) * np.conj(phi) + phi * (b[:, None] * np.conj(P)).sum(axis=0)
    return complex(collision_prefactor(c.N, True) * spec.grid.dx * src.sum())


def residual_integral_form(
    snapshots,
    map: SymmetryMap,
    V: InteractionSpec,
    U: np.ndarray,
    region: tuple[int, int],
) -> ResidualReport:
    """Integrated canonical equation over the cells of the index interval ``region``.

    Cells are [x_a - dx/2, x_b + dx/2]; the boundary fluxes are the midpoint
    averages of 1/2 sum lambda j, so the result equals dx times the sum of the
    pointwise residuals exactly.
    """
    a, b = int(region[0]), int(region[1])
    d0, d1 = map.domain
    if a > b or a < d0 + MARGIN or b > d1 - MARGIN:
        raise DomainError(
            f"region {region} must lie strictly inside the domain {map.domain} "
            f"(at least {MARGIN} points from its ends)"
        )
    m, c, p, dt = unpack_triple(snapshots)
    N = c.N
    dx = map.grid.dx
    idx = np.arange(a, b + 1)
    jdx = image(map, idx)
    rho_m, rho_c, rho_p = (reduce_rho1(s) for s in (m, c, p))
    dC = 1j * N * (rho_p.matrix[idx, jdx] - rho_m.matrix[idx, jdx]) / (2 * dt)
    C = N * rho_c.matrix[idx, jdx]
    uterm, uinfo = potential_term(U, map, idx, C)
    T = collision_integral(reduce_rho2_slice(c, map), V, map, "generic", indices=idx).T
    g = N * kernel_line_current(rho_c.matrix, map, np.arange(a - 1, b + 2), dx)
    flux_lo = 0.25 * (g[0] + g[1])
    flux_hi = 0.25 * (g[-2] + g[-1])
    time_int = dx * dC.sum()
    coll_int = dx * T.sum()
    res = time_int - (flux_hi - flux_lo) - dx * uterm.sum() - coll_int
    return ResidualReport(
        "integral-form", np.array([0.5 * (map.grid.x[a] + map.grid.x[b])]), np.array([res]),
        dx, dt, map.to_dict(),
        extra={**uinfo, "region": [a, b], "flux_low": complex(flux_lo), "flux_high": complex(flux_hi),
               "flux_difference": complex(flux_hi - flux_lo), "collision_integral": complex(coll_int),
               "time_integral": complex(time_int)},
    )


def stationary_noninteracting_checks(state: StationaryState, map: SymmetryMap, margin: int = 1) -> ResidualReport:
    """Constancy of (1/2i) j and (1/2i) j^a for a one-particle stationary state.

    The residual field is the deviation of (1/2i) j from its domain mean.
    Currents use the state's own psi' so the comparison with the invariant
    currents is made at one discretization.
    The relations to the invariant currents are recorded in ``extra``:
    (1/2i) j = -conj(Q-tilde) (the 1/2i prefactor changes sign under
    conjugation) and (1/2i) j^a = +Q.
    """
    cur = orbital_current(state.psi, map, "canonical", margin, dphi=state.psi_prime)
    acur = orbital_current(state.psi, map, "anomalous", margin, dphi=state.psi_prime)
    q = cur.values / 2j
    qa = acur.values / 2j
    tpc = two_point_currents(state, map, margin)
    if not np.array_equal(tpc.indices, cur.indices):
        raise ConfigurationError("current fields and invariant currents use different points")
    scale = max(float(np.abs(q).max()), float(np.abs(qa).max()), 1e-300)
    extra = {
        "canonical_mean": complex(q.mean()),
        "canonical_max_deviation": float(np.abs(q - q.mean()).max()),
        "anomalous_mean": complex(qa.mean()),
        "anomalous_max_deviation": float(np.abs(qa - qa.mean()).max()),
        "canonical_vs_conj_Qtilde": {
            "relation": "(1/2i) j = -conj(Qtilde)",
            "sign": -1,
            "max_abs_difference": float(np.abs(q + np.conj(tpc.Qtilde)).max()),
            "literal_plus_sign_difference": float(np.abs(q - np.conj(tpc.Qtilde)).max()),
        },
        "anomalous_vs_Q": {
            "relation": "(1/2i) j^a = Q",
            "sign": 1,
            "max_abs_difference": float(np.abs(qa - tpc.Q).max()),
        },
        "scale": scale,
    }
    return ResidualReport(
        "stationary-noninteracting", map.grid.x[cur.indices], q - q.mean(), map.grid.dx, None,
        map.to_dict(), extra=extra,
    )


def _line_rows(A: np.ndarray, B: np.ndarray, idx, jdx, scale: float) -> np.ndarray:
    return scale * np.einsum("ik,ik->i", A[idx], B[jdx])


def residual_anomalous(
    snapshots,
    map: SymmetryMap,
    V: InteractionSpec,
    U: np.ndarray,
    variant: str = "gamma-sum",
    n: int = 0,
    floor: float = POPULATION_FLOOR,
    margin: int = MARGIN,
    tol: float = DEGENERACY_TOL,
) -> ResidualReport:
    """Residuals of the anomalous correlator equations.

    gamma-sum:  i d^gamma1(x,y) - 1/2 grad sum mu j^a - (U(x)-U(y)) gamma1
                - (N-1) int (V(x,z)-V(y,z)) gamma2(x,z;y,z) dz,
                with the generalized derivative d^ f(x,y) = f_t(x) g(y) - f(x) g_t(y)
                taken factor by factor from the wavefunction snapshots.
    per-orbital-appB:  the same structure for phi_n(x) phi_n(y) of the natural
                orbitals, source N(N-1) sum_p I_pn (phi_p(x)phi_n(y) - phi_n(x)phi_p(y))/(lam_n-lam_p).
    renormalized-sum-appB:  sum_n lam_n times the per-orbital residual over
                significant, non-degenerate n.
    """
    m, c, p, dt = unpack_triple(snapshots)
    N = c.N
    dx = map.grid.dx
    idx = _interior(map, margin)
    jdx = image(map, idx)
    nn = c.grid.n_points
    if variant == "gamma-sum":
        gam = reduce_gamma(c)
        dec = anomalous_decomposition(gam)
        Pdot = ((p.amplitudes - m.amplitudes) / (2 * dt)).reshape(nn, -1)
        P0 = c.amplitudes.reshape(nn, -1)
        s = dx ** (N - 1)
        dhat = _line_rows(Pdot, P0, idx, jdx, s) - _line_rows(Pdot, P0, jdx, idx, s)
        lhs = 1j * dhat
        # sum_i mu_i j_i^a = (sigma d2 - d1) gamma1 along the line; the kernel
        # route avoids amplifying the reconstruction error by 1/dx^2
        kin = kinetic_term_from_kernel(gam.matrix, map, idx)
        kin_modes = kinetic_term_from_orbitals(dec.modes, dec.mu, map, idx, "anomalous")
        uterm, uinfo = potential_term(U, map, idx, gam.matrix[idx, jdx])
        T = collision_integral(reduce_gamma2_slice(c, map), V, map, "generic", indices=idx, scaled=False).T
        res = lhs - kin - uterm - T
        return ResidualReport(
            "anomalous-gamma-sum", map.grid.x[idx], res, dx, dt, map.to_dict(),
            extra={**uinfo, "decomposition": dec.report, "prefactor": collision_prefactor(N, False),
                   "modes_kinetic_deviation": float(np.abs(kin_modes - kin).max())},
        )

    specs = _spectra((m, c, p))
    lam = specs[1].populations
    K = collision_kernel(c, V)
    I, _ = collision_matrix_elements(specs[1], K)
    P = specs[1].orbitals
    pref = collision_prefactor(N, True)

    def one(k):
        (phim, phi, phip), _ = _orbital_series(specs, k, dx)
        dphi = (phip - phim) / (2 * dt)
        lhs = 1j * (dphi[idx] * phi[jdx] - phi[idx] * dphi[jdx])
        kin = kinetic_term_from_orbitals(phi, [1.0], map, idx, "anomalous")
        uterm, uinfo = potential_term(U, map, idx, phi[idx] * phi[jdx])
        a, _, ok = _coupling_coefficients(I, lam, k, None, tol)
        src = pref * (
            (a[:, None] * P[:, idx]).sum(axis=0) * phi[jdx]
            - phi[idx] * (a[:, None] * P[:, jdx]).sum(axis=0)
        )
        return lhs - kin - uterm - src, uinfo, ok

    if variant == "per-orbital-appB":
        degenerate = _degeneracy(lam, n, tol)
        if lam[n] < floor or degenerate:
            return ResidualReport(
                f"anomalous-orbital-{n}", np.empty(0), np.empty(0), dx, dt, map.to_dict(),
                skipped_pairs=degenerate, extra={"skipped": "degenerate or below floor"},
            )
        res, uinfo, ok = one(n)
        return ResidualReport(
            f"anomalous-orbital-{n}", map.grid.x[idx], res, dx, dt, map.to_dict(),
            truncation=_truncation_info(lam, floor, None, ok), extra={**uinfo, "population": float(lam[n])},
        )
    if variant == "renormalized-sum-appB":
        total = np.zeros(len(idx), dtype=complex)
        skipped, used = [], []
        uinfo = {}
        for k in np.flatnonzero(lam >= floor):
            deg = _degeneracy(lam, k, tol)
            if deg:
                skipped.extend(deg)
                continue
            res, uinfo, _ = one(k)
            total += lam[k] * res
            used.append(int(k))
        return ResidualReport(
            "anomalous-renormalized-sum", map.grid.x[idx], total, dx, dt, map.to_dict(),
            truncation={"population_floor": floor, "orbitals_used": used},
            skipped_pairs=skipped, extra=uinfo,
        )
    raise ConfigurationError(f"unknown anomalous variant {variant!r}")


def natural_population_rate_check(
    snapshots, V: InteractionSpec, floor: float = POPULATION_FLOOR, tol: float = DEGENERACY_TOL
) -> ResidualReport:
    """r_n = i (lam_n(t+dt) - lam_n(t-dt)) / (2 dt) - N (N-1) I_nn for significant n."""
    m, c, p, dt = unpack_triple(snapshots)
    dx = c.grid.dx
    specs = _spectra((m, c, p))
    lam = specs[1].populations
    I, _ = collision_matrix_elements(specs[1], collision_kernel(c, V))
    pref = collision_prefactor(c.N, True)
    res, used, skipped, rates = [], [], [], []
    for n in np.flatnonzero(lam >= floor):
        deg = _degeneracy(lam, n, tol)
        if deg:
            skipped.extend(deg)
            continue
        target = specs[1].orbitals[n]
        km, _ = match_orbital(target, specs[0], dx)
        kp, _ = match_orbital(target, specs[2], dx)
        rate = (specs[2].populations[kp] - specs[0].populations[km]) / (2 * dt)
        res.append(1j * rate - pref * I[n, n])
        rates.append(rate)
        used.append(int(n))
    return ResidualReport(
        "natural-population-rate", np.array(used, dtype=float), np.array(res), 1.0, dt,
        skipped_pairs=skipped,
        extra={"orbitals": used, "rates": rates, "populations": lam[used].tolist(),
               "I_nn_real_max": float(np.abs(np.real(np.diag(I)[used])).max()) if used else 0.0},
    )


def continuity_check(snapshots, margin: int = MARGIN) -> ResidualReport:
    """r = dn/dt + dJ/dx with n = rho1(x; x), J = (1/2i)(d1 - d2) rho1 at x' = x."""
    m, c, p, dt = unpack_triple(snapshots)
    grid = c.grid
    dx = grid.dx
    rho_m, rho_c, rho_p = (reduce_rho1(s) for s in (m, c, p))
    n_pts = grid.n_points
    idx = np.arange(margin, n_pts - margin)
    ext = np.arange(margin - 1, n_pts - margin + 1)
    R = rho_c.matrix
    d1 = (R[ext + 1, ext] - R[ext - 1, ext]) / (2 * dx)
    d2 = (R[ext, ext + 1] - R[ext, ext - 1]) / (2 * dx)
    J = ((d1 - d2) / 2j).real
    dn = (np.diag(rho_p.matrix).real - np.diag(rho_m.matrix).real)[idx] / (2 * dt)
    divJ = (J[2:] - J[:-2]) / (2 * dx)
    res = dn + divJ
    return ResidualReport(
        "continuity", grid.x[idx], res, dx, dt,
        extra={"norm_drift": abs(rho_p.trace() - rho_m.trace()), "trace": rho_c.trace()},
    )


def convergence_slope(coarse: ResidualReport, fine: ResidualReport, decimals: int = 9) -> float:
    """log2 of the max-residual ratio on the points the two reports share.

    Sets ``fine.slope`` and returns it.
    """
    xc = np.round(np.asarray(coarse.x, dtype=float), decimals)
    xf = np.round(np.asarray(fine.x, dtype=float), decimals)
    common = np.intersect1d(xc, xf)
    if common.size == 0:
        raise ConfigurationError("reports share no evaluation points")
    rc = np.abs(coarse.residual[np.isin(xc, common)]).max()
    rf = np.abs(fine.residual[np.isin(xf, common)]).max()
    slope = float(np.log2(rc / rf)) if rf > 0 else float("inf")
    fine.slope = slope
    fine.extra["slope_common_points"] = int(common.size)
    fine.extra["slope_max_coarse"] = float(rc)
    fine.extra["slope_max_fine"] = float(rf)
    return slope


__all__ = [
    "ResidualReport",
    "continuity_check",
    "convergence_slope",
    "natural_population_rate_check",
    "orbital_source_integral",
    "residual_anomalous",
    "residual_canonical_total",
    "residual_integral_form",
    "residual_orbital",
    "stationary_noninteracting_checks",
    "unpack_triple",
]

