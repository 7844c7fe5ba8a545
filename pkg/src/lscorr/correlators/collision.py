"""Collision integrals along a symmetry map and their domain decompositions.

T(x) = N (N - 1) int (V(x, z) - V(y, z)) rho2(x, z; y, z) dz,  y = F(x).

The z quadrature always uses the full-grid trapezoid weights, so any split of
the z range into pieces adds back to T exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError
from ..grid import SymmetryMap
from ..potentials import InteractionSpec
from ..rdm import DEGENERACY_TOL, NaturalSpectrum, TwoBodyRDMSlice, collision_prefactor

VARIANTS = ("generic", "split", "mapped", "distance-form", "inversion-form", "contact")


@dataclass
class CollisionField:
    variant: str
    indices: np.ndarray
    map: SymmetryMap
    T: np.ndarray
    T_D: np.ndarray | None = None
    T_E: np.ndarray | None = None
    parts: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)


def _slice_rows(slice_: TwoBodyRDMSlice, idx: np.ndarray) -> np.ndarray:
    pos = idx - slice_.indices[0]
    if pos.min() < 0 or pos.max() >= len(slice_.indices):
        raise ConfigurationError("requested points lie outside the slice domain")
    return slice_.values[pos]


def union_mask(map: SymmetryMap) -> np.ndarray:
    mask = np.zeros(map.grid.n_points, dtype=bool)
    mask[map.domain_indices] = True
    mask[map.image_indices] = True
    return mask


def _require_disjoint(map: SymmetryMap, variant: str) -> None:
    if map.overlaps_image():
        raise ConfigurationError(
            f"{variant} needs D and F(D) to share no grid points (they overlap), "
            "otherwise the mapped integral counts the overlap twice; "
            "shrink the domain or use the generic/split variants"
        )


def collision_integral(
    slice_: TwoBodyRDMSlice,
    V: InteractionSpec,
    map: SymmetryMap | None = None,
    variant: str = "generic",
    indices: np.ndarray | None = None,
    scaled: bool = True,
) -> CollisionField:
    """Collision integral T(x) at the points ``indices`` (default: whole domain).

    ``scaled`` selects the N (N - 1) prefactor (N-scaled correlator) versus
    (N - 1) (trace-one rho1); see :func:`lscorr.rdm.collision_prefactor`.
    """
    if variant not in VARIANTS:
        raise ConfigurationError(f"unknown collision variant {variant!r}")
    map = slice_.map if map is None else map
    grid = map.grid
    idx = map.domain_indices if indices is None else np.asarray(indices)
    jdx = map.sigma * idx + map.offset
    rows = _slice_rows(slice_, idx)  # rho2(x, z; y, z)
    pref = collision_prefactor(slice_.N, scaled)
    w = grid.weights
    flags = []
    if map.is_gapped:
        flags.append("gapped domain: split outside the explicit guarantee")

    if variant == "contact":
        if V.kind != "contact":
            raise ConfigurationError("contact variant requires a contact interaction")
        T = pref * V.g * (rows[np.arange(len(idx)), idx] - rows[np.arange(len(idx)), jdx])
        return CollisionField(variant, idx, map, T, flags=flags)

    Vm = V.matrix(grid)
    integrand = (Vm[idx] - Vm[jdx]) * rows
    T = pref * (integrand * w).sum(axis=1)
    if variant == "generic":
        return CollisionField(variant, idx, map, T, flags=flags)

    mask = union_mask(map)
    T_D = pref * (integrand * (w * mask)).sum(axis=1)
    T_E = pref * (integrand * (w * ~mask)).sum(axis=1)
    if variant == "split":
        return CollisionField(variant, idx, map, T, T_D, T_E, flags=flags)

    if variant == "inversion-form" and map.sigma != -1:
        raise ConfigurationError("inversion-form requires an inversion map (sigma = -1)")
    _require_disjoint(map, variant)
    # rho2(x, z; y, z) restricted to z in D and to z' = F(z) in D-bar
    zD = map.domain_indices
    zF = map.image_indices
    r_z, r_F = rows[:, zD], rows[:, zF]
    wD = w[zD]
    Vx_z, Vy_z = Vm[idx][:, zD], Vm[jdx][:, zD]
    Vx_F, Vy_F = Vm[idx][:, zF], Vm[jdx][:, zF]
    if variant == "mapped":
        TD_alt = pref * (
            ((Vx_z - Vy_z) * r_z * wD).sum(axis=1) + ((Vx_F - Vy_F) * r_F * w[zF]).sum(axis=1)
        )
        parts = {}
    elif variant == "distance-form":
        intra = pref * ((Vx_z * (r_z - r_F)) * wD).sum(axis=1)
        inter = pref * ((Vx_F * r_F - Vy_z * r_z) * wD).sum(axis=1)
        TD_alt = intra + inter
        parts = {"intradomain": intra, "interdomain": inter}
    else:
        TD_alt = pref * (((Vx_z - Vy_z) * (r_z - r_F)) * wD).sum(axis=1)
        parts = {}
    parts["T_D_generic"] = T_D
    return CollisionField(variant, idx, map, T_E + TD_alt, TD_alt, T_E, parts, flags)


def collision_matrix_elements(
    spectrum: NaturalSpectrum,
    kernel: np.ndarray,
    pairs=None,
    tol: float = DEGENERACY_TOL,
) -> tuple[np.ndarray, list]:
    """I_pn = int int conj(phi_p(x')) K(x', x'') phi_n(x'') dx' dx''.

    ``kernel`` is the trace-one collision kernel from
    :func:`lscorr.rdm.collision_kernel`.  Returns the full matrix [p, n] and
    the list of requested pairs that were skipped as degenerate (the matrix
    entries of skipped pairs are NaN).  With ``pairs=None`` every element is
    returned and nothing is skipped.
    """
    dx = spectrum.grid.dx
    P = spectrum.orbitals
    I = dx * dx * (P.conj() @ kernel @ P.T)
    skipped = []
    if pairs is not None:
        lam = spectrum.populations
        out = np.full_like(I, np.nan)
        for p, n in pairs:
            if p != n and abs(lam[p] - lam[n]) < tol:
                skipped.append((int(p), int(n)))
            else:
                out[p, n] = I[p, n]
        I = out
    return I, skipped
