import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from conftest import CONTACT, NONE, eigenstate, quench, random_state

from lscorr.errors import ConfigurationError, DomainError
from lscorr.grid import SymmetryMap, make_grid
from lscorr.manybody import (
    HamiltonianSpec,
    ManyBodyWavefunction,
    build_hamiltonian,
    product_state,
    snapshot_triple,
    symmetrize,
)
from lscorr.potentials import InteractionSpec
from lscorr.rdm import OneBodyRDM, collision_kernel, natural_decomposition, reduce_rho1, reduce_rho2_slice
from lscorr.correlators import (
    collision_integral,
    collision_matrix_elements,
    continuity_check,
    convergence_slope,
    correlator_field,
    kinetic_divergence_orbitals,
    kinetic_divergence_repfree,
    natural_population_rate_check,
    orbital_current,
    residual_anomalous,
    residual_canonical_total,
    residual_integral_form,
    residual_orbital,
    stationary_noninteracting_checks,
)
from lscorr.correlators.residuals import orbital_source_integral
from lscorr.correlators.fields import kinetic_term_from_orbitals, momentum_matrix, momentum_structure
from lscorr.stationary import solve_bound, solve_scattering

GAUSS = InteractionSpec("gaussian", V0=0.7, w=0.6)


def smooth_pair(g):
    """Normalized bosonic pair state built from two smooth, complex orbitals."""
    a = np.exp(-((g.x - 0.5) ** 2)) * np.exp(0.8j * g.x)
    b = g.x * np.exp(-((g.x + 0.3) ** 2) / 1.5)
    psi = ManyBodyWavefunction(g, 2, symmetrize(np.multiply.outer(a, b) + 0.3 * np.multiply.outer(a, a), "bosonic"))
    psi.amplitudes /= np.sqrt(psi.norm())
    return psi


# correlator fields ---------------------------------------------------------


def test_trivial_map_gives_scaled_density():
    g = make_grid(-3, 3, 41)
    psi = random_state(g, seed=1)
    m = SymmetryMap(g, 1, 0.0, (0, 40))
    rho = reduce_rho1(psi)
    C = correlator_field(rho, m)
    assert np.abs(C.values - 2 * np.diag(rho.matrix)[C.indices]).max() < 1e-14
    spec = natural_decomposition(rho)
    C2 = correlator_field(spec, m)
    assert np.abs(C2.values - (spec.populations[:, None] * np.abs(spec.orbitals[:, C.indices]) ** 2).sum(0)).max() < 1e-12


def test_condensed_orbital_correlator():
    g = make_grid(-5, 5, 101)
    phi = np.exp(-(g.x**2) / 2 + 0.4j * g.x)
    phi /= np.sqrt(g.dx * np.vdot(phi, phi).real)
    m = SymmetryMap.from_positions(g, -1, 0.5, -3.0, -0.5)
    C = correlator_field(reduce_rho1(product_state(phi, 2, g)), m)
    expect = 2 * phi[C.indices] * np.conj(phi[m.sigma * C.indices + m.offset])
    assert np.abs(C.values - expect).max() < 1e-12


@pytest.mark.parametrize("sigma,L", [(1, 1.5), (-1, 0.3)])
def test_correlator_two_routes(sigma, L):
    g = make_grid(-3, 3, 61)
    rho = reduce_rho1(random_state(g, seed=7))
    m = SymmetryMap.from_positions(g, sigma, L, -2.0, -0.5)
    a = correlator_field(rho, m).values
    b = correlator_field(natural_decomposition(rho), m).values
    assert np.abs(a - b).max() < 1e-10


@pytest.mark.parametrize("sigma,L", [(1, 2.0), (-1, -0.4)])
def test_hermiticity_symmetry(sigma, L):
    g = make_grid(-3, 3, 61)
    rho = reduce_rho1(random_state(g, seed=3))
    m = SymmetryMap.from_positions(g, sigma, L, -2.5, -1.0)
    back = SymmetryMap(g, sigma, -sigma * L, m.codomain)
    C = correlator_field(rho, m, margin=0)
    Cb = correlator_field(rho, back, margin=0)
    lookup = dict(zip(Cb.indices.tolist(), Cb.values))
    for i, v in zip(C.indices, C.values):
        assert abs(v - np.conj(lookup[int(m.apply(i))])) < 1e-12


# orbital currents ----------------------------------------------------------


def test_plane_wave_current():
    g = make_grid(0, 10, 1001)
    k, L = 1.3, 2.0
    m = SymmetryMap.from_positions(g, 1, L, 1.0, 6.0)
    j = orbital_current(np.exp(1j * k * g.x), m).values
    k_eff = np.sin(k * g.dx) / g.dx
    assert np.abs(j - (-2j * k_eff * np.exp(-1j * k * L))).max() < 1e-12
    assert np.abs(j - (-2j * k * np.exp(-1j * k * L))).max() < k**3 * g.dx**2


def test_even_orbital_about_inversion_center():
    g = make_grid(-4, 4, 161)
    phi = np.exp(-(g.x**2)) * (1 + 0.2 * g.x**2)
    m = SymmetryMap.from_positions(g, -1, 0.0, -3.0, 3.0)
    cur = orbital_current(phi, m)
    d = np.gradient(phi, g.dx)
    y = m.sigma * cur.indices + m.offset
    literal = -(d[y] * phi[cur.indices] + phi[y] * d[cur.indices])
    assert np.abs(cur.values - literal).max() < 1e-12
    # field vanishes pointwise, so its divergence integrates to zero over [-3, 3]
    assert np.abs(cur.values).max() < 1e-12


def test_current_against_analytic_derivative():
    def errs(n):
        g = make_grid(-4, 4, n)
        x = g.x
        phi = np.exp(-(x**2)) * (1 + 0.3j * x) * np.exp(0.7j * x)
        dphi = phi * (-2 * x + 0.7j) + np.exp(-(x**2)) * 0.3j * np.exp(0.7j * x)
        m = SymmetryMap.from_positions(g, 1, 1.0, -2.0, 0.0)
        fd = orbital_current(phi, m).values
        exact = orbital_current(phi, m, dphi=dphi).values
        out = []
        for kind in ("canonical", "anomalous"):
            a = orbital_current(phi, m, kind).values
            b = orbital_current(phi, m, kind, dphi=dphi).values
            out.append(np.abs(a - b).max())
        assert np.abs(fd - exact).max() == pytest.approx(out[0])
        return np.array(out)

    ratio = errs(161) / errs(321)
    assert np.all((ratio > 3.5) & (ratio < 4.5))


def test_current_margin_error():
    g = make_grid(0, 1, 21)
    m = SymmetryMap(g, 1, 0.25, (0, 10))
    with pytest.raises(DomainError):
        orbital_current(np.ones(21), m, margin=0)


# collision integrals -------------------------------------------------------


def test_collision_vanishes_without_interaction_or_with_trivial_map():
    g = make_grid(-3, 3, 41)
    psi = random_state(g, seed=2)
    m = SymmetryMap.from_positions(g, -1, 0.0, -2.4, -0.6)
    assert np.all(collision_integral(reduce_rho2_slice(psi, m), NONE, m).T == 0)
    triv = SymmetryMap(g, 1, 0.0, (3, 37))
    sl = reduce_rho2_slice(psi, triv)
    for V in (GAUSS, CONTACT):
        assert np.all(collision_integral(sl, V, triv).T == 0)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([(1, 2.0, -2.5, -1.5), (-1, -0.5, -2.5, -1.0), (-1, 0.0, -2.0, 1.0)]))
def test_split_additivity(seed, m_args):
    g = make_grid(-3, 3, 25)
    sigma, L, a, b = m_args
    m = SymmetryMap.from_positions(g, sigma, L, a, b)
    cf = collision_integral(reduce_rho2_slice(random_state(g, seed=seed), m), GAUSS, m, "split")
    assert np.abs(cf.T - cf.T_D - cf.T_E).max() <= 1e-12 * max(1.0, np.abs(cf.T).max())


@pytest.mark.parametrize("seed", range(3))
def test_inversion_form_equals_generic(seed):
    g = make_grid(-3, 3, 61)
    m = SymmetryMap.from_positions(g, -1, 0.4, -2.5, -0.5)
    sl = reduce_rho2_slice(random_state(g, seed=seed), m)
    T = collision_integral(sl, GAUSS, m).T
    for variant in ("inversion-form", "mapped", "distance-form"):
        cf = collision_integral(sl, GAUSS, m, variant)
        assert np.abs(cf.T - T).max() < 1e-10
        assert np.abs(cf.T_D - cf.parts["T_D_generic"]).max() < 1e-10


def test_incompatible_variants():
    g = make_grid(-3, 3, 61)
    psi = random_state(g, seed=0)
    over = SymmetryMap.from_positions(g, -1, 0.0, -2.0, 1.0)
    trans = SymmetryMap.from_positions(g, 1, 3.0, -2.5, -1.0)
    with pytest.raises(ConfigurationError):
        collision_integral(reduce_rho2_slice(psi, over), GAUSS, over, "inversion-form")
    with pytest.raises(ConfigurationError):
        collision_integral(reduce_rho2_slice(psi, trans), GAUSS, trans, "inversion-form")
    with pytest.raises(ConfigurationError):
        collision_integral(reduce_rho2_slice(psi, trans), GAUSS, trans, "contact")
    assert collision_integral(reduce_rho2_slice(psi, trans), GAUSS, trans, "split").flags


def test_contact_limit_of_narrowing_gaussian():
    g = make_grid(-5, 5, 1001)
    m = SymmetryMap.from_positions(g, -1, 0.4, -2.0, 0.0)
    sl = reduce_rho2_slice(smooth_pair(g), m)
    Tc = collision_integral(sl, InteractionSpec("contact", g=1.0), m, "contact").T
    errors = []
    for k in (32, 16, 8, 4):
        w = k * g.dx
        T = collision_integral(sl, InteractionSpec("gaussian", V0=1 / (w * np.sqrt(2 * np.pi)), w=w), m).T
        errors.append(np.abs(T - Tc).max() / np.abs(Tc).max())
    assert all(a > b for a, b in zip(errors, errors[1:]))
    assert errors[-1] < 0.05


@pytest.mark.parametrize("w", [0.2, 0.3, 0.5])
def test_range_locality(w):
    g = make_grid(-5, 5, 201)
    m = SymmetryMap.from_positions(g, 1, 3.0, -2.5, -1.0)
    cf = collision_integral(reduce_rho2_slice(smooth_pair(g), m), InteractionSpec("gaussian", V0=1.0, w=w), m, "distance-form")
    inter = np.abs(cf.parts["interdomain"]).max()
    intra = np.abs(cf.parts["intradomain"]).max()
    assert inter <= np.exp(-m.gap() ** 2 / (2 * w**2)) * intra


def test_matrix_elements_brute_force():
    g = make_grid(-3, 3, 48)
    psi = random_state(g, seed=9)
    psi.amplitudes[[0, -1], :] = 0
    psi.amplitudes[:, [0, -1]] = 0
    psi.amplitudes /= np.sqrt(psi.norm())
    spec = natural_decomposition(reduce_rho1(psi))
    A, w, Vm = psi.amplitudes, g.weights, CONTACT.matrix(g)
    P = spec.orbitals[:4]
    D = Vm[:, None, :] - Vm[None, :, :]  # [x', x'', z]
    brute = np.einsum("px,nv,xvz,xz,vz,x,v,z->pn", P.conj(), P, D, A, A.conj(), w, w, w)
    I, skipped = collision_matrix_elements(spec, collision_kernel(psi, CONTACT))
    assert not skipped
    assert np.abs(I[:4, :4] - brute).max() < 1e-10
    assert np.abs(np.diag(I).real).max() < 1e-10
    I0, _ = collision_matrix_elements(spec, collision_kernel(psi, NONE))
    assert np.all(I0 == 0)


def test_degenerate_pairs_are_skipped():
    g = make_grid(-5, 5, 41)
    a = np.exp(-(g.x**2) / 2)
    b = g.x * a
    a, b = a / np.sqrt(g.dx * a @ a), b / np.sqrt(g.dx * b @ b)
    psi = ManyBodyWavefunction(g, 2, (np.multiply.outer(a, b) + np.multiply.outer(b, a)).astype(complex) / np.sqrt(2))
    spec = natural_decomposition(reduce_rho1(psi))
    I, skipped = collision_matrix_elements(spec, collision_kernel(psi, CONTACT), pairs=[(0, 1), (0, 2)])
    assert skipped == [(0, 1)] and np.isnan(I[0, 1]) and not np.isnan(I[0, 2])


# kinetic divergence: representation-free vs orbital sum ----------------------


def smooth_rdm(g, rng, rank=4):
    x = g.x
    F = np.array([np.polyval(rng.normal(size=4) + 1j * rng.normal(size=4), x) * np.exp(-((x - rng.uniform(-1, 1)) ** 2))
                  for _ in range(rank)])
    w = rng.uniform(0.1, 1.0, rank)
    M = (w[:, None, None] * F[:, :, None] * F[:, None, :].conj()).sum(0)
    return OneBodyRDM(g, M / (g.dx * np.trace(M).real), 2)


def test_repfree_kinetic_matches_orbital_route():
    g = make_grid(-5, 5, 101)
    rng = np.random.default_rng(20240501)
    for k in range(10):
        rho = smooth_rdm(g, rng)
        m = SymmetryMap.from_positions(g, [1, -1][k % 2], [1.5, 0.3][k % 2], -3.0, -1.0)
        a = kinetic_divergence_repfree(rho, m).values
        b = kinetic_divergence_orbitals(natural_decomposition(rho), m).values
        assert np.abs(a - b).max() < 1e-10


def test_repfree_rank_one():
    g = make_grid(-5, 5, 101)
    phi = np.exp(-(g.x**2) + 0.5j * g.x)
    phi /= np.sqrt(g.dx * np.vdot(phi, phi).real)
    m = SymmetryMap.from_positions(g, 1, 2.0, -3.0, -1.0)
    f = kinetic_divergence_repfree(OneBodyRDM(g, np.outer(phi, phi.conj()), 1), m)
    single = kinetic_term_from_orbitals(phi, [1.0], m, f.indices) / 1j
    assert np.abs(f.values - single).max() < 1e-12


def test_momentum_commutator_structure():
    g = make_grid(-1, 1, 12)
    rho = smooth_rdm(g, np.random.default_rng(1), rank=2).matrix
    P = momentum_matrix(12, g.dx)
    assert np.allclose(momentum_structure(rho, 1, g.dx), P @ rho + rho @ P, atol=1e-12)
    assert np.allclose(momentum_structure(rho, -1, g.dx), P @ rho - rho @ P, atol=1e-12)
    i, j = 5, 7
    Prho = -1j * (rho[i + 1, j] - rho[i - 1, j]) / (2 * g.dx)
    rhoP = 1j * (rho[i, j + 1] - rho[i, j - 1]) / (2 * g.dx)  # <i|rho P|j> with P antisymmetric
    assert momentum_structure(rho, 1, g.dx)[i, j] == pytest.approx(Prho + rhoP)
    assert momentum_structure(rho, -1, g.dx)[i, j] == pytest.approx(Prho - rhoP)


# residuals ------------------------------------------------------------------


def test_potential_term_is_identically_zero_on_symmetric_map():
    g, U, m, tri, _ = quench(61, 0.02)
    r = residual_canonical_total(tri, m, CONTACT, U)
    assert r.extra["local_symmetry"] and r.extra["u_term_identically_zero"]


def test_stationary_eigenstate_balance():
    maxima = []
    for n, dt in [(61, 0.02), (121, 0.01)]:
        g, U, m, tri = eigenstate(n, dt)
        r = residual_canonical_total(tri, m, CONTACT, U)
        assert r.extra["time_term_max"] < 1e-12
        maxima.append(r.max)
    assert maxima[0] / maxima[1] > 3.5


def test_noninteracting_canonical_converges():
    reps = [residual_canonical_total(q[3], q[2], NONE, q[1]) for q in (quench(61, 0.02, NONE), quench(121, 0.01, NONE))]
    assert reps[1].extra["collision_max"] == 0
    assert convergence_slope(*reps) >= 1.8


def test_wrong_prefactor_plateaus():
    right, wrong = [], []
    for n, dt in [(61, 0.02), (121, 0.01)]:
        g, U, m, tri, _ = quench(n, dt)
        right.append(residual_canonical_total(tri, m, CONTACT, U))
        wrong.append(residual_canonical_total(tri, m, CONTACT, U, prefactor=1.0))
    assert convergence_slope(*right) >= 1.8
    assert convergence_slope(*wrong) < 0.5
    assert wrong[1].max > 3 * right[1].max


def test_orbital_noninteracting_converges():
    reps = [residual_orbital(q[3], q[2], NONE, q[1], 0) for q in (quench(61, 0.02, NONE), quench(121, 0.01, NONE))]
    assert convergence_slope(*reps) >= 1.8


def test_orbital_source_integrates_to_zero():
    tri = quench(61, 0.02)[3]
    for n in range(3):
        assert abs(orbital_source_integral(tri, CONTACT, n)) <= 1e-8


def test_orbital_degeneracy_skipped():
    g = make_grid(-5, 5, 41)
    a = np.exp(-(g.x**2) / 2)
    b = g.x * a
    a, b = a / np.sqrt(g.dx * a @ a), b / np.sqrt(g.dx * b @ b)
    psi = ManyBodyWavefunction(g, 2, (np.multiply.outer(a, b) + np.multiply.outer(b, a)).astype(complex) / np.sqrt(2))
    H = build_hamiltonian(HamiltonianSpec(g.x**2 / 2, NONE, 2), g)
    m = SymmetryMap.from_positions(g, -1, 0.0, -4.0, -1.0)
    r = residual_orbital(snapshot_triple(psi, H, 0.01), m, NONE, g.x**2 / 2, 0)
    assert r.residual.size == 0 and (0, 1) in r.skipped_pairs


def test_integral_form_single_cell_and_flux():
    g, U, m, tri = eigenstate(61, 0.02)
    pt = residual_canonical_total(tri, m, CONTACT, U)
    for x0 in (-2.4, -2.0, -1.2):
        a = g.index_of(x0)
        cell = residual_integral_form(tri, m, CONTACT, U, (a, a))
        k = int(np.flatnonzero(pt.x.round(9) == round(g.x[a], 9))[0])
        assert abs(cell.residual[0] - g.dx * pt.residual[k]) < 1e-12
    with pytest.raises(DomainError):
        residual_integral_form(tri, m, CONTACT, U, (m.domain[0], m.domain[0] + 4))


def test_integral_form_noninteracting_fluxes_equal():
    g, U, m, tri = eigenstate(61, 0.02, NONE)
    r = residual_integral_form(tri, m, NONE, U, (g.index_of(-3.0), g.index_of(-1.0)))
    assert abs(r.extra["flux_high"] - r.extra["flux_low"]) < 1e-10


def test_stationary_plane_wave_constants():
    g = make_grid(0, 10, 1001)
    E, L = 2.0, 2.0
    st_ = solve_scattering(np.zeros(g.n_points), g, E, derivative="numerov")
    m = SymmetryMap.from_positions(g, 1, L, 1.0, 6.0)
    rep = stationary_noninteracting_checks(st_, m)
    e = rep.extra
    k = np.sqrt(2 * E)
    assert e["canonical_max_deviation"] < 1e-10 and e["anomalous_max_deviation"] < 1e-10
    assert e["canonical_vs_conj_Qtilde"]["max_abs_difference"] < 1e-8
    assert e["anomalous_vs_Q"]["max_abs_difference"] < 1e-8
    # (1/2i) j = -k e^{-ikL} for a unit plane wave; the literal +conj(Qtilde) reading is off by a sign
    assert abs(e["canonical_mean"] + k * np.exp(-1j * k * L)) < 1e-3 * k
    assert e["canonical_vs_conj_Qtilde"]["literal_plus_sign_difference"] > 1.0


def test_stationary_real_bound_state_constants_vanish():
    g = make_grid(-6, 6, 241)
    for state in solve_bound(g.x**2 / 2, g, 3):
        m = SymmetryMap.from_positions(g, -1, 0.0, -4.0, -0.5)
        e = stationary_noninteracting_checks(state, m).extra
        assert abs(e["canonical_mean"]) < 1e-12 and abs(e["anomalous_mean"]) < 1e-12


def test_anomalous_coincides_with_canonical_for_real_states():
    g, U, m, tri = eigenstate(61, 0.02)
    assert np.abs(tri[1].amplitudes.imag).max() == 0
    can = residual_canonical_total(tri, m, CONTACT, U)
    gam = residual_anomalous(tri, m, CONTACT, U, "gamma-sum")
    # canonical uses the N-scaled correlator, gamma-sum the trace-one one
    assert np.abs(can.residual - tri[1].N * gam.residual).max() < 1e-12


def test_population_rates():
    frozen = natural_population_rate_check(quench(61, 0.02, NONE)[3], NONE)
    assert max(abs(r) for r in frozen.extra["rates"]) <= 1e-8
    still = natural_population_rate_check(eigenstate(61, 0.02)[3], CONTACT)
    assert max(abs(r) for r in still.extra["rates"]) <= 1e-8


def test_continuity_conserves_norm():
    for snap in quench(61, 0.02)[4]:
        assert abs(reduce_rho1(snap).trace() - 1) < 1e-10
    assert continuity_check(quench(61, 0.02)[3]).extra["norm_drift"] < 1e-10


def free_gaussian(g, t, s=0.5, x0=-1.0, k0=1.5):
    a = 1 + 1j * t / (2 * s**2)
    return (2 * np.pi * s**2) ** -0.25 / np.sqrt(a) * np.exp(
        -((g.x - x0 - k0 * t) ** 2) / (4 * s**2 * a) + 1j * k0 * g.x - 0.5j * k0**2 * t
    )


def test_continuity_moving_gaussian():
    reps = []
    for n, dt in [(201, 0.02), (401, 0.01)]:
        g = make_grid(-8, 8, n)
        tri = [ManyBodyWavefunction(g, 1, free_gaussian(g, t), time=t) for t in (0.5 - dt, 0.5, 0.5 + dt)]
        rep = continuity_check(tri)
        psi = tri[1].amplitudes
        a = 1 + 1j * 0.5 / (2 * 0.5**2)
        dpsi = psi * (-(g.x - (-1.0) - 1.5 * 0.5) / (2 * 0.5**2 * a) + 1.5j)
        J_exact = (np.conj(psi) * dpsi).imag
        R = reduce_rho1(tri[1]).matrix
        idx = np.arange(1, n - 1)
        J_num = (((R[idx + 1, idx] - R[idx - 1, idx]) - (R[idx, idx + 1] - R[idx, idx - 1])) / (2 * g.dx) / 2j).real
        assert np.abs(J_num - J_exact[idx]).max() < 5 * g.dx**2
        reps.append(rep)
    assert convergence_slope(*reps) >= 1.8
