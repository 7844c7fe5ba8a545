import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import eigh

from lscorr.errors import ConfigurationError, SizingError
from lscorr.grid import make_grid
from lscorr.io import read_snapshot, write_snapshot
from lscorr.manybody import (
    CrankNicolson,
    HamiltonianSpec,
    ManyBodyWavefunction,
    build_hamiltonian,
    energy,
    ground_state,
    one_body_operator,
    product_state,
    propagate,
    slater_state,
    snapshot_triple,
    symmetrize,
)
from lscorr.potentials import InteractionSpec


def harmonic(n, half=8.0):
    g = make_grid(-half, half, n)
    return g, g.x**2 / 2


def random_state(g, N, statistics, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(g.n_points,) * N) + 1j * rng.normal(size=(g.n_points,) * N)
    a = symmetrize(a, statistics)
    a[(0,) + (slice(None),) * (N - 1)] = 0
    a = symmetrize(a, statistics)
    face = np.zeros_like(a, dtype=bool)
    for ax in range(N):
        idx = [slice(None)] * N
        idx[ax] = [0, -1]
        face[tuple(idx)] = True
    a[face] = 0
    a /= np.sqrt(g.dx**N * np.vdot(a, a).real)
    return ManyBodyWavefunction(g, N, a, statistics)


def test_noninteracting_tensor_structure():
    g, U = harmonic(40)
    H = build_hamiltonian(HamiltonianSpec(U, InteractionSpec("none"), 2), g)
    h = one_body_operator(U, g)
    eye = sp.identity(h.shape[0])
    assert abs(H.matrix - (sp.kron(h, eye) + sp.kron(eye, h))).max() == 0


def test_contact_on_coincidence_diagonal():
    g, U = harmonic(30)
    H0 = build_hamiltonian(HamiltonianSpec(U, InteractionSpec("none"), 2), g)
    H = build_hamiltonian(HamiltonianSpec(U, InteractionSpec("contact", g=1.5), 2), g)
    D = (H.matrix - H0.matrix).toarray()
    m = g.n_points - 2
    expect = np.diag(np.where(np.eye(m).ravel() == 1, 1.5 / g.dx, 0.0))
    assert np.abs(D - expect).max() < 1e-12


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["bosonic", "fermionic"]))
def test_expectation_is_real(seed, stats):
    g, U = harmonic(24, 4.0)
    H = build_hamiltonian(HamiltonianSpec(U, InteractionSpec("gaussian", V0=0.7, w=0.4), 2), g)
    v = random_state(g, 2, stats, seed).interior_vector()
    assert abs(np.vdot(v, H.matrix @ v).imag) <= 1e-12 * abs(np.vdot(v, H.matrix @ v))


def test_sizing_and_particle_number():
    g, U = harmonic(300)
    with pytest.raises(SizingError, match="at most"):
        build_hamiltonian(HamiltonianSpec(U, N=3), g)
    with pytest.raises(ConfigurationError):
        build_hamiltonian(HamiltonianSpec(U, N=4), g)


def test_harmonic_bosons_and_fermions():
    g, U = harmonic(321)
    H = build_hamiltonian(HamiltonianSpec(U, InteractionSpec("none"), 2), g)
    b = ground_state(H, "bosonic")
    f = ground_state(H, "fermionic")
    assert abs(energy(b, H) - 1.0) < 1e-3
    assert abs(energy(f, H) - 2.0) < 1e-3
    assert b.exchange_error() < 1e-12 and f.exchange_error() < 1e-12


def test_contact_ground_state_against_dense_oracle():
    g, U = harmonic(64, 6.0)
    H = build_hamiltonian(HamiltonianSpec(U, InteractionSpec("contact", g=1.0), 2), g)
    psi = ground_state(H, tol=1e-10)
    dense = eigh(H.matrix.toarray(), eigvals_only=True, subset_by_index=(0, 0))[0]
    assert abs(energy(psi, H) - dense) < 1e-6
    v = psi.interior_vector()
    E = energy(psi, H)
    assert np.sqrt(g.dx**2) * np.linalg.norm(H.matrix @ v - E * v) <= 1e-8


def test_fermionic_sector_against_dense_oracle():
    g, U = harmonic(40, 5.0)
    H = build_hamiltonian(HamiltonianSpec(U, InteractionSpec("gaussian", V0=0.5, w=0.7), 2), g)
    m = g.n_points - 2
    i, j = np.triu_indices(m, 1)
    Q = np.zeros((m * m, i.size))
    Q[i * m + j, np.arange(i.size)] = 2**-0.5
    Q[j * m + i, np.arange(i.size)] = -(2**-0.5)
    vals = eigh(Q.T @ H.matrix.toarray() @ Q, eigvals_only=True)
    psi = ground_state(H, "fermionic", tol=1e-10)
    assert abs(energy(psi, H) - vals[0]) < 1e-6


def test_eigenstate_phase_evolution():
    g, U = harmonic(81)
    H = build_hamiltonian(HamiltonianSpec(U, InteractionSpec("contact", g=1.0), 2), g)
    psi = ground_state(H, tol=1e-10)
    E = energy(psi, H)
    dt = 0.01
    traj = propagate(psi, H, dt, 100, 100)
    ov = g.dx**2 * np.vdot(psi.amplitudes, traj[-1].amplitudes)
    assert abs(abs(ov) - 1) < 1e-8
    # CN propagates an eigenstate with the Cayley phase, within O(dt^2) of exp(-iEt)
    cayley = ((1 - 0.5j * dt * E) / (1 + 0.5j * dt * E)) ** 100
    assert abs(ov - cayley) < 1e-8
    assert abs(ov - np.exp(-1j * E * 1.0)) < 1e-6 + (E * dt) ** 2 * E / 12


def test_norm_energy_and_exchange_conservation():
    g, U = harmonic(61, 6.0)
    V = InteractionSpec("contact", g=1.0)
    H = build_hamiltonian(HamiltonianSpec(U, V, 2), g)
    H0 = build_hamiltonian(HamiltonianSpec((g.x - 0.7) ** 2 / 2, V, 2), g)
    psi = ground_state(H0)
    traj = propagate(psi, H, 0.01, 1000, 100)
    E0 = energy(traj[0], H)
    assert max(abs(s.norm() - 1) for s in traj) < 1e-10
    assert max(abs(energy(s, H) - E0) for s in traj) < 1e-8 * abs(E0)
    assert max(s.exchange_error() for s in traj) < 1e-12
    assert traj[-1].time == pytest.approx(10.0)


def test_time_step_self_convergence():
    g, U = harmonic(61, 6.0)
    V = InteractionSpec("contact", g=1.0)
    H = build_hamiltonian(HamiltonianSpec(U, V, 2), g)
    psi = ground_state(build_hamiltonian(HamiltonianSpec((g.x - 0.7) ** 2 / 2, V, 2), g))
    ends = {dt: propagate(psi, H, dt, int(round(1 / dt)), 10**6)[-1].amplitudes for dt in (0.04, 0.02, 0.01, 0.005)}
    ref = ends[0.005]
    e1 = np.abs(ends[0.04] - ref).max()
    e2 = np.abs(ends[0.02] - ref).max()
    assert e1 / e2 > 3.5


def test_noninteracting_pair_is_product_of_one_body_solutions():
    g, U = harmonic(81, 6.0)
    H = build_hamiltonian(HamiltonianSpec(U, InteractionSpec("none"), 2), g)
    phi = np.exp(-((g.x - 1.0) ** 2)).astype(complex)
    phi[[0, -1]] = 0
    phi /= np.sqrt(g.dx * np.vdot(phi, phi).real)
    dt, n = 0.001, 500
    pair = propagate(product_state(phi, 2, g), H, dt, n, n)[-1]
    from scipy.sparse.linalg import expm_multiply

    h = one_body_operator(U, g)
    one = np.zeros_like(phi)
    one[1:-1] = expm_multiply(-1j * h * (dt * n), phi[1:-1])
    assert np.abs(pair.amplitudes - np.multiply.outer(one, one)).max() < 1e-4


def test_snapshot_triple_is_consistent():
    g, U = harmonic(41, 5.0)
    H = build_hamiltonian(HamiltonianSpec(U, InteractionSpec("contact", g=1.0), 2), g)
    psi = random_state(g, 2, "bosonic", 3)
    cn = CrankNicolson(H, 0.01)
    m, c, p = snapshot_triple(psi, H, 0.01, cn)
    assert np.abs(cn.forward(m.interior_vector()) - c.interior_vector()).max() < 1e-12
    assert p.time - c.time == pytest.approx(c.time - m.time)


def test_three_particles():
    g, U = harmonic(21, 4.0)
    H = build_hamiltonian(HamiltonianSpec(U, InteractionSpec("none"), 3), g)
    psi = ground_state(H, "fermionic")
    h = eigh(one_body_operator(U, g).toarray(), eigvals_only=True)
    assert abs(energy(psi, H) - h[:3].sum()) < 1e-7
    assert psi.exchange_error() < 1e-12


def test_slater_state_normalization():
    g, U = harmonic(41, 5.0)
    _, vecs = eigh(one_body_operator(U, g).toarray())
    orbs = np.zeros((2, g.n_points))
    orbs[:, 1:-1] = vecs[:, :2].T / np.sqrt(g.dx)
    s = slater_state(orbs, g)
    assert abs(s.norm() - 1) < 1e-12 and s.exchange_error() < 1e-12


def test_snapshot_binary_roundtrip(tmp_path):
    g, _ = harmonic(17, 2.0)
    psi = random_state(g, 2, "fermionic", 7)
    psi.time = 0.25
    binp, meta = write_snapshot(tmp_path / "snap", psi)
    assert binp.stat().st_size == 16 * g.n_points**2
    back = read_snapshot(tmp_path / "snap")
    assert np.array_equal(back.amplitudes, psi.amplitudes)
    assert (back.N, back.statistics, back.time) == (2, "fermionic", 0.25)
    raw = np.fromfile(binp, dtype="<f8")
    assert raw[0] == psi.amplitudes.flat[0].real and raw[1] == psi.amplitudes.flat[0].imag
