# %% [markdown]
# # Mean-field limits: condensate and Slater determinant
#
# The same quench as in the many-body demo, once for a Gross-Pitaevskii
# condensate and once for two spinless fermions in Hartree-Fock.  Each
# mean-field residual is compared with the generic correlator machinery
# applied to the corresponding N-body state.

# %%
import numpy as np

from lscorr import InteractionSpec, PotentialSpec, build_locally_symmetric_potential, make_grid
from lscorr.correlators import collision_integral, convergence_slope, residual_canonical_total
from lscorr.manybody import slater_state
from lscorr.meanfield import (
    gpe_correlator_residual,
    gpe_ground_state,
    gpe_product_state,
    gpe_propagate,
    gpe_stationary_check,
    gpe_triple,
    hf_collision_term,
    hf_correlator_residual,
    hf_ground_state,
    hf_triple,
    tdhf_propagate,
)
from lscorr.rdm import natural_decomposition, reduce_rho1, reduce_rho2_slice


def wells(shift=0.0, symmetries=()):
    segs = [dict(center=-2 + shift, depth=1.0, half_width=1.8), dict(center=2 + shift, depth=1.0, half_width=1.8)]
    return PotentialSpec("wells", segs, symmetries=symmetries, walls=dict(left=-4, right=4, strength=2.0))


T4 = [dict(sigma=1, L=4.0, start=-3.6, stop=-0.4, label="T4")]

# %% [markdown]
# ## Condensate
# In an inversion-symmetric trap the ground-state density is symmetric, so
# the nonlinear source vanishes and the correlator behaves as if there were
# no interaction.

# %%
grid = make_grid(-8, 8, 161)
inv = wells(0.0, [dict(sigma=-1, L=0.0, start=-3.6, stop=-0.4)])
U = build_locally_symmetric_potential(inv, grid)
r = gpe_stationary_check(gpe_ground_state(U, grid, 2, 1.0), inv.maps(grid)[0], U)
print(f"symmetric ground state: source {r.extra['source_max']:.1e}, balance residual {r.max:.1e}")


def gpe_run(n, dt):
    g = make_grid(-8, 8, n)
    spec = wells(0.0, T4)
    U = build_locally_symmetric_potential(spec, g)
    st = gpe_ground_state(build_locally_symmetric_potential(wells(0.4), g), g, 2, 1.0)
    tri = gpe_triple(gpe_propagate(st, U, dt, int(round(0.5 / dt)), 10**6)[-1], U, dt)
    return U, spec.maps(g)[0], tri


reps = []
for n, dt in [(161, 0.01), (321, 0.005)]:
    U, m, tri = gpe_run(n, dt)
    reps.append(gpe_correlator_residual(tri, m, U))
print(f"quench: source {reps[0].extra['source_max']:.2e}, slope {convergence_slope(*reps):.2f}")
U, m, tri = gpe_run(161, 0.01)
generic = residual_canonical_total([gpe_product_state(s) for s in tri], m, InteractionSpec("contact", g=1.0), U)
print(f"generic route vs GPE route: {np.abs(generic.residual - 2 * reps[0].residual).max():.1e}")

# %% [markdown]
# ## Hartree-Fock
# The determinant has both populations equal to one.  Its two-body density
# reproduces the direct-minus-exchange collision integral.

# %%
V = InteractionSpec("gaussian", V0=0.4, w=0.5)


def hf_run(n, dt):
    g = make_grid(-6, 6, n)
    spec = wells(0.0, T4)
    U = build_locally_symmetric_potential(spec, g)
    st = hf_ground_state(build_locally_symmetric_potential(wells(0.4), g), V, g, 2)
    tri = hf_triple(tdhf_propagate(st, U, V, dt, int(round(0.5 / dt)), 10**6)[-1], U, V, dt)
    return g, U, spec.maps(g)[0], tri


reps = []
for n, dt in [(121, 0.01), (241, 0.005)]:
    g, U, m, tri = hf_run(n, dt)
    reps.append(hf_correlator_residual(tri, m, V, U))
print(f"TDHF residual {reps[0].max:.2e} -> {reps[1].max:.2e}, slope {convergence_slope(*reps):.2f}")
g, U, m, tri = hf_run(121, 0.01)
psi = slater_state(tri[1].orbitals, g)
print("populations:", np.round(natural_decomposition(reduce_rho1(psi), statistics="fermionic").populations[:3], 12))
idx = m.interior(2)
T = collision_integral(reduce_rho2_slice(psi, m), V, m, indices=idx).T
print(f"determinant rho2 vs direct+exchange: {np.abs(T - hf_collision_term(tri[1].orbitals, m, V, idx)).max():.1e}")
