"""Scenario runner: solve, evaluate residual suites over refinement levels, emit a report bundle."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .correlators.collision import collision_integral
from .correlators.residuals import (
    ResidualReport,
    continuity_check,
    convergence_slope,
    natural_population_rate_check,
    residual_anomalous,
    residual_canonical_total,
    residual_integral_form,
    residual_orbital,
    stationary_noninteracting_checks,
)
from .errors import ConfigurationError
from .grid import make_grid
from .manybody import (
    CrankNicolson,
    HamiltonianSpec,
    ManyBodyWavefunction,
    build_hamiltonian,
    energy,
    ground_state,
    propagate,
    slater_state,
    snapshot_triple,
)
from .meanfield import (
    gpe_correlator_residual,
    gpe_energy,
    gpe_ground_state,
    gpe_product_state,
    gpe_propagate,
    gpe_stationary_check,
    gpe_triple,
    hf_correlator_residual,
    hf_energy,
    hf_ground_state,
    hf_stationary_check,
    hf_triple,
    tdhf_propagate,
)
from .potentials import InteractionSpec, PotentialSpec, build_locally_symmetric_potential
from .rdm import natural_decomposition, reduce_rho1, reduce_rho2_slice
from .schema import validate_config, validate_report
from .stationary import (
    check_invariance,
    map_wavefield,
    solve_bloch,
    solve_bound,
    solve_scattering,
    two_point_currents,
)

# default tolerances per check id, sized for the bundled grids
DEFAULT_TOLERANCES = {
    "itpc": 1e-6,
    "mapping": 1e-6,
    "stationary-currents": 1e-8,
    "flux": 1e-8,
    "canonical": 1e-2,
    "orbital": 1e-2,
    "integral-form": 1e-3,
    "anomalous": 1e-2,
    "population-rate": 1e-6,
    "continuity": 1e-2,
    "conservation": 1e-8,
    "collision-split": 1e-12,
    "gpe-correlator": 1e-2,
    "gpe-stationary": 1e-2,
    "hf-correlator": 1e-2,
    "hf-stationary": 1e-2,
}
# checks whose residual is a discretization error, so a refinement slope applies
CONVERGENT = {
    "itpc", "canonical", "orbital", "integral-form", "anomalous", "population-rate",
    "continuity", "gpe-correlator", "gpe-stationary", "hf-correlator", "hf-stationary",
}
DEFAULT_MIN_SLOPE = 1.8
# a residual already at rounding level has no meaningful refinement slope
ROUNDING_FLOOR = 1e-12


@dataclass
class Level:
    n_points: int
    dt: float | None
    n_steps: int
    stride: int


@dataclass
class Context:
    """Everything a check needs at one refinement level."""

    grid: object
    U: np.ndarray
    maps: dict
    V: InteractionSpec
    state: object = None
    triple: tuple | None = None
    trajectory: list = field(default_factory=list)
    conservation: tuple | None = None  # (times, deviations, labels)
    extra: dict = field(default_factory=dict)


@dataclass
class CheckResult:
    name: str
    id: str
    reports: list
    slopes: list
    tolerance: float
    min_slope: float | None
    metric: float
    passed: bool
    slope_waived: bool = False

    def to_dict(self) -> dict:
        return {
            "check": self.name,
            "equation": self.reports[-1].equation,
            "passed": self.passed,
            "tolerance": self.tolerance,
            "min_slope": self.min_slope,
            "metric": f"{self.metric:.6e}",
            "slope_waived": self.slope_waived,
            "slopes": [None if s is None else (s if np.isfinite(s) else "inf") for s in self.slopes],
            "levels": [r.to_dict() for r in self.reports],
        }


@dataclass
class RunResult:
    config: dict
    levels: list
    checks: list
    extras: dict

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def levels_for(config: dict, refine: int | None = None) -> list[Level]:
    n_levels = refine if refine is not None else config.get("refinement", {}).get("levels", 1)
    if n_levels < 1:
        raise ConfigurationError("refinement levels must be at least 1")
    t = config.get("time")
    out = []
    n = config["grid"]["n_points"]
    for k in range(n_levels):
        if t:
            out.append(Level(n, t["dt"] / 2**k, t["n_steps"] * 2**k, t.get("snapshot_stride", t["n_steps"] or 1) * 2**k))
        else:
            out.append(Level(n, None, 0, 1))
        n = 2 * n - 1
    return out


# ---------------------------------------------------------------- engines

def _common(config: dict, level: Level):
    g = config["grid"]
    grid = make_grid(g["x_min"], g["x_max"], level.n_points)
    spec = PotentialSpec.from_dict(config["potential"])
    U = build_locally_symmetric_potential(spec, grid)
    maps = {m.label: m for m in spec.maps(grid)}
    V = InteractionSpec.from_dict(config.get("interaction"))
    return grid, U, maps, V


def _initial_potential(config: dict, grid, U):
    st = config.get("state", {"kind": "ground"})
    if st["kind"] == "quench":
        if "potential" not in st:
            raise ConfigurationError("state.potential is required for a quench")
        return build_locally_symmetric_potential(PotentialSpec.from_dict(st["potential"]), grid)
    if st["kind"] != "ground":
        raise ConfigurationError(f"state kind {st['kind']!r} is not available for this engine")
    return U


def _run_stationary(config: dict, level: Level) -> Context:
    grid, U, maps, V = _common(config, level)
    st = config.get("state", {})
    kind = st.get("kind", "scattering")
    deriv = st.get("derivative", "central")
    if kind == "scattering":
        state = solve_scattering(U, grid, st["energy"], st.get("incoming", "left"), deriv)
    elif kind == "bloch":
        state = solve_bloch(U, grid, st["energy"], st["period"], derivative=deriv)
    elif kind == "bound":
        k = st.get("index", 0)
        state = solve_bound(U, grid, k + 1)[k]
    else:
        raise ConfigurationError(f"state kind {kind!r} is not available for the stationary engine")
    return Context(grid, U, maps, V, state=state)


def _run_manybody(config: dict, level: Level) -> Context:
    grid, U, maps, V = _common(config, level)
    p = config.get("particles", {})
    N, stats = p.get("N", 2), p.get("statistics", "bosonic")
    H = build_hamiltonian(HamiltonianSpec(U, V, N), grid)
    U0 = _initial_potential(config, grid, U)
    tol = config.get("state", {}).get("tolerance", 1e-10)
    H0 = H if U0 is U else build_hamiltonian(HamiltonianSpec(U0, V, N), grid)
    psi = ground_state(H0, stats, tol=tol)
    dt = level.dt if level.dt is not None else 1e-2
    cn = CrankNicolson(H, dt)
    traj = propagate(psi, H, dt, level.n_steps, level.stride, cn) if level.n_steps else [psi]
    triple = snapshot_triple(traj[-1], H, dt, cn)
    E0 = energy(traj[0], H)
    dev = [max(abs(s.norm() - 1.0), abs(energy(s, H) - E0) / max(1.0, abs(E0))) for s in traj]
    ctx = Context(grid, U, maps, V, state=traj[-1], triple=triple, trajectory=traj)
    ctx.conservation = (np.array([s.time for s in traj]), np.array(dev), "max(|norm - 1|, |E - E0| / max(1, |E0|))")
    spec = natural_decomposition(reduce_rho1(traj[-1]))
    ctx.extra["spectrum"] = {"time": traj[-1].time, "populations": spec.populations}
    return ctx


def _run_gpe(config: dict, level: Level) -> Context:
    grid, U, maps, V = _common(config, level)
    if V.kind != "contact":
        raise ConfigurationError("the gpe engine needs a contact interaction")
    N = config.get("particles", {}).get("N", 2)
    U0 = _initial_potential(config, grid, U)
    state = gpe_ground_state(U0, grid, N, V.g)
    dt = level.dt if level.dt is not None else 1e-2
    traj = gpe_propagate(state, U, dt, level.n_steps, level.stride) if level.n_steps else [state]
    E0 = gpe_energy(traj[0], U)
    dev = [max(abs(s.norm() - 1.0), abs(gpe_energy(s, U) - E0) / max(1.0, abs(E0))) for s in traj]
    ctx = Context(grid, U, maps, V, state=traj[-1], triple=gpe_triple(traj[-1], U, dt), trajectory=traj)
    ctx.conservation = (np.array([s.time for s in traj]), np.array(dev), "max(|norm - 1|, |E - E0| / max(1, |E0|))")
    return ctx


def _run_hf(config: dict, level: Level) -> Context:
    grid, U, maps, V = _common(config, level)
    N = config.get("particles", {}).get("N", 2)
    U0 = _initial_potential(config, grid, U)
    state = hf_ground_state(U0, V, grid, N)
    dt = level.dt if level.dt is not None else 1e-2
    traj = tdhf_propagate(state, U, V, dt, level.n_steps, level.stride) if level.n_steps else [state]
    E0 = hf_energy(traj[0], U, V)
    dev = [max(s.gram_error(), abs(hf_energy(s, U, V) - E0) / max(1.0, abs(E0))) for s in traj]
    ctx = Context(grid, U, maps, V, state=traj[-1], triple=hf_triple(traj[-1], U, V, dt), trajectory=traj)
    ctx.conservation = (np.array([s.time for s in traj]), np.array(dev), "max(gram error, |E - E0| / max(1, |E0|))")
    return ctx


ENGINES = {"stationary": _run_stationary, "manybody": _run_manybody, "gpe": _run_gpe, "hf": _run_hf}


# ---------------------------------------------------------------- checks

def _map(ctx: Context, label: str):
    if label not in ctx.maps:
        raise ConfigurationError(f"unknown symmetry map {label!r}; available: {sorted(ctx.maps)}")
    return ctx.maps[label]


def _itpc(ctx, chk, m):
    cur = two_point_currents(ctx.state, m)
    inv = check_invariance(cur)
    scale = max(abs(inv["Q"][0]), abs(inv["Qtilde"][0]), abs(inv["J"][0]), 1e-300)
    dev = np.maximum(np.abs(cur.Q - cur.Q.mean()), np.abs(cur.Qtilde - cur.Qtilde.mean())) / scale
    rep = ResidualReport("itpc", cur.x, dev, ctx.grid.dx, None, m.to_dict(),
                         extra={"means": {k: v[0] for k, v in inv.items()},
                                "max_deviation": {k: v[1] for k, v in inv.items()}, "scale": scale})
    return rep, float(dev.max())


def _mapping(ctx, chk, m):
    cur = two_point_currents(ctx.state, m)
    mx, rem = map_wavefield(ctx.state, m, cur)
    return ResidualReport("mapping", cur.x, rem, ctx.grid.dx, None, m.to_dict()), mx


def _stationary_currents(ctx, chk, m):
    rep = stationary_noninteracting_checks(ctx.state, m)
    e = rep.extra
    metric = max(e["canonical_vs_conj_Qtilde"]["max_abs_difference"], e["anomalous_vs_Q"]["max_abs_difference"])
    return rep, metric


def _flux(ctx, chk, m):
    st = ctx.state
    cur = two_point_currents(st, m)
    J = cur.J
    res = (J - J.mean()) / max(abs(J.mean()), 1e-300)
    extra = {"J_mean": float(J.mean())}
    metric = float(np.abs(res).max()) if abs(J.mean()) > 1e-300 else 0.0
    if st.transmission is not None:
        extra["T"], extra["R"] = st.transmission, st.reflection
        extra["T_plus_R_minus_1"] = st.transmission + st.reflection - 1.0
        metric = max(metric, abs(extra["T_plus_R_minus_1"]))
    return ResidualReport("flux", cur.x, res, ctx.grid.dx, None, m.to_dict(), extra=extra), metric


def _canonical(ctx, chk, m):
    r = residual_canonical_total(ctx.triple, m, ctx.V, ctx.U)
    return r, r.max


def _orbital(ctx, chk, m):
    r = residual_orbital(ctx.triple, m, ctx.V, ctx.U, chk.get("orbital", 0))
    return r, r.max


def _integral(ctx, chk, m):
    a, b = chk.get("region") or (None, None)
    if a is None:
        raise ConfigurationError("integral-form needs a region [start, stop]")
    r = residual_integral_form(ctx.triple, m, ctx.V, ctx.U, (ctx.grid.index_of(a), ctx.grid.index_of(b)))
    return r, r.max


def _anomalous(ctx, chk, m):
    r = residual_anomalous(ctx.triple, m, ctx.V, ctx.U, chk.get("variant", "per-orbital-appB"), n=chk.get("orbital", 0))
    return r, r.max


def _population(ctx, chk, m):
    r = natural_population_rate_check(ctx.triple, ctx.V)
    return r, r.max


def _continuity(ctx, chk, m):
    r = continuity_check(ctx.triple)
    return r, r.max


def _conservation(ctx, chk, m):
    t, dev, label = ctx.conservation
    r = ResidualReport("conservation", t, dev, 1.0, ctx.triple[2].time - ctx.triple[1].time, extra={"quantity": label})
    return r, r.max


def _collision_split(ctx, chk, m):
    cf = collision_integral(reduce_rho2_slice(ctx.triple[1], m), ctx.V, m, "split", indices=m.interior(2))
    scale = max(float(np.abs(cf.T).max()), 1e-300)
    res = (cf.T - (cf.T_D + cf.T_E)) / scale
    return ResidualReport("collision-split", m.grid.x[cf.indices], res, ctx.grid.dx, None, m.to_dict(),
                          extra={"T_max": scale, "flags": cf.flags}), float(np.abs(res).max())


def _gpe_corr(ctx, chk, m):
    r = gpe_correlator_residual(ctx.triple, m, ctx.U)
    return r, r.max


def _gpe_stat(ctx, chk, m):
    r = gpe_stationary_check(ctx.state, m, ctx.U)
    return r, r.max


def _hf_corr(ctx, chk, m):
    r = hf_correlator_residual(ctx.triple, m, ctx.V, ctx.U)
    return r, r.max


def _hf_stat(ctx, chk, m):
    r = hf_stationary_check(ctx.state, m, ctx.V, ctx.U)
    return r, r.max


CHECKS = {
    "itpc": _itpc,
    "mapping": _mapping,
    "stationary-currents": _stationary_currents,
    "flux": _flux,
    "canonical": _canonical,
    "orbital": _orbital,
    "integral-form": _integral,
    "anomalous": _anomalous,
    "population-rate": _population,
    "continuity": _continuity,
    "conservation": _conservation,
    "collision-split": _collision_split,
    "gpe-correlator": _gpe_corr,
    "gpe-stationary": _gpe_stat,
    "hf-correlator": _hf_corr,
    "hf-stationary": _hf_stat,
}
MAPLESS = {"population-rate", "continuity", "conservation"}


def _expand(config: dict, ctx: Context) -> list[tuple[str, dict, str | None]]:
    """(name, check config, map label) for every check, one per map unless a map is named."""
    out = []
    for chk in config.get("checks", []):
        cid = chk["id"]
        if cid in MAPLESS:
            out.append((chk.get("name", cid), chk, None))
            continue
        labels = [chk["map"]] if "map" in chk else sorted(ctx.maps)
        if not labels:
            raise ConfigurationError(f"check {cid!r} needs a symmetry map but the potential declares none")
        for lab in labels:
            base = chk.get("name", cid)
            out.append((base if "map" in chk and "name" in chk else f"{base}-{lab}", chk, lab))
    names = [n for n, _, _ in out]
    if len(set(names)) != len(names):
        raise ConfigurationError(f"duplicate check names: {names}")
    return out


def run(config: dict, refine: int | None = None) -> RunResult:
    """Execute a validated scenario config over its refinement levels."""
    validate_config(config)
    levels = levels_for(config, refine)
    engine = ENGINES[config["engine"]]
    contexts = [engine(config, lev) for lev in levels]
    plan = _expand(config, contexts[0])
    min_default = config.get("refinement", {}).get("min_slope", DEFAULT_MIN_SLOPE)
    results = []
    for name, chk, label in plan:
        cid = chk["id"]
        reports, metrics = [], []
        for ctx in contexts:
            m = None if label is None else _map(ctx, label)
            rep, metric = CHECKS[cid](ctx, chk, m)
            reports.append(rep)
            metrics.append(metric)
        slopes: list = [None]
        for a, b in zip(reports, reports[1:]):
            slopes.append(convergence_slope(a, b) if cid in CONVERGENT and a.residual.size and b.residual.size else None)
        tol = chk.get("tolerance", DEFAULT_TOLERANCES[cid])
        min_slope = chk.get("min_slope", min_default) if (cid in CONVERGENT and len(levels) > 1) else None
        passed = bool(metrics[-1] <= tol)
        waived = min_slope is not None and metrics[-1] <= ROUNDING_FLOOR
        if min_slope is not None and slopes[-1] is not None and not waived:
            passed = passed and slopes[-1] >= min_slope
        results.append(CheckResult(name, cid, reports, slopes, tol, min_slope, metrics[-1], passed, waived))
    extras = {}
    if "spectrum" in contexts[-1].extra:
        extras["spectra"] = [
            {"n_points": lev.n_points, **ctx.extra["spectrum"]} for lev, ctx in zip(levels, contexts)
        ]
    if config["engine"] == "stationary":
        extras["itpc"] = _itpc_table(contexts[-1])
    extras["_final_state"] = contexts[-1].state
    return RunResult(config, levels, results, extras)


def _itpc_table(ctx: Context) -> list[dict]:
    rows = []
    for label in sorted(ctx.maps):
        cur = two_point_currents(ctx.state, ctx.maps[label])
        for q, (mean, dev) in check_invariance(cur).items():
            mean = complex(mean)
            rows.append({"map": label, "quantity": q, "mean_re": mean.real, "mean_im": mean.imag, "max_deviation": dev})
    return rows


# ---------------------------------------------------------------- output

def as_manybody(state) -> ManyBodyWavefunction:
    """Mean-field states are written in the many-body snapshot format."""
    if isinstance(state, ManyBodyWavefunction):
        return state
    if state.kind == "gpe":
        return gpe_product_state(state)
    psi = slater_state(state.orbitals, state.grid)
    psi.time = state.time
    return psi


MANIFEST_COLUMNS = {
    "{check}.csv": {"x": "grid coordinate (or time / orbital index for non-spatial checks)",
                    "re": "real part of the finest-level residual", "im": "imaginary part"},
    "itpc.csv": {"map": "symmetry map label", "quantity": "Q, Qtilde or J",
                 "mean_re": "domain mean, real part", "mean_im": "domain mean, imaginary part",
                 "max_deviation": "max |value - mean| over the domain"},
}


def emit(result: RunResult, out_dir, snapshots: bool | None = None) -> Path:
    """Write the report bundle under ``out_dir``/{scenario}/ and return that directory."""
    config = result.config
    root = Path(out_dir) / config["name"]
    root.mkdir(parents=True, exist_ok=True)
    files = []
    checks = []
    for c in result.checks:
        rep = c.to_dict()
        validate_report(rep)
        io.write_json(root / f"{c.name}.json", rep)
        fin = c.reports[-1]
        io.write_csv(root / f"{c.name}.csv", fin.x, fin.residual)
        files += [f"{c.name}.json", f"{c.name}.csv"]
        checks.append({"name": c.name, "id": c.id, "passed": c.passed, "metric": c.metric,
                       "tolerance": c.tolerance, "slope": c.slopes[-1], "min_slope": c.min_slope})
    if result.checks and "spectra" in result.extras:
        io.write_json(root / "spectra.json", result.extras["spectra"])
        files.append("spectra.json")
    if result.checks and "itpc" in result.extras:
        lines = ["map,quantity,mean_re,mean_im,max_deviation"]
        for r in result.extras["itpc"]:
            lines.append(f"{r['map']},{r['quantity']},{r['mean_re']:.17g},{r['mean_im']:.17g},{r['max_deviation']:.17g}")
        (root / "itpc.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
        files.append("itpc.csv")
    want = config.get("output", {}).get("snapshots", False) if snapshots is None else snapshots
    state = result.extras.get("_final_state")
    if want and config["engine"] != "stationary":
        io.write_snapshot(root / "final_state", as_manybody(state))
        files += ["final_state.bin", "final_state.json"]
    manifest = {
        "scenario": config["name"],
        "engine": config["engine"],
        "config": copy.deepcopy(config),
        "levels": [{"n_points": lev.n_points, "dt": lev.dt, "n_steps": lev.n_steps} for lev in result.levels],
        "checks": checks,
        "files": sorted(files),
        "csv_columns": MANIFEST_COLUMNS,
        "passed": result.passed,
    }
    io.write_json(root / "manifest.json", manifest)
    return root
