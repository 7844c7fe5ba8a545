"""Command-line entry point: ``lscorr run|stationary|meanfield|validate|list``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io, scenarios
from .errors import ConfigurationError, ConvergenceError, DecompositionFailure, DomainError, IntegrityError
from .schema import config_errors

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_OUTPUT = 0, 1, 2, 3, 4
NUMERICAL = (ConvergenceError, DecompositionFailure, IntegrityError, np.linalg.LinAlgError)


def load_config(ref: str) -> dict:
    """A path to a JSON file, or the name of a bundled scenario."""
    path = Path(ref)
    if path.is_file():
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{ref}: not valid JSON ({exc})") from exc
    if ref in scenarios.names():
        return scenarios.load(ref)
    raise ConfigurationError(f"{ref}: no such file or bundled scenario (bundled: {', '.join(scenarios.names())})")


def _writable(out: Path) -> bool:
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".lscorr-write-probe"
        probe.write_text("")
        probe.unlink()
        return True
    except OSError:
        return False


def _failure(out: Path, name: str, exc: Exception) -> None:
    try:
        root = out / name
        root.mkdir(parents=True, exist_ok=True)
        io.write_json(root / "failure.json", {"scenario": name, "error": type(exc).__name__, "message": str(exc)})
    except OSError:
        pass


def _err(msg: str) -> None:
    print(f"lscorr: {msg}", file=sys.stderr)


def _summary(result) -> None:
    for c in result.checks:
        slope = c.slopes[-1]
        s = "" if slope is None else f" slope={slope:.3f}" + (" (rounding level, not enforced)" if c.slope_waived else "")
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: metric={c.metric:.3e} tol={c.tolerance:.1e}{s}")
    print(f"{'PASS' if result.passed else 'FAIL'} {result.config['name']}")


def cmd_validate(args) -> int:
    try:
        config = load_config(args.config)
    except ConfigurationError as exc:
        _err(str(exc))
        return EXIT_CONFIG
    errors = config_errors(config)
    for e in errors:
        _err(e)
    if not errors:
        print(f"{config['name']}: valid")
    return EXIT_CONFIG if errors else EXIT_OK


def _execute(config: dict, out: Path, refine: int | None, engines=None) -> int:
    from .runner import emit, run

    errors = config_errors(config)
    if errors:
        for e in errors:
            _err(e)
        return EXIT_CONFIG
    if engines and config["engine"] not in engines:
        _err(f"engine: {config['engine']!r} is not handled by this subcommand (expected one of {list(engines)})")
        return EXIT_CONFIG
    if not _writable(out):
        _err(f"output directory {out} is not writable")
        return EXIT_OUTPUT
    try:
        result = run(config, refine)
    except NUMERICAL as exc:
        _err(f"numerical failure: {type(exc).__name__}: {exc}")
        _failure(out, config["name"], exc)
        return EXIT_NUMERIC
    except (ConfigurationError, DomainError) as exc:
        _err(str(exc))
        return EXIT_CONFIG
    try:
        emit(result, out)
    except OSError as exc:
        _err(f"cannot write report bundle: {exc}")
        return EXIT_OUTPUT
    _summary(result)
    return EXIT_OK if result.passed else EXIT_CHECK


def _out_dir(args, config) -> Path:
    return Path(args.out or config.get("output", {}).get("directory", "lscorr-out"))


def cmd_run(args) -> int:
    try:
        config = load_config(args.config)
    except ConfigurationError as exc:
        _err(str(exc))
        return EXIT_CONFIG
    return _execute(config, _out_dir(args, config), args.refine)


def cmd_meanfield(args) -> int:
    try:
        config = load_config(args.config)
    except ConfigurationError as exc:
        _err(str(exc))
        return EXIT_CONFIG
    return _execute(config, _out_dir(args, config), args.refine, engines=("gpe", "hf"))


def cmd_stationary(args) -> int:
    """ITPC table (JSON) and per-point current profiles (CSV) for one or more energies."""
    from .grid import make_grid
    from .potentials import PotentialSpec, build_locally_symmetric_potential
    from .stationary import check_invariance, solve_scattering, two_point_currents

    try:
        config = load_config(args.config)
        errors = config_errors(config)
        if errors:
            for e in errors:
                _err(e)
            return EXIT_CONFIG
        g = config["grid"]
        grid = make_grid(g["x_min"], g["x_max"], g["n_points"])
        spec = PotentialSpec.from_dict(config["potential"])
        U = build_locally_symmetric_potential(spec, grid)
        maps = {m.label: m for m in spec.maps(grid)}
        st = config.get("state", {})
        energies = args.energy or [st.get("energy", 1.0)]
        out = _out_dir(args, config)
        if not _writable(out):
            _err(f"output directory {out} is not writable")
            return EXIT_OUTPUT
        root = out / config["name"]
        root.mkdir(parents=True, exist_ok=True)
        table = []
        for k, E in enumerate(energies):
            state = solve_scattering(U, grid, E, st.get("incoming", "left"), st.get("derivative", "central"))
            row = {"energy": E, "transmission": state.transmission, "reflection": state.reflection, "domains": {}}
            for label in sorted(maps):
                cur = two_point_currents(state, maps[label])
                inv = check_invariance(cur)
                row["domains"][label] = {q: {"mean": v[0], "max_deviation": v[1]} for q, v in inv.items()}
                lines = ["x,J,Q_re,Q_im,Qtilde_re,Qtilde_im"]
                for x, J, Q, Qt in zip(cur.x, cur.J, cur.Q, cur.Qtilde):
                    lines.append(f"{x:.17g},{J:.17g},{Q.real:.17g},{Q.imag:.17g},{Qt.real:.17g},{Qt.imag:.17g}")
                (root / f"profile-{label}-E{k}.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
            table.append(row)
        io.write_json(root / "itpc.json", {"scenario": config["name"], "energies": table})
    except (ConfigurationError, DomainError) as exc:
        _err(str(exc))
        return EXIT_CONFIG
    except NUMERICAL as exc:
        _err(f"numerical failure: {type(exc).__name__}: {exc}")
        return EXIT_NUMERIC
    except OSError as exc:
        _err(f"cannot write output: {exc}")
        return EXIT_OUTPUT
    for row in table:
        worst = max(d[q]["max_deviation"] for d in row["domains"].values() for q in ("Q", "Qtilde")) if row["domains"] else 0.0
        print(f"E={row['energy']:.6g} T={row['transmission']:.12f} R={row['reflection']:.12f} max ITPC deviation={worst:.3e}")
    return EXIT_OK


def cmd_list(args) -> int:
    for name in scenarios.names():
        cfg = scenarios.load(name)
        print(f"{name}  [{cfg['engine']}]  {cfg.get('description', '')}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lscorr", description="Local-symmetry correlator solvers and residual checks.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario and write its report bundle")
    r.add_argument("config", help="config JSON path or bundled scenario name")
    r.add_argument("--out", help="output directory (default: config output.directory or ./lscorr-out)")
    r.add_argument("--refine", type=int, help="number of refinement levels (overrides the config)")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("stationary", help="ITPC tables and current profiles for scattering states")
    s.add_argument("config")
    s.add_argument("--energy", type=float, nargs="+", help="energies to solve at (default: state.energy)")
    s.add_argument("--out")
    s.set_defaults(func=cmd_stationary)

    m = sub.add_parser("meanfield", help="run a gpe or hf scenario")
    m.add_argument("config")
    m.add_argument("--out")
    m.add_argument("--refine", type=int)
    m.set_defaults(func=cmd_meanfield)

    v = sub.add_parser("validate", help="validate a config against the schema")
    v.add_argument("config")
    v.set_defaults(func=cmd_validate)

    ls = sub.add_parser("list", help="list bundled scenarios")
    ls.set_defaults(func=cmd_list)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
