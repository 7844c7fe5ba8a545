"""JSON schemas for scenario configs and emitted residual reports."""

from __future__ import annotations

from jsonschema import Draft202012Validator

from .errors import ConfigurationError

NUMBER = {"type": "number"}
POSITIVE = {"type": "number", "exclusiveMinimum": 0}

STATIONARY_CHECKS = ["itpc", "mapping", "stationary-currents", "flux"]
MANYBODY_CHECKS = [
    "canonical", "orbital", "integral-form", "anomalous", "population-rate",
    "continuity", "conservation", "collision-split",
]
GPE_CHECKS = ["gpe-correlator", "gpe-stationary", "conservation"]
HF_CHECKS = ["hf-correlator", "hf-stationary", "conservation"]
ENGINE_CHECKS = {
    "stationary": STATIONARY_CHECKS,
    "manybody": MANYBODY_CHECKS,
    "gpe": GPE_CHECKS,
    "hf": HF_CHECKS,
}

_symmetry = {
    "type": "object",
    "required": ["sigma", "L", "start", "stop"],
    "properties": {
        "sigma": {"enum": [-1, 1]},
        "L": NUMBER,
        "start": NUMBER,
        "stop": NUMBER,
        "class": {"enum": ["global", "nongapped-local", "gapped-local", "complete-local"]},
        "label": {"type": "string"},
    },
    "additionalProperties": False,
}

_potential = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["multilayer", "wells", "harmonic", "table"]},
        "segments": {"type": "array", "items": {"type": "object"}},
        "symmetries": {"type": "array", "items": _symmetry},
        "walls": {
            "type": "object",
            "required": ["left", "right"],
            "properties": {"left": NUMBER, "right": NUMBER, "strength": POSITIVE},
            "additionalProperties": False,
        },
        "edge_width": {"type": "number", "minimum": 0},
        "background": NUMBER,
    },
    "additionalProperties": False,
}

_check = {
    "type": "object",
    "required": ["id"],
    "properties": {
        "id": {"enum": sorted(set(STATIONARY_CHECKS + MANYBODY_CHECKS + GPE_CHECKS + HF_CHECKS))},
        "name": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"},
        "map": {"type": "string"},
        "tolerance": POSITIVE,
        "min_slope": NUMBER,
        "orbital": {"type": "integer", "minimum": 0},
        "variant": {"enum": ["gamma-sum", "per-orbital-appB", "renormalized-sum-appB"]},
        "region": {"type": "array", "items": NUMBER, "minItems": 2, "maxItems": 2},
    },
    "additionalProperties": False,
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "lscorr scenario",
    "type": "object",
    "required": ["name", "grid", "potential", "engine"],
    "properties": {
        "name": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"},
        "description": {"type": "string"},
        "grid": {
            "type": "object",
            "required": ["x_min", "x_max", "n_points"],
            "properties": {"x_min": NUMBER, "x_max": NUMBER, "n_points": {"type": "integer", "minimum": 8}},
            "additionalProperties": False,
        },
        "potential": _potential,
        "interaction": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["none", "contact", "gaussian"]},
                "g": NUMBER,
                "V0": NUMBER,
                "w": POSITIVE,
            },
            "additionalProperties": False,
        },
        "engine": {"enum": ["stationary", "manybody", "gpe", "hf"]},
        "particles": {
            "type": "object",
            "properties": {
                "N": {"type": "integer", "minimum": 1, "maximum": 3},
                "statistics": {"enum": ["bosonic", "fermionic"]},
            },
            "additionalProperties": False,
        },
        "state": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["scattering", "bloch", "bound", "ground", "quench"]},
                "energy": NUMBER,
                "incoming": {"enum": ["left", "right"]},
                "derivative": {"enum": ["central", "numerov"]},
                "period": POSITIVE,
                "index": {"type": "integer", "minimum": 0},
                "potential": _potential,
                "tolerance": POSITIVE,
            },
            "additionalProperties": False,
        },
        "time": {
            "type": "object",
            "required": ["dt", "n_steps"],
            "properties": {
                "dt": POSITIVE,
                "n_steps": {"type": "integer", "minimum": 0},
                "snapshot_stride": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
        "checks": {"type": "array", "items": _check},
        "refinement": {
            "type": "object",
            "properties": {
                "levels": {"type": "integer", "minimum": 1, "maximum": 4},
                "min_slope": NUMBER,
            },
            "additionalProperties": False,
        },
        "output": {
            "type": "object",
            "properties": {"directory": {"type": "string"}, "snapshots": {"type": "boolean"}},
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}

_complex_or_number = {
    "oneOf": [
        NUMBER,
        {"type": "object", "required": ["re", "im"], "properties": {"re": NUMBER, "im": NUMBER}},
    ]
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "lscorr residual report",
    "type": "object",
    "required": ["check", "equation", "passed", "levels"],
    "properties": {
        "check": {"type": "string"},
        "equation": {"type": "string"},
        "passed": {"type": "boolean"},
        "tolerance": NUMBER,
        "min_slope": {"type": ["number", "null"]},
        "metric": {"type": "string"},
        "slope_waived": {"type": "boolean"},
        "slopes": {"type": "array", "items": {"type": ["number", "string", "null"]}},
        "levels": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["equation", "norms", "dx", "dt"],
                "properties": {
                    "equation": {"type": "string"},
                    "map": {"type": ["object", "null"]},
                    "norms": {
                        "type": "object",
                        "required": ["max", "l2"],
                        "properties": {"max": NUMBER, "l2": NUMBER},
                    },
                    "dx": NUMBER,
                    "dt": {"type": ["number", "null"]},
                    "slope": {"type": ["number", "string", "null"]},
                    "truncation": {"type": "object"},
                    "skipped_pairs": {"type": "array"},
                    "extra": {"type": "object"},
                },
            },
        },
    },
}

_config_validator = Draft202012Validator(CONFIG_SCHEMA)
_report_validator = Draft202012Validator(REPORT_SCHEMA)


def _pointer(err) -> str:
    return "/".join(str(p) for p in err.absolute_path) or "<root>"


def config_errors(config) -> list[str]:
    """Human-readable schema violations, each prefixed by the offending field path."""
    out = [f"{_pointer(e)}: {e.message}" for e in sorted(_config_validator.iter_errors(config), key=lambda e: list(map(str, e.absolute_path)))]
    if not out:
        engine = config["engine"]
        for k, chk in enumerate(config.get("checks", [])):
            if chk["id"] not in ENGINE_CHECKS[engine]:
                out.append(f"checks/{k}/id: check {chk['id']!r} is not available for engine {engine!r}")
    return out


def validate_config(config) -> None:
    errors = config_errors(config)
    if errors:
        raise ConfigurationError("invalid scenario config:\n  " + "\n  ".join(errors))


def validate_report(report) -> None:
    errors = [f"{_pointer(e)}: {e.message}" for e in _report_validator.iter_errors(report)]
    if errors:
        raise ConfigurationError("invalid report:\n  " + "\n  ".join(errors))
