"""Run configuration: JSON documents with strict validation.

The schema mirrors the library types section by section (materials,
field, optics, pump, output).  Unknown keys are rejected with the
offending dotted path; values are range-checked by the library type
constructors.  Environment variables prefixed ``ZEEPUMP_`` override
single values, with ``__`` separating path segments, e.g.
``ZEEPUMP_FIELD__THETA_DEG=51``.
"""

import copy
import json
import os
from dataclasses import dataclass

import numpy as np

from . import constants
from .pump import PumpConfig, pump_config_from_json_dict
from .spectrum import LineShapeParams
from .zeeman import FieldConfig, GTensor

ENV_PREFIX = "ZEEPUMP_"


class ConfigError(ValueError):
    pass


DEFAULT_CONFIG = {
    "materials": {
        "ground": {"g_parallel": constants.GROUND_G_PARALLEL,
                   "g_perpendicular": constants.GROUND_G_PERPENDICULAR},
        "excited": {"g_parallel": constants.EXCITED_G_PARALLEL,
                    "g_perpendicular": constants.EXCITED_G_PERPENDICULAR},
    },
    "field": {
        "magnitude_tesla": 0.31,
        "theta_deg": 45.0,
    },
    "optics": {
        "phi_deg": 0.0,
        "gaussian_fwhm_ghz": 2.0,
        "lorentzian_fwhm_ghz": 0.0,
        # "measured": the four pair depths below are used directly;
        # "theory": pair depths follow the transition-table strengths
        # scaled by the per-polarization totals.
        "depth_mode": "measured",
        "depth_pi_ad": 0.75,
        "depth_pi_bc": 2.62,
        "depth_sigma_ad": 0.070,
        "depth_sigma_bc": 0.025,
        "depth_pi_total": 3.327,
        "depth_sigma_total": 0.0889,
        "baseline": 0.0,
        "grid_min_ghz": -9.0,
        "grid_max_ghz": 9.0,
        "grid_points": 1801,
    },
    "pump": {
        "branching_ratio": 0.27,
        "excited_lifetime_s": 100e-6,
        "spin_relaxation": [{"weight": 0.5, "tau_s": 0.018},
                            {"weight": 0.5, "tau_s": 0.320}],
        "pump_window_mhz": 20.0,
        "sweep_count": 1000,
        "pump_duration_s": 0.1,
        # calibrated once against the default scenario, then frozen
        "average_pump_rate_per_s": 2000.0,
        "homogeneous_linewidth_mhz": 0.1,
        "class_grid": {"half_span_mhz": 20.0, "step_mhz": 0.02},
        "mode": "averaged",
        "probe_depth": 2.0,
    },
    "output": {
        "float_format": ".10g",
        "plots": True,
    },
}

_SCHEMA = {
    "materials": {"ground": {"g_parallel": float, "g_perpendicular": float},
                  "excited": {"g_parallel": float, "g_perpendicular": float}},
    "field": {"magnitude_tesla": float, "theta_deg": float},
    "optics": {"phi_deg": float, "gaussian_fwhm_ghz": float, "lorentzian_fwhm_ghz": float,
               "depth_mode": str, "depth_pi_ad": float, "depth_pi_bc": float,
               "depth_sigma_ad": float, "depth_sigma_bc": float,
               "depth_pi_total": float, "depth_sigma_total": float, "baseline": float,
               "grid_min_ghz": float, "grid_max_ghz": float, "grid_points": int},
    "pump": {"branching_ratio": float, "excited_lifetime_s": float,
             "spin_relaxation": [{"weight": float, "tau_s": float}],
             "pump_window_mhz": float, "sweep_count": int, "pump_duration_s": float,
             "average_pump_rate_per_s": float, "homogeneous_linewidth_mhz": float,
             "class_grid": {"half_span_mhz": float, "step_mhz": float},
             "mode": str, "probe_depth": float},
    "output": {"float_format": str, "plots": bool},
}


def _check_node(value, schema, path, errors):
    if isinstance(schema, dict):
        if not isinstance(value, dict):
            errors.append(f"{path}: expected an object")
            return
        for key, sub in value.items():
            if key not in schema:
                errors.append(f"{path}.{key}: unknown key")
            else:
                _check_node(sub, schema[key], f"{path}.{key}", errors)
    elif isinstance(schema, list):
        if not isinstance(value, list):
            errors.append(f"{path}: expected a list")
            return
        for i, item in enumerate(value):
            _check_node(item, schema[0], f"{path}[{i}]", errors)
    elif schema is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            errors.append(f"{path}: expected a number, got {value!r}")
    elif schema is int:
        if isinstance(value, bool) or not isinstance(value, int):
            errors.append(f"{path}: expected an integer, got {value!r}")
    elif schema is bool:
        if not isinstance(value, bool):
            errors.append(f"{path}: expected true/false, got {value!r}")
    elif schema is str:
        if not isinstance(value, str):
            errors.append(f"{path}: expected a string, got {value!r}")


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if key in out and isinstance(out[key], dict) and isinstance(value, dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _apply_env_overrides(doc: dict, env, errors: list) -> dict:
    for name, raw in sorted(env.items()):
        if not name.startswith(ENV_PREFIX):
            continue
        segments = [s.lower() for s in name[len(ENV_PREFIX):].split("__")]
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = doc
        for seg in segments[:-1]:
            if not isinstance(node, dict) or seg not in node:
                errors.append(f"environment override {name}: no such config path")
                break
            node = node[seg]
        else:
            if not isinstance(node, dict) or segments[-1] not in node:
                errors.append(f"environment override {name}: no such config path")
            else:
                node[segments[-1]] = value
    return doc


@dataclass(frozen=True, eq=False)
class OpticsConfig:
    phi_deg: float
    line_shape: LineShapeParams
    depth_mode: str
    depth_pi_ad: float
    depth_pi_bc: float
    depth_sigma_ad: float
    depth_sigma_bc: float
    depth_pi_total: float
    depth_sigma_total: float
    baseline: float
    grid_ghz: np.ndarray


@dataclass(frozen=True, eq=False)
class RunConfig:
    """Validated run configuration with library-level types."""

    ground_g: GTensor
    excited_g: GTensor
    field: FieldConfig
    optics: OpticsConfig
    pump: PumpConfig
    float_format: str
    plots: bool
    raw: dict

    def echo_json(self) -> str:
        return json.dumps(self.raw, indent=2, sort_keys=True) + "\n"


def resolve_config(document: dict | None = None, env=None) -> RunConfig:
    """Merge defaults, a user document, and environment overrides; validate."""
    errors: list = []
    doc = _merge(DEFAULT_CONFIG, document or {})
    doc = _apply_env_overrides(doc, env if env is not None else os.environ, errors)
    _check_node(doc, _SCHEMA, "config", errors)
    # strip the leading "config." for readability
    errors = [e.replace("config.", "", 1) for e in errors]
    if errors:
        raise ConfigError("; ".join(errors))

    try:
        ground = GTensor(**doc["materials"]["ground"])
        excited = GTensor(**doc["materials"]["excited"])
        field = FieldConfig(magnitude_tesla=doc["field"]["magnitude_tesla"],
                            theta_deg=doc["field"]["theta_deg"])
        opt = doc["optics"]
        if opt["depth_mode"] not in ("measured", "theory"):
            raise ValueError(f'optics.depth_mode must be "measured" or "theory", got {opt["depth_mode"]!r}')
        if opt["grid_points"] < 2 or opt["grid_max_ghz"] <= opt["grid_min_ghz"]:
            raise ValueError("optics grid must have at least 2 points and max > min")
        for key in ("depth_pi_ad", "depth_pi_bc", "depth_sigma_ad", "depth_sigma_bc",
                    "depth_pi_total", "depth_sigma_total", "baseline"):
            if opt[key] < 0:
                raise ValueError(f"optics.{key} must be >= 0")
        optics = OpticsConfig(
            phi_deg=float(opt["phi_deg"]),
            line_shape=LineShapeParams(opt["gaussian_fwhm_ghz"], opt["lorentzian_fwhm_ghz"], 1.0),
            depth_mode=opt["depth_mode"],
            depth_pi_ad=float(opt["depth_pi_ad"]),
            depth_pi_bc=float(opt["depth_pi_bc"]),
            depth_sigma_ad=float(opt["depth_sigma_ad"]),
            depth_sigma_bc=float(opt["depth_sigma_bc"]),
            depth_pi_total=float(opt["depth_pi_total"]),
            depth_sigma_total=float(opt["depth_sigma_total"]),
            baseline=float(opt["baseline"]),
            grid_ghz=np.linspace(opt["grid_min_ghz"], opt["grid_max_ghz"], opt["grid_points"]),
        )
        pump = pump_config_from_json_dict(doc["pump"])
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc

    return RunConfig(
        ground_g=ground, excited_g=excited, field=field, optics=optics, pump=pump,
        float_format=doc["output"]["float_format"], plots=bool(doc["output"]["plots"]),
        raw=doc,
    )


def load_run_config(path=None, env=None) -> RunConfig:
    """Load a config file (JSON) if given, else defaults, then resolve."""
    document = None
    if path is not None:
        try:
            with open(path) as fh:
                document = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        if not isinstance(document, dict):
            raise ConfigError(f"{path}: top-level JSON value must be an object")
    return resolve_config(document, env=env)
