"""
Configuration settings for the morphing gripper simulator
"""
import copy
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

from utils.validators import ConfigError, ValidationError, validate_float, validate_integer, validate_seed

# Base directory
BASE_DIR = Path(__file__).parent.absolute()
DATA_DIR = os.environ.get('GRIPPER_DATA_DIR', os.path.join(BASE_DIR, 'data'))
EXAMPLE_CONFIG_PATH = os.path.join(BASE_DIR, 'config.example.json')

# Flask configuration
APP_VERSION = "1.0.0"
DEBUG = os.environ.get('FLASK_DEBUG', 'False').lower() == 'true'
HOST = os.environ.get('FLASK_HOST', '127.0.0.1')
PORT = int(os.environ.get('PORT', os.environ.get('FLASK_PORT', 5000)))

# Logging configuration
LOG_DIR = os.environ.get('LOG_DIR', os.path.join(BASE_DIR, 'logs'))
LOG_FILE = os.path.join(LOG_DIR, 'app.log')
LOG_LEVEL = os.environ.get('LOG_LEVEL', 'INFO')

# Physical constants
P_SUPPLY_KPA = 103.4  # 15 psi pump
PALM_MIN_MM = 68.0
PALM_MAX_MM = 135.0

# CLI exit codes
EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_MISMATCH = 3

DEFAULT_RUN_CONFIG: Dict[str, Any] = {
    "seed": 0,
    "output_dir": "output",
    "plant": {
        "p_supply_kpa": P_SUPPLY_KPA,
        "k_in": 2.0,
        "k_out": 2.0,
        "leak": 0.0,
        "dt_s": 0.01,
        "palm_rest_mm": PALM_MIN_MM,
        "palm_max_mm": PALM_MAX_MM,
        "finger_theta_max_deg": 160.0,
        "palm_curve_csv": None,
        "finger_curve_csv": None,
    },
    "palm_control": {
        "kp": 2.0,
        "ki": 3.0,
        "kd": 0.0,
        "integral_limit": 50.0,
        "integral_deadzone": 0.5,
        "deadband_kpa": 1.5,
    },
    "finger_control": {
        "kp": 0.8,
        "ki": 2.0,
        "kd": 0.0,
        "integral_limit": 80.0,
        "integral_deadzone": 1.0,
        "deadband_kpa": 1.0,
    },
    "kinematics": {
        "angle_tol_deg": 2.0,
        "length_tol_mm": 2.0,
        "manifold_min_mm": PALM_MIN_MM,
        "manifold_max_mm": PALM_MAX_MM,
        "manifold_grid_n": 21,
    },
    "sensing": {
        "threshold": 5.0,
        "kernel": 5,
    },
    "finger": {
        "arc_length_mm": 64.5,
        "sensor_offset": 2.0,
        "sensor_gain_per_deg": 0.05,
        "contact_gain": 25.0,
        "noise_sigma": 0.3,
    },
    "policy": {
        "clearance_mm": 16.0,
        "template_min_aspect": 1.3,
        "inflate_step_kpa": 0.5,
        "max_envelop_ticks": 1500,
        "hold_s": 5.0,
        "settle_tolerance_mm": 1.0,
        "settle_timeout_s": 8.0,
        "majority": 3,
    },
    "graspsim": {
        "approach_margin_mm": 2.0,
        "kite_cross_fraction": 0.46,
        "circle_segments": 64,
    },
}

# (section, key) -> (min, max); None bounds are open. Keys absent here are
# free-form (paths, strings).
_BOUNDS = {
    ("plant", "p_supply_kpa"): (0.0, None),
    ("plant", "k_in"): (0.0, None),
    ("plant", "k_out"): (0.0, None),
    ("plant", "leak"): (0.0, None),
    ("plant", "dt_s"): (1e-6, 1.0),
    ("plant", "palm_rest_mm"): (0.0, None),
    ("plant", "palm_max_mm"): (0.0, None),
    ("plant", "finger_theta_max_deg"): (1.0, 180.0),
    ("palm_control", "kp"): (0.0, None),
    ("palm_control", "ki"): (0.0, None),
    ("palm_control", "kd"): (0.0, None),
    ("palm_control", "integral_limit"): (0.0, None),
    ("palm_control", "integral_deadzone"): (0.0, None),
    ("palm_control", "deadband_kpa"): (1e-9, None),
    ("finger_control", "kp"): (0.0, None),
    ("finger_control", "ki"): (0.0, None),
    ("finger_control", "kd"): (0.0, None),
    ("finger_control", "integral_limit"): (0.0, None),
    ("finger_control", "integral_deadzone"): (0.0, None),
    ("finger_control", "deadband_kpa"): (1e-9, None),
    ("kinematics", "angle_tol_deg"): (0.0, 45.0),
    ("kinematics", "length_tol_mm"): (0.0, None),
    ("kinematics", "manifold_min_mm"): (PALM_MIN_MM, PALM_MAX_MM),
    ("kinematics", "manifold_max_mm"): (PALM_MIN_MM, PALM_MAX_MM),
    ("sensing", "threshold"): (1e-9, None),
    ("finger", "arc_length_mm"): (1e-6, None),
    ("finger", "sensor_gain_per_deg"): (0.0, None),
    ("finger", "contact_gain"): (0.0, None),
    ("finger", "noise_sigma"): (0.0, None),
    ("policy", "clearance_mm"): (0.0, None),
    ("policy", "template_min_aspect"): (1.0, None),
    ("policy", "inflate_step_kpa"): (1e-6, None),
    ("policy", "hold_s"): (0.0, None),
    ("policy", "settle_tolerance_mm"): (1e-6, None),
    ("policy", "settle_timeout_s"): (0.0, None),
    ("graspsim", "approach_margin_mm"): (0.0, None),
    ("graspsim", "kite_cross_fraction"): (0.05, 0.95),
}

_INTEGER_KEYS = {
    ("kinematics", "manifold_grid_n"): (2, 1001),
    ("sensing", "kernel"): (1, 101),
    ("policy", "max_envelop_ticks"): (1, 10_000_000),
    ("policy", "majority"): (1, 4),
    ("graspsim", "circle_segments"): (8, 4096),
}


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration; sections are plain dicts keyed as in DEFAULT_RUN_CONFIG."""
    plant: Dict[str, Any]
    palm_control: Dict[str, Any]
    finger_control: Dict[str, Any]
    kinematics: Dict[str, Any]
    sensing: Dict[str, Any]
    finger: Dict[str, Any]
    policy: Dict[str, Any]
    graspsim: Dict[str, Any]
    seed: Optional[int] = 0
    output_dir: str = "output"
    source: Optional[str] = field(default=None, compare=False)

    def to_dict(self) -> Dict[str, Any]:
        """Canonical nested dict (the shape of config.example.json)."""
        data = {name: copy.deepcopy(getattr(self, name)) for name in _SECTIONS}
        data["seed"] = self.seed
        data["output_dir"] = self.output_dir
        return data

    def with_overrides(self, overrides: Dict[str, Any]) -> "RunConfig":
        return build_run_config(_deep_merge(self.to_dict(), overrides), source=self.source)


_SECTIONS = ("plant", "palm_control", "finger_control", "kinematics", "sensing", "finger", "policy", "graspsim")


def _deep_merge(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in (overrides or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _validate_section(name: str, values: Dict[str, Any]) -> Dict[str, Any]:
    if not isinstance(values, dict):
        raise ConfigError(f"Section '{name}' must be an object")
    known = DEFAULT_RUN_CONFIG[name]
    unknown = sorted(set(values) - set(known))
    if unknown:
        raise ConfigError(f"Unknown key(s) in section '{name}': {', '.join(unknown)}")

    checked = {}
    for key, value in values.items():
        label = f"{name}.{key}"
        try:
            if (name, key) in _INTEGER_KEYS:
                lo, hi = _INTEGER_KEYS[(name, key)]
                checked[key] = validate_integer(value, label, min_value=lo, max_value=hi)
            elif (name, key) in _BOUNDS:
                lo, hi = _BOUNDS[(name, key)]
                checked[key] = validate_float(value, label, min_value=lo, max_value=hi)
            else:
                checked[key] = value
        except ValidationError as e:
            raise ConfigError(str(e)) from e
    return checked


def build_run_config(data: Dict[str, Any], source: Optional[str] = None) -> RunConfig:
    """
    Validate a complete nested config dict and freeze it

    Raises:
        ConfigError: On unknown keys or out-of-range values
    """
    unknown = sorted(set(data) - set(_SECTIONS) - {"seed", "output_dir"})
    if unknown:
        raise ConfigError(f"Unknown top-level key(s): {', '.join(unknown)}")

    sections = {name: _validate_section(name, data.get(name, {})) for name in _SECTIONS}

    plant = sections["plant"]
    if plant["dt_s"] * max(plant["k_in"], plant["k_out"]) >= 1.0:
        raise ConfigError("plant.dt_s * max(k_in, k_out) must be below 1 for a stable explicit step")
    if plant["palm_max_mm"] <= plant["palm_rest_mm"]:
        raise ConfigError("plant.palm_max_mm must exceed plant.palm_rest_mm")
    kin = sections["kinematics"]
    if kin["manifold_max_mm"] <= kin["manifold_min_mm"]:
        raise ConfigError("kinematics.manifold_max_mm must exceed kinematics.manifold_min_mm")
    if sections["sensing"]["kernel"] % 2 == 0:
        raise ConfigError("sensing.kernel must be odd")

    try:
        seed = validate_seed(data.get("seed", 0))
    except ValidationError as e:
        raise ConfigError(str(e)) from e

    return RunConfig(seed=seed, output_dir=str(data.get("output_dir", "output")), source=source, **sections)


def load_run_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Load the run configuration

    Args:
        path: JSON file merged over the defaults (optional)
        overrides: nested dict merged last, e.g. {"seed": 7} from CLI flags

    Returns:
        Frozen RunConfig

    Raises:
        ConfigError: If the file is unreadable, not JSON, or fails validation
    """
    data = copy.deepcopy(DEFAULT_RUN_CONFIG)
    if path:
        try:
            with open(path, 'r', encoding='utf-8') as f:
                loaded = json.load(f)
        except OSError as e:
            raise ConfigError(f"Cannot read config file {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"Config file {path} is not valid JSON: {e}") from e
        if not isinstance(loaded, dict):
            raise ConfigError(f"Config file {path} must contain a JSON object")
        data = _deep_merge(data, loaded)
    if overrides:
        data = _deep_merge(data, overrides)
    return build_run_config(data, source=path)
