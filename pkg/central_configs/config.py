"""
Configuration management for the central configurations toolkit.
Handles tolerance defaults, integrator settings and environment overrides.
"""

import os
from dataclasses import dataclass
from typing import Any, Dict, Optional

import yaml


@dataclass
class ToleranceConfig:
    """Thresholds used when deciding centrality and shape"""
    residual: float = 1e-9
    oracle: float = 1e-7
    classify: float = 1e-8
    dziobek: float = 1e-9
    shape: float = 1e-6
    collision: float = 1e-9
    acceleration_floor: float = 1e-6


@dataclass
class IntegratorConfig:
    """Trajectory integration settings"""
    method: str = "rk4"
    steps_per_period: int = 10_000
    sample_every: int = 100
    rtol: float = 1e-12
    atol: float = 1e-14
    collapse_method: str = "dopri"
    collapse_stop_fraction: float = 0.5


@dataclass
class RegionConfig:
    """Grid sweep settings for the region emitters"""
    grid: int = 256
    curve_points: int = 100
    angle_unit: str = "rad"


@dataclass
class RunConfig:
    """Main run configuration"""
    name: str = "central-configs"
    tolerances: ToleranceConfig = None
    integrator: IntegratorConfig = None
    region: RegionConfig = None
    log_level: str = "WARNING"

    def __post_init__(self):
        if self.tolerances is None:
            self.tolerances = ToleranceConfig()
        if self.integrator is None:
            self.integrator = IntegratorConfig()
        if self.region is None:
            self.region = RegionConfig()


DEFAULT_TOLERANCES = ToleranceConfig()

# YAML keys are camelCase, attributes snake_case
_TOLERANCE_KEYS = {
    "residual": "residual",
    "oracle": "oracle",
    "classify": "classify",
    "dziobek": "dziobek",
    "shape": "shape",
    "collision": "collision",
    "accelerationFloor": "acceleration_floor",
}
_INTEGRATOR_KEYS = {
    "method": "method",
    "stepsPerPeriod": "steps_per_period",
    "sampleEvery": "sample_every",
    "rtol": "rtol",
    "atol": "atol",
    "collapseMethod": "collapse_method",
    "stopFraction": "collapse_stop_fraction",
}
_REGION_KEYS = {
    "grid": "grid",
    "curvePoints": "curve_points",
    "angleUnit": "angle_unit",
}


def get_env(var: str, default: Optional[str] = None) -> Optional[str]:
    """Get environment variable"""
    return os.getenv(var, default)


def _section(data: Dict[str, Any], keys: Dict[str, str]) -> Dict[str, Any]:
    unknown = set(data) - set(keys)
    if unknown:
        raise ValueError(f"Unknown configuration keys: {', '.join(sorted(unknown))}")
    return {keys[k]: v for k, v in data.items()}


def load_run_config(config_path: Optional[str] = None) -> RunConfig:
    """
    Load configuration from a settings YAML file.

    Falls back to the file named by CC_SETTINGS, then to defaults.
    CC_LOG_LEVEL overrides the log level from any source.
    """
    config_path = config_path or get_env("CC_SETTINGS")
    config_data: Dict[str, Any] = {}
    if config_path:
        with open(config_path, "r") as f:
            config_data = yaml.safe_load(f) or {}

    config = RunConfig(
        name=config_data.get("name", "central-configs"),
        tolerances=ToleranceConfig(**_section(config_data.get("tolerances", {}), _TOLERANCE_KEYS)),
        integrator=IntegratorConfig(**_section(config_data.get("integrator", {}), _INTEGRATOR_KEYS)),
        region=RegionConfig(**_section(config_data.get("region", {}), _REGION_KEYS)),
        log_level=config_data.get("logLevel", "WARNING"),
    )
    config.log_level = get_env("CC_LOG_LEVEL", config.log_level).upper()
    return config


def save_run_config(config: RunConfig, config_path: str = "settings.yaml"):
    """Save configuration to a settings YAML file"""
    tol, integ, region = config.tolerances, config.integrator, config.region
    config_dict = {
        "name": config.name,
        "logLevel": config.log_level,
        "tolerances": {key: getattr(tol, attr) for key, attr in _TOLERANCE_KEYS.items()},
        "integrator": {key: getattr(integ, attr) for key, attr in _INTEGRATOR_KEYS.items()},
        "region": {key: getattr(region, attr) for key, attr in _REGION_KEYS.items()},
    }

    with open(config_path, "w") as f:
        yaml.dump(config_dict, f, default_flow_style=False, sort_keys=False)
