"""Flat, strictly validated experiment configuration (JSON)."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields, replace

from .estimators import EstimatorSettings
from .instrument import NoiseModel
from .rover import RoverConfig
from .spin import CALIB_TIME, DEFAULT_CALIB_K, SpinSystemParams

EXPERIMENTS = (
    "ascend", "descend", "hessian-probe", "scan-eigenvectors", "drive-top",
    "levelset-energy", "levelset-distance", "calibrate",
)

SEED_ENV = "ROVER_SEED"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "ascend"
    out_dir: str = "rover-out"
    # instrument
    seed: int = 0
    noise_sigma: float = 1e-3
    budget: int | None = None
    # spin system
    calib_k: float = DEFAULT_CALIB_K
    detuning: float = 0.0
    j_max: float = 1.0
    n_intervals: int = 4
    total_time: float = CALIB_TIME
    # estimators
    d: float = 3.0
    delta: float = 10.0
    n_samples: int = 500
    # rover
    alpha: float = 1.0
    beta: float = 1000.0
    max_step_len: float = 2.0
    max_iter: int = 200
    grad_floor_factor: float = 3.0
    grad_floor_min: float = 1e-6
    converge_count: int = 3
    epsilon: float = 0.014
    step_len: float = 3.0
    energy_step_len: float = 2.0
    energy_repeats: int = 5
    top_step_len: float = 20.0
    top_n_samples: int = 100
    top_delta: float = 15.0
    null_rel_tol: float = 0.1
    expected_extremum_rank: int = 2
    max_inner_corrections: int = 10
    # experiment parameters
    x_init: list | None = None
    init_half_width: float | None = None
    start_j_window: list | None = None
    n_iter: int | None = None
    target_rel_distance: float = 2.5
    h_free: list | None = None
    at: str | list = "optimal"
    sweep: bool = False
    trajectory: list | None = None
    sweep_heights: list = field(default_factory=lambda: [1.0, 0.71, 0.31, 0.03, -1.0])
    scan_max_rel_distance: float = 0.3
    scan_points: int = 21

    def system(self) -> SpinSystemParams:
        return SpinSystemParams(self.calib_k, self.detuning, self.j_max)

    def noise(self) -> NoiseModel:
        return NoiseModel(self.noise_sigma * self.j_max, self.seed)

    def estimator(self) -> EstimatorSettings:
        return EstimatorSettings(self.d, self.delta, self.n_samples)

    def rover(self) -> RoverConfig:
        names = {f.name for f in fields(RoverConfig)}
        return RoverConfig(**{k: v for k, v in asdict(self).items() if k in names})

    def to_dict(self) -> dict:
        return asdict(self)


_NUMBER = (int, float)


def _check(name: str, value, default):
    """Validate ``value`` against the kind of the field's default."""
    optional = name in {"budget", "x_init", "init_half_width", "start_j_window", "n_iter",
                        "h_free", "trajectory"}
    if value is None:
        if optional:
            return None
        raise ConfigError(f"{name} may not be null")
    if isinstance(value, bool) and name != "sweep":
        raise ConfigError(f"{name} must not be a boolean")
    if name == "sweep":
        if not isinstance(value, bool):
            raise ConfigError("sweep must be true or false")
        return value
    if name in {"experiment", "out_dir"}:
        if not isinstance(value, str):
            raise ConfigError(f"{name} must be a string")
        if name == "experiment" and value not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {value!r}; choose from {EXPERIMENTS}")
        return value
    if name == "at":
        if isinstance(value, str):
            return value
        return _number_list(name, value)
    if name in {"x_init", "h_free", "start_j_window", "sweep_heights"}:
        return _number_list(name, value)
    if name == "trajectory":
        if not isinstance(value, list) or not all(isinstance(p, str) for p in value):
            raise ConfigError("trajectory must be a list of paths")
        return value
    if name in {"seed", "budget", "n_intervals", "n_samples", "max_iter", "converge_count",
                "energy_repeats", "top_n_samples", "expected_extremum_rank",
                "max_inner_corrections", "n_iter", "scan_points"}:
        if not isinstance(value, int):
            raise ConfigError(f"{name} must be an integer")
        return value
    if not isinstance(value, _NUMBER):
        raise ConfigError(f"{name} must be a number")
    return float(value)


def _number_list(name, value):
    if not isinstance(value, list) or not all(
            isinstance(v, _NUMBER) and not isinstance(v, bool) for v in value):
        raise ConfigError(f"{name} must be a list of numbers")
    return [float(v) for v in value]


def build_config(data: dict | None = None, overrides: dict | None = None,
                 env: dict | None = None) -> ExperimentConfig:
    """Merge file values, overrides and the environment into a config.

    Precedence, highest first: ``overrides``, ``data``, ``ROVER_SEED`` from
    ``env``, built-in defaults. Unknown keys are rejected.
    """
    data = dict(data or {})
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    env = os.environ if env is None else env
    merged = {}
    if SEED_ENV in env and env[SEED_ENV] != "":
        try:
            merged["seed"] = int(env[SEED_ENV])
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer") from None
    merged.update(data)
    merged.update(overrides)
    defaults = {f.name: f for f in fields(ExperimentConfig)}
    unknown = sorted(set(merged) - set(defaults))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    cfg = ExperimentConfig()
    values = {name: _check(name, value, getattr(cfg, name)) for name, value in merged.items()}
    try:
        cfg = replace(cfg, **values)
        # construct the component objects once to surface their own checks
        cfg.system(), cfg.noise(), cfg.rover()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.x_init is not None and len(cfg.x_init) != 2 * cfg.n_intervals:
        raise ConfigError(f"x_init needs {2 * cfg.n_intervals} entries")
    return cfg


def load_config(path: str | None, overrides: dict | None = None,
                env: dict | None = None) -> ExperimentConfig:
    data = {}
    if path is not None:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config document must be a JSON object")
    return build_config(data, overrides, env)
