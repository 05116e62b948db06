"""Scenario definition: configuration types, defaults, validation, JSON I/O.

A :class:`Scenario` bundles every knob of a simulation run: geometry,
radio parameters, traffic demand, the scheme under test and the
per-algorithm hyperparameters.  Instances are immutable; ``validate``
checks ranges and scheme consistency and is idempotent, so a validated
scenario can be serialized and reloaded bit-for-bit.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any


class ConfigError(ValueError):
    """Malformed configuration: bad JSON, unknown keys or wrong types."""


class RangeError(ConfigError):
    """A scenario field is outside its allowed range."""


class SchemeError(ConfigError):
    """The scheme and the algorithm parameters are inconsistent."""


class SchemeId(enum.Enum):
    """The nine trajectory / channel-allocation schemes the simulator compares.

    Names combine the decision algorithm with the trajectory
    dimensionality.  The ``_ca`` suffix marks schemes where every base
    station learns its channel; without it channels are redrawn
    uniformly at random each step.
    """

    SAT_3D_CA = "sat3d_ca"
    SAT_2D_CA = "sat2d_ca"
    SAT_2D = "sat2d"
    MAB_3D_CA = "mab3d_ca"
    MAB_2D = "mab2d"
    PSO_3D = "pso3d"
    PSO_2D = "pso2d"
    Q_LEARNING_2D = "qlearning2d"
    DQN_CA_3D = "dqn_ca3d"

    @property
    def is_3d(self) -> bool:
        """True when UAVs may change altitude; 2D schemes pin the ceiling."""
        return self in (
            SchemeId.SAT_3D_CA,
            SchemeId.MAB_3D_CA,
            SchemeId.PSO_3D,
            SchemeId.DQN_CA_3D,
        )

    @property
    def learned_ca(self) -> bool:
        """True when channel allocation is part of the learned action."""
        return self in (
            SchemeId.SAT_3D_CA,
            SchemeId.SAT_2D_CA,
            SchemeId.MAB_3D_CA,
            SchemeId.DQN_CA_3D,
        )

    @property
    def family(self) -> str:
        """Algorithm family: ``sat``, ``mab``, ``pso``, ``qlearn`` or ``dqn``."""
        if self in (SchemeId.SAT_3D_CA, SchemeId.SAT_2D_CA, SchemeId.SAT_2D):
            return "sat"
        if self in (SchemeId.MAB_3D_CA, SchemeId.MAB_2D):
            return "mab"
        if self in (SchemeId.PSO_3D, SchemeId.PSO_2D):
            return "pso"
        if self is SchemeId.Q_LEARNING_2D:
            return "qlearn"
        return "dqn"


@dataclass(frozen=True)
class AlgoParams:
    """Hyperparameters for the five decision algorithms.

    Defaults reproduce the reference operating point used throughout the
    test suite.  ``q_alpha=None`` selects the decaying schedule
    1 / (1 + 0.001 n) where n counts updates of the touched table entry;
    ``satisfaction_kappa0=None`` starts the satisfaction threshold at the
    maximum attainable reward (the sum of the reward weights).
    """

    q_alpha: float | None = None
    q_gamma: float = 0.9
    epsilon: float = 0.1
    satisfaction_delta: float = 0.2
    satisfaction_tau: int = 200
    satisfaction_kappa0: float | None = None
    pso_population: int = 20
    pso_inertia: float = 0.9
    pso_c_personal: float = 0.1
    pso_c_global: float = 0.1
    pso_inner_iters: int = 5
    dqn_hidden: int | None = 200
    dqn_batch: int | None = 64
    dqn_replay: int | None = 600
    dqn_target_sync: int | None = 100
    dqn_lr: float | None = 1e-3
    dqn_gamma: float | None = 0.9


@dataclass(frozen=True)
class Scenario:
    """Full description of one simulation run.

    Geometry is a square service region of side ``area_side_m`` metres
    holding ``n_users`` ground users, ``n_sbs`` static small-cell base
    stations and ``n_uavs`` UAV base stations, overflown by a ring of
    ``n_satellites`` LEO satellites that provide wireless backhaul.
    """

    area_side_m: float = 500.0
    n_users: int = 150
    n_sbs: int = 4
    n_uavs: int = 4
    n_satellites: int = 22
    satellite_altitude_m: float = 550e3

    n_channels: int = 4
    access_bandwidth_hz: float = 56e6
    backhaul_bandwidth_hz: float = 100e6
    carrier_hz: float = 28e9
    backhaul_carrier_hz: float = 28e9
    noise_psd_dbm_hz: float = -174.0
    tx_power_dbm: float = 24.0
    backhaul_antenna_gain_dbi: float = 80.0
    backhaul_enabled: bool = True
    shadowing_enabled: bool = True

    demand_bps: float = 1.8e6
    link_efficiency: float = 0.75
    n_steps: int = 5740
    step_seconds: float = 1.0
    n_montecarlo: int = 100
    fp_iterations: int = 500

    user_speed_range_mps: tuple[float, float] = (0.0, 1.3)
    user_dwell_steps: int = 1
    uav_speed_mps: float = 10.0
    uav_alt_range_m: tuple[float, float] = (22.5, 121.9)
    user_height_m: float = 1.5
    sbs_height_m: float = 15.0
    min_sbs_separation_m: float = 40.0
    min_sbs_user_distance_m: float = 10.0

    reward_weights: tuple[float, float] = (0.5, 0.5)
    scheme: SchemeId = SchemeId.SAT_3D_CA
    seed: int = 0
    algo_params: AlgoParams = field(default_factory=AlgoParams)


def default_scenario() -> Scenario:
    """Return the validated reference scenario (all defaults)."""
    return validate(Scenario())


def _positive(name: str, value: float) -> None:
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise RangeError(f"{name} must be a positive finite number, got {value!r}")


def _nonneg_int(name: str, value: int) -> None:
    if not (isinstance(value, int) and value >= 0):
        raise RangeError(f"{name} must be a non-negative integer, got {value!r}")


def _positive_int(name: str, value: int) -> None:
    if not (isinstance(value, int) and value >= 1):
        raise RangeError(f"{name} must be an integer >= 1, got {value!r}")


def _unit_interval(name: str, value: float, *, closed_high: bool = True) -> None:
    hi_ok = value <= 1.0 if closed_high else value < 1.0
    if not (isinstance(value, (int, float)) and 0.0 <= value and hi_ok):
        hi = "1" if closed_high else "1 exclusive"
        raise RangeError(f"{name} must lie in [0, {hi}], got {value!r}")


def _check_algo_params(p: AlgoParams, scheme: SchemeId) -> None:
    if p.q_alpha is not None:
        if not (0.0 < p.q_alpha <= 1.0):
            raise RangeError(f"q_alpha must lie in (0, 1], got {p.q_alpha!r}")
    if not (0.0 <= p.q_gamma < 1.0):
        raise RangeError(f"q_gamma must lie in [0, 1), got {p.q_gamma!r}")
    _unit_interval("epsilon", p.epsilon)
    if not (0.0 < p.satisfaction_delta < 1.0):
        raise RangeError(
            f"satisfaction_delta must lie in (0, 1), got {p.satisfaction_delta!r}"
        )
    _positive_int("satisfaction_tau", p.satisfaction_tau)
    if p.satisfaction_kappa0 is not None:
        _positive("satisfaction_kappa0", p.satisfaction_kappa0)
    _positive_int("pso_population", p.pso_population)
    if not (0.0 < p.pso_inertia <= 1.0):
        raise RangeError(f"pso_inertia must lie in (0, 1], got {p.pso_inertia!r}")
    if p.pso_c_personal < 0 or p.pso_c_global < 0:
        raise RangeError("pso acceleration coefficients must be >= 0")
    _positive_int("pso_inner_iters", p.pso_inner_iters)

    dqn_fields = {
        "dqn_hidden": p.dqn_hidden,
        "dqn_batch": p.dqn_batch,
        "dqn_replay": p.dqn_replay,
        "dqn_target_sync": p.dqn_target_sync,
        "dqn_lr": p.dqn_lr,
        "dqn_gamma": p.dqn_gamma,
    }
    missing = [k for k, v in dqn_fields.items() if v is None]
    if scheme.family == "dqn" and missing:
        raise SchemeError(
            f"scheme {scheme.value} needs {', '.join(missing)} to be set"
        )
    for name in ("dqn_hidden", "dqn_batch", "dqn_replay", "dqn_target_sync"):
        v = dqn_fields[name]
        if v is not None:
            _positive_int(name, v)
    if p.dqn_lr is not None:
        _positive("dqn_lr", p.dqn_lr)
    if p.dqn_gamma is not None:
        _unit_interval("dqn_gamma", p.dqn_gamma)
    if (
        p.dqn_batch is not None
        and p.dqn_replay is not None
        and p.dqn_batch > p.dqn_replay
    ):
        raise SchemeError(
            f"dqn_batch ({p.dqn_batch}) cannot exceed dqn_replay ({p.dqn_replay})"
        )


def validate(scenario: Scenario) -> Scenario:
    """Check every field of ``scenario`` and return it unchanged.

    Raises :class:`RangeError` for out-of-range values and
    :class:`SchemeError` when the scheme and algorithm parameters do not
    fit together.  Validation is idempotent: ``validate(validate(s))``
    equals ``validate(s)``.
    """
    s = scenario
    _positive("area_side_m", s.area_side_m)
    _nonneg_int("n_users", s.n_users)
    _nonneg_int("n_sbs", s.n_sbs)
    _nonneg_int("n_uavs", s.n_uavs)
    _nonneg_int("n_satellites", s.n_satellites)
    _positive("satellite_altitude_m", s.satellite_altitude_m)
    _positive_int("n_channels", s.n_channels)
    _positive("access_bandwidth_hz", s.access_bandwidth_hz)
    _positive("backhaul_bandwidth_hz", s.backhaul_bandwidth_hz)
    _positive("carrier_hz", s.carrier_hz)
    _positive("backhaul_carrier_hz", s.backhaul_carrier_hz)
    if not math.isfinite(s.noise_psd_dbm_hz):
        raise RangeError(f"noise_psd_dbm_hz must be finite, got {s.noise_psd_dbm_hz!r}")
    if not math.isfinite(s.tx_power_dbm):
        raise RangeError(f"tx_power_dbm must be finite, got {s.tx_power_dbm!r}")
    if not math.isfinite(s.backhaul_antenna_gain_dbi):
        raise RangeError(
            f"backhaul_antenna_gain_dbi must be finite, got {s.backhaul_antenna_gain_dbi!r}"
        )
    _positive("demand_bps", s.demand_bps)
    if not (0.0 < s.link_efficiency <= 1.0):
        raise RangeError(f"link_efficiency must lie in (0, 1], got {s.link_efficiency!r}")
    _positive_int("n_steps", s.n_steps)
    _positive("step_seconds", s.step_seconds)
    _positive_int("n_montecarlo", s.n_montecarlo)
    _positive_int("fp_iterations", s.fp_iterations)

    lo, hi = s.user_speed_range_mps
    if not (0.0 <= lo <= hi):
        raise RangeError(
            f"user_speed_range_mps must satisfy 0 <= min <= max, got {s.user_speed_range_mps!r}"
        )
    _positive_int("user_dwell_steps", s.user_dwell_steps)
    if s.uav_speed_mps < 0:
        raise RangeError(f"uav_speed_mps must be >= 0, got {s.uav_speed_mps!r}")
    alt_lo, alt_hi = s.uav_alt_range_m
    if not (0.0 < alt_lo <= alt_hi):
        raise RangeError(
            f"uav_alt_range_m must satisfy 0 < min <= max, got {s.uav_alt_range_m!r}"
        )
    _positive("user_height_m", s.user_height_m)
    _positive("sbs_height_m", s.sbs_height_m)
    if s.min_sbs_separation_m < 0 or s.min_sbs_user_distance_m < 0:
        raise RangeError("minimum placement distances must be >= 0")

    w_f, w_l = s.reward_weights
    if w_f < 0 or w_l < 0:
        raise RangeError(f"reward_weights must both be >= 0, got {s.reward_weights!r}")
    if w_f + w_l <= 0:
        raise RangeError("reward_weights must not both be zero")

    if not isinstance(s.scheme, SchemeId):
        raise SchemeError(f"scheme must be a SchemeId, got {s.scheme!r}")
    if not isinstance(s.seed, int):
        raise RangeError(f"seed must be an integer, got {s.seed!r}")
    _check_algo_params(s.algo_params, s.scheme)
    return s


_PAIR_FIELDS = {"user_speed_range_mps", "uav_alt_range_m", "reward_weights"}


def scenario_to_dict(scenario: Scenario) -> dict[str, Any]:
    """Serialize a scenario to a JSON-compatible dictionary."""
    out: dict[str, Any] = {}
    for f in fields(Scenario):
        value = getattr(scenario, f.name)
        if f.name == "scheme":
            out[f.name] = value.value
        elif f.name == "algo_params":
            out[f.name] = dataclasses.asdict(value)
        elif f.name in _PAIR_FIELDS:
            out[f.name] = list(value)
        else:
            out[f.name] = value
    return out


def _coerce_pair(name: str, value: Any) -> tuple[float, float]:
    if not (isinstance(value, (list, tuple)) and len(value) == 2):
        raise ConfigError(f"{name} must be a pair [low, high], got {value!r}")
    a, b = value
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in (a, b)):
        raise ConfigError(f"{name} entries must be numbers, got {value!r}")
    return (float(a), float(b))


def scenario_from_dict(data: dict[str, Any]) -> Scenario:
    """Build and validate a scenario from a (possibly partial) dictionary.

    Unknown keys raise :class:`ConfigError` naming the offending key so
    typos in config files fail loudly instead of silently using a
    default.
    """
    if not isinstance(data, dict):
        raise ConfigError(f"scenario config must be an object, got {type(data).__name__}")
    known = {f.name for f in fields(Scenario)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown scenario key(s): {', '.join(unknown)}")

    kwargs: dict[str, Any] = {}
    for name, value in data.items():
        if name == "scheme":
            if isinstance(value, SchemeId):
                kwargs[name] = value
                continue
            try:
                kwargs[name] = SchemeId(value)
            except ValueError:
                valid = ", ".join(m.value for m in SchemeId)
                raise SchemeError(
                    f"unknown scheme {value!r}; valid schemes: {valid}"
                ) from None
        elif name == "algo_params":
            if isinstance(value, AlgoParams):
                kwargs[name] = value
                continue
            if not isinstance(value, dict):
                raise ConfigError("algo_params must be an object")
            ap_known = {f.name for f in fields(AlgoParams)}
            ap_unknown = sorted(set(value) - ap_known)
            if ap_unknown:
                raise ConfigError(f"unknown algo_params key(s): {', '.join(ap_unknown)}")
            kwargs[name] = AlgoParams(**value)
        elif name in _PAIR_FIELDS:
            kwargs[name] = _coerce_pair(name, value)
        else:
            kwargs[name] = value
    try:
        scenario = Scenario(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    return validate(scenario)


def load_config(path: str | Path) -> Scenario:
    """Load and validate a scenario from a JSON file."""
    p = Path(path)
    try:
        text = p.read_text()
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {p}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {p}: {exc}") from None
    return scenario_from_dict(data)


def save_config(scenario: Scenario, path: str | Path) -> None:
    """Write a scenario to ``path`` as indented JSON."""
    Path(path).write_text(json.dumps(scenario_to_dict(scenario), indent=2) + "\n")


def apply_overrides(scenario: Scenario, overrides: dict[str, Any]) -> Scenario:
    """Return a validated copy of ``scenario`` with some fields replaced.

    ``overrides`` may address nested algorithm parameters with the
    ``algo_params.<field>`` dotted form.
    """
    base = scenario_to_dict(scenario)
    for key, value in overrides.items():
        if key.startswith("algo_params."):
            sub = key.split(".", 1)[1]
            if not isinstance(base.get("algo_params"), dict):
                base["algo_params"] = {}
            base["algo_params"][sub] = value
        else:
            base[key] = value
    return scenario_from_dict(base)
