"""World geometry and motion.

Pure functions over an immutable :class:`WorldState`: ground users do a
random walk with boundary reflection, UAV base stations move on a
seven-direction grid of fixed-length hops, small-cell base stations are
placed once with minimum-separation constraints and a ring of LEO
satellites circles overhead for backhaul.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from saginsim.scenario import Scenario

EARTH_RADIUS_M = 6.371e6
EARTH_MU = 3.986004418e14  # standard gravitational parameter, m^3/s^2

_PLACEMENT_ATTEMPTS = 10_000


class PlacementError(RuntimeError):
    """Raised when constrained base-station placement cannot be satisfied."""


class UavAction(enum.Enum):
    """One movement command; every hop covers uav_speed * step_seconds metres."""

    PLUS_X = 0
    MINUS_X = 1
    PLUS_Y = 2
    MINUS_Y = 3
    UP = 4
    DOWN = 5
    HOVER = 6


_ACTION_DELTAS = {
    UavAction.PLUS_X: np.array([1.0, 0.0, 0.0]),
    UavAction.MINUS_X: np.array([-1.0, 0.0, 0.0]),
    UavAction.PLUS_Y: np.array([0.0, 1.0, 0.0]),
    UavAction.MINUS_Y: np.array([0.0, -1.0, 0.0]),
    UavAction.UP: np.array([0.0, 0.0, 1.0]),
    UavAction.DOWN: np.array([0.0, 0.0, -1.0]),
    UavAction.HOVER: np.array([0.0, 0.0, 0.0]),
}

MOVES_2D = (
    UavAction.PLUS_X,
    UavAction.MINUS_X,
    UavAction.PLUS_Y,
    UavAction.MINUS_Y,
    UavAction.HOVER,
)
MOVES_3D = (
    UavAction.PLUS_X,
    UavAction.MINUS_X,
    UavAction.PLUS_Y,
    UavAction.MINUS_Y,
    UavAction.UP,
    UavAction.DOWN,
    UavAction.HOVER,
)


@dataclass(frozen=True)
class SatelliteOrbit:
    """Circular LEO ring crossing the zenith of the region centre.

    Satellites share one orbital plane; phase 0 is directly overhead.
    The ground-frame position maps the phase angle onto the x axis, so a
    satellite is visible while its mapped altitude is positive.
    """

    n_satellites: int
    altitude_m: float
    center_xy: tuple[float, float]
    phases_rad: np.ndarray  # initial phase of each satellite

    @property
    def orbit_radius_m(self) -> float:
        return EARTH_RADIUS_M + self.altitude_m

    @property
    def angular_velocity_rad_s(self) -> float:
        return math.sqrt(EARTH_MU / self.orbit_radius_m**3)

    @property
    def period_s(self) -> float:
        return 2.0 * math.pi / self.angular_velocity_rad_s

    @classmethod
    def from_scenario(cls, scenario: Scenario) -> "SatelliteOrbit":
        n = scenario.n_satellites
        phases = 2.0 * math.pi * np.arange(n) / n if n else np.zeros(0)
        c = scenario.area_side_m / 2.0
        return cls(
            n_satellites=n,
            altitude_m=scenario.satellite_altitude_m,
            center_xy=(c, c),
            phases_rad=phases,
        )


def satellite_positions(orbit: SatelliteOrbit, t_seconds: float) -> np.ndarray:
    """Ground-frame (x, y, h) of every satellite at time ``t_seconds``.

    Negative h means the satellite is below the horizon and unusable.
    """
    phases = orbit.phases_rad + orbit.angular_velocity_rad_s * t_seconds
    r = orbit.orbit_radius_m
    x = orbit.center_xy[0] + r * np.sin(phases)
    y = np.full_like(x, orbit.center_xy[1])
    h = r * np.cos(phases) - EARTH_RADIUS_M
    return np.stack([x, y, h], axis=1)


@dataclass(frozen=True)
class WorldState:
    """Snapshot of all mobile and static node positions.

    ``users_xy`` is (K, 2), ``sbs_xy`` (S, 2), ``uav_pos`` (U, 3) with
    altitude in the last column, ``channels`` one channel index per base
    station in SBS-then-UAV order.
    """

    users_xy: np.ndarray
    user_speed: np.ndarray
    user_heading: np.ndarray
    user_dwell: np.ndarray
    sbs_xy: np.ndarray
    uav_pos: np.ndarray
    channels: np.ndarray
    orbit: SatelliteOrbit

    @property
    def n_users(self) -> int:
        return self.users_xy.shape[0]

    @property
    def n_bs(self) -> int:
        return self.sbs_xy.shape[0] + self.uav_pos.shape[0]

    def bs_positions(self, scenario: Scenario) -> np.ndarray:
        """(B, 3) base-station positions, SBS rows first, then UAVs."""
        sbs = np.column_stack(
            [self.sbs_xy, np.full(self.sbs_xy.shape[0], scenario.sbs_height_m)]
        )
        return np.concatenate([sbs, self.uav_pos], axis=0)


def _place_sbs(scenario: Scenario, users_xy: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Rejection-sample SBS sites respecting the two minimum distances."""
    side = scenario.area_side_m
    placed: list[np.ndarray] = []
    for i in range(scenario.n_sbs):
        for _ in range(_PLACEMENT_ATTEMPTS):
            cand = rng.uniform(0.0, side, size=2)
            if placed:
                d_bs = np.linalg.norm(np.asarray(placed) - cand, axis=1)
                if d_bs.min() < scenario.min_sbs_separation_m:
                    continue
            if users_xy.size:
                d_u = np.linalg.norm(users_xy - cand, axis=1)
                if d_u.min() < scenario.min_sbs_user_distance_m:
                    continue
            placed.append(cand)
            break
        else:
            raise PlacementError(
                f"could not place SBS {i + 1}/{scenario.n_sbs} after "
                f"{_PLACEMENT_ATTEMPTS} attempts (separation "
                f"{scenario.min_sbs_separation_m} m in a {side} m square)"
            )
    return np.asarray(placed).reshape(scenario.n_sbs, 2)


def init_world(scenario: Scenario, rng: np.random.Generator) -> WorldState:
    """Draw the initial world: users, SBS sites, UAVs, channels, orbit.

    Users are uniform over the square; UAVs start uniform in the full
    flight box (2D schemes keep the drawn altitude for the whole run);
    channels are uniform per base station.
    """
    side = scenario.area_side_m
    k = scenario.n_users
    users_xy = rng.uniform(0.0, side, size=(k, 2))
    lo, hi = scenario.user_speed_range_mps
    speed = rng.uniform(lo, hi, size=k)
    heading = rng.uniform(0.0, 2.0 * math.pi, size=k)
    dwell = np.full(k, scenario.user_dwell_steps, dtype=np.int64)

    sbs_xy = _place_sbs(scenario, users_xy, rng)

    u = scenario.n_uavs
    uav_xy = rng.uniform(0.0, side, size=(u, 2))
    alt_lo, alt_hi = scenario.uav_alt_range_m
    uav_alt = rng.uniform(alt_lo, alt_hi, size=u)
    uav_pos = np.column_stack([uav_xy, uav_alt])

    n_bs = scenario.n_sbs + u
    channels = rng.integers(0, scenario.n_channels, size=n_bs)

    return WorldState(
        users_xy=users_xy,
        user_speed=speed,
        user_heading=heading,
        user_dwell=dwell,
        sbs_xy=sbs_xy,
        uav_pos=uav_pos,
        channels=channels,
        orbit=SatelliteOrbit.from_scenario(scenario),
    )


def step_users(world: WorldState, scenario: Scenario, rng: np.random.Generator) -> WorldState:
    """Advance the user random walk by one step and reflect at the border.

    Each user keeps its speed and heading for ``user_dwell_steps`` steps
    (one by default, so both are redrawn every step), then draws a fresh
    uniform speed and heading.
    """
    k = world.n_users
    if k == 0:
        return world
    speed = world.user_speed.copy()
    heading = world.user_heading.copy()
    dwell = world.user_dwell - 1
    expired = dwell <= 0
    n_new = int(expired.sum())
    if n_new:
        lo, hi = scenario.user_speed_range_mps
        speed[expired] = rng.uniform(lo, hi, size=n_new)
        heading[expired] = rng.uniform(0.0, 2.0 * math.pi, size=n_new)
        dwell = np.where(expired, scenario.user_dwell_steps, dwell)

    dist = speed * scenario.step_seconds
    xy = world.users_xy + np.column_stack([dist * np.cos(heading), dist * np.sin(heading)])

    side = scenario.area_side_m
    x, y = xy[:, 0], xy[:, 1]
    # mirror positions back into the square and flip the matching heading component
    for _ in range(16):
        out_lo = x < 0.0
        out_hi = x > side
        if not (out_lo.any() or out_hi.any()):
            break
        x = np.where(out_lo, -x, x)
        x = np.where(out_hi, 2.0 * side - x, x)
        heading = np.where(out_lo | out_hi, (math.pi - heading) % (2.0 * math.pi), heading)
    for _ in range(16):
        out_lo = y < 0.0
        out_hi = y > side
        if not (out_lo.any() or out_hi.any()):
            break
        y = np.where(out_lo, -y, y)
        y = np.where(out_hi, 2.0 * side - y, y)
        heading = np.where(out_lo | out_hi, (-heading) % (2.0 * math.pi), heading)

    return replace(
        world,
        users_xy=np.column_stack([x, y]),
        user_speed=speed,
        user_heading=heading,
        user_dwell=dwell,
    )


def apply_uav_action(
    pos: np.ndarray, action: UavAction, scenario: Scenario
) -> np.ndarray:
    """Move one UAV by a fixed-length hop and clamp to the service box."""
    hop = scenario.uav_speed_mps * scenario.step_seconds
    new = pos + hop * _ACTION_DELTAS[action]
    side = scenario.area_side_m
    lo, hi = scenario.uav_alt_range_m
    return np.array(
        [
            min(max(new[0], 0.0), side),
            min(max(new[1], 0.0), side),
            min(max(new[2], lo), hi),
        ]
    )
