"""Geometry, mobility, UAV kinematics and the satellite ring."""

import math

import numpy as np
import pytest

from saginsim.environment import (
    PlacementError,
    SatelliteOrbit,
    UavAction,
    apply_uav_action,
    init_world,
    satellite_positions,
    step_users,
)
from saginsim.scenario import Scenario, validate


def rng(seed=0):
    return np.random.default_rng(seed)


def world_for(seed=0, **kw):
    sc = validate(Scenario(**kw))
    return init_world(sc, rng(seed)), sc


class TestPlacement:
    def test_sbs_pairwise_separation(self):
        for seed in range(10):
            world, sc = world_for(seed=seed)
            d = np.linalg.norm(
                world.sbs_xy[:, None, :] - world.sbs_xy[None, :, :], axis=2
            )
            off_diag = d[~np.eye(sc.n_sbs, dtype=bool)]
            assert off_diag.min() >= sc.min_sbs_separation_m

    def test_sbs_user_separation(self):
        world, sc = world_for(seed=3)
        d = np.linalg.norm(
            world.sbs_xy[:, None, :] - world.users_xy[None, :, :], axis=2
        )
        assert d.min() >= sc.min_sbs_user_distance_m

    def test_single_user_empty_network(self):
        world, _ = world_for(n_users=1, n_sbs=0, n_uavs=0)
        assert world.users_xy.shape == (1, 2)
        assert world.n_bs == 0

    def test_same_seed_identical_world(self):
        w1, _ = world_for(seed=9)
        w2, _ = world_for(seed=9)
        assert np.array_equal(w1.users_xy, w2.users_xy)
        assert np.array_equal(w1.sbs_xy, w2.sbs_xy)
        assert np.array_equal(w1.uav_pos, w2.uav_pos)
        assert np.array_equal(w1.channels, w2.channels)

    def test_impossible_separation_raises(self):
        sc = validate(Scenario(area_side_m=50.0, n_sbs=30, min_sbs_separation_m=40.0))
        with pytest.raises(PlacementError, match="SBS"):
            init_world(sc, rng(0))

    def test_uav_initial_positions_inside_box(self):
        for seed in range(5):
            world, sc = world_for(seed=seed, n_uavs=8)
            lo, hi = sc.uav_alt_range_m
            assert np.all(world.uav_pos[:, :2] >= 0.0)
            assert np.all(world.uav_pos[:, :2] <= sc.area_side_m)
            assert np.all(world.uav_pos[:, 2] >= lo)
            assert np.all(world.uav_pos[:, 2] <= hi)


class TestUserWalk:
    def test_zero_speed_frozen(self):
        world, sc = world_for(user_speed_range_mps=(0.0, 0.0))
        moved = step_users(world, sc, rng(1))
        assert np.array_equal(moved.users_xy, world.users_xy)

    def test_positions_stay_inside(self):
        world, sc = world_for(seed=2)
        r = rng(5)
        for _ in range(200):
            world = step_users(world, sc, r)
            assert world.users_xy.min() >= 0.0
            assert world.users_xy.max() <= sc.area_side_m

    def test_boundary_reflection(self):
        world, sc = world_for(n_users=1, n_sbs=0, n_uavs=0, user_dwell_steps=1000000,
                              user_speed_range_mps=(5.0, 5.0))
        # aim the user straight at the x=0 wall from 2 m away
        world.users_xy[0] = (2.0, 250.0)
        world.user_heading[0] = math.pi
        world.user_dwell[0] = 10
        moved = step_users(world, sc, rng(0))
        assert moved.users_xy[0, 0] == pytest.approx(3.0)
        assert moved.users_xy[0, 1] == pytest.approx(250.0)

    def test_speed_samples_match_uniform_mean(self):
        world, sc = world_for(n_users=2000)
        r = rng(11)
        samples = []
        for _ in range(30):
            world = step_users(world, sc, r)
            samples.append(world.user_speed.copy())
        v = np.concatenate(samples)
        lo, hi = sc.user_speed_range_mps
        mean = (lo + hi) / 2.0
        sigma_of_mean = (hi - lo) / math.sqrt(12.0) / math.sqrt(v.size)
        assert abs(v.mean() - mean) < 3.0 * sigma_of_mean


class TestUavKinematics:
    def test_up_clamped_at_ceiling(self):
        sc = validate(Scenario())
        pos = np.array([250.0, 250.0, 121.9])
        out = apply_uav_action(pos, UavAction.UP, sc)
        assert np.allclose(out, [250.0, 250.0, 121.9])

    def test_wall_clamp(self):
        sc = validate(Scenario())
        pos = np.array([0.0, 250.0, 60.0])
        out = apply_uav_action(pos, UavAction.MINUS_X, sc)
        assert np.allclose(out, [0.0, 250.0, 60.0])

    def test_plain_displacement(self):
        sc = validate(Scenario())
        pos = np.array([250.0, 250.0, 60.0])
        out = apply_uav_action(pos, UavAction.PLUS_Y, sc)
        assert np.allclose(out, [250.0, 260.0, 60.0])

    def test_random_action_sweep_stays_in_box(self):
        sc = validate(Scenario())
        r = rng(4)
        pos = np.array([10.0, 490.0, 30.0])
        actions = list(UavAction)
        for _ in range(500):
            pos = apply_uav_action(pos, actions[r.integers(len(actions))], sc)
            assert 0.0 <= pos[0] <= sc.area_side_m
            assert 0.0 <= pos[1] <= sc.area_side_m
            assert sc.uav_alt_range_m[0] <= pos[2] <= sc.uav_alt_range_m[1]


class TestOrbit:
    def test_phases_uniform_at_zero(self):
        sc = validate(Scenario())
        orbit = SatelliteOrbit.from_scenario(sc)
        expected = 2.0 * math.pi * np.arange(22) / 22
        assert np.allclose(orbit.phases_rad, expected)

    def test_period_matches_circular_orbit(self):
        sc = validate(Scenario())
        orbit = SatelliteOrbit.from_scenario(sc)
        # circular orbit at 550 km: T = 2*pi*sqrt(r^3/mu) ~ 5.74e3 s
        assert orbit.period_s == pytest.approx(5.74e3, rel=0.01)

    def test_full_period_returns_to_start(self):
        sc = validate(Scenario())
        orbit = SatelliteOrbit.from_scenario(sc)
        p0 = satellite_positions(orbit, 0.0)
        p1 = satellite_positions(orbit, orbit.period_s)
        # compare via phase: position difference bounded by r * dphase
        assert np.allclose(p0, p1, atol=orbit.orbit_radius_m * 1e-6)

    def test_single_satellite_advances_monotonically(self):
        sc = validate(Scenario(n_satellites=1))
        orbit = SatelliteOrbit.from_scenario(sc)
        w = orbit.angular_velocity_rad_s
        ts = np.arange(0.0, 100.0, 10.0)
        phases = orbit.phases_rad[0] + w * ts
        assert np.all(np.diff(phases) > 0)

    def test_overhead_satellite_altitude(self):
        sc = validate(Scenario())
        orbit = SatelliteOrbit.from_scenario(sc)
        p = satellite_positions(orbit, 0.0)
        # phase zero is directly overhead at the configured altitude
        assert p[0, 2] == pytest.approx(550e3)
        assert p[0, 0] == pytest.approx(250.0)
        # most of the ring is below the horizon
        assert (p[:, 2] < 0).sum() > 22 // 2
