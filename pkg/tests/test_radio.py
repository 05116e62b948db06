"""Radio model: path loss, SINR, load fixed point, rates, fairness, backhaul."""

import math

import numpy as np
import pytest

from saginsim import radio
from saginsim.radio import (
    DegenerateGeometryError,
    apply_backhaul_cap,
    associate,
    backhaul_capacities,
    cochannel_mask,
    expected_gains,
    gain_matrix,
    jain_fairness,
    link_gain,
    load_fixed_point,
    outage_count,
    path_loss_db,
    reward,
    served_rates,
    sinr_matrix,
)


def rng(seed=0):
    return np.random.default_rng(seed)


class TestPathLoss:
    def test_terrestrial_los_reference(self):
        assert path_loss_db(1.0, True, False) == pytest.approx(61.4)

    def test_aerial_nlos_at_10m(self):
        # exponent 3 adds 30 dB per decade on top of the 61.4 dB reference
        assert path_loss_db(10.0, False, True) == pytest.approx(91.4)

    def test_terrestrial_nlos_slope(self):
        assert path_loss_db(100.0, False, False) == pytest.approx(72.0 + 29.2 * 2)

    def test_zero_distance_rejected(self):
        with pytest.raises(DegenerateGeometryError):
            path_loss_db(0.0, True, False)
        with pytest.raises(DegenerateGeometryError):
            link_gain([0.0, 0.0, 10.0], [0.0, 0.0, 10.0], True, rng())

    def test_shadowing_spread(self):
        n = 10**5
        z = rng(1).standard_normal(n)
        pl = path_loss_db(np.full(n, 50.0), np.ones(n, bool), np.zeros(n, bool), z)
        spread = pl.std(ddof=1)
        assert spread == pytest.approx(5.8, rel=0.02)

    def test_gain_below_reference_and_decaying(self):
        g = link_gain([0.0, 0.0, 121.9], [300.0, 300.0, 1.5], True, rng(2))
        ref_gain = 10.0 ** (-61.4 / 10.0)
        assert 0.0 < g.gain < ref_gain
        # averaged over draws the gain decays with distance
        near = [link_gain([0, 0, 50.0], [30, 0, 1.5], True, rng(s)).gain for s in range(200)]
        far = [link_gain([0, 0, 50.0], [400, 0, 1.5], True, rng(s)).gain for s in range(200)]
        assert np.mean(near) > np.mean(far)

    def test_gain_matrix_shapes_and_determinism(self):
        bs = np.array([[100.0, 100.0, 15.0], [400.0, 400.0, 60.0]])
        users = rng(3).uniform(0, 500, size=(40, 2))
        g1 = gain_matrix(bs, users, 1.5, 1, rng(7))
        g2 = gain_matrix(bs, users, 1.5, 1, rng(7))
        assert g1.shape == (2, 40)
        assert np.array_equal(g1, g2)
        assert np.all(g1 > 0)

    def test_expected_gains_match_average(self):
        # Monte Carlo over the drawn matrix converges to the analytic mix
        bs = np.array([[250.0, 250.0, 80.0]])
        users = np.array([[250.0, 150.0]])
        draws = []
        r = rng(11)
        for _ in range(20000):
            draws.append(gain_matrix(bs, users, 1.5, 0, r, shadowing=False)[0, 0])
        exp = expected_gains(bs, users, 1.5, 0)[0, 0]
        assert np.mean(draws) == pytest.approx(exp, rel=0.05)


class TestSinr:
    def test_single_bs_is_snr(self):
        gains = np.array([[1e-9, 2e-9]])
        s = sinr_matrix(gains, np.array([0]), np.array([1.0]), 0.25, 1e-12)
        assert np.allclose(s[0], 0.25 * gains[0] / 1e-12)

    def test_idle_interferer_no_effect(self):
        gains = np.array([[1e-9, 2e-9], [3e-9, 4e-9]])
        channels = np.array([0, 0])
        quiet = sinr_matrix(gains, channels, np.array([1.0, 0.0]), 0.25, 1e-12)
        assert np.allclose(quiet[0], 0.25 * gains[0] / 1e-12)

    def test_symmetric_full_load_near_zero_db(self):
        g = 1e-9
        gains = np.array([[g, g], [g, g]])
        s = sinr_matrix(gains, np.array([0, 0]), np.array([1.0, 1.0]), 0.25, 1e-20)
        assert np.allclose(s, 1.0, rtol=1e-6)


def bisect_symmetric_load(g_serv, g_int, tx_w, noise_w, bw, demand, users_per_bs):
    """Oracle: symmetric 2-BS fixed point rho = n * demand / C(rho) by bisection.

    Both BSs see the same geometry, so the fixed point is a scalar. The
    map is increasing in rho, hence h(rho) = f(rho) - rho has a unique
    root in (0, 1) when f(1) < 1.
    """

    def f(rho):
        sinr = tx_w * g_serv / (rho * tx_w * g_int + noise_w)
        cap = bw * math.log2(1.0 + sinr)
        return users_per_bs * demand / cap

    lo, hi = 0.0, 1.0
    assert f(hi) < hi, "oracle assumes an interior fixed point"
    for _ in range(200):
        mid = (lo + hi) / 2.0
        if f(mid) > mid:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0


class TestLoadFixedPoint:
    def test_single_bs_single_user(self):
        # C = 10 Mbps at the resulting loads, demand 1.8 Mbps -> rho = 0.18
        bw = 1e7 / math.log2(1.0 + 1.0)  # engineered so capacity is 10 Mbps at SINR 1
        gains = np.array([[1.0]])
        res = load_fixed_point(
            gains, np.array([0]), np.array([0]),
            tx_power_w=1.0, noise_w=1.0, bandwidth_hz=bw, demand_bps=1.8e6,
        )
        assert res.rho[0] == pytest.approx(0.18)
        assert res.rho_raw[0] == pytest.approx(0.18)
        assert res.capacity[0] == pytest.approx(1e7)

    def test_no_users(self):
        res = load_fixed_point(
            np.zeros((3, 0)), np.zeros(0, dtype=int), np.array([0, 1, 2]),
            tx_power_w=0.25, noise_w=1e-12, bandwidth_hz=1e7, demand_bps=1.8e6,
        )
        assert np.array_equal(res.rho, np.zeros(3))

    def test_empty_cell_zero_load(self):
        gains = np.array([[1e-9, 1e-9], [1e-13, 1e-13]])
        res = load_fixed_point(
            gains, np.array([0, 0]), np.array([0, 1]),
            tx_power_w=0.25, noise_w=1e-12, bandwidth_hz=1e7, demand_bps=1.8e6,
        )
        assert res.rho[1] == 0.0

    def test_two_bs_symmetric_matches_bisection(self):
        # mirrored geometry: each BS serves 5 users with identical links
        g_serv, g_int = 2e-10, 6e-11
        tx_w, noise_w, bw, demand, n = 0.25, 2e-13, 14e6, 1.8e6, 5
        gains = np.array(
            [[g_serv] * n + [g_int] * n, [g_int] * n + [g_serv] * n]
        )
        assoc = np.array([0] * n + [1] * n)
        res = load_fixed_point(
            gains, assoc, np.array([0, 0]),
            tx_power_w=tx_w, noise_w=noise_w, bandwidth_hz=bw, demand_bps=demand,
        )
        oracle = bisect_symmetric_load(g_serv, g_int, tx_w, noise_w, bw, demand, n)
        assert res.rho[0] == pytest.approx(oracle, abs=1e-6)
        assert res.rho[1] == pytest.approx(oracle, abs=1e-6)

    def test_iterates_monotone_nondecreasing(self):
        # run the clamped map by hand and check elementwise monotonicity
        r = rng(5)
        gains = 10 ** (-r.uniform(8, 13, size=(4, 30)))
        assoc = np.argmax(gains, axis=0)
        channels = np.array([0, 1, 0, 1])
        tx_w, noise_w = 0.25, 1e-13
        prev = np.zeros(4)
        for i in range(1, 40):
            res = load_fixed_point(
                gains, assoc, channels,
                tx_power_w=tx_w, noise_w=noise_w, bandwidth_hz=1.05e7,
                demand_bps=1.8e6, n_iters=i,
            )
            assert np.all(res.rho >= prev - 1e-15)
            prev = res.rho

    def test_converged_residual_tiny(self):
        r = rng(8)
        gains = 10 ** (-r.uniform(8, 13, size=(8, 150)))
        assoc = np.argmax(gains, axis=0)
        channels = r.integers(0, 4, size=8)
        res = load_fixed_point(
            gains, assoc, channels,
            tx_power_w=0.25, noise_w=1e-13, bandwidth_hz=1.05e7, demand_bps=1.8e6,
        )
        assert res.residual < 1e-9
        assert res.iterations <= 500


class TestServedRates:
    def test_underloaded_delivers_demand(self):
        rates = served_rates(np.array([0]), np.array([0.5]), np.array([5e7]), 1.8e6)
        assert rates[0] == pytest.approx(1.8e6)

    def test_overloaded_scales_proportionally(self):
        rates = served_rates(np.array([0]), np.array([2.0]), np.array([5e7]), 1.8e6)
        assert rates[0] == pytest.approx(0.9e6)

    def test_zero_capacity_zero_rate(self):
        rates = served_rates(np.array([0]), np.array([np.inf]), np.array([0.0]), 1.8e6)
        assert rates[0] == 0.0

    def test_capacity_cap_binds(self):
        rates = served_rates(np.array([0]), np.array([0.5]), np.array([1e6]), 1.8e6)
        assert rates[0] == pytest.approx(1e6)


class TestOutage:
    def test_no_outage_when_served(self):
        assert outage_count(np.array([1.8e6, 2e6]), 1.8e6) == 0

    def test_overloaded_cell_all_in_outage(self):
        rates = served_rates(np.zeros(5, dtype=int), np.array([2.0]), np.full(5, 5e7), 1.8e6)
        assert outage_count(rates, 1.8e6) == 5

    def test_empty(self):
        assert outage_count(np.zeros(0), 1.8e6) == 0


class TestFairness:
    def test_equal_rates_perfect(self):
        assert jain_fairness(np.full(7, 3.3e6)) == pytest.approx(1.0)

    def test_single_taker_worst(self):
        r = np.zeros(10)
        r[3] = 5e6
        assert jain_fairness(r) == pytest.approx(0.1)

    def test_hand_case(self):
        assert jain_fairness(np.array([1.0, 2.0, 3.0])) == pytest.approx(36.0 / 42.0)

    def test_all_zero_convention(self):
        assert jain_fairness(np.zeros(4)) == 1.0
        assert jain_fairness(np.zeros(0)) == 1.0


class TestReward:
    def test_maximum(self):
        assert reward(1.0, 0.0, (0.5, 0.5)) == pytest.approx(1.0)

    def test_minimum(self):
        assert reward(0.0, 1.0, (0.5, 0.5)) == pytest.approx(0.0)

    def test_hand_case(self):
        assert reward(0.8, 0.6, (0.5, 0.5)) == pytest.approx(0.6)

    def test_vectorized_over_loads(self):
        out = reward(1.0, np.array([0.0, 0.5, 1.0]), (0.5, 0.5))
        assert np.allclose(out, [1.0, 0.75, 0.5])


class TestBackhaul:
    def test_overhead_fspl(self):
        d = 550e3
        fspl = 20 * math.log10(4 * math.pi * d * 28e9 / radio.SPEED_OF_LIGHT)
        assert fspl == pytest.approx(176.2, abs=0.05)

    def test_nearer_satellite_selected(self):
        bs = np.array([[250.0, 250.0, 15.0]])
        sats = np.array([[250.0, 250.0, 550e3], [5e5, 250.0, 400e3]])
        caps_both = backhaul_capacities(
            bs, sats, tx_power_dbm=24.0, antenna_gain_dbi=80.0,
            carrier_hz=28e9, bandwidth_hz=1e8, noise_psd_dbm_hz=-174.0,
        )
        caps_near = backhaul_capacities(
            bs, sats[:1], tx_power_dbm=24.0, antenna_gain_dbi=80.0,
            carrier_hz=28e9, bandwidth_hz=1e8, noise_psd_dbm_hz=-174.0,
        )
        assert caps_both[0] == caps_near[0]

    def test_no_visible_satellite_zero_cap(self):
        bs = np.array([[250.0, 250.0, 15.0]])
        sats = np.array([[250.0, 250.0, -100e3]])
        caps = backhaul_capacities(
            bs, sats, tx_power_dbm=24.0, antenna_gain_dbi=80.0,
            carrier_hz=28e9, bandwidth_hz=1e8, noise_psd_dbm_hz=-174.0,
        )
        assert caps[0] == 0.0

    def test_cap_scales_cell_proportionally(self):
        rates = np.array([4e6, 4e6, 1e6])
        assoc = np.array([0, 0, 1])
        caps = np.array([4e6, 1e9])
        out = apply_backhaul_cap(rates, assoc, caps)
        assert np.allclose(out, [2e6, 2e6, 1e6])

    def test_generous_cap_no_effect(self):
        rates = np.array([4e6, 4e6])
        out = apply_backhaul_cap(rates, np.array([0, 0]), np.array([np.inf]))
        assert np.array_equal(out, rates)


class TestAssociation:
    def test_strongest_server_wins(self):
        gains = np.array([[1e-9, 5e-9], [2e-9, 1e-9]])
        assert np.array_equal(associate(gains), [1, 0])

    def test_cochannel_mask_excludes_self(self):
        m = cochannel_mask(np.array([0, 0, 1]))
        assert not m.diagonal().any()
        assert m[0, 1] and m[1, 0]
        assert not m[0, 2]
