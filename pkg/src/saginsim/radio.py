"""Radio links, load-coupled interference and the per-step rate pipeline.

Path loss follows a close-in reference model with distinct exponents
and shadowing spreads for terrestrial and aerial base stations, mixed
by a line-of-sight probability (elevation-driven sigmoid for aerial
links, distance-driven exponential decay for terrestrial ones).

Cell load couples through interference: busy neighbours interfere more,
which lowers rates, which raises loads.  The load map is a standard
interference function, so iterating it from zero load converges
monotonically to the minimal fixed point; :func:`load_fixed_point` runs
a fixed number of clamped iterations of that map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299792458.0
LN2 = math.log(2.0)

# close-in path loss: reference loss at 1 m, exponent, shadowing std (dB)
TERRESTRIAL_LOS = (61.4, 2.0, 5.8)
TERRESTRIAL_NLOS = (72.0, 2.92, 8.7)
AERIAL_LOS = (61.4, 2.0, 5.8)
AERIAL_NLOS = (61.4, 3.0, 8.7)

# elevation-angle sigmoid parameters for the air-to-ground LoS probability
ATG_SIGMOID_A = 9.61
ATG_SIGMOID_B = 0.16
# e-fold distance of the terrestrial LoS probability
TERRESTRIAL_LOS_SCALE_M = 150.0


class DegenerateGeometryError(ValueError):
    """Raised when a link has zero length and no path loss is defined."""


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) * 1e-3


def db_to_linear(db):
    return 10.0 ** (np.asarray(db) / 10.0)


def noise_power_w(noise_psd_dbm_hz: float, bandwidth_hz: float) -> float:
    """Thermal noise power over ``bandwidth_hz`` from a flat PSD in dBm/Hz."""
    return dbm_to_watts(noise_psd_dbm_hz) * bandwidth_hz


def terrestrial_los_probability(distance_m, scale_m: float = TERRESTRIAL_LOS_SCALE_M):
    """LoS probability of a ground-level link, decaying with distance."""
    return np.exp(-np.asarray(distance_m, dtype=float) / scale_m)


def aerial_los_probability(elevation_deg, a: float = ATG_SIGMOID_A, b: float = ATG_SIGMOID_B):
    """LoS probability of an air-to-ground link from the elevation angle."""
    theta = np.asarray(elevation_deg, dtype=float)
    return 1.0 / (1.0 + a * np.exp(-b * (theta - a)))


def path_loss_db(distance_m, los, aerial, shadow_z=None):
    """Close-in path loss in dB for distance >= 1 m links.

    ``los`` selects the LoS or NLoS parameter set, ``aerial`` the BS
    kind, and ``shadow_z`` (standard-normal draws, optional) adds
    lognormal shadowing scaled by the matching spread.
    All arguments broadcast.
    """
    d = np.asarray(distance_m, dtype=float)
    if np.any(d <= 0.0):
        raise DegenerateGeometryError("path loss undefined for zero-length link")
    los = np.asarray(los, dtype=bool)
    aerial = np.asarray(aerial, dtype=bool)
    log_d = np.log10(d)

    ref = np.where(
        aerial,
        np.where(los, AERIAL_LOS[0], AERIAL_NLOS[0]),
        np.where(los, TERRESTRIAL_LOS[0], TERRESTRIAL_NLOS[0]),
    )
    exp = np.where(
        aerial,
        np.where(los, AERIAL_LOS[1], AERIAL_NLOS[1]),
        np.where(los, TERRESTRIAL_LOS[1], TERRESTRIAL_NLOS[1]),
    )
    pl = ref + 10.0 * exp * log_d
    if shadow_z is not None:
        sigma = np.where(
            aerial,
            np.where(los, AERIAL_LOS[2], AERIAL_NLOS[2]),
            np.where(los, TERRESTRIAL_LOS[2], TERRESTRIAL_NLOS[2]),
        )
        pl = pl + sigma * np.asarray(shadow_z, dtype=float)
    return pl


@dataclass(frozen=True)
class LinkGain:
    """One sampled link: linear power gain plus the drawn LoS state."""

    gain: float
    los: bool
    path_loss_db: float


def link_gain(
    tx_pos: np.ndarray,
    rx_pos: np.ndarray,
    aerial: bool,
    rng: np.random.Generator,
    *,
    shadowing: bool = True,
) -> LinkGain:
    """Sample a single BS-to-user channel gain (scalar reference path).

    Draws the LoS state from the appropriate probability model, then the
    shadowing term.  ``aerial`` marks UAV transmitters, which use the
    elevation-angle LoS model and the aerial parameter set.
    """
    tx = np.asarray(tx_pos, dtype=float)
    rx = np.asarray(rx_pos, dtype=float)
    diff = tx - rx
    d = float(np.linalg.norm(diff))
    if d <= 0.0:
        raise DegenerateGeometryError("transmitter and receiver coincide")
    if aerial:
        horiz = float(np.hypot(diff[0], diff[1]))
        elev = math.degrees(math.atan2(abs(diff[2]), horiz))
        p_los = float(aerial_los_probability(elev))
    else:
        p_los = float(terrestrial_los_probability(d))
    los = bool(rng.random() < p_los)
    z = float(rng.standard_normal()) if shadowing else None
    pl = float(path_loss_db(d, los, aerial, z))
    return LinkGain(gain=10.0 ** (-pl / 10.0), los=los, path_loss_db=pl)


def gain_matrix(
    bs_pos: np.ndarray,
    users_xy: np.ndarray,
    user_height_m: float,
    n_terrestrial: int,
    rng: np.random.Generator,
    *,
    shadowing: bool = True,
) -> np.ndarray:
    """Sample the (B, K) matrix of linear channel gains for one step.

    ``bs_pos`` is (B, 3) with the first ``n_terrestrial`` rows static
    ground BSs and the rest aerial.  LoS states and shadowing are drawn
    independently per link; the rng consumes one uniform block and one
    normal block in that order, keeping replays bit-reproducible.
    """
    b = bs_pos.shape[0]
    k = users_xy.shape[0]
    if b == 0 or k == 0:
        return np.zeros((b, k))
    dx = bs_pos[:, 0][:, None] - users_xy[:, 0][None, :]
    dy = bs_pos[:, 1][:, None] - users_xy[:, 1][None, :]
    dh = bs_pos[:, 2][:, None] - user_height_m
    horiz_sq = dx * dx + dy * dy
    d = np.sqrt(horiz_sq + dh * dh)
    if np.any(d <= 0.0):
        raise DegenerateGeometryError("a base station coincides with a user")

    p_los = np.empty((b, k))
    if n_terrestrial:
        p_los[:n_terrestrial] = np.exp(-d[:n_terrestrial] / TERRESTRIAL_LOS_SCALE_M)
    if b > n_terrestrial:
        elev = np.degrees(
            np.arctan2(np.abs(dh[n_terrestrial:]), np.sqrt(horiz_sq[n_terrestrial:]))
        )
        p_los[n_terrestrial:] = 1.0 / (
            1.0 + ATG_SIGMOID_A * np.exp(-ATG_SIGMOID_B * (elev - ATG_SIGMOID_A))
        )
    los = rng.random((b, k)) < p_los
    z = rng.standard_normal((b, k)) if shadowing else None

    log_d = np.log10(d)
    pl = np.empty((b, k))
    nt = n_terrestrial
    pl[:nt] = np.where(
        los[:nt],
        TERRESTRIAL_LOS[0] + 10.0 * TERRESTRIAL_LOS[1] * log_d[:nt],
        TERRESTRIAL_NLOS[0] + 10.0 * TERRESTRIAL_NLOS[1] * log_d[:nt],
    )
    pl[nt:] = np.where(
        los[nt:],
        AERIAL_LOS[0] + 10.0 * AERIAL_LOS[1] * log_d[nt:],
        AERIAL_NLOS[0] + 10.0 * AERIAL_NLOS[1] * log_d[nt:],
    )
    if z is not None:
        sigma = np.where(los, TERRESTRIAL_LOS[2], TERRESTRIAL_NLOS[2])
        # the LoS and NLoS spreads coincide for both BS kinds
        pl += sigma * z
    return 10.0 ** (-pl / 10.0)


def expected_gains(
    bs_pos: np.ndarray,
    users_xy: np.ndarray,
    user_height_m: float,
    n_terrestrial: int,
) -> np.ndarray:
    """Deterministic LoS-probability-weighted gains without shadowing.

    ``bs_pos`` may carry leading batch axes, shape (..., B, 3); the
    result has shape (..., B, K).  Each link mixes the LoS and NLoS
    median gains by the LoS probability, giving a smooth surrogate of
    :func:`gain_matrix` suitable for planning and sanity checks.
    """
    bs_pos = np.asarray(bs_pos, dtype=float)
    users_xy = np.asarray(users_xy, dtype=float)
    dx = bs_pos[..., :, 0:1] - users_xy[:, 0]
    dy = bs_pos[..., :, 1:2] - users_xy[:, 1]
    dh = bs_pos[..., :, 2:3] - user_height_m
    horiz = np.sqrt(dx * dx + dy * dy)
    d = np.sqrt(horiz * horiz + dh * dh)
    if np.any(d <= 0.0):
        raise DegenerateGeometryError("a base station coincides with a user")
    log_d = np.log10(d)

    nt = n_terrestrial
    p_los = np.empty_like(d)
    p_los[..., :nt, :] = np.exp(-d[..., :nt, :] / TERRESTRIAL_LOS_SCALE_M)
    elev = np.degrees(np.arctan2(np.abs(dh[..., nt:, :]), horiz[..., nt:, :]))
    p_los[..., nt:, :] = 1.0 / (
        1.0 + ATG_SIGMOID_A * np.exp(-ATG_SIGMOID_B * (elev - ATG_SIGMOID_A))
    )

    g_los = np.empty_like(d)
    g_nlos = np.empty_like(d)
    g_los[..., :nt, :] = 10.0 ** (
        -(TERRESTRIAL_LOS[0] + 10.0 * TERRESTRIAL_LOS[1] * log_d[..., :nt, :]) / 10.0
    )
    g_nlos[..., :nt, :] = 10.0 ** (
        -(TERRESTRIAL_NLOS[0] + 10.0 * TERRESTRIAL_NLOS[1] * log_d[..., :nt, :]) / 10.0
    )
    g_los[..., nt:, :] = 10.0 ** (
        -(AERIAL_LOS[0] + 10.0 * AERIAL_LOS[1] * log_d[..., nt:, :]) / 10.0
    )
    g_nlos[..., nt:, :] = 10.0 ** (
        -(AERIAL_NLOS[0] + 10.0 * AERIAL_NLOS[1] * log_d[..., nt:, :]) / 10.0
    )
    return p_los * g_los + (1.0 - p_los) * g_nlos


def associate(gains: np.ndarray) -> np.ndarray:
    """Serve each user from the BS with the strongest received signal."""
    if gains.shape[0] == 0:
        raise ValueError("cannot associate users with zero base stations")
    return np.argmax(gains, axis=0)


def cochannel_mask(channels: np.ndarray) -> np.ndarray:
    """(B, B) boolean matrix: True where two distinct BSs share a channel."""
    same = channels[:, None] == channels[None, :]
    np.fill_diagonal(same, False)
    return same


def sinr_matrix(
    gains: np.ndarray,
    channels: np.ndarray,
    loads: np.ndarray,
    tx_power_w: float,
    noise_w: float,
) -> np.ndarray:
    """(B, K) SINR of every potential link under the given cell loads.

    Interference from BS j is its transmit power weighted by its load,
    counted only when j shares the channel of the target BS.
    """
    mask = cochannel_mask(np.asarray(channels))
    rx = tx_power_w * gains
    interference = (mask * loads[None, :]) @ rx
    return rx / (interference + noise_w)


@dataclass(frozen=True)
class LoadResult:
    """Outcome of the load fixed-point iteration.

    ``rho`` is clamped to [0, 1]; ``rho_raw`` is the unclamped load map
    evaluated at ``rho`` (values above 1 measure overload).  ``capacity``
    holds each user's serving-link Shannon rate at the final loads,
    ``residual`` the max-norm change of the last executed iteration.
    """

    rho: np.ndarray
    rho_raw: np.ndarray
    capacity: np.ndarray
    residual: float
    iterations: int


def load_fixed_point(
    gains: np.ndarray,
    assoc: np.ndarray,
    channels: np.ndarray,
    *,
    tx_power_w: float,
    noise_w: float,
    bandwidth_hz: float,
    demand_bps: float,
    n_iters: int = 500,
) -> LoadResult:
    """Iterate the clamped load map from zero load.

    Each iteration recomputes every user's serving-link SINR under the
    current loads, converts demand into a fractional resource request
    demand / rate, and sums requests per serving BS.  Iterating from
    zero the clamped sequence is elementwise non-decreasing; iteration
    stops early only when an iterate repeats bitwise, which leaves the
    result identical to running all ``n_iters`` rounds.
    """
    b = gains.shape[0]
    k = gains.shape[1]
    if k == 0 or b == 0:
        zeros_b = np.zeros(b)
        return LoadResult(zeros_b, zeros_b.copy(), np.zeros(k), 0.0, 0)

    rx = tx_power_w * gains
    serving = rx[assoc, np.arange(k)]
    mask = cochannel_mask(np.asarray(channels))
    # per-user row of co-channel interferer powers: (K, B)
    interferers = mask[assoc] * rx.T
    c0 = demand_bps * LN2 / bandwidth_hz

    def load_map(rho: np.ndarray) -> np.ndarray:
        sinr = serving / (interferers @ rho + noise_w)
        with np.errstate(divide="ignore"):
            request = c0 / np.log1p(sinr)
        return np.bincount(assoc, weights=request, minlength=b)

    rho = np.zeros(b)
    residual = 0.0
    iterations = 0
    for _ in range(n_iters):
        new = np.minimum(load_map(rho), 1.0)
        iterations += 1
        residual = float(np.max(np.abs(new - rho)))
        if np.array_equal(new, rho):
            break
        rho = new

    sinr = serving / (interferers @ rho + noise_w)
    capacity = bandwidth_hz / LN2 * np.log1p(sinr)
    with np.errstate(divide="ignore"):
        request = c0 / np.log1p(sinr)
    rho_raw = np.bincount(assoc, weights=request, minlength=b)
    return LoadResult(rho, rho_raw, capacity, residual, iterations)


def served_rates(
    assoc: np.ndarray,
    rho_raw: np.ndarray,
    capacity: np.ndarray,
    demand_bps: float,
) -> np.ndarray:
    """Effective delivered rate per user.

    A BS whose unclamped load exceeds 1 is oversubscribed and scales
    every request down proportionally; a served rate also never exceeds
    the link capacity.
    """
    k = assoc.shape[0]
    if k == 0:
        return np.zeros(0)
    over = rho_raw[assoc]
    with np.errstate(divide="ignore"):
        share = np.minimum(1.0, 1.0 / over)
    return np.minimum(demand_bps * share, capacity)


def backhaul_capacities(
    bs_pos: np.ndarray,
    sat_pos: np.ndarray,
    *,
    tx_power_dbm: float,
    antenna_gain_dbi: float,
    carrier_hz: float,
    bandwidth_hz: float,
    noise_psd_dbm_hz: float,
) -> np.ndarray:
    """Shannon capacity of each BS's best satellite backhaul link.

    Free-space path loss to the nearest visible satellite (mapped
    altitude above the BS); no visible satellite means zero capacity.
    """
    b = bs_pos.shape[0]
    if b == 0:
        return np.zeros(0)
    if sat_pos.shape[0] == 0:
        return np.zeros(b)
    diff = bs_pos[:, None, :] - sat_pos[None, :, :]
    d = np.sqrt((diff * diff).sum(axis=2))
    visible = sat_pos[:, 2][None, :] > bs_pos[:, 2][:, None]
    d = np.where(visible, d, np.inf)
    best = d.min(axis=1)
    reachable = np.isfinite(best)
    caps = np.zeros(b)
    if reachable.any():
        fspl_db = 20.0 * np.log10(4.0 * math.pi * best[reachable] * carrier_hz / SPEED_OF_LIGHT)
        rx_dbm = tx_power_dbm + antenna_gain_dbi - fspl_db
        noise_dbm = noise_psd_dbm_hz + 10.0 * math.log10(bandwidth_hz)
        snr = 10.0 ** ((rx_dbm - noise_dbm) / 10.0)
        caps[reachable] = bandwidth_hz * np.log1p(snr) / LN2
    return caps


def apply_backhaul_cap(
    rates: np.ndarray, assoc: np.ndarray, caps: np.ndarray
) -> np.ndarray:
    """Scale each cell's served rates so their sum fits its backhaul."""
    if rates.size == 0:
        return rates
    sums = np.bincount(assoc, weights=rates, minlength=caps.shape[0])
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = np.where(sums > 0.0, np.minimum(1.0, caps / sums), 1.0)
    return rates * factor[assoc]


def outage_count(rates: np.ndarray, demand_bps: float) -> int:
    """Number of users whose served rate falls short of the demand."""
    return int(np.count_nonzero(rates < demand_bps))


def jain_fairness(rates: np.ndarray) -> float:
    """Jain's index (sum r)^2 / (K sum r^2); 1.0 for empty or all-zero input."""
    r = np.asarray(rates, dtype=float)
    k = r.size
    if k == 0:
        return 1.0
    denom = k * float(r @ r)
    if denom == 0.0:
        return 1.0
    total = float(r.sum())
    return total * total / denom


def reward(fairness: float, load, weights: tuple[float, float]):
    """Per-BS reward: weighted fairness plus weighted idle-capacity term."""
    w_f, w_l = weights
    return w_f * fairness + w_l * (1.0 - np.asarray(load, dtype=float))
