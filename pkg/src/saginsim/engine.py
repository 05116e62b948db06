"""Simulation engine: scheme wiring, per-step pipeline, runs and campaigns.

Each step advances user mobility, lets the scheme pick UAV moves and
channel assignments, samples fresh channel gains, solves the coupled
load fixed point, converts loads into served rates (optionally capped
by satellite backhaul), scores fairness and per-BS rewards and feeds
those rewards back to the learning agents.

Every run is a pure function of (scenario, scheme, seed): randomness is
split into five named streams (placement, mobility, gains, channels,
policy) spawned from one seed, so replays are bit-identical and
non-learned channel draws do not disturb the policy stream.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Sequence

import numpy as np

from saginsim import radio
from saginsim.environment import (
    SatelliteOrbit,
    UavAction,
    WorldState,
    apply_uav_action,
    init_world,
    satellite_positions,
    step_users,
)
from saginsim.learners import (
    ActionSpace,
    DqnAgent,
    PsoSwarm,
    QLearner,
    SatisfactionAgent,
    UcbBandit,
)
from saginsim.scenario import AlgoParams, Scenario, SchemeId, validate


class NumericsError(RuntimeError):
    """A step produced a non-finite metric; the run cannot continue."""


def channel_bandwidth_hz(scenario: Scenario) -> float:
    """Bandwidth a single BS occupies: its share of the access band.

    The access band is split into orthogonal channels and every BS
    transmits on exactly one, so noise power integrates over the
    per-channel width.
    """
    return scenario.access_bandwidth_hz / scenario.n_channels


def effective_bandwidth_hz(scenario: Scenario) -> float:
    """Shannon prefactor of the access link.

    The per-channel width scaled by the link efficiency, which folds
    real-world losses against ideal Shannon capacity (coding gap,
    control overhead) into a single factor.
    """
    return channel_bandwidth_hz(scenario) * scenario.link_efficiency


@dataclass(frozen=True)
class MetricsRecord:
    """Per-step system metrics."""

    step: int
    outage_users: int
    mean_load: float
    mean_rate_bps: float
    fairness: float
    mean_reward: float
    fp_residual: float
    wall_clock_ms: float


@dataclass(frozen=True)
class RunResult:
    """A finished run: every step record plus over-time aggregates."""

    scenario: Scenario
    scheme: SchemeId
    seed: int
    records: list[MetricsRecord]
    aggregates: dict[str, float]
    runtime_s: float


@dataclass(frozen=True)
class RngStreams:
    """Independent named random streams of one run."""

    placement: np.random.Generator
    mobility: np.random.Generator
    gains: np.random.Generator
    channels: np.random.Generator
    policy: np.random.Generator

    @classmethod
    def from_seed(cls, seed: int) -> "RngStreams":
        children = np.random.SeedSequence(seed).spawn(5)
        return cls(*(np.random.default_rng(c) for c in children))


# ---------------------------------------------------------------------------
# controllers: one object per agent translating learner calls into actions


class _QControl:
    """Tabular Q-learning over a position grid with one cell per UAV hop."""

    def __init__(self, scenario: Scenario, space: ActionSpace) -> None:
        p = scenario.algo_params
        cell = max(scenario.uav_speed_mps * scenario.step_seconds, 1e-9)
        self.cell = cell
        self.grid_n = max(1, math.ceil(scenario.area_side_m / cell))
        self.space = space
        self.learner = QLearner(
            self.grid_n * self.grid_n,
            len(space),
            alpha=p.q_alpha,
            gamma=p.q_gamma,
            epsilon=p.epsilon,
        )
        self._pending: tuple[int, int] | None = None

    def _state(self, pos: np.ndarray) -> int:
        ix = min(int(pos[0] / self.cell), self.grid_n - 1)
        iy = min(int(pos[1] / self.cell), self.grid_n - 1)
        return ix * self.grid_n + iy

    def select(self, pos, t, rng) -> tuple[UavAction, int | None]:
        s = self._state(pos)
        a = self.learner.select(s, rng)
        self._pending = (s, a)
        return self.space.decode(a)

    def feedback(self, reward, new_pos, t, rng) -> None:
        s, a = self._pending
        self.learner.update(s, a, reward, self._state(new_pos))


class _BanditControl:
    """Stateless UCB over the flat action space."""

    def __init__(self, space: ActionSpace) -> None:
        self.space = space
        self.bandit = UcbBandit(len(space))
        self._pending: int | None = None

    def select(self, pos, t, rng) -> tuple[UavAction, int | None]:
        a = self.bandit.select()
        self._pending = a
        return self.space.decode(a)

    def feedback(self, reward, new_pos, t, rng) -> None:
        self.bandit.update(self._pending, reward)


class _SatisfactionControl:
    """Satisfaction learning; replays its action while the reward holds up."""

    def __init__(self, scenario: Scenario, space: ActionSpace) -> None:
        p = scenario.algo_params
        reward_max = sum(scenario.reward_weights)
        threshold = p.satisfaction_kappa0 if p.satisfaction_kappa0 is not None else reward_max
        self.space = space
        self.agent = SatisfactionAgent(
            len(space),
            threshold=threshold,
            decay=p.satisfaction_delta,
            decay_period=p.satisfaction_tau,
            reward_max=reward_max,
        )

    def select(self, pos, t, rng) -> tuple[UavAction, int | None]:
        return self.space.decode(self.agent.select(t, rng))

    def feedback(self, reward, new_pos, t, rng) -> None:
        self.agent.observe(reward, t)


class _DqnControl:
    """Deep Q agent observing the normalized 3D position."""

    def __init__(self, scenario: Scenario, space: ActionSpace, rng: np.random.Generator) -> None:
        p = scenario.algo_params
        self.space = space
        self.side = scenario.area_side_m
        self.alt_lo, self.alt_hi = scenario.uav_alt_range_m
        self.agent = DqnAgent(
            3,
            len(space),
            rng,
            hidden=p.dqn_hidden,
            replay=p.dqn_replay,
            batch=p.dqn_batch,
            lr=p.dqn_lr,
            gamma=p.dqn_gamma,
            epsilon=p.epsilon,
            target_sync=p.dqn_target_sync,
        )
        self._pending: tuple[np.ndarray, int] | None = None

    def _state(self, pos: np.ndarray) -> np.ndarray:
        span = max(self.alt_hi - self.alt_lo, 1e-9)
        return np.array(
            [pos[0] / self.side, pos[1] / self.side, (pos[2] - self.alt_lo) / span]
        )

    def select(self, pos, t, rng) -> tuple[UavAction, int | None]:
        s = self._state(pos)
        a = self.agent.act(s, rng)
        self._pending = (s, a)
        return self.space.decode(a)

    def feedback(self, reward, new_pos, t, rng) -> None:
        s, a = self._pending
        self.agent.remember(s, a, reward, self._state(new_pos))
        self.agent.train_step(rng)


class _PsoPlanner:
    """Plans all UAV positions jointly with one persistent particle swarm.

    The fitness of a candidate placement is the summed per-BS reward
    under a deterministic surrogate channel: LoS-probability-weighted
    median gains, interference weighted by the previous step's loads,
    and a single application of the load map instead of the full fixed
    point.  Personal and global bests persist across steps.
    """

    def __init__(self, scenario: Scenario, rng: np.random.Generator) -> None:
        p = scenario.algo_params
        self.scenario = scenario
        self.is_3d = scenario.scheme.is_3d
        u = scenario.n_uavs
        side = scenario.area_side_m
        alt_lo, alt_hi = scenario.uav_alt_range_m
        if self.is_3d:
            lower = np.tile([0.0, 0.0, alt_lo], u)
            upper = np.tile([side, side, alt_hi], u)
        else:
            lower = np.tile([0.0, 0.0], u)
            upper = np.tile([side, side], u)
        self.swarm = PsoSwarm(
            p.pso_population,
            lower,
            upper,
            rng,
            inertia=p.pso_inertia,
            c_personal=p.pso_c_personal,
            c_global=p.pso_c_global,
        )
        self.inner_iters = p.pso_inner_iters
        self.tx_w = radio.dbm_to_watts(scenario.tx_power_dbm)
        self.noise_w = radio.noise_power_w(
            scenario.noise_psd_dbm_hz, channel_bandwidth_hz(scenario)
        )

    def _decode(self, flat: np.ndarray, altitudes: np.ndarray) -> np.ndarray:
        u = self.scenario.n_uavs
        if self.is_3d:
            return flat.reshape(u, 3).copy()
        return np.column_stack([flat.reshape(u, 2), altitudes])

    def plan(
        self,
        world: WorldState,
        channels: np.ndarray,
        rho_prev: np.ndarray,
        rng: np.random.Generator,
    ) -> np.ndarray:
        sc = self.scenario
        k = world.n_users
        n_sbs = sc.n_sbs
        sbs_xyz = np.column_stack([world.sbs_xy, np.full(n_sbs, sc.sbs_height_m)])
        users_xy = world.users_xy
        fixed_alt = world.uav_pos[:, 2]
        mask = radio.cochannel_mask(np.asarray(channels)).astype(float)
        w_f, w_l = sc.reward_weights
        c_shannon = effective_bandwidth_hz(sc) / radio.LN2

        def evaluate(positions: np.ndarray) -> np.ndarray:
            n_p = positions.shape[0]
            if k == 0:
                return np.full(n_p, w_f + w_l * (n_sbs + sc.n_uavs))
            if self.is_3d:
                cand = positions.reshape(n_p, sc.n_uavs, 3)
            else:
                xy = positions.reshape(n_p, sc.n_uavs, 2)
                alt = np.broadcast_to(
                    fixed_alt[None, :, None], (n_p, sc.n_uavs, 1)
                )
                cand = np.concatenate([xy, alt], axis=2)
            bs = np.concatenate(
                [np.broadcast_to(sbs_xyz, (n_p, n_sbs, 3)), cand], axis=1
            )
            gains = radio.expected_gains(bs, users_xy, sc.user_height_m, n_sbs)
            rx = self.tx_w * gains
            assoc = np.argmax(rx, axis=1)
            serving = np.take_along_axis(rx, assoc[:, None, :], axis=1)[:, 0, :]
            weighted = rx * rho_prev[None, :, None]
            interference = np.einsum("pkb,pbk->pk", mask[assoc], weighted)
            sinr = serving / (interference + self.noise_w)
            capacity = c_shannon * np.log1p(sinr)
            with np.errstate(divide="ignore"):
                request = sc.demand_bps / capacity
            n_bs = bs.shape[1]
            offsets = np.arange(n_p)[:, None] * n_bs
            loads = np.bincount(
                (assoc + offsets).ravel(), weights=request.ravel(), minlength=n_p * n_bs
            ).reshape(n_p, n_bs)
            per_user = np.take_along_axis(loads, assoc, axis=1)
            with np.errstate(divide="ignore"):
                share = np.minimum(1.0, 1.0 / per_user)
            rates = np.minimum(sc.demand_bps * share, capacity)
            total = rates.sum(axis=1)
            sq = np.einsum("pk,pk->p", rates, rates)
            fair = np.where(sq > 0.0, total * total / (k * sq), 1.0)
            idle = (1.0 - np.minimum(loads, 1.0)).sum(axis=1)
            return w_f * fair * n_bs + w_l * idle

        for _ in range(self.inner_iters):
            self.swarm.iterate(evaluate, rng)
        return self._decode(self.swarm.global_best_position, fixed_alt)


@dataclass
class Policies:
    """All decision-making state of one run."""

    uav_controllers: list[Any] = field(default_factory=list)
    sbs_controllers: list[Any] = field(default_factory=list)
    planner: _PsoPlanner | None = None


def build_policies(scenario: Scenario, rng: np.random.Generator) -> Policies:
    """Instantiate the agents (or planner) the scheme calls for.

    In every learned-channel scheme the static SBSs run a channel-only
    agent of the same algorithm family as the UAVs.
    """
    scheme = scenario.scheme
    family = scheme.family
    if family == "pso":
        return Policies(planner=_PsoPlanner(scenario, rng))

    if scheme.learned_ca:
        uav_space = ActionSpace.composite(scheme.is_3d, scenario.n_channels)
        sbs_space = ActionSpace.channel_only(scenario.n_channels)
    else:
        uav_space = ActionSpace.trajectory(scheme.is_3d)
        sbs_space = None

    def make(space: ActionSpace):
        if family == "sat":
            return _SatisfactionControl(scenario, space)
        if family == "mab":
            return _BanditControl(space)
        if family == "qlearn":
            return _QControl(scenario, space)
        return _DqnControl(scenario, space, rng)

    uavs = [make(uav_space) for _ in range(scenario.n_uavs)]
    sbss = (
        [make(sbs_space) for _ in range(scenario.n_sbs)]
        if sbs_space is not None
        else []
    )
    return Policies(uav_controllers=uavs, sbs_controllers=sbss)


def _finite_or_raise(step: int, **metrics: float) -> None:
    for name, value in metrics.items():
        if not math.isfinite(value):
            raise NumericsError(f"step {step}: {name} is not finite ({value!r})")


def step_pipeline(
    world: WorldState,
    channels: np.ndarray,
    rho_prev: np.ndarray,
    policies: Policies,
    scenario: Scenario,
    streams: RngStreams,
    t: int,
) -> tuple[WorldState, np.ndarray, np.ndarray, MetricsRecord]:
    """Advance one step; returns (world', channels', loads, record)."""
    t0 = time.perf_counter()
    sc = scenario
    world = step_users(world, sc, streams.mobility)

    # decision phase: UAV moves, channel picks, or swarm planning
    uav_pos = world.uav_pos
    new_channels = channels
    if policies.planner is not None:
        uav_pos = policies.planner.plan(world, channels, rho_prev, streams.policy)
    elif policies.uav_controllers:
        uav_pos = uav_pos.copy()
        picks: list[int | None] = []
        for i, ctrl in enumerate(policies.uav_controllers):
            move, ch = ctrl.select(uav_pos[i], t, streams.policy)
            uav_pos[i] = apply_uav_action(uav_pos[i], move, sc)
            picks.append(ch)
        if sc.scheme.learned_ca:
            new_channels = channels.copy()
            for i, ch in enumerate(picks):
                new_channels[sc.n_sbs + i] = ch
    if sc.scheme.learned_ca and policies.sbs_controllers:
        if new_channels is channels:
            new_channels = channels.copy()
        sbs_h = sc.sbs_height_m
        for j, ctrl in enumerate(policies.sbs_controllers):
            pos = np.array([world.sbs_xy[j, 0], world.sbs_xy[j, 1], sbs_h])
            _, ch = ctrl.select(pos, t, streams.policy)
            new_channels[j] = ch
    if not sc.scheme.learned_ca:
        new_channels = streams.channels.integers(0, sc.n_channels, size=world.n_bs)

    world = replace(world, uav_pos=uav_pos, channels=new_channels)
    k = world.n_users
    b = world.n_bs

    # radio phase
    if b > 0 and k > 0:
        bs_pos = world.bs_positions(sc)
        gains = radio.gain_matrix(
            bs_pos,
            world.users_xy,
            sc.user_height_m,
            sc.n_sbs,
            streams.gains,
            shadowing=sc.shadowing_enabled,
        )
        assoc = radio.associate(gains)
        fp = radio.load_fixed_point(
            gains,
            assoc,
            new_channels,
            tx_power_w=radio.dbm_to_watts(sc.tx_power_dbm),
            noise_w=radio.noise_power_w(sc.noise_psd_dbm_hz, channel_bandwidth_hz(sc)),
            bandwidth_hz=effective_bandwidth_hz(sc),
            demand_bps=sc.demand_bps,
            n_iters=sc.fp_iterations,
        )
        rates = radio.served_rates(assoc, fp.rho_raw, fp.capacity, sc.demand_bps)
        if sc.backhaul_enabled:
            sat_pos = satellite_positions(world.orbit, t * sc.step_seconds)
            caps = radio.backhaul_capacities(
                bs_pos,
                sat_pos,
                tx_power_dbm=sc.tx_power_dbm,
                antenna_gain_dbi=sc.backhaul_antenna_gain_dbi,
                carrier_hz=sc.backhaul_carrier_hz,
                bandwidth_hz=sc.backhaul_bandwidth_hz,
                noise_psd_dbm_hz=sc.noise_psd_dbm_hz,
            )
            rates = radio.apply_backhaul_cap(rates, assoc, caps)
        loads = fp.rho
        residual = fp.residual
        fairness = radio.jain_fairness(rates)
        rewards = radio.reward(fairness, loads, sc.reward_weights)
        outage = radio.outage_count(rates, sc.demand_bps)
        mean_rate = float(rates.mean())
        mean_load = float(loads.mean())
        mean_reward = float(rewards.mean())
    else:
        loads = np.zeros(b)
        rewards = radio.reward(1.0, loads, sc.reward_weights)
        residual = 0.0
        fairness = 1.0
        outage = k
        mean_rate = 0.0
        mean_load = 0.0
        mean_reward = float(rewards.mean()) if b else 0.0

    # learning phase: each agent digests the reward of its own base station
    for i, ctrl in enumerate(policies.uav_controllers):
        ctrl.feedback(float(rewards[sc.n_sbs + i]), world.uav_pos[i], t, streams.policy)
    for j, ctrl in enumerate(policies.sbs_controllers):
        pos = np.array([world.sbs_xy[j, 0], world.sbs_xy[j, 1], sc.sbs_height_m])
        ctrl.feedback(float(rewards[j]), pos, t, streams.policy)

    _finite_or_raise(
        t,
        mean_load=mean_load,
        mean_rate_bps=mean_rate,
        fairness=fairness,
        mean_reward=mean_reward,
        fp_residual=residual,
    )
    record = MetricsRecord(
        step=t,
        outage_users=outage,
        mean_load=mean_load,
        mean_rate_bps=mean_rate,
        fairness=fairness,
        mean_reward=mean_reward,
        fp_residual=residual,
        wall_clock_ms=(time.perf_counter() - t0) * 1e3,
    )
    return world, new_channels, loads, record


AGGREGATE_FIELDS = (
    "outage_users",
    "mean_load",
    "mean_rate_bps",
    "fairness",
    "mean_reward",
    "fp_residual",
)


def run_once(
    scenario: Scenario,
    scheme: SchemeId | None = None,
    seed: int | None = None,
    observer: Callable[[int, WorldState, MetricsRecord], None] | None = None,
) -> RunResult:
    """Run one full simulation; deterministic in (scenario, scheme, seed).

    ``scheme`` and ``seed`` override the scenario fields when given.
    ``observer`` is called once per step with (step, world, record) and
    cannot alter the outcome.
    """
    overrides: dict[str, Any] = {}
    if scheme is not None:
        overrides["scheme"] = scheme
    if seed is not None:
        overrides["seed"] = seed
    sc = validate(replace(scenario, **overrides)) if overrides else validate(scenario)

    streams = RngStreams.from_seed(sc.seed)
    world = init_world(sc, streams.placement)
    policies = build_policies(sc, streams.policy)
    channels = world.channels
    rho_prev = np.zeros(world.n_bs)

    records: list[MetricsRecord] = []
    t_start = time.perf_counter()
    for t in range(1, sc.n_steps + 1):
        world, channels, rho_prev, record = step_pipeline(
            world, channels, rho_prev, policies, sc, streams, t
        )
        records.append(record)
        if observer is not None:
            observer(t, world, record)
    runtime = time.perf_counter() - t_start

    n = len(records)
    aggregates = {
        name: float(np.mean([getattr(r, name) for r in records])) if n else 0.0
        for name in AGGREGATE_FIELDS
    }
    aggregates["runtime_s"] = runtime
    return RunResult(
        scenario=sc,
        scheme=sc.scheme,
        seed=sc.seed,
        records=records,
        aggregates=aggregates,
        runtime_s=runtime,
    )


# ---------------------------------------------------------------------------
# campaigns


@dataclass(frozen=True)
class CellStats:
    """Aggregated metrics of one (sweep value, scheme) cell."""

    sweep_value: int
    scheme: SchemeId
    n_runs: int
    means: dict[str, float]
    stderrs: dict[str, float]


@dataclass(frozen=True)
class CampaignResult:
    """Outcome of a Monte-Carlo sweep over one scenario dimension."""

    sweep_name: str
    sweep_values: tuple[int, ...]
    schemes: tuple[SchemeId, ...]
    seeds: tuple[int, ...]
    cells: list[CellStats]
    runs: list[dict[str, Any]]
    failures: list[dict[str, Any]]


CAMPAIGN_METRICS = AGGREGATE_FIELDS + ("runtime_s",)


def campaign_seeds(master_seed: int, n_mc: int) -> tuple[int, ...]:
    """Derive the shared per-repetition seeds of a campaign."""
    state = np.random.SeedSequence(master_seed).generate_state(n_mc, dtype=np.uint64)
    return tuple(int(s) for s in state)


def run_campaign(
    scenario: Scenario,
    schemes: Sequence[SchemeId],
    sweep_name: str,
    sweep_values: Sequence[int],
    n_mc: int,
    master_seed: int | None = None,
    progress: Callable[[dict[str, Any]], None] | None = None,
) -> CampaignResult:
    """Monte-Carlo comparison of several schemes over a scenario sweep.

    Every (sweep value, scheme) cell reuses the same ``n_mc`` seeds, so
    scheme comparisons are paired and listing a scheme twice reproduces
    identical rows.  Runs that abort (placement or numerics failures)
    are recorded and skipped; the campaign continues.
    """
    if not schemes:
        raise ValueError("at least one scheme is required")
    if not sweep_values:
        raise ValueError("at least one sweep value is required")
    if not hasattr(scenario, sweep_name):
        raise ValueError(f"unknown sweep field: {sweep_name}")
    seeds = campaign_seeds(
        scenario.seed if master_seed is None else master_seed, n_mc
    )

    cells: list[CellStats] = []
    runs: list[dict[str, Any]] = []
    failures: list[dict[str, Any]] = []
    for value in sweep_values:
        for scheme in schemes:
            per_metric: dict[str, list[float]] = {m: [] for m in CAMPAIGN_METRICS}
            ok = 0
            for seed in seeds:
                sc = replace(scenario, **{sweep_name: value, "scheme": scheme, "seed": seed})
                try:
                    result = run_once(validate(sc))
                except Exception as exc:  # noqa: BLE001 - isolate failed runs
                    failures.append(
                        {
                            "sweep_value": value,
                            "scheme": scheme.value,
                            "seed": seed,
                            "error": f"{type(exc).__name__}: {exc}",
                        }
                    )
                    continue
                ok += 1
                row = {
                    "sweep_name": sweep_name,
                    "sweep_value": value,
                    "scheme": scheme.value,
                    "seed": seed,
                }
                for m in CAMPAIGN_METRICS:
                    per_metric[m].append(result.aggregates[m])
                    row[m] = result.aggregates[m]
                runs.append(row)
                if progress is not None:
                    progress(dict(row))
            means = {m: float(np.mean(v)) if v else math.nan for m, v in per_metric.items()}
            stderrs = {
                m: float(np.std(v, ddof=1) / math.sqrt(len(v))) if len(v) > 1 else 0.0
                for m, v in per_metric.items()
            }
            cells.append(
                CellStats(
                    sweep_value=value,
                    scheme=scheme,
                    n_runs=ok,
                    means=means,
                    stderrs=stderrs,
                )
            )
    return CampaignResult(
        sweep_name=sweep_name,
        sweep_values=tuple(sweep_values),
        schemes=tuple(schemes),
        seeds=seeds,
        cells=cells,
        runs=runs,
        failures=failures,
    )
