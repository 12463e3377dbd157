"""Synthetic subjects: bot search policies and ground-truth trust generators.

Bots play trials through legal key-input traces (replaying the trace through
the spotlight kinematics reproduces their logged positions bit-exactly) and
answer the inter-trial questionnaire from generator models, so the analysis
pipeline can be exercised end to end without humans. They also provide the
parameter-recovery ground truth for the estimators.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .design import ExperimentPlan
from .rng import derive_seed, generator
from .sim import (
    KEY_DOWN,
    KEY_LEFT,
    KEY_RIGHT,
    KEY_UP,
    Path,
    TrialConfig,
    WorldConfig,
    as_path,
    cell_center,
    count_intersections,
    n_frames,
    simulate_keys,
    subject_start,
)
from .ts.arma import is_invertible, is_stationary, simulate_arma
from .ts.series import TrustSeries, plan_exog


@dataclass(frozen=True)
class ArmavParams:
    """Lagged trust/performance/fault recursion coefficients.

    trust(t) = phi1*trust(t-1) + a1*perf(t) + a1*phi2*perf(t-1)
             + a2*fault(t) + a2*phi3*fault(t-1) + noise(t)
    """

    phi1: float
    phi2: float
    phi3: float
    a1: float
    a2: float
    noise_sd: float

    def validate(self) -> None:
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be >= 0")
        if abs(self.phi1) >= 1:
            raise ValueError("|phi1| must be < 1 for a stable recursion")


def gen_trust_armav(
    params: ArmavParams,
    performance: np.ndarray,
    fault: np.ndarray,
    seed: int,
) -> np.ndarray:
    """Run the lagged recursion over aligned performance/fault series with
    seeded Gaussian noise. Pre-sample values are zero."""
    params.validate()
    performance = np.asarray(performance, dtype=np.float64)
    fault = np.asarray(fault, dtype=np.float64)
    if len(performance) != len(fault):
        raise ValueError("performance and fault series must have equal length")
    n = len(performance)
    noise = generator(seed).normal(0.0, params.noise_sd, size=n) if params.noise_sd > 0 else np.zeros(n)
    trust = np.empty(n)
    prev_trust = prev_perf = prev_fault = 0.0
    for t in range(n):
        trust[t] = (
            params.phi1 * prev_trust
            + params.a1 * performance[t]
            + params.a1 * params.phi2 * prev_perf
            + params.a2 * fault[t]
            + params.a2 * params.phi3 * prev_fault
            + noise[t]
        )
        prev_trust, prev_perf, prev_fault = trust[t], performance[t], fault[t]
    return trust


@dataclass(frozen=True)
class SyntheticTrustParams:
    """Ground truth for the regression-with-ARIMA-errors generator.

    ``beta`` holds the three capability levels' trust means in ascending
    capability order; ``init_noise`` seeds the disturbance recursion with a
    pre-sample value (useful for noise-free transient tests).
    """

    beta: tuple[float, float, float]
    phi: tuple[float, ...] = ()
    theta: tuple[float, ...] = ()
    d: int = 0
    noise_sd: float = 0.05
    init_noise: float = 0.0

    def validate(self) -> None:
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be >= 0")
        if self.d not in (0, 1):
            raise ValueError("d must be 0 or 1")
        if not (self.beta[0] <= self.beta[1] <= self.beta[2]):
            raise ValueError("beta must ascend with capability")
        if not is_stationary(np.array(self.phi)):
            raise ValueError(f"nonstationary phi {self.phi}")
        if not is_invertible(np.array(self.theta)):
            raise ValueError(f"noninvertible theta {self.theta}")


def gen_trust_arimax(
    params: SyntheticTrustParams,
    plan: ExperimentPlan,
    seed: int,
    n_trials: Optional[int] = None,
) -> TrustSeries:
    """Simulate trust over the plan's capability sequence (tiled to n_trials
    when longer runs are needed), clamped to [0, 1]."""
    params.validate()
    exog = plan_exog(plan, n_trials)
    n = len(exog)
    mean = exog[:, :3] @ np.asarray(params.beta)
    eps = generator(seed).normal(0.0, params.noise_sd, size=n) if params.noise_sd > 0 else np.zeros(n)
    eta = simulate_arma(eps, np.array(params.phi), np.array(params.theta), init=params.init_noise)
    if params.d == 1:
        eta = np.cumsum(eta)
    values = np.clip(mean + eta, 0.0, 1.0)
    return TrustSeries(values=values, exog=exog, group=plan.group)


# --- Bot players ----------------------------------------------------------


class BotKind(enum.Enum):
    LAWNMOWER_COMPLEMENT = "lawnmower_complement"
    RANDOM_WALK = "random_walk"
    OVERLAPPER = "overlapper"


@dataclass(frozen=True)
class BotPolicy:
    kind: BotKind
    skill: float = 1.0

    def validate(self) -> None:
        if not 0.0 <= self.skill <= 1.0:
            raise ValueError("skill must be in [0, 1]")


def _coast_distance(v: float, world: WorldConfig) -> float:
    """Distance an axis travels after release (geometric damping decay)."""
    return v * world.dt * world.damping / (1.0 - world.damping)


def _keys_toward(
    pos: tuple[float, float],
    vel: tuple[float, float],
    target: tuple[float, float],
    world: WorldConfig,
    tol: float = 1.0,
) -> int:
    """Bang-bang waypoint tracking: press toward where we would stop short of
    the target, release inside the tolerance band."""
    keys = 0
    for axis, neg, posk in ((0, KEY_LEFT, KEY_RIGHT), (1, KEY_UP, KEY_DOWN)):
        err = target[axis] - (pos[axis] + _coast_distance(vel[axis], world))
        if err > tol:
            keys |= posk
        elif err < -tol:
            keys |= neg
    return keys


def _step_scalar(
    x: float, y: float, vx: float, vy: float,
    fx: float, fy: float, inx: bool, iny: bool,
    world: WorldConfig,
) -> tuple[float, float, float, float]:
    """One tick of the spotlight kinematics; same expressions as the kernels,
    so controller-side prediction matches kernel replay bit-exactly."""
    dt, damping = world.dt, world.damping
    if inx:
        vx = vx + fx * dt
    else:
        vx = vx * damping
    if iny:
        vy = vy + fy * dt
    else:
        vy = vy * damping
    speed2 = vx * vx + vy * vy
    ms2 = world.max_speed * world.max_speed
    if speed2 > ms2:
        scale = world.max_speed / math.sqrt(speed2)
        vx = vx * scale
        vy = vy * scale
    x = x + vx * dt
    y = y + vy * dt
    if x < 0.0:
        x = 0.0
        vx = 0.0
    elif x > world.field_size:
        x = world.field_size
        vx = 0.0
    if y < 0.0:
        y = 0.0
        vy = 0.0
    elif y > world.field_size:
        y = world.field_size
        vy = 0.0
    return x, y, vx, vy


def _complement_waypoints(world: WorldConfig) -> list[tuple[float, float]]:
    """Bottom-up boustrophedon: covers the field in the opposite row order to
    the searcher's sweep."""
    half = world.cell_pitch / 2.0
    lo = half
    hi = half + (world.grid_dim - 1) * world.cell_pitch
    pts = []
    for i, row in enumerate(range(world.grid_dim - 1, -1, -1)):
        y = half + row * world.cell_pitch
        if i % 2 == 0:
            pts.append((hi, y))
            pts.append((lo, y))
        else:
            pts.append((lo, y))
            pts.append((hi, y))
    return pts


def bot_keys(
    policy: BotPolicy,
    trial: TrialConfig,
    world: WorldConfig,
    seed: int,
    searcher: Optional[Path] = None,
) -> np.ndarray:
    """Generate the bot's per-tick key masks for one trial."""
    policy.validate()
    n = n_frames(world.trial_duration, world.tick_rate) - 1
    rng = generator(seed, trial.trial_index)
    keys = np.zeros(n, dtype=np.uint8)

    kind = policy.kind
    if kind is BotKind.OVERLAPPER and searcher is None:
        kind = BotKind.RANDOM_WALK  # solo trials have nobody to shadow

    if kind is BotKind.RANDOM_WALK:
        t = 0
        while t < n:
            hold = int(rng.integers(5, 21))
            mask = int(rng.integers(0, 16))
            keys[t : t + hold] = mask
            t += hold
        return keys

    x, y = subject_start(world)
    vx = vy = 0.0
    if kind is BotKind.LAWNMOWER_COMPLEMENT:
        waypoints = _complement_waypoints(world)
        wp = 0
        for t in range(n):
            tx, ty = waypoints[wp]
            if math.hypot(tx - x, ty - y) < 25.0 and wp < len(waypoints) - 1:
                wp += 1
                tx, ty = waypoints[wp]
            k = _keys_toward((x, y), (vx, vy), (tx, ty), world)
            keys[t] = k
            fx = (world.accel if k & KEY_RIGHT else 0.0) - (world.accel if k & KEY_LEFT else 0.0)
            fy = (world.accel if k & KEY_DOWN else 0.0) - (world.accel if k & KEY_UP else 0.0)
            x, y, vx, vy = _step_scalar(
                x, y, vx, vy, fx, fy, bool(k & (KEY_LEFT | KEY_RIGHT)), bool(k & (KEY_UP | KEY_DOWN)), world
            )
        return keys

    # Overlapper: shadow the searcher a few frames ahead of its known path.
    assert searcher is not None
    lookahead = 3
    for t in range(n):
        target_idx = min(t + lookahead, len(searcher) - 1)
        tx, ty = float(searcher.pos[target_idx, 0]), float(searcher.pos[target_idx, 1])
        k = _keys_toward((x, y), (vx, vy), (tx, ty), world)
        keys[t] = k
        fx = (world.accel if k & KEY_RIGHT else 0.0) - (world.accel if k & KEY_LEFT else 0.0)
        fy = (world.accel if k & KEY_DOWN else 0.0) - (world.accel if k & KEY_UP else 0.0)
        x, y, vx, vy = _step_scalar(
            x, y, vx, vy, fx, fy, bool(k & (KEY_LEFT | KEY_RIGHT)), bool(k & (KEY_UP | KEY_DOWN)), world
        )
    return keys


@dataclass
class BotTrialResult:
    keys: np.ndarray
    path: Path
    found_count: int
    total_estimate: int


def bot_play_trial(
    policy: BotPolicy,
    trial: TrialConfig,
    world: WorldConfig,
    seed: int,
    searcher: Optional[Path] = None,
    as_reported: Optional[int] = None,
) -> BotTrialResult:
    """Play one trial: a legal key trace plus the bot's task answers.

    found_count is the bot's own intersected count thinned by skill; the
    total estimate adds the searcher's report on the assumption the two
    split the field evenly.
    """
    if searcher is None:
        searcher = as_path(trial, world)
    keys = bot_keys(policy, trial, world, seed, searcher)
    path = simulate_keys(subject_start(world), (0.0, 0.0), keys, world)
    intersected = count_intersections(path, trial.outlier_cells, world)
    if policy.skill >= 1.0:
        found = intersected
    elif policy.skill <= 0.0:
        found = 0
    else:
        found = int(generator(seed, trial.trial_index, 1).binomial(intersected, policy.skill))
    estimate = found + (as_reported or 0)
    return BotTrialResult(keys=keys, path=path, found_count=found, total_estimate=estimate)


# --- Bot survey answering --------------------------------------------------

_STRATEGY_FAMILIARITY = {"lawnmower": 0.85, "omniscient": 0.5, "random": 0.3}


@dataclass
class BotMind:
    """Keeps a bot's trust state across a session via the lagged recursion."""

    armav: ArmavParams
    seed: int
    _trust: float = 0.0
    _prev_perf: float = 0.0
    _prev_fault: float = 0.0
    _step: int = 0

    def rate(self, reported: int, truth: int, color: str) -> tuple[int, int, int]:
        """Update trust from this trial's report and produce the three Likert
        ratings (strategy familiarity, reliability, trust)."""
        perf = min(reported / truth, 1.0) if truth > 0 else 0.0
        fault = 1.0 if reported == 0 else 0.0
        rng = generator(self.seed, 3, self._step)
        noise = rng.normal(0.0, self.armav.noise_sd, size=3) if self.armav.noise_sd > 0 else np.zeros(3)
        self._trust = (
            self.armav.phi1 * self._trust
            + self.armav.a1 * perf
            + self.armav.a1 * self.armav.phi2 * self._prev_perf
            + self.armav.a2 * fault
            + self.armav.a2 * self.armav.phi3 * self._prev_fault
            + noise[0]
        )
        self._prev_perf, self._prev_fault = perf, fault
        self._step += 1
        familiarity = _STRATEGY_FAMILIARITY["random"] + noise[1]
        reliability = perf + noise[2]
        return (
            _to_likert(familiarity),
            _to_likert(reliability),
            _to_likert(self._trust),
        )


def _to_likert(value: float) -> int:
    """Quantize a unit-interval value onto the 1..9 scale."""
    return int(round(1 + 8 * min(max(value, 0.0), 1.0)))


# --- Driving the experiment service ----------------------------------------


class SimClock:
    """Deterministic clock for bot cohorts; the service reads it via call."""

    def __init__(self, start: float = 1_700_000_000.0):
        self.now = start

    def __call__(self) -> float:
        return self.now

    def advance(self, dt: float) -> None:
        self.now += dt


_COHORT_POLICIES = (
    BotKind.OVERLAPPER,
    BotKind.LAWNMOWER_COMPLEMENT,
    BotKind.RANDOM_WALK,
)


def run_bot_session(
    service,
    policy: BotPolicy,
    armav: ArmavParams,
    seed: int,
    clock: Optional[SimClock] = None,
    inter_trial_gap: float = 8.0,
):
    """Play a complete session against the service, exactly as a browser
    client would: fetch trial, upload frames, read the report, submit the
    survey. Returns the session record."""
    from .design import SurveyResponse  # local import keeps module load light

    rec = service.create_session(synthetic=True)
    world = service.world
    mind = BotMind(armav=armav, seed=seed)
    total = len(service.plan_for(rec.group).practice) + 63
    for k in range(total):
        payload = service.get_trial(rec.session_id, k)
        outliers = frozenset(tuple(c) for c in payload["outliers"])
        pseudo = TrialConfig(trial_index=k, rng_seed=0, outlier_cells=outliers)
        searcher = None
        if payload["as_path"] is not None:
            ap = np.asarray(payload["as_path"], dtype=np.float64)
            searcher = Path(
                times=np.arange(len(ap)) / world.tick_rate,
                pos=ap,
                vel=np.zeros_like(ap),
            )
        keys = bot_keys(policy, pseudo, world, seed, searcher)
        path = simulate_keys(subject_start(world), (0.0, 0.0), keys, world)
        if clock:
            clock.advance(world.trial_duration)
        upload = service.upload_frames(
            rec.session_id,
            k,
            {"keys": [int(v) for v in keys] + [0], "pos": path.pos.tolist(), "vel": path.vel.tolist()},
            final=True,
        )
        reported = upload.get("as_report")

        intersected = count_intersections(path, outliers, world)
        if policy.skill >= 1.0:
            found = intersected
        elif policy.skill <= 0.0:
            found = 0
        else:
            found = int(generator(seed, k, 1).binomial(intersected, policy.skill))
        estimate = found + (reported or 0)
        truth = len(outliers)
        likert: tuple[int, ...] = ()
        if not payload["solo"]:
            assert reported is not None
            likert = mind.rate(reported, truth, payload["color"])
        if clock:
            clock.advance(inter_trial_gap)
        survey = SurveyResponse(
            trial_index=k,
            found_count=found,
            total_estimate=estimate,
            likert=likert,
            timestamp=clock() if clock else 0.0,
        )
        service.submit_survey(rec.session_id, k, survey)
    return service.session(rec.session_id)


def run_bot_cohort(service, n_sessions: int, base_seed: int, clock: Optional[SimClock] = None):
    """Create n bot sessions with varied policies and trust temperaments."""
    records = []
    for i in range(n_sessions):
        rng = generator(base_seed, i)
        kind = _COHORT_POLICIES[i % len(_COHORT_POLICIES)]
        policy = BotPolicy(kind=kind, skill=float(rng.uniform(0.6, 1.0)))
        armav = ArmavParams(
            phi1=float(rng.uniform(0.3, 0.7)),
            phi2=float(rng.uniform(-0.2, 0.2)),
            phi3=float(rng.uniform(-0.2, 0.2)),
            a1=float(rng.uniform(0.3, 0.6)),
            a2=float(rng.uniform(-0.4, -0.1)),
            noise_sd=float(rng.uniform(0.02, 0.08)),
        )
        records.append(
            run_bot_session(service, policy, armav, derive_seed(base_seed, i, 7), clock=clock)
        )
    return records
