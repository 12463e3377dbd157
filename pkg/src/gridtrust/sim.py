"""Deterministic fixed-timestep simulation of the grid-search task.

World geometry, spotlight force-control kinematics, the three searcher
strategies, outlier intersection counting, and capability-based reporting.
Everything here is a pure function of (seed, config, inputs): identical
inputs give bit-identical frame sequences, which the data service relies on
to validate uploaded trajectories by replay.

Coordinates are screen-style: x grows right, y grows down, origin at the
top-left corner of the field. A trajectory is stored as the initial state
plus one state per tick, so a 20 s trial at 30 Hz has 601 frames; the key
mask at index i is the input that produced frame i+1.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np

from . import _kernels
from .rng import TRIAL_MOTION, TRIAL_OUTLIERS, generator

# Key mask bits (arrow keys).
KEY_UP = 1
KEY_DOWN = 2
KEY_LEFT = 4
KEY_RIGHT = 8


class Strategy(enum.Enum):
    LAWNMOWER = "lawnmower"
    RANDOM = "random"
    OMNISCIENT = "omniscient"


class Capability(enum.Enum):
    """Reported fraction of the searcher's own intersected count."""

    C20 = (1, 5)
    C50 = (1, 2)
    C100 = (1, 1)

    @property
    def fraction(self) -> float:
        num, den = self.value
        return num / den


class Color(enum.Enum):
    BLUE = "blue"
    ORANGE = "orange"
    YELLOW = "yellow"


# Fixed bijection for the whole experiment: capability is signaled to
# subjects only through this color.
CAPABILITY_COLOR = {
    Capability.C20: Color.BLUE,
    Capability.C50: Color.ORANGE,
    Capability.C100: Color.YELLOW,
}


@dataclass(frozen=True)
class WorldConfig:
    """Geometry, timing and kinematic constants shared by all trials."""

    field_size: float = 700.0
    grid_dim: int = 7
    cell_pitch: float = 100.0
    outlier_radius: float = 20.0
    agent_radius: float = 40.0
    tick_rate: int = 30
    trial_duration: float = 20.0
    warning_lead: float = 5.0
    accel: float = 600.0
    damping: float = 0.85
    max_speed: float = 192.0

    def validate(self) -> None:
        if self.grid_dim < 1 or self.cell_pitch <= 0 or self.field_size <= 0:
            raise ValueError("grid geometry must be positive")
        if abs(self.field_size - self.grid_dim * self.cell_pitch) > 1e-9:
            raise ValueError("field_size must equal grid_dim * cell_pitch")
        if 2 * self.agent_radius >= self.cell_pitch:
            raise ValueError("agent diameter must be smaller than the cell pitch")
        if self.outlier_radius <= 0 or self.agent_radius <= 0:
            raise ValueError("radii must be positive")
        if self.tick_rate <= 0 or self.trial_duration <= 0:
            raise ValueError("timing constants must be positive")
        if not 0.0 <= self.warning_lead < self.trial_duration:
            raise ValueError("warning_lead must lie within the trial")
        if self.accel <= 0 or self.max_speed <= 0:
            raise ValueError("kinematic constants must be positive")
        if not 0.0 <= self.damping < 1.0:
            raise ValueError("damping must be in [0, 1)")

    @property
    def dt(self) -> float:
        return 1.0 / self.tick_rate

    @property
    def detect_radius(self) -> float:
        """Center distance at which the spotlight disk overlaps an outlier."""
        return self.agent_radius + self.outlier_radius

    def center(self) -> tuple[float, float]:
        return (self.field_size / 2.0, self.field_size / 2.0)

    def to_dict(self) -> dict:
        return {
            "field_size": self.field_size,
            "grid_dim": self.grid_dim,
            "cell_pitch": self.cell_pitch,
            "outlier_radius": self.outlier_radius,
            "agent_radius": self.agent_radius,
            "tick_rate": self.tick_rate,
            "trial_duration": self.trial_duration,
            "warning_lead": self.warning_lead,
            "accel": self.accel,
            "damping": self.damping,
            "max_speed": self.max_speed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WorldConfig":
        cfg = cls(**d)
        cfg.validate()
        return cfg


DEFAULT_WORLD = WorldConfig()


@dataclass(frozen=True)
class TrialConfig:
    """One trial's full deterministic setup.

    ``strategy`` and ``capability`` are None for solo (practice) trials.
    ``trial_index`` is the session-level ordinal: 0..8 practice, 9.. main.
    """

    trial_index: int
    rng_seed: int
    outlier_cells: frozenset[tuple[int, int]]
    strategy: Optional[Strategy] = None
    capability: Optional[Capability] = None

    @property
    def solo(self) -> bool:
        return self.strategy is None

    @property
    def searcher_color(self) -> Optional[Color]:
        if self.capability is None:
            return None
        return CAPABILITY_COLOR[self.capability]

    def validate(self, world: WorldConfig) -> None:
        if not 5 <= len(self.outlier_cells) <= 15:
            raise ValueError("outlier count must be in [5, 15]")
        for col, row in self.outlier_cells:
            if not (0 <= col < world.grid_dim and 0 <= row < world.grid_dim):
                raise ValueError(f"outlier cell ({col}, {row}) outside the grid")
        if (self.strategy is None) != (self.capability is None):
            raise ValueError("strategy and capability must both be set or both absent")

    def to_dict(self) -> dict:
        return {
            "trial_index": self.trial_index,
            "rng_seed": self.rng_seed,
            "outlier_cells": sorted(self.outlier_cells),
            "strategy": self.strategy.value if self.strategy else None,
            "capability": list(self.capability.value) if self.capability else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrialConfig":
        return cls(
            trial_index=d["trial_index"],
            rng_seed=d["rng_seed"],
            outlier_cells=frozenset(tuple(c) for c in d["outlier_cells"]),
            strategy=Strategy(d["strategy"]) if d["strategy"] else None,
            capability=Capability(tuple(d["capability"])) if d["capability"] else None,
        )


@dataclass(frozen=True)
class FrameState:
    """Kinematic state at one tick."""

    t: float
    pos: tuple[float, float]
    vel: tuple[float, float]
    keys: int = 0


@dataclass
class Path:
    """A trajectory sampled at the tick rate.

    ``keys[i]`` is the axis-input mask applied between frames i and i+1;
    the final entry is always 0. AS paths carry no key trace (keys=None).
    """

    times: np.ndarray
    pos: np.ndarray
    vel: np.ndarray
    keys: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return len(self.times)

    def frame(self, i: int) -> FrameState:
        return FrameState(
            t=float(self.times[i]),
            pos=(float(self.pos[i, 0]), float(self.pos[i, 1])),
            vel=(float(self.vel[i, 0]), float(self.vel[i, 1])),
            keys=int(self.keys[i]) if self.keys is not None else 0,
        )

    def frames(self) -> Iterator[FrameState]:
        for i in range(len(self)):
            yield self.frame(i)


@dataclass(frozen=True)
class SearchOutcome:
    """Per-trial search results for the searcher and (optionally) a bot subject."""

    intersected_by_as: int
    reported_by_as: int
    intersected_by_subject: int
    as_path: Optional[Path]


def n_frames(duration: float, tick_rate: int) -> int:
    """Frames in a trajectory of the given duration (initial state included)."""
    return int(round(duration * tick_rate)) + 1


def cell_center(cell: tuple[int, int], world: WorldConfig) -> tuple[float, float]:
    col, row = cell
    half = world.cell_pitch / 2.0
    return (half + col * world.cell_pitch, half + row * world.cell_pitch)


def all_cell_centers(world: WorldConfig) -> np.ndarray:
    """Centers of all grid circles, row-major, shape (grid_dim^2, 2)."""
    half = world.cell_pitch / 2.0
    coords = half + world.cell_pitch * np.arange(world.grid_dim)
    xx, yy = np.meshgrid(coords, coords)
    return np.column_stack([xx.ravel(), yy.ravel()])


def place_outliers(seed: int, world: WorldConfig) -> frozenset[tuple[int, int]]:
    """Draw 5..15 distinct outlier cells uniformly from the trial's seed."""
    rng = generator(seed, TRIAL_OUTLIERS)
    count = int(rng.integers(5, 16))
    flat = rng.choice(world.grid_dim * world.grid_dim, size=count, replace=False)
    return frozenset((int(i) % world.grid_dim, int(i) // world.grid_dim) for i in flat)


def keys_to_forces(keys: np.ndarray, world: WorldConfig):
    """Translate key masks into per-axis forces and active-input flags."""
    keys = np.asarray(keys, dtype=np.uint8)
    right = (keys & KEY_RIGHT) != 0
    left = (keys & KEY_LEFT) != 0
    down = (keys & KEY_DOWN) != 0
    up = (keys & KEY_UP) != 0
    fx = np.where(right, world.accel, 0.0) - np.where(left, world.accel, 0.0)
    fy = np.where(down, world.accel, 0.0) - np.where(up, world.accel, 0.0)
    inx = (right | left).astype(np.uint8)
    iny = (down | up).astype(np.uint8)
    return fx, fy, inx, iny


def simulate_keys(
    start: tuple[float, float],
    vel: tuple[float, float],
    keys: np.ndarray,
    world: WorldConfig,
    t0: float = 0.0,
) -> Path:
    """Integrate a key-input trace into a trajectory (len(keys)+1 frames)."""
    fx, fy, inx, iny = keys_to_forces(keys, world)
    pos, v = _kernels.integrate_axes(
        start[0], start[1], vel[0], vel[1], fx, fy, inx, iny,
        world.damping, world.max_speed, world.dt, world.field_size,
    )
    n = len(keys)
    times = (t0 * world.tick_rate + np.arange(n + 1)) / world.tick_rate
    key_log = np.zeros(n + 1, dtype=np.uint8)
    key_log[:n] = keys
    return Path(times=times, pos=pos, vel=v, keys=key_log)


def step_spotlight(state: FrameState, keys: int, world: WorldConfig) -> FrameState:
    """Advance the spotlight one tick under a key mask.

    Per axis: a held key adds accel/tick_rate to the velocity, an idle axis
    decays by the damping factor; speed is clamped to max_speed; position is
    integrated; touching a wall zeroes that axis' velocity.
    """
    path = simulate_keys(state.pos, state.vel, np.array([keys], dtype=np.uint8), world)
    return FrameState(
        t=state.t + world.dt,
        pos=(float(path.pos[1, 0]), float(path.pos[1, 1])),
        vel=(float(path.vel[1, 0]), float(path.vel[1, 1])),
        keys=0,
    )


def _polyline_path(
    points: Sequence[tuple[float, float]], world: WorldConfig, duration: float
) -> Path:
    """Traverse a waypoint polyline with the searcher's speed profile.

    The searcher ramps up at ``accel`` per tick to ``max_speed`` (the same
    profile a held arrow key produces), holds that speed through instant
    turns at waypoints, and idles at the final waypoint.
    """
    pts = np.asarray(points, dtype=np.float64)
    seg = np.diff(pts, axis=0)
    seg_len = np.hypot(seg[:, 0], seg[:, 1])
    keep = seg_len > 0
    seg, seg_len, starts = seg[keep], seg_len[keep], pts[:-1][keep]
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    total = cum[-1]

    n = n_frames(duration, world.tick_rate) - 1
    pos = np.empty((n + 1, 2))
    vel = np.zeros((n + 1, 2))
    pos[0] = pts[0]
    dv = world.accel * world.dt
    speed, s, si = 0.0, 0.0, 0
    for t in range(n):
        if s >= total:
            pos[t + 1] = pts[-1]
            vel[t + 1] = 0.0
            continue
        speed = min(speed + dv, world.max_speed)
        s = min(s + speed * world.dt, total)
        while si < len(seg_len) - 1 and s > cum[si + 1]:
            si += 1
        u = (s - cum[si]) / seg_len[si]
        pos[t + 1] = starts[si] + u * seg[si]
        direction = seg[si] / seg_len[si]
        vel[t + 1] = direction * (0.0 if s >= total else speed)
    times = np.arange(n + 1) / world.tick_rate
    return Path(times=times, pos=pos, vel=vel)


def sweep_waypoints(world: WorldConfig) -> list[tuple[float, float]]:
    """Boustrophedon sweep: start at the top-left cell center, alternate
    row direction, drop one row between passes."""
    half = world.cell_pitch / 2.0
    lo = half
    hi = half + (world.grid_dim - 1) * world.cell_pitch
    pts = []
    for row in range(world.grid_dim):
        y = half + row * world.cell_pitch
        if row % 2 == 0:
            pts += [(lo, y), (hi, y)]
        else:
            pts += [(hi, y), (lo, y)]
    return pts


def lawnmower_path(
    trial: TrialConfig, world: WorldConfig, duration: Optional[float] = None
) -> Path:
    """Fixed sweep over all grid rows; identical for every trial and seed."""
    if duration is None:
        duration = world.trial_duration
    return _polyline_path(sweep_waypoints(world), world, duration)


def random_path(
    trial: TrialConfig, world: WorldConfig, duration: Optional[float] = None
) -> Path:
    """Uniform random force each tick, integrated with the spotlight kinematics."""
    if duration is None:
        duration = world.trial_duration
    n = n_frames(duration, world.tick_rate) - 1
    rng = generator(trial.rng_seed, TRIAL_MOTION)
    forces = rng.uniform(-world.accel, world.accel, size=(n, 2))
    ones = np.ones(n, dtype=np.uint8)
    cx, cy = world.center()
    pos, vel = _kernels.integrate_axes(
        cx, cy, 0.0, 0.0, forces[:, 0], forces[:, 1], ones, ones,
        world.damping, world.max_speed, world.dt, world.field_size,
    )
    times = np.arange(n + 1) / world.tick_rate
    return Path(times=times, pos=pos, vel=vel)


def omniscient_path(
    trial: TrialConfig, world: WorldConfig, duration: Optional[float] = None
) -> Path:
    """Drive straight to every outlier (greedy nearest-unvisited order from
    the field center), then idle."""
    if duration is None:
        duration = world.trial_duration
    targets = [cell_center(c, world) for c in sorted(trial.outlier_cells)]
    current = world.center()
    order: list[tuple[float, float]] = [current]
    remaining = list(targets)
    while remaining:
        dists = [math.hypot(p[0] - current[0], p[1] - current[1]) for p in remaining]
        j = int(np.argmin(dists))
        current = remaining.pop(j)
        order.append(current)
    return _polyline_path(order, world, duration)


_STRATEGY_PATHS = {
    Strategy.LAWNMOWER: lawnmower_path,
    Strategy.RANDOM: random_path,
    Strategy.OMNISCIENT: omniscient_path,
}


def as_path(trial: TrialConfig, world: WorldConfig, duration: Optional[float] = None) -> Optional[Path]:
    """The autonomous searcher's trajectory for this trial (None when solo)."""
    if trial.strategy is None:
        return None
    return _STRATEGY_PATHS[trial.strategy](trial, world, duration)


def count_intersections(
    path: Path, outliers: frozenset[tuple[int, int]], world: WorldConfig
) -> int:
    """Distinct outliers whose center comes within detect_radius of the path
    at any frame (closed boundary; each outlier counted once)."""
    if len(path) == 0:
        raise ValueError("path must be nonempty")
    if not outliers:
        return 0
    centers = np.array([cell_center(c, world) for c in sorted(outliers)])
    d2 = ((path.pos[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    hit = d2.min(axis=0) <= world.detect_radius**2
    return int(hit.sum())


def as_report(intersected: int, capability: Capability) -> int:
    """Round-half-up fraction of the searcher's own intersected count.

    Exact integer arithmetic: round_half_up(n * num/den) = (2n*num + den) // (2*den).
    """
    if intersected < 0:
        raise ValueError("intersected must be >= 0")
    num, den = capability.value
    return (2 * intersected * num + den) // (2 * den)


def trial_score(estimate: int, truth: int) -> int:
    """Score awarded for an outlier-count estimate: 10 minus 2 per unit error,
    floored at zero."""
    if estimate < 0 or truth < 0:
        raise ValueError("counts must be >= 0")
    return max(0, 10 - 2 * abs(estimate - truth))


def optimal_encounter_time(world: WorldConfig) -> float:
    """Time for the minimal sweep to bring every grid circle center inside
    the spotlight disk, simulated tick by tick under the searcher's speed
    profile (acceleration ramp included)."""
    world.validate()
    centers = all_cell_centers(world)
    # Generous cap: sweep length at half max_speed plus slack.
    sweep = sweep_waypoints(world)
    length = sum(
        math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in zip(sweep, sweep[1:])
    )
    cap = 4.0 * length / world.max_speed + 10.0
    path = _polyline_path(sweep, world, cap)
    d2 = ((path.pos[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    covered = d2 <= world.agent_radius**2
    seen = np.cumsum(covered, axis=0) > 0
    done = seen.all(axis=1)
    idx = int(np.argmax(done))
    if not done[idx]:
        raise RuntimeError("sweep never covered the grid; check kinematics")
    return float(path.times[idx])


def subject_start(world: WorldConfig) -> tuple[float, float]:
    """Both agents begin a trial at the field center."""
    return world.center()


def run_trial(
    trial: TrialConfig,
    world: WorldConfig,
    subject_keys: np.ndarray,
) -> tuple[Path, SearchOutcome]:
    """Simulate one full trial: subject key trace plus the searcher's path."""
    trial.validate(world)
    subj = simulate_keys(subject_start(world), (0.0, 0.0), subject_keys, world)
    searcher = as_path(trial, world)
    subj_hits = count_intersections(subj, trial.outlier_cells, world)
    if searcher is None:
        outcome = SearchOutcome(0, 0, subj_hits, None)
    else:
        hits = count_intersections(searcher, trial.outlier_cells, world)
        assert trial.capability is not None
        outcome = SearchOutcome(hits, as_report(hits, trial.capability), subj_hits, searcher)
    return subj, outcome
