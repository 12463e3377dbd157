"""Two-group blocked factorial design: trial scheduling, group assignment,
questionnaire content, and trust-score normalization.

Group 0 holds the searcher *strategy* constant within each 21-trial block and
varies capability inside it; group 1 blocks on *capability* and varies
strategy. Both factors are balanced at 7 trials per level per block. Every
subject of a group sees the identical schedule: all per-trial randomness is
derived from the shared experiment seed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .rng import STREAM_PLAN, STREAM_PRACTICE, STREAM_TRIAL, derive_seed, generator
from .sim import Capability, Strategy, TrialConfig, WorldConfig, place_outliers

PRACTICE_TRIALS = 9
BLOCKS = 3
BLOCK_LENGTH = 21
MAIN_TRIALS = BLOCKS * BLOCK_LENGTH
TOTAL_TRIALS = PRACTICE_TRIALS + MAIN_TRIALS


class Group(enum.Enum):
    G0 = 0  # blocked factor: strategy
    G1 = 1  # blocked factor: capability

    @property
    def blocked_factor(self) -> str:
        return "strategy" if self is Group.G0 else "capability"


# --- Inter-trial questionnaire -------------------------------------------
# Prompts are single-sourced here; the service exposes them with each trial
# so every client renders the same text.

TASK_Q1 = "How many outliers did you find with your spotlight this trial?"
AS_REPORT_LINE = "The {color} autonomous searcher reports finding {count} outliers."
TASK_Q2 = "How many total outliers were hidden in the entire grid this trial?"

# (statement, measure) in presentation order; the third is the modeled
# trust measure.
TRUST_STATEMENTS = (
    ("I am familiar with the autonomous searcher's strategy.", "strategy"),
    ("The autonomous searcher is reliable.", "capability"),
    ("I trust the autonomous searcher.", "trust"),
)

SCALE_MIN = 1
SCALE_MAX = 9
SCALE_MIN_LABEL = "Not at All"
SCALE_MAX_LABEL = "Extremely"


def questionnaire_dict(solo: bool) -> dict:
    """Questionnaire prompts for a trial, as served to clients."""
    d = {
        "task_q1": TASK_Q1,
        "task_q2": TASK_Q2,
        "report_line_template": None if solo else AS_REPORT_LINE,
        "trust_statements": [] if solo else [s for s, _ in TRUST_STATEMENTS],
        "scale": {
            "min": SCALE_MIN,
            "max": SCALE_MAX,
            "min_label": SCALE_MIN_LABEL,
            "max_label": SCALE_MAX_LABEL,
        },
    }
    return d


@dataclass(frozen=True)
class SurveyResponse:
    """One trial's questionnaire answers. ``likert`` is empty for solo trials."""

    trial_index: int
    found_count: int
    total_estimate: int
    likert: tuple[int, ...]
    timestamp: float

    def validate(self, solo: bool) -> None:
        if self.found_count < 0 or self.total_estimate < 0:
            raise ValueError("counts must be >= 0")
        expected = 0 if solo else len(TRUST_STATEMENTS)
        if len(self.likert) != expected:
            raise ValueError(f"expected {expected} trust ratings, got {len(self.likert)}")
        for v in self.likert:
            if not (SCALE_MIN <= v <= SCALE_MAX) or int(v) != v:
                raise ValueError(f"trust rating {v} outside the {SCALE_MIN}..{SCALE_MAX} scale")

    def to_dict(self) -> dict:
        return {
            "trial_index": self.trial_index,
            "found_count": self.found_count,
            "total_estimate": self.total_estimate,
            "likert": list(self.likert),
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SurveyResponse":
        return cls(
            trial_index=d["trial_index"],
            found_count=d["found_count"],
            total_estimate=d["total_estimate"],
            likert=tuple(d["likert"]),
            timestamp=d["timestamp"],
        )


@dataclass(frozen=True)
class ExperimentPlan:
    """A group's full deterministic schedule: 9 solo practice trials followed
    by 3 blocks of 21."""

    experiment_seed: int
    group: Group
    practice: tuple[TrialConfig, ...]
    blocks: tuple[tuple[TrialConfig, ...], ...]

    @property
    def main_trials(self) -> tuple[TrialConfig, ...]:
        return tuple(t for block in self.blocks for t in block)

    def trial(self, index: int) -> TrialConfig:
        """Session-level lookup: 0..8 practice, 9..71 main."""
        if 0 <= index < PRACTICE_TRIALS:
            return self.practice[index]
        if PRACTICE_TRIALS <= index < TOTAL_TRIALS:
            return self.main_trials[index - PRACTICE_TRIALS]
        raise IndexError(f"trial index {index} outside 0..{TOTAL_TRIALS - 1}")

    def capability_sequence(self) -> list[Capability]:
        return [t.capability for t in self.main_trials]

    def strategy_sequence(self) -> list[Strategy]:
        return [t.strategy for t in self.main_trials]


def assign_group(session_ordinal: int) -> Group:
    """Alternate group assignment in arrival order: G0, G1, G0, ..."""
    if session_ordinal < 0:
        raise ValueError("ordinal must be >= 0")
    return Group(session_ordinal % 2)


def normalize_trust(likert: int) -> float:
    """Map the 1..9 trust scale onto [0, 1]."""
    if int(likert) != likert or not (SCALE_MIN <= likert <= SCALE_MAX):
        raise ValueError(f"likert value {likert} outside {SCALE_MIN}..{SCALE_MAX}")
    return (likert - SCALE_MIN) / (SCALE_MAX - SCALE_MIN)


def build_plan(
    experiment_seed: int, group: Group, world: WorldConfig | None = None
) -> ExperimentPlan:
    """Materialize a group's schedule from the shared experiment seed.

    The blocked factor's level order across the 3 blocks is a seeded
    permutation; within each block the varied factor is a seeded shuffle of
    7 repetitions of each of its 3 levels.
    """
    if world is None:
        world = WorldConfig()
    rng = generator(experiment_seed, group.value, STREAM_PLAN)
    strategies = list(Strategy)
    capabilities = list(Capability)

    blocked_levels = strategies if group is Group.G0 else capabilities
    varied_levels = capabilities if group is Group.G0 else strategies
    block_order = [blocked_levels[i] for i in rng.permutation(BLOCKS)]

    blocks = []
    ordinal = PRACTICE_TRIALS
    for blocked in block_order:
        varied = np.repeat(np.arange(3), BLOCK_LENGTH // 3)
        varied = [varied_levels[i] for i in rng.permutation(varied)]
        trials = []
        for v in varied:
            strategy, capability = (blocked, v) if group is Group.G0 else (v, blocked)
            seed = derive_seed(experiment_seed, group.value, STREAM_TRIAL, ordinal)
            trials.append(
                TrialConfig(
                    trial_index=ordinal,
                    rng_seed=seed,
                    outlier_cells=place_outliers(seed, world),
                    strategy=strategy,
                    capability=capability,
                )
            )
            ordinal += 1
        blocks.append(tuple(trials))

    practice = []
    for i in range(PRACTICE_TRIALS):
        seed = derive_seed(experiment_seed, group.value, STREAM_PRACTICE, i)
        practice.append(
            TrialConfig(
                trial_index=i,
                rng_seed=seed,
                outlier_cells=place_outliers(seed, world),
            )
        )

    return ExperimentPlan(
        experiment_seed=experiment_seed,
        group=group,
        practice=tuple(practice),
        blocks=tuple(blocks),
    )
