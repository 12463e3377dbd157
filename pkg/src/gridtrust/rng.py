"""Deterministic seed-stream derivation.

All randomness in the experiment flows from one 64-bit experiment seed.
Sub-streams are derived with numpy's SeedSequence (Philox generator), using
integer path components, so two processes asking for the same stream get the
same generator regardless of call order:

    experiment stream:  (experiment_seed,)
    plan stream:        (experiment_seed, group_index, STREAM_PLAN)
    trial stream:       (experiment_seed, group_index, STREAM_TRIAL, ordinal)

A trial's 64-bit seed fully determines its outlier layout and any stochastic
searcher motion, which is what lets every subject of a group share identical
trials.
"""

from __future__ import annotations

import numpy as np

# Purpose tags for derived streams. Values are frozen; changing them changes
# every derived seed in existing data.
STREAM_PLAN = 0
STREAM_TRIAL = 1
STREAM_PRACTICE = 2

# Sub-stream tags within a single trial seed.
TRIAL_OUTLIERS = 0
TRIAL_MOTION = 1


def derive_seed(root_seed: int, *path: int) -> int:
    """Derive a 64-bit seed for the stream addressed by ``path``."""
    ss = np.random.SeedSequence(int(root_seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=tuple(path))
    return int(ss.generate_state(1, np.uint64)[0])


def generator(root_seed: int, *path: int) -> np.random.Generator:
    """Philox generator for the stream addressed by ``path``."""
    ss = np.random.SeedSequence(int(root_seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=tuple(path))
    return np.random.Generator(np.random.Philox(ss))
