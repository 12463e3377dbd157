#!/usr/bin/env python3
"""Regenerate the shared kinematic golden trace.

The fixture pins the spotlight kinematics contract between the simulation
core and the browser client: a scripted key trace plus the exact frame
sequence it must produce. Both test suites replay it and require bit
equality, so regenerate only when the kinematics intentionally change.
"""

import json
from pathlib import Path

import numpy as np

from gridtrust import sim

OUT = Path(__file__).resolve().parent.parent / "frontend" / "fixtures" / "golden_trace.json"


def scripted_keys() -> np.ndarray:
    keys = np.zeros(600, dtype=np.uint8)
    keys[:90] = sim.KEY_RIGHT                      # ramp to max speed
    keys[90:180] = sim.KEY_RIGHT | sim.KEY_DOWN    # diagonal, norm clamp, right wall
    keys[180:300] = sim.KEY_LEFT                   # reverse across the field
    keys[300:420] = sim.KEY_UP | sim.KEY_LEFT      # hold left wall, climb
    keys[420:480] = 0                              # damping decay
    keys[480:560] = sim.KEY_DOWN
    keys[560:580] = sim.KEY_UP | sim.KEY_DOWN      # opposed keys: driven, zero force
    return keys


def main() -> None:
    world = sim.WorldConfig()
    keys = scripted_keys()
    path = sim.simulate_keys(sim.subject_start(world), (0.0, 0.0), keys, world)
    fixture = {
        "world": world.to_dict(),
        "start": list(sim.subject_start(world)),
        "keys": [int(k) for k in keys],
        "pos": path.pos.tolist(),
        "vel": path.vel.tolist(),
    }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(fixture) + "\n")
    print(f"wrote {OUT} ({len(keys)} ticks, {len(path)} frames)")


if __name__ == "__main__":
    main()
