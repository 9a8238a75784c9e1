"""Named, counter-indexed random substreams derived from one master seed.

Every draw in a run comes from ``substream(seed, name, *counters)``, so a
worker's draws do not depend on how many other workers exist or in which
order they are processed.
"""

from __future__ import annotations

import numpy as np

STREAMS = {"population": 0, "assignment": 1, "bdm": 2, "noise": 3, "learning": 4, "allocation": 5}

MAX_SEED = 2**64 - 1


def check_seed(seed: int) -> int:
    if int(seed) != seed or not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return int(seed)


def substream(seed: int, name: str, *counters: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(check_seed(seed), spawn_key=(STREAMS[name], *counters)))
