"""Per-trial random streams.

Each trial gets its own Philox (counter-based) generator keyed by
``(master seed, trial index)`` through :class:`numpy.random.SeedSequence`,
so results do not depend on which worker runs which trial.
"""

from __future__ import annotations

import numpy as np

__all__ = ["trial_rng", "check_seed", "MAX_SEED"]

MAX_SEED = 2**64 - 1


def check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def trial_rng(seed: int, trial: int, *purpose: int) -> np.random.Generator:
    """Generator for ``trial`` under master ``seed``.

    Extra integers in ``purpose`` derive further independent sub-streams
    (e.g. one for sampling and one for permutations).
    """
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=(int(trial), *map(int, purpose)))
    return np.random.Generator(np.random.Philox(ss))
