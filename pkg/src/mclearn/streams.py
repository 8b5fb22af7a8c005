"""Seeded random streams shared by every experiment."""

from __future__ import annotations

import numpy as np


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """Independent stream for ``(seed, *keys)``; keys name the experiment, m, trial, ...

    Philox is counter-based, so streams derived from distinct key tuples are
    independent and the same tuple always yields the same draws.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, keys)])))
