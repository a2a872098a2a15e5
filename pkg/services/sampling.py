"""Seed derivation and integer apportionment helpers."""
from typing import Sequence

import numpy as np


def child_seed(master_seed: int, *key: int) -> int:
    """64-bit seed that is a pure function of (master_seed, key)"""
    sequence = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(k) for k in key))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def rng_for(master_seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(k) for k in key)))


def round_half_up(value: float) -> int:
    return int(np.floor(value + 0.5))


def largest_remainder(quotas: Sequence[float], total: int) -> np.ndarray:
    """
    Round nonnegative real quotas to integers summing to total.

    Floors first, then hands the leftover units to the largest fractional
    parts; ties go to the earlier entry.
    """
    values = np.asarray(quotas, dtype=np.float64)
    floors = np.floor(values + 1e-9).astype(np.int64)
    floors = np.maximum(floors, 0)
    leftover = int(total - floors.sum())
    if leftover > 0:
        remainders = values - floors
        order = np.lexsort((np.arange(len(values)), -remainders))
        for i in order[:leftover]:
            floors[i] += 1
    elif leftover < 0:
        order = np.lexsort((np.arange(len(values)), values - floors))
        for i in order:
            if leftover == 0:
                break
            if floors[i] > 0:
                floors[i] -= 1
                leftover += 1
    return floors
