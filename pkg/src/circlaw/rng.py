"""Seeded generator plumbing shared by all samplers and experiments.

One master seed drives a whole run; each trial gets its own independent
stream derived from (master_seed, trial_index), so trials can run in any
order or in parallel and still reproduce.
"""

from __future__ import annotations

import numpy as np


def master_rng(seed: int) -> np.random.Generator:
    """Generator for single-shot use with the given master seed."""
    return np.random.default_rng(seed)


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """Independent stream for one trial, derived from the master seed."""
    return np.random.default_rng([master_seed, trial_index])


def uniform_below(rng: np.random.Generator, bound: int) -> int:
    """Exact uniform integer in [0, bound) for arbitrarily large bound.

    numpy's integers() tops out at 64 bits; binomial counts at n ~ 1000 do
    not fit, so draw raw bytes and reject out-of-range values.
    """
    if bound <= 0:
        raise ValueError(f"bound must be positive, got {bound}")
    bits = bound.bit_length()
    nbytes = (bits + 7) // 8
    shift = nbytes * 8 - bits
    while True:
        val = int.from_bytes(rng.bytes(nbytes), "big") >> shift
        if val < bound:
            return val
