"""
Seeded random streams

Every stochastic component draws from a numpy Generator over PCG64, the
portable 64-bit permuted congruential generator. Streams are keyed by
(master seed, *keys) through SeedSequence, so a trial, a cluster draw or
a graph generator always sees the same numbers for the same keys, no
matter in which order or in which process it runs.
"""

import numpy as np

try:
    from .constants import STREAM_TRIAL
except ImportError:
    from utils.constants import STREAM_TRIAL


def make_stream(seed: int, *keys: int) -> np.random.Generator:
    """Return the PCG64 generator for ``seed`` and the given integer keys"""
    entropy = [int(seed)] + [int(key) for key in keys]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def derive_seed(seed: int, *keys: int) -> int:
    """Derive a 32-bit integer seed, for libraries that only accept ints"""
    entropy = [int(seed)] + [int(key) for key in keys]
    return int(np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint32)[0])


def trial_stream(seed: int, trial_index: int) -> np.random.Generator:
    """Stream owned by one Monte-Carlo trial"""
    return make_stream(seed, STREAM_TRIAL, trial_index)

