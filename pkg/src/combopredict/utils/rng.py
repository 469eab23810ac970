"""
Seeded random streams

All randomness goes through ``make_generator``: a Philox (counter-based)
generator keyed by a seed plus an optional stream path. Stream (seed, k) is
the same no matter which thread or in which order it is created, which keeps
bootstrap replicates reproducible under parallel execution.
"""

import numpy as np


def make_generator(seed: int, *stream: int) -> np.random.Generator:
    """
    Build the generator for ``seed`` and stream path ``stream``

    Examples:
        >>> make_generator(7)          # root stream
        >>> make_generator(7, 0)       # bootstrap replicate 0
    """
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(sequence))
