"""Counter-based random streams.

Every random quantity in the package is drawn from a Philox stream keyed by
``(seed, tag, block, component)``.  Replicates are grouped into fixed-size
blocks, so the value assigned to replicate ``i`` never depends on how many
replicates were requested in total or in which order blocks are produced.
"""

import numpy as np

# Stream tags, one per consumer.  Never renumber.
MIXTURE = 1
GAUSSIAN = 10
MODEL1 = 11
MODEL2 = 12
LINEAR = 13
SPARSE = 14
SUBSET = 20
MOMENTS = 30
REPLICATE = 40

MIXTURE_BLOCK = 4096
ROW_BLOCK = 1024

_MASK64 = (1 << 64) - 1


def stream(seed, *key):
    """Return an independent generator for ``(seed, *key)``."""
    ss = np.random.SeedSequence(int(seed) & _MASK64, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def blocks(total, size):
    """Yield ``(block_index, start, stop)`` covering ``range(total)``."""
    for b, start in enumerate(range(0, total, size)):
        yield b, start, min(start + size, total)


def derive_seed(seed, *key):
    """A 63-bit integer seed for sub-task ``key`` of a run seeded with ``seed``."""
    ss = np.random.SeedSequence(int(seed) & _MASK64, spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))
