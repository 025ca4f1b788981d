"""Counter-based seed derivation.

Every replica gets its own independent stream derived from the master seed
and its (scale, replica) counters, so results do not depend on how replicas
are scheduled across workers.
"""

from __future__ import annotations

import numpy as np


def replica_seed(master_seed: int, *key: int) -> int:
    """64-bit child seed for the given counter tuple, stable across runs."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
