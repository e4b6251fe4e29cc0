"""Deterministic random streams.

Every source of randomness in a run is a named, independent stream derived
from one 64-bit seed via a counter-based generator (Philox).  Streams never
interact: drawing more batches does not shift the SARAH coin, etc., which is
what makes traces bit-reproducible across platforms and refactors.
"""

from __future__ import annotations

import numpy as np

# Fixed purpose -> stream index map.  Extending the table is fine; reordering
# existing entries breaks seed reproducibility.
STREAMS = {
    "batch_x": 0,
    "batch_y": 1,
    "sarah_coin": 2,
    "power_init": 3,
    "lip_batch": 4,
}


def stream_rng(seed: int, purpose: str) -> np.random.Generator:
    """Return the named Philox stream for ``purpose`` under ``seed``."""
    try:
        idx = STREAMS[purpose]
    except KeyError:
        raise ValueError(f"unknown RNG purpose {purpose!r}; known: {sorted(STREAMS)}")
    ss = np.random.SeedSequence(entropy=int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=(idx,))
    return np.random.Generator(np.random.Philox(ss))


def all_streams(seed: int) -> dict[str, np.random.Generator]:
    """All named streams for one run, keyed by purpose."""
    return {name: stream_rng(seed, name) for name in STREAMS}
