"""Named RNG substreams derived from a single global seed.

Every random decision in the package flows through one of these streams so
that a run is a pure function of (config, seed).
"""

import zlib

import numpy as np


def substream(seed: int, *tags: str) -> np.random.Generator:
    """Return the generator for a named stream under ``seed``.

    Distinct tag paths give independent streams; the mapping is stable
    across processes and platforms.
    """
    entropy = [int(seed) % (1 << 63)]
    for tag in tags:
        entropy.append(zlib.crc32(tag.encode("utf-8")))
    return np.random.default_rng(np.random.SeedSequence(entropy))
