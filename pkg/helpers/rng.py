"""
Deterministic random-number substreams.

Every random draw in the project comes from a ``numpy.random.Generator``
whose seed is a tuple of integers (root seed, replicate index, purpose, ...).
Streams for different tuples are statistically independent, and a stream
never depends on how many other streams were requested.
"""
import numpy as np


def entropy(seed, *keys):
    """
    Flatten a root seed (int or sequence of ints) and extra keys into one entropy list.

    The length of the key tuple is appended: SeedSequence ignores trailing
    zero words, so (s, r) and (s, r, 0) would otherwise share a stream.
    """
    if seed is None:
        raise ValueError("a seed is required; implicit entropy is not allowed")
    root = list(seed) if isinstance(seed, (list, tuple)) else [seed]
    values = root + list(keys)
    if any(int(v) != v or v < 0 for v in values):
        raise ValueError(f"seed entropy must be non-negative integers, got {values}")
    return [int(v) for v in values] + [len(values)]


def substream(seed, *keys):
    """Generator for the substream identified by (seed, *keys)."""
    return np.random.default_rng(np.random.SeedSequence(entropy(seed, *keys)))
