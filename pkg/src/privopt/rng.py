"""Seeded random streams.

Every random draw in the package comes from a :class:`numpy.random.Generator`
backed by the counter-based Philox bit generator. Independent substreams are
derived from a root seed and an integer key path through
:class:`numpy.random.SeedSequence` spawn keys, so the stream for a given key is
the same no matter which thread asks for it or in what order.

Key layout used by the experiment harnesses::

    substream(seed, purpose, trial)

where ``purpose`` is a small integer naming what the stream is for (instance
generation, noise for our mechanism, noise for the baseline, ...). Within one
trial the coordinates of a noise vector are drawn in index order.
"""

from __future__ import annotations

import numpy as np

DEFAULT_SEED = 0


def substream(seed: int, *key: int) -> np.random.Generator:
    """Return the generator for ``key`` under root ``seed``."""
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def make_rng(seed: int | None = None) -> np.random.Generator:
    return substream(DEFAULT_SEED if seed is None else seed)
