"""Named random sub-streams derived from a single run seed."""

from __future__ import annotations

import zlib

import numpy as np


def _stream_key(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


def substream(seed: int, name: str) -> np.random.Generator:
    """Return the generator for stream `name` of run `seed`.

    Args:
        seed: Per-run seed.
        name: Stream name, e.g. "schedule", "init", "gumbel", "replay".

    Returns:
        A fresh generator; equal (seed, name) pairs give identical draws.
    """
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=(_stream_key(name),))
    return np.random.default_rng(sequence)


def subseed(seed: int, name: str) -> int:
    """Integer seed for libraries that take a `random_state`."""
    return int(substream(seed, name).integers(0, 2**31 - 1))
