"""Deterministic random substreams.

Every random draw in the package comes from a PCG64 generator seeded by
``SeedSequence(entropy=seed, spawn_key=key)``.  The key names the consumer
(a stream id below) followed by block or sample indices, so any block can
be regenerated in isolation and results never depend on how work is split
across chunks or threads.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInput

STREAM_FRAMES = 1
STREAM_MC = 2
STREAM_ORACLE = 3
STREAM_CALIBRATION = 4
STREAM_FIT = 5
STREAM_HIGHER = 6
STREAM_CONFIGS = 7
STREAM_BOUNDS = 8

_U64 = 2**64


def check_seed(seed) -> int:
    if int(seed) != seed or not 0 <= int(seed) < _U64:
        raise InvalidInput(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return int(seed)


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Generator for substream ``key`` of ``seed``."""
    ss = np.random.SeedSequence(entropy=check_seed(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed: int, *key: int) -> int:
    """A 64-bit seed for substream ``key``; ``make_rng(derive_seed(...))`` is reproducible."""
    ss = np.random.SeedSequence(entropy=check_seed(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])
