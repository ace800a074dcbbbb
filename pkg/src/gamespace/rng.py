"""Seed derivation for reproducible, order-independent random streams.

Every game, agent and optimisation run draws from its own child stream,
derived from the master seed and the coordinates of the experiment unit
(e.g. ``("attributes", "uno", 3, "RND", 17)``).  Derivation goes through
:class:`numpy.random.SeedSequence`, so two units never share a stream and
the result does not depend on execution order or worker count.
"""

from __future__ import annotations

import hashlib
import random

import numpy as np


def _coord_word(coord) -> int:
    if isinstance(coord, (bool, np.bool_)):
        return int(coord)
    if isinstance(coord, (int, np.integer)) and coord >= 0:
        return int(coord)
    digest = hashlib.blake2b(repr(coord).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def derive_seed(master_seed: int, *coords) -> int:
    """Return a 64-bit seed for the unit identified by ``coords``."""
    seq = np.random.SeedSequence(int(master_seed), spawn_key=tuple(_coord_word(c) for c in coords))
    state = seq.generate_state(2, dtype=np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


def child_rng(master_seed: int, *coords) -> random.Random:
    """Scalar-oriented stream used on hot paths (games, agents)."""
    return random.Random(derive_seed(master_seed, *coords))


def child_generator(master_seed: int, *coords) -> np.random.Generator:
    """Vector-oriented stream (Philox) for numerical simulation."""
    return np.random.Generator(np.random.Philox(derive_seed(master_seed, *coords)))


def split(rng: random.Random) -> random.Random:
    """Fork a new independent stream off an existing one."""
    return random.Random(rng.getrandbits(64))
