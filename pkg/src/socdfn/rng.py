"""Deterministic random streams.

Every stochastic choice in the package (splits, shuffles, weight init,
dropout, drive-cycle synthesis) draws from a numpy PCG64 generator built
here, so a run is fully reproduced by its seeds. PCG64 is the single
generator family used; do not mix in other bit generators.
"""

import numpy as np

from .errors import ConfigError

# Name of the pinned bit generator, recorded in model files.
BIT_GENERATOR = "pcg64"

MAX_SEED = 2**64 - 1


def check_seed(seed: int) -> int:
    """Validate a user-supplied 64-bit seed."""
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool):
        raise ConfigError(f"seed must be an integer, got {seed!r}")
    if not 0 <= seed <= MAX_SEED:
        raise ConfigError(f"seed must be in [0, 2^64), got {seed}")
    return int(seed)


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 stream for a seed. Equal seeds give identical streams."""
    return np.random.Generator(np.random.PCG64(seed))


def shift_seed(seed: int, offset: int) -> int:
    """Arithmetic seed derivation, wrapped into the valid 64-bit range."""
    return (check_seed(seed) + offset) % (MAX_SEED + 1)


def substream(seed: int, *key) -> np.random.Generator:
    """Derived PCG64 stream, keyed so distinct purposes never collide.

    Keys may be ints or short ASCII tags; used for per-epoch dropout
    streams where a plain arithmetic offset of the shuffle seed would
    alias the shuffle stream itself.
    """
    parts = [check_seed(seed)]
    for part in key:
        if isinstance(part, str):
            parts.append(int.from_bytes(part.encode("ascii"), "big"))
        else:
            parts.append(int(part))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(parts)))
