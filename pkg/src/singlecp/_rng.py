"""Deterministic random streams.

Each Monte Carlo replicate gets its own Philox generator keyed by a hash of
``(master seed, stream, replicate index)``, so results do not depend on how
replicates are split across workers.
"""

import os

import numpy as np

WORKERS_ENV = "SINGLECP_WORKERS"


def replicate_rng(seed: int, rep: int, stream: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream), int(rep)))
    return np.random.Generator(np.random.Philox(ss))


def as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        raise ValueError("an explicit seed is required")
    return replicate_rng(seed, 0, stream=0xC0FFEE)


def fresh_seed() -> int:
    """A random 63-bit seed for callers that did not pick one."""
    return int(np.random.SeedSequence().generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def default_workers() -> int:
    value = os.environ.get(WORKERS_ENV)
    if not value:
        return 1
    workers = int(value)
    if workers < 1:
        raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {value!r}")
    return workers
