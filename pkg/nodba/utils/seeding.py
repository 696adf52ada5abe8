"""
Derived random streams. Every consumer of randomness gets its own numpy Generator keyed by
(seed, stream, *indices), so results never depend on call order or thread scheduling.
"""
import numpy as np

from nodba.errors import ConfigError

# stream ids, kept stable so saved seeds stay meaningful
WORKLOAD_STREAM = 0
CANDIDATE_STREAM = 1
VALIDATION_STREAM = 2


def check_seed(seed) -> int:
    """
    Seed as a non-negative int; numpy refuses negative entropy
    """
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or seed < 0:
        raise ConfigError(f'Seed must be a non-negative integer, got {seed!r}')
    return int(seed)


def derive_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=check_seed(seed),
                                                        spawn_key=tuple(int(k) for k in key)))


def derive_seed(seed: int, *key: int) -> int:
    """
    Integer seed derived from (seed, *key), usable wherever a plain int seed is expected
    """
    state = np.random.SeedSequence(entropy=check_seed(seed),
                                   spawn_key=tuple(int(k) for k in key)).generate_state(1)

    return int(state[0])


def fresh_seed() -> int:
    return int(np.random.SeedSequence().generate_state(1)[0])
