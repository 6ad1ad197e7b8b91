import numpy as np


def derive_seed(*keys: int) -> int:
    """
    Mixes integer keys (base seed, frame index, iteration, ...) into one 32-bit seed.
    """

    return int(np.random.SeedSequence([int(key) & 0xFFFFFFFFFFFFFFFF for key in keys]).generate_state(1)[0])


def make_rng(*keys: int) -> np.random.Generator:
    return np.random.default_rng([int(key) & 0xFFFFFFFFFFFFFFFF for key in keys])
