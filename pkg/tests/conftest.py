import math

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20250811)


def random_valid_vectors(n: int, seed: int = 0) -> np.ndarray:
    from nonsig.behavior import random_correlator_vectors

    return random_correlator_vectors(n, np.random.default_rng([seed]))


def g_oracle(x: float) -> float:
    """Independent entropy-kernel evaluation (math module, no numpy)."""
    total = 1.0
    for q in ((1 + x) / 4, (1 - x) / 4):
        if q > 0:
            total += q * math.log2(q)
    return total / 2


def mi_oracle(table: np.ndarray) -> float:
    """Plain-loop mutual information, independent of the library path."""
    pa = np.zeros((2, 2))
    pb = np.zeros((2, 2))
    for x in range(2):
        for a in range(2):
            pa[x, a] = table[x, :, a, :].sum() / 2
    for y in range(2):
        for b in range(2):
            pb[y, b] = table[:, y, :, b].sum() / 2

    def h(ps):
        return -sum(p * math.log2(p) for p in np.ravel(ps) if p > 1e-15)

    joint = sum(h(table[x, y]) for x in range(2) for y in range(2)) / 4
    return h(pa) / 2 + h(pb) / 2 - joint
