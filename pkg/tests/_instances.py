"""Seeded random sample sets shared by the property and acceptance tests."""

import numpy as np


def random_dataset(rng, max_n=50):
    """Values in [0, 1]: uniform, two-point {0, 1}, or a cluster plus noise."""
    n = int(rng.integers(1, max_n + 1))
    kind = int(rng.integers(3))
    if kind == 0:
        return rng.uniform(size=n)
    if kind == 1:
        return rng.choice([0.0, 1.0], size=n)
    cluster = rng.normal(rng.uniform(), 0.05, n // 2 + 1)
    return np.clip(np.concatenate([cluster, rng.uniform(size=n // 2)]), 0.0, 1.0)


def close(a, b, rtol, atol=0.0):
    return abs(a - b) <= rtol * max(abs(a), abs(b)) + atol
