"""Shared generators for random convex polygon pairs."""

import numpy as np

from fastron.geometry import random_convex_polygon


def random_pair(rng, spread=1.2):
    a = random_convex_polygon(rng, (0.0, 0.0), (0.1, 1.0), (3, 9))
    center = rng.uniform(-spread, spread, 2)
    b = random_convex_polygon(rng, center, (0.1, 1.0), (3, 9))
    return a, b


def random_pairs(seed, count, spread=1.2):
    rng = np.random.default_rng(seed)
    return [random_pair(rng, spread) for _ in range(count)]
