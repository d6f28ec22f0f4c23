"""Small named models used across tests, demos and the CLI fixtures."""

import numpy as np

from .resolvent import validate_generator, weighted_space

FIXTURES = {
    "K1": ([[-1.0]], [1.0]),
    "C2": ([[-1.0, 1.0], [1.0, -1.0]], [0.5, 0.5]),
    "T2": ([[-1.0, 0.0], [0.0, -1.0]], [0.5, 0.5]),
    "A2": ([[-1.0, 1.0], [0.0, 0.0]], [0.0, 1.0]),
    "N2": ([[-2.0, 2.0], [1.0, -1.0]], [1 / 3, 2 / 3]),
    "R3": ([[-2.0, 1.0, 1.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]], [0.0, 0.5, 0.5]),
    "C3": ([[-1.0, 1.0, 0.0], [0.0, -1.0, 1.0], [1.0, 0.0, -1.0]], [1 / 3, 1 / 3, 1 / 3]),
}


def fixture(name):
    """Return ``(Generator, WeightedSpace)`` for a named fixture."""
    L, m = FIXTURES[name]
    gen = validate_generator(np.array(L))
    return gen, weighted_space(gen, np.array(m))
