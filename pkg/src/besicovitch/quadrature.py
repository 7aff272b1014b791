"""Composite Simpson rule on uniform nodes."""

import math

import numpy as np

from .errors import InvalidArgumentError


def simpson_weights(n_intervals: int, h: float) -> np.ndarray:
    """Weights ``h/3 * (1, 4, 2, 4, ..., 2, 4, 1)`` for an even number of intervals."""
    if n_intervals < 2 or n_intervals % 2:
        raise InvalidArgumentError("composite Simpson needs an even number (>= 2) of intervals")
    w = np.full(n_intervals + 1, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * (h / 3.0)


def even_intervals(length: float, max_step: float) -> int:
    """Smallest even interval count whose spacing does not exceed ``max_step``."""
    n = math.ceil(length / max_step - 1e-9)
    n = max(n, 2)
    return n + (n % 2)


def simpson_nodes(a: float, b: float, max_step: float):
    """Nodes and weights of composite Simpson on ``[a, b]`` with spacing <= ``max_step``."""
    n = even_intervals(b - a, max_step)
    h = (b - a) / n
    nodes = a + h * np.arange(n + 1)
    nodes[-1] = b
    return nodes, simpson_weights(n, h)
