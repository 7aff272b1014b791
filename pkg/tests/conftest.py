import math

import numpy as np
import pytest

from besicovitch.fnspec import trig_polynomial
from besicovitch.seminorm import SeminormConfig

# Short sweep for property tests: enough to resolve frequencies >= 0.1 apart.
FAST = SeminormConfig(T0=50.0, n_sweeps=3, tail_window=3, quad_step=0.05)


def random_trig(rng, n_terms=3, max_amp=1.0, freqs=None, low=0.3, high=3.0):
    """Random real trig polynomial and its amplitudes, frequencies."""
    amps = rng.uniform(-max_amp, max_amp, n_terms)
    if freqs is None:
        freqs = rng.uniform(low, high, n_terms)
    phases = rng.uniform(0.0, 2 * math.pi, n_terms)
    return trig_polynomial(amps.tolist(), list(freqs), phases.tolist()), amps, np.asarray(freqs)


def separated_frequencies(rng, n, low=0.5, high=6.0, gap=0.2):
    while True:
        f = np.sort(rng.uniform(low, high, n))
        if n == 1 or np.min(np.diff(f)) >= gap:
            return f


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
