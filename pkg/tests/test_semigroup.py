import math

import numpy as np
import pytest

from besicovitch.errors import InvalidArgumentError, StabilityViolationError
from besicovitch.semigroup import (
    apply_semigroup,
    diagonal_semigroup,
    heat_semigroup,
    operator_norm,
    stability_certificate,
)


def test_valid_specs():
    assert diagonal_semigroup([-1, -4, -9]).dimension == 3
    assert diagonal_semigroup([-3]).dimension == 1
    assert heat_semigroup(3).eigenvalues.tolist() == [-1.0, -4.0, -9.0]


@pytest.mark.parametrize("eig", [[-1, 0.5], [0.0], [-2, 0]])
def test_unstable_spectrum(eig):
    with pytest.raises(StabilityViolationError):
        diagonal_semigroup(eig)


def test_apply_examples():
    s = heat_semigroup(3)
    v = np.array([1.0, -2.0, 3.0])
    assert np.array_equal(apply_semigroup(s, 0.0, v), v)
    assert np.array_equal(apply_semigroup(s, 1.0, [1.0, 0.0, 0.0]), [math.exp(-1), 0.0, 0.0])


def test_apply_errors():
    s = heat_semigroup(2)
    with pytest.raises(InvalidArgumentError):
        apply_semigroup(s, -0.1, [1.0, 1.0])
    with pytest.raises(InvalidArgumentError):
        apply_semigroup(s, 1.0, [1.0, 1.0, 1.0])


def test_semigroup_law(rng):
    for _ in range(100):
        d = int(rng.integers(1, 9))
        s = diagonal_semigroup(-rng.uniform(0.1, 10.0, d))
        t1, t2 = rng.uniform(0, 3, 2)
        v = rng.normal(size=d)
        lhs = apply_semigroup(s, t1 + t2, v)
        rhs = apply_semigroup(s, t2, apply_semigroup(s, t1, v))
        assert np.max(np.abs(lhs - rhs)) <= 1e-14 * max(1.0, np.max(np.abs(v)))


def test_certificates():
    c = stability_certificate(heat_semigroup(8))
    assert (c.N, c.lam) == (1.0, 1.0)
    c = stability_certificate(diagonal_semigroup([-3]))
    assert (c.N, c.lam) == (1.0, 3.0)


def test_certificate_on_time_grid():
    s = diagonal_semigroup([-0.7, -2.0, -5.0])
    c = stability_certificate(s)
    for t in np.arange(0, 20.5, 0.5):
        assert operator_norm(s, t) <= c.bound(t) * (1 + 1e-15)
        for v in np.eye(3):
            assert np.linalg.norm(apply_semigroup(s, t, v)) <= c.bound(t) * (1 + 1e-15)


def test_certificate_soundness(rng):
    s = heat_semigroup(6)
    c = stability_certificate(s)
    for _ in range(100):
        t = float(rng.uniform(0, 10))
        v = rng.normal(size=6)
        lhs = np.linalg.norm(apply_semigroup(s, t, v))
        assert lhs <= c.bound(t) * np.linalg.norm(v) + 1e-14
