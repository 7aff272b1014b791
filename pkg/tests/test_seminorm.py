import math

import numpy as np
import pytest

from besicovitch.errors import InvalidArgumentError, OutOfRangeError
from besicovitch.fnspec import (
    Const,
    Cos,
    ExpDecay,
    Lorentz,
    Scale,
    Shift,
    Sin,
    Sum,
    complex_exponentials,
    example_time_factor,
)
from besicovitch.grid import make_grid, sample_fnspec
from besicovitch.seminorm import (
    SeminormConfig,
    besicovitch_seminorm,
    finite_window_seminorm,
    fourier_bohr_coefficient,
)

from conftest import random_trig, separated_frequencies

TAIL_SWEEP = SeminormConfig(T0=1250.0, n_sweeps=4, tail_window=4)


def test_zero_function():
    assert finite_window_seminorm(Const(0.0), 37.0) == 0.0


def test_sin_over_whole_periods():
    assert abs(finite_window_seminorm(Sin(1.0), 1000 * math.pi) - 1 / math.sqrt(2)) < 1e-9


def test_constant():
    est = besicovitch_seminorm(Const(-2.5), SeminormConfig(n_sweeps=3))
    assert est.limsup_estimate == pytest.approx(2.5, abs=1e-12)
    assert est.converged


@pytest.mark.parametrize("f", [Scale(4.0, ExpDecay(1.0)), Scale(3.0, Lorentz())], ids=["exp", "lorentz"])
def test_integrable_terms_vanish(f):
    est = besicovitch_seminorm(f, TAIL_SWEEP)
    values = [v for _, v in est.per_T]
    assert est.per_T[-1][0] == 1e4
    assert values[-1] <= 0.05
    assert all(b < a for a, b in zip(values, values[1:]))


def test_two_exponentials_parseval():
    f = complex_exponentials([1.5 - 0.5j, 0.7j], [1.0, math.sqrt(3)])
    est = besicovitch_seminorm(f)
    assert est.limsup_estimate == pytest.approx(math.sqrt(abs(1.5 - 0.5j) ** 2 + 0.7**2), abs=1e-3)


def test_random_trig_parseval(rng):
    cfg = SeminormConfig(T0=2500.0, n_sweeps=3)
    for _ in range(10):
        n = int(rng.integers(1, 7))
        f, amps, _ = random_trig(rng, n, freqs=separated_frequencies(rng, n))
        exact = math.sqrt(np.sum(amps**2) / 2)
        est = besicovitch_seminorm(f, cfg)
        assert est.per_T[-1][0] == 1e4
        assert abs(est.limsup_estimate - exact) <= 1e-3 * exact


def test_example_time_factor_seminorm():
    est = besicovitch_seminorm(example_time_factor())
    assert est.limsup_estimate == pytest.approx(math.sqrt(2.5), abs=1e-2)
    brute = finite_window_seminorm(example_time_factor(), 1e4, SeminormConfig(quad_step=0.005))
    assert brute == pytest.approx(math.sqrt(2.5), abs=1e-2)


def test_fourier_bohr_coefficients():
    f = complex_exponentials([3.0], [1.0])
    assert complex(fourier_bohr_coefficient(f, 1.0).value) == pytest.approx(3.0, abs=1e-3)
    assert abs(complex(fourier_bohr_coefficient(f, 2.0).value)) < 1e-3
    c = fourier_bohr_coefficient(example_time_factor(), math.sqrt(5))
    assert complex(c.value) == pytest.approx(1.0, abs=1e-2)


def test_close_frequencies_are_reported():
    f = Sum((Cos(1.0), Cos(1.0 + 1e-4)))
    c = fourier_bohr_coefficient(f, 1.0, SeminormConfig(n_sweeps=3))
    assert c.unresolved == [1.0 + 1e-4]


def test_axioms_at_fixed_horizon(rng):
    cfg = SeminormConfig(quad_step=0.02)
    T = 40.0
    for _ in range(30):
        f, _, _ = random_trig(rng, 3)
        g, _, _ = random_trig(rng, 2)
        lam = float(rng.uniform(-5, 5))
        vf = finite_window_seminorm(f, T, cfg)
        vg = finite_window_seminorm(g, T, cfg)
        assert vf >= 0
        assert abs(finite_window_seminorm(Scale(lam, f), T, cfg) - abs(lam) * vf) <= 1e-12 * max(1.0, abs(lam) * vf)
        assert finite_window_seminorm(f + g, T, cfg) <= vf + vg + 1e-12



def test_translation_invariance(rng):
    cfg = SeminormConfig(T0=100.0, n_sweeps=4, quad_step=0.02)
    for _ in range(10):
        f, amps, _ = random_trig(rng, 3)
        alpha = float(rng.uniform(-20, 20))
        shifted = Shift(Const(alpha), f)
        S = float(np.sum(np.abs(amps)))
        for T in cfg.horizons:
            gap = abs(finite_window_seminorm(shifted, T, cfg) - finite_window_seminorm(f, T, cfg))
            assert gap <= math.sqrt(abs(alpha) / T) * S + 1e-12
        a, b = besicovitch_seminorm(f, cfg), besicovitch_seminorm(shifted, cfg)
        T_tail = cfg.horizons[-cfg.tail_window]
        allowance = a.spread + b.spread + math.sqrt(abs(alpha) / T_tail) * S
        assert abs(a.limsup_estimate - b.limsup_estimate) <= allowance


def test_sampled_path_needs_coverage():
    p = sample_fnspec(Sin(1.0), make_grid(-10, 10, 0.01))
    assert finite_window_seminorm(p, 10.0) == pytest.approx(finite_window_seminorm(Sin(1.0), 10.0), abs=1e-6)
    with pytest.raises(OutOfRangeError):
        finite_window_seminorm(p, 11.0)


def test_invalid_config():
    for bad in ({"flat": 0.5}, {"growth": 1.0}, {"T0": 0.0}, {"tail_window": 9}, {"quad_step": -1.0}):
        with pytest.raises(InvalidArgumentError):
            SeminormConfig(**bad)


def test_csv_block():
    est = besicovitch_seminorm(Const(1.0), SeminormConfig(n_sweeps=3))
    lines = est.to_csv().splitlines()
    assert lines[0] == "T,value"
    assert len(lines) == 1 + 3 + 1
    assert lines[-1].startswith("# limsup_estimate=")
