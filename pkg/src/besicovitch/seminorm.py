"""Finite-horizon Marcinkiewicz means, the limsup sweep estimator and Fourier-Bohr
coefficients.

The seminorm of ``f`` is ``(limsup_T 1/(2T) int_{-T}^{T} |f|^p dt)^(1/p)``. On finite
data we compute the inner mean on a geometric ladder of horizons and take the
maximum over the last few rungs as the limsup estimate; the spread over those
rungs is the convergence diagnostic that every downstream tolerance accounts
for.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from typing import Callable, Optional, Union

import numpy as np

from .errors import InvalidArgumentError
from .fnspec import FnSpec, evaluate, max_frequency, spectrum, uses_state
from .grid import SampledPath, path_values, sup_norm
from .quadrature import simpson_nodes

__all__ = [
    "SeminormConfig",
    "SeminormEstimate",
    "CoefficientEstimate",
    "as_evaluator",
    "resolve_quad_step",
    "finite_window_seminorm",
    "besicovitch_seminorm",
    "fourier_bohr_coefficient",
    "sup_norm",
]

Evaluable = Union[FnSpec, SampledPath, Callable]

# Quadrature nodes evaluated per block; bounds peak memory on long horizons.
_BLOCK = 1 << 17


@dataclass(frozen=True)
class SeminormConfig:
    """Parameters of the horizon sweep ``T_j = T0 * growth**j``.

    ``quad_step=None`` picks 1/64 of the shortest period present in an
    expression (0.01 if it has no sinusoids) or the grid step of a path.
    ``center`` moves the averaging windows to ``[center - T, center + T]``.
    """

    flat: float = 2.0
    T0: float = 100.0
    n_sweeps: int = 8
    growth: float = 2.0
    quad_step: Optional[float] = None
    tail_window: int = 3
    tol: float = 1e-2
    center: float = 0.0

    def __post_init__(self):
        if not self.flat >= 1:
            raise InvalidArgumentError("exponent must be >= 1")
        if not self.T0 > 0:
            raise InvalidArgumentError("T0 must be positive")
        if not self.growth > 1:
            raise InvalidArgumentError("growth must exceed 1")
        if not (self.n_sweeps >= self.tail_window >= 1):
            raise InvalidArgumentError("need n_sweeps >= tail_window >= 1")
        if self.quad_step is not None and not self.quad_step > 0:
            raise InvalidArgumentError("quad_step must be positive")
        if not self.tol > 0:
            raise InvalidArgumentError("tol must be positive")

    @property
    def horizons(self) -> list:
        return [self.T0 * self.growth**j for j in range(self.n_sweeps)]

    @property
    def T_max(self) -> float:
        return self.horizons[-1]

    def replace(self, **changes) -> "SeminormConfig":
        return SeminormConfig(**{**asdict(self), **changes})


@dataclass(frozen=True)
class SeminormEstimate:
    per_T: list
    limsup_estimate: float
    spread: float
    converged: bool
    tolerance: float

    def to_csv(self) -> str:
        lines = ["T,value"]
        lines += [f"{T!r},{val!r}" for T, val in self.per_T]
        lines.append(
            f"# limsup_estimate={self.limsup_estimate!r},spread={self.spread!r},"
            f"converged={str(self.converged).lower()},tolerance={self.tolerance!r}"
        )
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class CoefficientEstimate:
    """Fourier-Bohr coefficient; ``value`` comes from the largest horizon."""

    value: Union[complex, np.ndarray]
    spread: float
    per_T: list
    unresolved: list = field(default_factory=list)

    def __complex__(self):
        return complex(self.value)


def as_evaluator(f: Evaluable) -> Callable:
    """Map an expression, a path or a vectorized callable to ``t -> (n, d)`` values."""
    if isinstance(f, FnSpec):
        if uses_state(f):
            raise InvalidArgumentError("expression references state; bind it first")
        return lambda t: evaluate(f, t)
    if isinstance(f, SampledPath):
        return lambda t: path_values(f, t)
    if callable(f):
        def call(t):
            out = np.asarray(f(t))
            return out[:, None] if out.ndim == 1 else out
        return call
    raise TypeError(f"cannot evaluate object of type {type(f).__name__}")


def resolve_quad_step(f: Evaluable, cfg: SeminormConfig) -> float:
    if cfg.quad_step is not None:
        return cfg.quad_step
    if isinstance(f, SampledPath):
        return f.grid.step
    if isinstance(f, FnSpec):
        w = max_frequency(f)
        if w is not None:
            return 2.0 * math.pi / w / 64.0
    return 0.01


def _weighted_sum(evaluator, nodes, weights, reducer):
    total = 0.0
    for start in range(0, nodes.size, _BLOCK):
        sl = slice(start, start + _BLOCK)
        total = total + reducer(evaluator(nodes[sl]), nodes[sl], weights[sl])
    return total


def _mean_power(evaluator, a, b, step, flat):
    nodes, weights = simpson_nodes(a, b, step)

    def reducer(vals, _t, w):
        norms = np.linalg.norm(vals, axis=1)
        return np.dot(w, norms**flat)

    return _weighted_sum(evaluator, nodes, weights, reducer) / (b - a)


def finite_window_seminorm(f: Evaluable, T: float, cfg: SeminormConfig = SeminormConfig()) -> float:
    """``(1/(2T) int_{c-T}^{c+T} |f|^p dt)^(1/p)`` by composite Simpson."""
    if not T > 0:
        raise InvalidArgumentError("horizon T must be positive")
    step = resolve_quad_step(f, cfg)
    c = cfg.center
    mean = _mean_power(as_evaluator(f), c - T, c + T, step, cfg.flat)
    return float(max(mean, 0.0) ** (1.0 / cfg.flat))


def _summarize(per_T, cfg) -> SeminormEstimate:
    tail = [v for _, v in per_T[-cfg.tail_window:]]
    limsup = max(tail)
    spread = max(tail) - min(tail)
    converged = spread <= cfg.tol * limsup or spread == 0.0
    return SeminormEstimate(per_T, limsup, spread, bool(converged), cfg.tol)


def besicovitch_seminorm(f: Evaluable, cfg: SeminormConfig = SeminormConfig()) -> SeminormEstimate:
    """Sweep the horizons and estimate the limsup by the tail-window maximum."""
    per_T = [(T, finite_window_seminorm(f, T, cfg)) for T in cfg.horizons]
    return _summarize(per_T, cfg)


def fourier_bohr_coefficient(
    f: Evaluable, lam: float, cfg: SeminormConfig = SeminormConfig()
) -> CoefficientEstimate:
    """Long-time mean of ``f(t) exp(-i lam t)`` over the horizon sweep."""
    evaluator = as_evaluator(f)
    step = resolve_quad_step(f, cfg)
    if isinstance(f, FnSpec):
        step = min(step, 2.0 * math.pi / max(abs(lam), 1e-300) / 64.0)
    c = cfg.center
    per_T = []
    for T in cfg.horizons:
        nodes, weights = simpson_nodes(c - T, c + T, step)

        def reducer(vals, t, w):
            return (w * np.exp(-1j * lam * t)) @ vals

        value = _weighted_sum(evaluator, nodes, weights, reducer) / (2.0 * T)
        per_T.append((T, value[0] if value.size == 1 else value))
    tail = [np.atleast_1d(v) for _, v in per_T[-cfg.tail_window:]]
    spread = max(float(np.max(np.abs(a - b))) for a in tail for b in tail)
    unresolved = []
    if isinstance(f, FnSpec):
        spec = spectrum(f)
        if spec is not None:
            res = 2.0 * math.pi / cfg.T_max
            unresolved = sorted(w for w in spec if 0.0 < abs(w - lam) < res)
    return CoefficientEstimate(per_T[-1][1], spread, per_T, unresolved)
