"""Uniform time grids, sampled paths and off-grid interpolation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidArgumentError, OutOfRangeError
from .fnspec import FnSpec, evaluate, uses_state

SCHEMES = ("linear", "cubic")

# Relative slack (in units of the step) for treating a time as a grid point or
# as lying on the boundary of the grid.
_SNAP = 1e-9


@dataclass(frozen=True)
class TimeGrid:
    """Points ``t_min + i*step`` for ``i = 0..n_points-1``.

    ``t_max`` is normalized to the last grid point.
    """

    t_min: float
    t_max: float
    step: float

    def __post_init__(self):
        t_min, t_max, step = float(self.t_min), float(self.t_max), float(self.step)
        if not (math.isfinite(t_min) and math.isfinite(t_max) and math.isfinite(step)):
            raise InvalidArgumentError("grid bounds and step must be finite")
        if not step > 0:
            raise InvalidArgumentError(f"grid step must be positive, got {step}")
        if not t_max > t_min:
            raise InvalidArgumentError(f"empty grid interval [{t_min}, {t_max}]")
        n = math.floor((t_max - t_min) / step + _SNAP) + 1
        object.__setattr__(self, "t_min", t_min)
        object.__setattr__(self, "step", step)
        object.__setattr__(self, "t_max", t_min + (n - 1) * step)
        object.__setattr__(self, "_n", n)

    @property
    def n_points(self) -> int:
        return self._n

    @cached_property
    def points(self) -> np.ndarray:
        pts = self.t_min + self.step * np.arange(self._n)
        pts.setflags(write=False)
        return pts

    def covers(self, a: float, b: float) -> bool:
        slack = _SNAP * self.step
        return self.t_min - slack <= a and b <= self.t_max + slack

    def index_of(self, t: float) -> int:
        """Index of the grid point at ``t``; raises if ``t`` is not a grid point."""
        s = (t - self.t_min) / self.step
        i = round(s)
        if abs(s - i) > 1e-6 or not 0 <= i < self._n:
            raise InvalidArgumentError(f"{t} is not a point of the grid")
        return i


def make_grid(t_min: float, t_max: float, step: float) -> TimeGrid:
    return TimeGrid(t_min, t_max, step)


@dataclass(frozen=True, eq=False)
class SampledPath:
    """Values of a ``d``-dimensional path on a grid, shape ``(n_points, d)``."""

    grid: TimeGrid
    values: np.ndarray
    interp_scheme: str = "cubic"

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2:
            raise InvalidArgumentError("path values must be (n_points, d)")
        if values.shape[0] != self.grid.n_points:
            raise InvalidArgumentError(
                f"{values.shape[0]} values for a grid of {self.grid.n_points} points"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("path values must be finite")
        if self.interp_scheme not in SCHEMES:
            raise InvalidArgumentError(f"unknown interpolation scheme {self.interp_scheme!r}")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def with_values(self, values) -> "SampledPath":
        return SampledPath(self.grid, values, self.interp_scheme)

    def __call__(self, t) -> np.ndarray:
        return path_values(self, t)


def sample_fnspec(f: FnSpec, grid: TimeGrid, scheme: str = "cubic", dim=None) -> SampledPath:
    """``values[i] = f(grid point i)``."""
    if dim is not None and f.dim != dim:
        raise InvalidArgumentError(f"expression has dimension {f.dim}, expected {dim}")
    if uses_state(f):
        raise InvalidArgumentError("cannot sample an expression that references state")
    return SampledPath(grid, evaluate(f, grid.points), scheme)


def path_values(p: SampledPath, t) -> np.ndarray:
    """Interpolate ``p`` at an array of times; returns shape ``(len(t), d)``.

    ``cubic`` is local 4-point Lagrange interpolation (one-sided stencils at the
    ends), exact for cubics; grids with fewer than 4 points fall back to linear.

    Raises OutOfRangeError if any time lies outside the grid.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    g = p.grid
    n = g.n_points
    s = (t - g.t_min) / g.step
    if s.size and (s.min() < -_SNAP or s.max() > n - 1 + _SNAP):
        bad = t[(s < -_SNAP) | (s > n - 1 + _SNAP)][0]
        raise OutOfRangeError(
            f"t={bad} outside the grid [{g.t_min}, {g.t_max}]; extend the grid (no extrapolation)"
        )
    s = np.clip(s, 0.0, n - 1)
    nearest = np.rint(s)
    on_grid = np.abs(s - nearest) <= _SNAP
    vals = p.values
    if p.interp_scheme == "linear" or n < 4:
        i = np.clip(np.floor(s).astype(np.intp), 0, n - 2)
        x = (s - i)[:, None]
        out = (1.0 - x) * vals[i] + x * vals[i + 1]
    else:
        start = np.clip(np.floor(s).astype(np.intp) - 1, 0, n - 4)
        x = s - start
        x1, x2, x3 = x - 1.0, x - 2.0, x - 3.0
        w0 = -(x1 * x2 * x3) / 6.0
        w1 = (x * x2 * x3) / 2.0
        w2 = -(x * x1 * x3) / 2.0
        w3 = (x * x1 * x2) / 6.0
        out = (
            w0[:, None] * vals[start]
            + w1[:, None] * vals[start + 1]
            + w2[:, None] * vals[start + 2]
            + w3[:, None] * vals[start + 3]
        )
    if on_grid.any():
        out[on_grid] = vals[nearest[on_grid].astype(np.intp)]
    return out


def eval_path_at(p: SampledPath, t: float) -> np.ndarray:
    """Interpolated state vector at a single time."""
    return path_values(p, np.array([float(t)]))[0]


def sup_norm(p) -> float:
    """Maximum Euclidean norm over the stored samples (a path or a raw array)."""
    values = p.values if isinstance(p, SampledPath) else np.asarray(p)
    if values.ndim == 1:
        values = values[:, None]
    if values.size == 0:
        return 0.0
    return float(np.max(np.linalg.norm(values, axis=1)))


def random_trig_path(rng, grid: TimeGrid, dim: int, n_terms: int = 3, amplitude: float = 0.5,
                     max_frequency: float = 3.0, scheme: str = "cubic") -> SampledPath:
    """Sum of ``n_terms`` random cosines per coordinate, sup bounded by ``amplitude``."""
    values = np.zeros((grid.n_points, dim))
    t = grid.points
    for k in range(dim):
        amps = rng.uniform(-1.0, 1.0, n_terms)
        amps *= amplitude / max(np.sum(np.abs(amps)), 1e-300)
        freqs = rng.uniform(0.1, max_frequency, n_terms)
        phases = rng.uniform(0.0, 2 * np.pi, n_terms)
        values[:, k] = np.cos(np.outer(t, freqs) + phases) @ amps
    return SampledPath(grid, values, scheme)
