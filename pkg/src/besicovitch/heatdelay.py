"""Delayed heat equation on ``(0, pi)`` with Dirichlet conditions, truncated to
``K`` sine modes.

State vectors are coefficients in the orthonormal basis
``phi_k(x) = sqrt(2/pi) sin(k x)``, ``k = 1..K``, so their Euclidean norm is the
``L2(0, pi)`` norm of the represented function. The nonlinearity

    f(t, u, v) = g(t)/60 * (sin u + 3 sin v),
    g(t) = cos t + 2 cos(sqrt5 t) + 4 exp(-|t|) - 3/(1+t^2),

is applied pointwise at the ``M`` interior nodes ``x_j = j pi/(M+1)`` and
projected back with the orthonormal DST-I. Coefficients -> nodes is an
isometry (up to the fixed factor ``sqrt((M+1)/pi)``) and the projection is
orthogonal, so the discrete map inherits the pointwise Lipschitz bound of
``f``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.fft import dst

from .almostperiod import TranslationReport, find_translation_numbers, translation_estimate
from .errors import InvalidArgumentError
from .fnspec import FnSpec, evaluate, example_delay, example_time_factor, uses_state
from .grid import TimeGrid, make_grid
from .seminorm import SeminormConfig, besicovitch_seminorm
from .semigroup import heat_semigroup
from .solver import DelaySystem, SolveConfig, SolveReport

FORCING_DIVISOR = 60.0
DELAYED_WEIGHT = 3.0
# sup|g| <= 1 + 2 + 4 + 3, the bound behind the declared constants
G_BOUND = 10.0
L1 = G_BOUND / FORCING_DIVISOR
L2 = DELAYED_WEIGHT * G_BOUND / FORCING_DIVISOR
TAU_BAR = 4.0


def _default_solve():
    return SolveConfig(make_grid(0.0, 400.0, 0.01), history_horizon=40.0, tol=1e-8)


@dataclass(frozen=True)
class HeatDelayConfig:
    """``x_quad_points=None`` means ``4*K`` collocation nodes."""

    K: int = 8
    x_quad_points: Optional[int] = None
    solve: SolveConfig = field(default_factory=_default_solve)

    def __post_init__(self):
        if self.K < 1:
            raise InvalidArgumentError("need at least one mode")
        if self.n_nodes < 4 * self.K:
            raise InvalidArgumentError("x_quad_points must be at least 4*K")

    @property
    def n_nodes(self) -> int:
        return 4 * self.K if self.x_quad_points is None else self.x_quad_points

    @property
    def grid(self) -> TimeGrid:
        return self.solve.grid


class HeatNonlinearity:
    """Pseudospectral ``f`` acting on coefficient vectors.

    ``forcing`` optionally adds ``h(t) * p(x)`` with ``p(x) = x (pi - x)``; it
    breaks ``F(t, 0, 0) = 0`` and is only used to obtain non-trivial solutions.
    """

    def __init__(self, K: int, n_nodes: int, forcing: Optional[FnSpec] = None):
        if n_nodes < K:
            raise InvalidArgumentError("need at least K collocation nodes")
        self.dim = K
        self.n_nodes = n_nodes
        self.time_factor = example_time_factor()
        self.forcing = forcing
        if forcing is not None and (forcing.dim != 1 or uses_state(forcing)):
            raise InvalidArgumentError("forcing must be a scalar expression of time")
        x = self.nodes
        self._profile = self.project((x * (math.pi - x))[None, :])[0]

    @property
    def nodes(self) -> np.ndarray:
        M = self.n_nodes
        return math.pi * np.arange(1, M + 1) / (M + 1)

    def synthesize(self, coeffs) -> np.ndarray:
        """Node values ``u(x_j)`` from coefficients, shape ``(n, M)``."""
        coeffs = np.atleast_2d(coeffs)
        M = self.n_nodes
        padded = np.zeros((coeffs.shape[0], M))
        padded[:, : coeffs.shape[1]] = coeffs
        return math.sqrt((M + 1) / math.pi) * dst(padded, type=1, norm="ortho", axis=1)

    def project(self, values) -> np.ndarray:
        """First ``K`` coefficients of node values, shape ``(n, K)``."""
        M = self.n_nodes
        full = math.sqrt(math.pi / (M + 1)) * dst(np.atleast_2d(values), type=1, norm="ortho", axis=1)
        return full[:, : self.dim]

    def __call__(self, t, u, v):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        g = evaluate(self.time_factor, t)[:, 0] / FORCING_DIVISOR
        pointwise = np.sin(self.synthesize(u)) + DELAYED_WEIGHT * np.sin(self.synthesize(v))
        out = g[:, None] * self.project(pointwise)
        if self.forcing is not None:
            out = out + evaluate(self.forcing, t)[:, 0:1].real * self._profile[None, :]
        return out


def build_example(cfg: HeatDelayConfig = HeatDelayConfig(), forcing: Optional[FnSpec] = None) -> DelaySystem:
    """The delayed heat system with ``tau(t) = 3 - sin(sqrt3 t)`` and the declared
    constants ``L1 = 1/6``, ``L2 = 1/2``."""
    return DelaySystem(
        semigroup=heat_semigroup(cfg.K),
        F=HeatNonlinearity(cfg.K, cfg.n_nodes, forcing),
        tau=example_delay(),
        tau_bar=TAU_BAR,
        L1=L1,
        L2=L2,
    )


def project_nonlinearity(u_coeffs, v_coeffs, t: float, cfg: HeatDelayConfig = HeatDelayConfig()) -> np.ndarray:
    u = np.asarray(u_coeffs, dtype=float)
    v = np.asarray(v_coeffs, dtype=float)
    if u.shape != (cfg.K,) or v.shape != (cfg.K,):
        raise InvalidArgumentError(f"coefficient vectors must have length K={cfg.K}")
    F = HeatNonlinearity(cfg.K, cfg.n_nodes)
    return F(np.array([float(t)]), u[None, :], v[None, :])[0]


# Frequencies driving the system: forcing (1, sqrt5) and delay (sqrt3).
DRIVING_FREQUENCIES = (1.0, math.sqrt(5.0), math.sqrt(3.0))


def near_periods(frequencies, scan_range, resolution: float = 1e-3, count: int = 5) -> list:
    """Shifts in ``scan_range`` where every ``omega * tau`` is closest to ``2 pi Z``.

    Brute force over a fine lattice; returns the ``count`` best local minima of
    the worst phase mismatch.
    """
    a, b = scan_range
    taus = np.arange(a, b + resolution / 2, resolution)
    phases = np.outer(taus, np.asarray(frequencies)) / (2 * math.pi)
    mismatch = np.max(np.abs(phases - np.rint(phases)), axis=1)
    interior = np.arange(1, taus.size - 1)
    local = interior[
        (mismatch[interior] <= mismatch[interior - 1]) & (mismatch[interior] <= mismatch[interior + 1])
    ]
    best = local[np.argsort(mismatch[local], kind="stable")[:count]]
    return sorted(float(taus[i]) for i in best if taus[i] > 0)


def verification_config(report: SolveReport, scan_range, quad_step: float = 0.05, n_sweeps: int = 3) -> SeminormConfig:
    """Centered sweep that keeps every shifted window inside the solution grid."""
    g = report.solution.grid
    lo, hi = min(scan_range[0], 0.0), max(scan_range[1], 0.0)
    T_max = (g.t_max - g.t_min - (hi - lo)) / 2.0
    if not T_max > 0:
        raise InvalidArgumentError(
            f"solution window [{g.t_min}, {g.t_max}] too short for scan range {tuple(scan_range)}"
        )
    center = g.t_min + T_max - lo
    growth = 2.0
    return SeminormConfig(
        T0=T_max / growth ** (n_sweeps - 1),
        n_sweeps=n_sweeps,
        growth=growth,
        tail_window=n_sweeps,
        quad_step=max(quad_step, g.step),
        center=center,
    )


def solution_epsilon(report: SolveReport, fraction: float = 0.05, scan_range=(0.0, 200.0)) -> float:
    """``fraction`` of the solution seminorm, floored at the numerical resolution.

    The computed path is only known within ``error_bound`` of the true fixed
    point, so translation distances below twice that are not resolvable.
    """
    cfg = verification_config(report, scan_range)
    m = besicovitch_seminorm(report.solution, cfg).limsup_estimate
    return max(fraction * m, 2.0 * report.error_bound, 1e-15)


def verify_solution_almost_periodicity(
    report: SolveReport,
    epsilon: float,
    scan_range=(0.0, 200.0),
    scan_step: float = 0.1,
    frequencies=DRIVING_FREQUENCIES,
    threads: int = 1,
) -> TranslationReport:
    """Translation-number scan of the computed solution plus the simultaneous
    near-periods of the driving frequencies."""
    if not report.converged:
        raise InvalidArgumentError("solution report did not converge")
    cfg = verification_config(report, scan_range)
    path = report.solution
    scan = find_translation_numbers(path, epsilon, scan_range, scan_step, cfg, threads=threads)
    accepted = dict(scan.accepted)
    spreads = [scan.max_spread]
    for tau in near_periods(frequencies, scan_range):
        est = translation_estimate(path, tau, cfg)
        spreads.append(est.spread)
        if est.limsup_estimate < epsilon:
            accepted.setdefault(tau, est.limsup_estimate)
    pairs = sorted(accepted.items())
    a, b = scan.scan_range
    if pairs:
        pos = [a] + [tau for tau, _ in pairs] + [b]
        inclusion = float(max(np.diff(pos)))
    else:
        inclusion = math.inf
    return TranslationReport(
        epsilon=scan.epsilon,
        accepted=pairs,
        scan_range=scan.scan_range,
        scan_step=scan.scan_step,
        inclusion_length=inclusion,
        max_spread=float(max(spreads)),
        curve=scan.curve,
    )
