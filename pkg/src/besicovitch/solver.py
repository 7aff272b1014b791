"""Whole-line bounded mild solutions of ``x' = A x + F(t, x(t), x(t - tau(t)))``.

The solution is the fixed point of

    (Psi x)(t) = int_{-inf}^{t} T(t - s) F(s, x(s), x(s - tau(s))) ds,

a contraction in the sup norm with constant ``kappa = N (L1 + L2) / lambda``
whenever ``||T(t)|| <= N exp(-lambda t)`` and ``F`` is ``(L1, L2)``-Lipschitz.

Numerically the lower limit is cut to ``t - H`` and the integral is a
composite-Simpson sum on a lattice of spacing ``quad_step``. For a diagonal
generator that sum is a causal convolution of the integrand with the kernel
``w_j exp(mu_k j h)``, evaluated per mode by FFT.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Protocol, Sequence

import numpy as np
from scipy.signal import fftconvolve

from .errors import (
    HypothesisViolationError,
    InvalidArgumentError,
    NonConvergenceError,
    OutOfRangeError,
)
from .fnspec import FnSpec, State, _walk, evaluate, uses_state
from .grid import SampledPath, TimeGrid, path_values, sup_norm
from .quadrature import simpson_weights
from .semigroup import SemigroupSpec, StabilityCertificate, stability_certificate

# Default probe window for checks of tau and of F(t, 0, 0) = 0.
PROBE = (-500.0, 500.0, 0.01)


class Nonlinearity(Protocol):
    dim: int

    def __call__(self, t: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Vectorized ``F``: ``t`` is ``(n,)``, ``u`` and ``v`` are ``(n, dim)``."""


@dataclass(frozen=True)
class ExprNonlinearity:
    """``F`` written as an expression in ``t`` and the state coordinates."""

    spec: FnSpec
    dim: int

    def __post_init__(self):
        if self.spec.dim not in (1, self.dim):
            raise InvalidArgumentError(
                f"nonlinearity has dimension {self.spec.dim}, state dimension is {self.dim}"
            )

    def __call__(self, t, u, v):
        out = evaluate(self.spec, t, u, v)
        if out.shape[1] != self.dim:
            out = np.broadcast_to(out, (out.shape[0], self.dim)).copy()
        return out


@dataclass(frozen=True)
class DelaySystem:
    semigroup: SemigroupSpec
    F: object
    tau: FnSpec
    tau_bar: float
    L1: float
    L2: float
    probe: tuple = PROBE

    def __post_init__(self):
        d = self.semigroup.dimension
        F = self.F
        if isinstance(F, FnSpec):
            F = ExprNonlinearity(F, d)
            object.__setattr__(self, "F", F)
        if getattr(F, "dim", None) != d:
            raise InvalidArgumentError("nonlinearity dimension does not match the semigroup")
        if self.tau.dim != 1 or uses_state(self.tau):
            raise InvalidArgumentError("delay must be a scalar expression of time only")
        if self.L1 < 0 or self.L2 < 0:
            raise InvalidArgumentError("Lipschitz constants must be non-negative")
        t = self._probe_times()
        tau = evaluate(self.tau, t)[:, 0].real
        if np.min(tau) <= 0:
            raise InvalidArgumentError("delay must stay positive")
        if np.max(tau) > self.tau_bar * (1 + 1e-12):
            raise InvalidArgumentError(
                f"delay reaches {np.max(tau)} > declared bound tau_bar={self.tau_bar}"
            )

    def _probe_times(self):
        lo, hi, step = self.probe
        return lo + step * np.arange(math.floor((hi - lo) / step) + 1)

    @property
    def dim(self) -> int:
        return self.semigroup.dimension

    @property
    def certificate(self) -> StabilityCertificate:
        return stability_certificate(self.semigroup)

    @property
    def kappa(self) -> float:
        cert = self.certificate
        return cert.N * (self.L1 + self.L2) / cert.lam

    def vanishes_at_zero(self, atol: float = 0.0) -> bool:
        """Whether ``F(t, 0, 0) = 0`` on the probe grid."""
        t = self._probe_times()
        z = np.zeros((t.size, self.dim))
        return bool(np.max(np.abs(self.F(t, z, z))) <= atol)


@dataclass(frozen=True)
class SolveConfig:
    """``grid`` is the solution window; ``history_horizon=None`` picks the
    smallest ``H`` whose truncation tail is below ``tol/10``; ``quad_step=None``
    uses the grid step (which must be an integer multiple of ``quad_step``)."""

    grid: TimeGrid
    history_horizon: Optional[float] = None
    quad_step: Optional[float] = None
    tol: float = 1e-8
    max_iter: int = 200
    interp_scheme: str = "cubic"

    def __post_init__(self):
        if not self.tol > 0:
            raise InvalidArgumentError("tol must be positive")
        if self.max_iter < 1:
            raise InvalidArgumentError("max_iter must be >= 1")
        if self.history_horizon is not None and not self.history_horizon > 0:
            raise InvalidArgumentError("history horizon must be positive")
        if self.quad_step is not None and not self.quad_step > 0:
            raise InvalidArgumentError("quad_step must be positive")
        q = self.step
        r = self.grid.step / q
        if abs(r - round(r)) > 1e-9 * max(1.0, r):
            raise InvalidArgumentError("grid step must be an integer multiple of quad_step")

    @property
    def step(self) -> float:
        return self.grid.step if self.quad_step is None else self.quad_step


@dataclass
class SolveReport:
    solution: SampledPath
    extended: SampledPath
    iterations: int
    residuals: list
    empirical_ratios: list
    kappa: float
    converged: bool
    horizon: float
    tol: float
    tail_bounds: list = field(default_factory=list)
    apriori_bound: Optional[int] = None

    @property
    def horizon_adequate(self) -> bool:
        return all(b <= self.tol / 10 for b in self.tail_bounds)

    @property
    def error_bound(self) -> float:
        """A-posteriori ``||x_k - x*||`` bound ``kappa/(1-kappa) * r_k``."""
        if not self.residuals:
            return math.inf
        return self.kappa / (1.0 - self.kappa) * self.residuals[-1]

    def summary(self) -> dict:
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "kappa": self.kappa,
            "tol": self.tol,
            "history_horizon": self.horizon,
            "final_residual": self.residuals[-1] if self.residuals else None,
            "apriori_bound": self.apriori_bound,
            "horizon_adequate": self.horizon_adequate,
            "error_bound": self.error_bound,
            "solution_sup_norm": sup_norm(self.solution),
            "residuals": list(self.residuals),
            "empirical_ratios": list(self.empirical_ratios),
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2)

    def solution_csv(self) -> str:
        g = self.solution.grid
        head = "t," + ",".join(f"x{k}" for k in range(self.solution.dim))
        rows = [
            f"{t!r}," + ",".join(repr(float(x)) for x in row)
            for t, row in zip(g.points.tolist(), self.solution.values)
        ]
        return head + "\n" + "\n".join(rows) + "\n"

    def residual_csv(self) -> str:
        lines = ["iteration,residual,ratio"]
        prev = None
        for k, r in enumerate(self.residuals, start=1):
            ratio = repr(r / prev) if prev else ""
            lines.append(f"{k},{r!r},{ratio}")
            prev = r
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ContractionStats:
    ratios: list
    max: float
    mean: float
    skipped: list


def kappa_check(N: float, lam: float, L1: float, L2: float) -> float:
    """``kappa = N (L1 + L2) / lambda``; raises if ``kappa >= 1``."""
    if not N >= 1:
        raise InvalidArgumentError("N must be >= 1")
    if not lam > 0:
        raise InvalidArgumentError("lambda must be positive")
    if L1 < 0 or L2 < 0:
        raise InvalidArgumentError("Lipschitz constants must be non-negative")
    kappa = N * (L1 + L2) / lam
    if kappa >= 1:
        raise HypothesisViolationError(
            f"kappa = {kappa} >= 1, the contraction hypothesis fails", value=kappa
        )
    return kappa


def apriori_iterations(kappa: float, r1: float, tol: float) -> int:
    """Iterations after the first guaranteed to bring the residual below ``tol``."""
    if r1 <= tol:
        return 0
    if kappa == 0:
        return 1
    return max(1, math.ceil(math.log(tol * (1 - kappa) / r1) / math.log(kappa)))


def default_horizon(cert: StabilityCertificate, bound: float, tol: float) -> float:
    """Smallest ``H`` with ``N exp(-lambda H) bound / lambda <= tol / 10``."""
    bound = max(bound, tol)
    return max(math.log(10.0 * cert.N * bound / (cert.lam * tol)) / cert.lam, 0.0)


def _round_horizon(H: float, q: float) -> int:
    """Number of Simpson intervals (even) covering ``H`` at spacing ``q``."""
    n = math.ceil(H / q - 1e-9)
    n = max(n, 2)
    return n + (n % 2)


def extended_grid(cfg: SolveConfig, H: float, tau_bar: float) -> TimeGrid:
    """Window grid continued to the left by ``H + tau_bar`` (rounded up to a grid step)."""
    g = cfg.grid
    k = math.ceil((H + tau_bar) / g.step - 1e-9)
    return TimeGrid(g.t_min - k * g.step, g.t_max, g.step)


def _kernel(mu, n_intervals, q):
    w = simpson_weights(n_intervals, q)
    j = np.arange(n_intervals + 1) * q
    return w[:, None] * np.exp(np.outer(j, mu))


def _integrand(sys: DelaySystem, x: SampledPath, s):
    u = path_values(x, s)
    delayed = s - evaluate(sys.tau, s)[:, 0].real
    v = path_values(x, delayed)
    return np.asarray(sys.F(s, u, v))


def _psi(sys: DelaySystem, x: SampledPath, out: TimeGrid, n_H: int, q: float, strict: bool):
    """``Psi x`` on ``out`` and the sup of the integrand.

    With ``strict`` every output point gets the full window ``[t - H, t]``;
    otherwise windows reaching below the data are cut at the earliest node
    where the delayed state is available.
    """
    if x.dim != sys.dim:
        raise InvalidArgumentError(f"path dimension {x.dim} != system dimension {sys.dim}")
    r = round(out.step / q)
    H = n_H * q
    s_avail = x.grid.t_min + sys.tau_bar
    slack = 1e-9 * q
    if strict:
        if out.t_min - H < s_avail - slack or out.t_max > x.grid.t_max + slack:
            raise OutOfRangeError(
                f"input path covers [{x.grid.t_min}, {x.grid.t_max}]; need "
                f"[{out.t_min - H - sys.tau_bar}, {out.t_max}]"
            )
        m0 = -n_H
    else:
        if out.t_max > x.grid.t_max + slack:
            raise OutOfRangeError("output grid extends past the input path")
        m0 = max(-n_H, math.ceil((s_avail - out.t_min) / q - 1e-9))
    m1 = (out.n_points - 1) * r
    s = out.t_min + q * np.arange(m0, m1 + 1)
    G = _integrand(sys, x, s)
    kernel = _kernel(sys.semigroup.eigenvalues, n_H, q)
    U = fftconvolve(G, kernel, axes=0)[: s.size]
    idx = np.arange(out.n_points) * r - m0
    values = np.zeros((out.n_points, sys.dim))
    ok = idx >= 0
    values[ok] = U[idx[ok]]
    g_sup = float(np.max(np.linalg.norm(G, axis=1))) if G.size else 0.0
    return values, g_sup


def _horizon(sys, cfg, x0):
    """Number of Simpson intervals of the truncated history window."""
    q = cfg.step
    if cfg.history_horizon is not None:
        return _round_horizon(cfg.history_horizon, q)
    cert = sys.certificate
    # |F(s, x, y)| <= |F(s, 0, 0)| + (L1 + L2) sup|x| and every iterate started
    # inside the a-priori ball stays bounded by N F0 / (lambda (1 - kappa)).
    t = cfg.grid.points
    z = np.zeros((t.size, sys.dim))
    f0 = float(np.max(np.linalg.norm(sys.F(t, z, z), axis=1)))
    kappa = min(sys.kappa, 1 - 1e-12)
    radius = max(sup_norm(x0), cert.N * f0 / (cert.lam * (1 - kappa)))
    bound = f0 + (sys.L1 + sys.L2) * radius
    return _round_horizon(default_horizon(cert, bound, cfg.tol), q)


def apply_Psi(sys: DelaySystem, x: SampledPath, cfg: SolveConfig) -> SampledPath:
    """``Psi x`` on ``cfg.grid``; ``x`` must cover ``[t_min - H - tau_bar, t_max]``."""
    n_H = _horizon(sys, cfg, x)
    values, _ = _psi(sys, x, cfg.grid, n_H, cfg.step, strict=True)
    return SampledPath(cfg.grid, values, cfg.interp_scheme)


def iteration_grid(cfg: SolveConfig, H: float, tau_bar: float) -> TimeGrid:
    """Grid Picard iterates live on: the extended grid plus a burn-in of ``H``.

    Near its left end an iterate only sees part of its history window. The
    burn-in lets that error decay by ``exp(-lambda H)`` before it reaches the
    region that feeds the solution window.
    """
    return extended_grid(cfg, 2.0 * H, tau_bar)


def _on_grid(x: SampledPath, grid: TimeGrid, scheme: str, need_from: float) -> SampledPath:
    """``x`` resampled on ``grid``; ``x`` must cover ``[need_from, grid.t_max]`` and is
    continued to the left by its first value."""
    if x.grid == grid and x.interp_scheme == scheme:
        return x
    if not x.grid.covers(need_from, grid.t_max):
        raise OutOfRangeError(
            f"path covers [{x.grid.t_min}, {x.grid.t_max}], need [{need_from}, {grid.t_max}]"
        )
    t = np.maximum(grid.points, x.grid.t_min)
    return SampledPath(grid, path_values(x, t), scheme)


def picard_solve(
    sys: DelaySystem, x0: Optional[SampledPath], cfg: SolveConfig, raise_on_failure: bool = True
) -> SolveReport:
    """Iterate ``x_{k+1} = Psi x_k`` on ``iteration_grid`` until the sup residual
    drops to ``cfg.tol``.

    ``x0=None`` starts from zero; otherwise ``x0`` must cover
    ``[t_min - H - tau_bar, t_max]``. Raises HypothesisViolationError if
    ``kappa >= 1`` and NonConvergenceError (with the report attached) when
    ``max_iter`` is exhausted.
    """
    cert = sys.certificate
    kappa = kappa_check(cert.N, cert.lam, sys.L1, sys.L2)
    q = cfg.step
    n_H = _horizon(sys, cfg, np.zeros((1, sys.dim)) if x0 is None else x0)
    H = n_H * q
    ext = iteration_grid(cfg, H, sys.tau_bar)
    if x0 is None:
        x = SampledPath(ext, np.zeros((ext.n_points, sys.dim)), cfg.interp_scheme)
    else:
        need = extended_grid(cfg, H, sys.tau_bar).t_min
        x = _on_grid(x0, ext, cfg.interp_scheme, need)

    residuals, ratios, tails = [], [], []
    converged = False
    for _ in range(cfg.max_iter):
        values, g_sup = _psi(sys, x, ext, n_H, q, strict=False)
        residual = sup_norm(values - x.values)
        tails.append(cert.N * math.exp(-cert.lam * H) * g_sup / cert.lam)
        if residuals and residuals[-1] > 0:
            ratios.append(residual / residuals[-1])
        residuals.append(residual)
        x = x.with_values(values)
        if residual <= cfg.tol:
            converged = True
            break

    offset = ext.index_of(cfg.grid.t_min)
    report = SolveReport(
        solution=SampledPath(cfg.grid, x.values[offset:], cfg.interp_scheme),
        extended=x,
        iterations=len(residuals),
        residuals=residuals,
        empirical_ratios=ratios,
        kappa=kappa,
        converged=converged,
        horizon=H,
        tol=cfg.tol,
        tail_bounds=tails,
        apriori_bound=apriori_iterations(kappa, residuals[0], cfg.tol),
    )
    if not converged and raise_on_failure:
        raise NonConvergenceError(
            f"no convergence after {cfg.max_iter} iterations (last residual {residuals[-1]:.3e})",
            report=report,
        )
    return report


def empirical_contraction(
    sys: DelaySystem, pairs: Sequence, cfg: SolveConfig
) -> ContractionStats:
    """``sup|Psi x - Psi y| / sup|x - y|`` for each pair; identical pairs are skipped."""
    cert = sys.certificate
    kappa_check(cert.N, cert.lam, sys.L1, sys.L2)
    ratios, skipped = [], []
    for k, (x, y) in enumerate(pairs):
        n_H = _horizon(sys, cfg, x)
        ext = extended_grid(cfg, n_H * cfg.step, sys.tau_bar)
        dx = path_values(x, ext.points) - path_values(y, ext.points)
        den = sup_norm(dx)
        if den == 0:
            skipped.append(k)
            continue
        px, _ = _psi(sys, x, cfg.grid, n_H, cfg.step, strict=True)
        py, _ = _psi(sys, y, cfg.grid, n_H, cfg.step, strict=True)
        ratios.append(sup_norm(px - py) / den)
    if not ratios:
        return ContractionStats([], 0.0, 0.0, skipped)
    return ContractionStats(ratios, float(max(ratios)), float(np.mean(ratios)), skipped)


@dataclass(frozen=True)
class SampleBox:
    """Times uniform in ``t_range``; state coordinates uniform in ``[-radius, radius]``."""

    t_range: tuple = (-10.0, 10.0)
    radius: float = 1.0


def estimate_lipschitz(F, sample_box: SampleBox, n_samples: int, dim: Optional[int] = None, seed=0):
    """Sampled lower bounds ``(L1_est, L2_est)`` of the Lipschitz constants of ``F``.

    ``F`` is an expression or a vectorized nonlinearity. For each sample the
    other argument is held fixed while one argument moves.
    """
    if n_samples < 2:
        raise InvalidArgumentError("need at least 2 samples")
    if isinstance(F, FnSpec):
        if dim is None:
            dim = max(F.dim, 1 + max((n.index for n in _state_nodes(F)), default=0))
        F = ExprNonlinearity(F, dim)
    d = F.dim
    rng = np.random.default_rng(seed)
    lo, hi = sample_box.t_range
    r = sample_box.radius
    t = rng.uniform(lo, hi, n_samples)
    u, u2, v, v2 = (rng.uniform(-r, r, (n_samples, d)) for _ in range(4))
    base = F(t, u, v)
    d1 = np.linalg.norm(F(t, u2, v) - base, axis=1) / np.linalg.norm(u2 - u, axis=1)
    d2 = np.linalg.norm(F(t, u, v2) - base, axis=1) / np.linalg.norm(v2 - v, axis=1)
    return float(np.max(d1)), float(np.max(d2))


def _state_nodes(f):
    return [n for n in _walk(f) if isinstance(n, State)]
