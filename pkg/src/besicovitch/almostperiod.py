"""Bohr translation numbers, Bochner nets and the continuity modulus in the
Marcinkiewicz seminorm."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import InvalidArgumentError
from .seminorm import (
    SeminormConfig,
    SeminormEstimate,
    _summarize,
    as_evaluator,
    resolve_quad_step,
)
from .quadrature import simpson_nodes

__all__ = [
    "TranslationReport",
    "NetReport",
    "ContinuityModulus",
    "translation_estimate",
    "translation_distance",
    "find_translation_numbers",
    "bochner_compactness_test",
    "uniform_continuity_modulus",
    "shift_distance",
]


@dataclass(frozen=True)
class TranslationReport:
    epsilon: float
    accepted: list
    scan_range: tuple
    scan_step: float
    inclusion_length: float
    max_spread: float = 0.0
    curve: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "scan_range": list(self.scan_range),
            "scan_step": self.scan_step,
            "n_accepted": len(self.accepted),
            "inclusion_length": None if math.isinf(self.inclusion_length) else self.inclusion_length,
            "max_spread": self.max_spread,
            "accepted": [[tau, d] for tau, d in self.accepted],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def curve_csv(self) -> str:
        return "tau,distance\n" + "".join(f"{tau!r},{d!r}\n" for tau, d in self.curve)


@dataclass(frozen=True)
class NetReport:
    epsilon: float
    shifts: list
    centers: list
    assignment: list
    max_within_cluster_distance: float
    max_spread: float = 0.0

    @property
    def net_size(self) -> int:
        return len(self.centers)

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "net_size": self.net_size,
            "max_within_cluster_distance": self.max_within_cluster_distance,
            "max_spread": self.max_spread,
            "shifts": list(self.shifts),
            "centers": list(self.centers),
            "assignment": list(self.assignment),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


@dataclass(frozen=True)
class ContinuityModulus:
    points: list
    monotone: bool

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)

    def __getitem__(self, i):
        return self.points[i]


def _sweep_values(evaluator, a_shift, b_shift, nodes_weights, flat):
    """Seminorm of ``t -> f(t + a) - f(t + b)`` at every horizon of the sweep."""
    return list(_batch_sweep_values(evaluator, np.array([a_shift]), b_shift, nodes_weights, flat)[0])


# Upper bound on nodes evaluated at once when batching shifts.
_BATCH_NODES = 1 << 19


def _batch_sweep_values(evaluator, shifts, base_shift, nodes_weights, flat):
    """Array ``(len(shifts), n_sweeps)`` of sweep values for ``f(. + s) - f(. + base)``."""
    shifts = np.asarray(shifts, dtype=float)
    out = np.empty((shifts.size, len(nodes_weights)))
    for j, (nodes, weights, length) in enumerate(nodes_weights):
        m = nodes.size
        base = evaluator(nodes + base_shift)
        batch = max(1, _BATCH_NODES // m)
        for start in range(0, shifts.size, batch):
            chunk = shifts[start:start + batch]
            times = (chunk[:, None] + nodes[None, :]).ravel()
            vals = evaluator(times).reshape(chunk.size, m, -1) - base[None]
            normp = np.sqrt(np.sum(np.abs(vals) ** 2, axis=2)) ** flat
            out[start:start + chunk.size, j] = np.maximum(normp @ weights / length, 0.0)
    out = out ** (1.0 / flat)
    out[shifts == base_shift] = 0.0
    return out


def _sweep_nodes(f, cfg):
    step = resolve_quad_step(f, cfg)
    c = cfg.center
    return [(*simpson_nodes(c - T, c + T, step), 2.0 * T) for T in cfg.horizons]


def shift_distance(f, h1: float, h2: float, cfg: SeminormConfig = SeminormConfig()) -> SeminormEstimate:
    """Seminorm estimate of ``f(. + h1) - f(. + h2)``."""
    if h1 == h2:
        return _summarize([(T, 0.0) for T in cfg.horizons], cfg)
    values = _sweep_values(as_evaluator(f), h1, h2, _sweep_nodes(f, cfg), cfg.flat)
    return _summarize(list(zip(cfg.horizons, values)), cfg)


def translation_estimate(f, tau: float, cfg: SeminormConfig = SeminormConfig()) -> SeminormEstimate:
    """Full sweep estimate of ``f(. + tau) - f``."""
    return shift_distance(f, tau, 0.0, cfg)


def translation_distance(f, tau: float, cfg: SeminormConfig = SeminormConfig()) -> float:
    return translation_estimate(f, tau, cfg).limsup_estimate


def _map(fn, items, threads):
    if threads and threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def find_translation_numbers(
    f,
    epsilon: float,
    scan_range,
    scan_step: float,
    cfg: SeminormConfig = SeminormConfig(),
    refine: bool = True,
    threads: int = 1,
) -> TranslationReport:
    """Scan ``tau`` over ``scan_range`` and accept shifts with distance < ``epsilon``.

    Local minima of the scan curve below ``2*epsilon`` are refined by
    golden-section search and added when the refined distance is accepted.
    """
    if not epsilon > 0:
        raise InvalidArgumentError("epsilon must be positive")
    if not scan_step > 0:
        raise InvalidArgumentError("scan_step must be positive")
    a, b = float(scan_range[0]), float(scan_range[1])
    if not b > a:
        raise InvalidArgumentError(f"empty scan range [{a}, {b}]")
    n = math.floor((b - a) / scan_step + 1e-9) + 1
    taus = a + scan_step * np.arange(n)

    evaluator = as_evaluator(f)
    nw = _sweep_nodes(f, cfg)

    def estimate(tau):
        if tau == 0.0:
            return _summarize([(T, 0.0) for T in cfg.horizons], cfg)
        vals = _sweep_values(evaluator, tau, 0.0, nw, cfg.flat)
        return _summarize(list(zip(cfg.horizons, vals)), cfg)

    chunks = np.array_split(taus, max(1, min(threads or 1, n)))
    values = np.concatenate(
        _map(lambda c: _batch_sweep_values(evaluator, c, 0.0, nw, cfg.flat), chunks, threads)
    )
    ests = [_summarize(list(zip(cfg.horizons, row)), cfg) for row in values.tolist()]
    dist = np.array([e.limsup_estimate for e in ests])
    spreads = [e.spread for e in ests]

    accepted = {float(tau): float(d) for tau, d in zip(taus, dist) if d < epsilon}
    if refine and n >= 3:
        for i in range(1, n - 1):
            if not (dist[i] < dist[i - 1] and dist[i] <= dist[i + 1] and dist[i] < 2 * epsilon):
                continue
            res = minimize_scalar(
                lambda tau: estimate(tau).limsup_estimate,
                bracket=(taus[i - 1], taus[i], taus[i + 1]),
                method="golden",
                options={"xtol": 1e-8},
            )
            tau_star = float(res.x)
            if not (taus[i - 1] <= tau_star <= taus[i + 1]):
                continue
            est = estimate(tau_star)
            spreads.append(est.spread)
            if est.limsup_estimate < epsilon and tau_star not in accepted:
                accepted[tau_star] = est.limsup_estimate

    pairs = sorted(accepted.items())
    if pairs:
        pos = [a] + [tau for tau, _ in pairs] + [b]
        inclusion = float(max(np.diff(pos)))
    else:
        inclusion = math.inf
    return TranslationReport(
        epsilon=float(epsilon),
        accepted=pairs,
        scan_range=(a, b),
        scan_step=float(scan_step),
        inclusion_length=inclusion,
        max_spread=float(max(spreads)),
        curve=[(float(t), float(d)) for t, d in zip(taus, dist)],
    )


def bochner_compactness_test(
    f, shifts, epsilon: float, cfg: SeminormConfig = SeminormConfig(), threads: int = 1
) -> NetReport:
    """Greedy epsilon-net of the translates ``{f(. + h)}`` in the seminorm distance.

    Shifts are visited in input order; a shift not within ``epsilon`` of an
    existing center becomes a center. Each shift is then assigned to its
    nearest center.
    """
    shifts = [float(h) for h in shifts]
    if not shifts:
        raise InvalidArgumentError("need at least one shift")
    if not epsilon > 0:
        raise InvalidArgumentError("epsilon must be positive")
    evaluator = as_evaluator(f)
    nw = _sweep_nodes(f, cfg)
    spreads = [0.0]

    def dist(i, j):
        if shifts[i] == shifts[j]:
            return 0.0
        vals = _sweep_values(evaluator, shifts[i], shifts[j], nw, cfg.flat)
        est = _summarize(list(zip(cfg.horizons, vals)), cfg)
        spreads.append(est.spread)
        return est.limsup_estimate

    centers = []
    to_centers = []  # to_centers[i][k]: distance of shift i to centers[k]
    for i in range(len(shifts)):
        row = _map(lambda c: dist(i, c), centers, threads)
        if not row or min(row) >= epsilon:
            centers.append(i)
            row.append(0.0)
        to_centers.append(row)
    # fill distances to centers created after shift i was visited
    for i, row in enumerate(to_centers):
        row.extend(_map(lambda c: dist(i, c), centers[len(row):], threads))

    assignment = []
    worst = 0.0
    for i, row in enumerate(to_centers):
        k = int(np.argmin(row))
        assignment.append(centers[k])
        worst = max(worst, row[k])
    return NetReport(
        epsilon=float(epsilon),
        shifts=shifts,
        centers=centers,
        assignment=assignment,
        max_within_cluster_distance=float(worst),
        max_spread=float(max(spreads)),
    )


def uniform_continuity_modulus(
    f, h_values, cfg: SeminormConfig = SeminormConfig(), threads: int = 1
) -> ContinuityModulus:
    """``(h, |f(. + h) - f|)`` for each ``h``; ``monotone`` checks the order in ``|h|``."""
    h_values = [float(h) for h in h_values]
    dists = _map(lambda h: translation_distance(f, h, cfg), h_values, threads)
    points = list(zip(h_values, dists))
    ordered = sorted(points, key=lambda p: abs(p[0]))
    monotone = all(
        later[1] >= earlier[1] - 1e-12 for earlier, later in zip(ordered, ordered[1:])
    )
    return ContinuityModulus(points, monotone)
