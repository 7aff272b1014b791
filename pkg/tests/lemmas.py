"""Seeded random instances of the closure lemmas for Besicovitch almost periodic
functions. Each check returns the list of violating instances."""

import math

import numpy as np

from besicovitch.almostperiod import (
    bochner_compactness_test,
    find_translation_numbers,
    translation_estimate,
)
from besicovitch.fnspec import Prod, Scale, Shift, Sin, trig_polynomial
from besicovitch.seminorm import SeminormConfig, besicovitch_seminorm

CFG = SeminormConfig(T0=50.0, n_sweeps=3, tail_window=3, quad_step=0.05)
N_INSTANCES = 100


def _near_commensurate(rng, base, n_terms, jitter=0.004):
    """Trig polynomial whose frequencies sit near integer multiples of ``base``."""
    m = rng.integers(1, 4, n_terms)
    freqs = base * m + rng.normal(0.0, jitter, n_terms)
    amps = rng.uniform(-1.0, 1.0, n_terms)
    phases = rng.uniform(0.0, 2 * math.pi, n_terms)
    return trig_polynomial(amps.tolist(), freqs.tolist(), phases.tolist()), amps, freqs


def _instance(seed):
    rng = np.random.default_rng(seed)
    base = float(rng.uniform(0.6, 1.5))
    tau0 = 2 * math.pi / base * int(rng.integers(1, 3))
    return rng, base, tau0


def _sup_shift_bound(amps, freqs, tau):
    """``sup |f(t + tau) - f(t)|`` bound for a cosine sum."""
    return float(np.sum(np.abs(amps) * 2 * np.abs(np.sin(np.asarray(freqs) * tau / 2))))


def check_sum_closure(n=N_INSTANCES):
    bad = []
    for seed in range(n):
        rng, base, tau0 = _instance(seed)
        f, _, _ = _near_commensurate(rng, base, 3)
        g, _, _ = _near_commensurate(rng, base, 2)
        df, dg = translation_estimate(f, tau0, CFG), translation_estimate(g, tau0, CFG)
        eps = 1.01 * max(df.limsup_estimate, dg.limsup_estimate) + 1e-9
        spread = df.spread + dg.spread
        rep = find_translation_numbers(f + g, 2 * eps + spread, (tau0 - 0.05, tau0 + 0.05), 0.01, CFG,
                                       refine=False)
        if not rep.accepted:
            bad.append(seed)
    return bad


def check_common_translation(n=N_INSTANCES):
    bad = []
    for seed in range(n):
        rng, base, tau0 = _instance(seed)
        f, _, _ = _near_commensurate(rng, base, 3)
        g, _, _ = _near_commensurate(rng, base, 3)
        tau = tau0 + float(rng.normal(0.0, 0.02))
        df, dg = translation_estimate(f, tau, CFG), translation_estimate(g, tau, CFG)
        eps = 1.01 * max(df.limsup_estimate, dg.limsup_estimate) + 1e-9
        dsum = translation_estimate(f + g, tau, CFG)
        if dsum.limsup_estimate > 2 * eps + df.spread + dg.spread + dsum.spread:
            bad.append(seed)
    return bad


def check_scalar_closure(n=N_INSTANCES):
    bad = []
    for seed in range(n):
        rng, base, tau0 = _instance(seed)
        f, _, _ = _near_commensurate(rng, base, 3)
        lam = float(rng.uniform(-4.0, 4.0))
        eps = 1.01 * translation_estimate(f, tau0, CFG).limsup_estimate + 1e-9
        rep = find_translation_numbers(f, eps, (tau0 - 0.03, tau0 + 0.03), 0.01, CFG, refine=False)
        if not rep.accepted:
            bad.append(seed)
            continue
        for tau, _ in rep.accepted:
            d = translation_estimate(Scale(lam, f), tau, CFG)
            if d.limsup_estimate > abs(lam) * eps + rep.max_spread + d.spread:
                bad.append(seed)
                break
    return bad


def check_product_bound(n=N_INSTANCES):
    """``M(f(.+tau) g(.+tau) - f g) <= eps (sup|f| + M(g))`` with ``f`` Bohr almost periodic."""
    bad = []
    for seed in range(n):
        rng, base, tau0 = _instance(seed)
        f, fa, ff = _near_commensurate(rng, base, 2)
        g, _, _ = _near_commensurate(rng, base, 3)
        tau = tau0 + float(rng.normal(0.0, 0.02))
        dg = translation_estimate(g, tau, CFG)
        eps = max(_sup_shift_bound(fa, ff, tau), dg.limsup_estimate)
        mg = besicovitch_seminorm(g, CFG)
        dfg = translation_estimate(Prod((f, g)), tau, CFG)
        bound = eps * (float(np.sum(np.abs(fa))) + mg.limsup_estimate + mg.spread)
        if dfg.limsup_estimate > bound + dg.spread + dfg.spread:
            bad.append(seed)
    return bad


def check_composition(n=N_INSTANCES):
    """``f(t - x(t))`` with ``x = sin``: eps_f from the sup shift bound, eps_x from the
    seminorm of ``x`` scaled by the Lipschitz constant of ``f``."""
    bad = []
    x = Sin(1.0)
    for seed in range(n):
        rng, _, _ = _instance(seed)
        f, fa, ff = _near_commensurate(rng, 1.0, 3, jitter=0.002)
        tau = 2 * math.pi * int(rng.integers(1, 3)) + float(rng.normal(0.0, 0.01))
        lip = float(np.sum(np.abs(fa * ff)))
        dx = translation_estimate(x, tau, CFG)
        eps = max(_sup_shift_bound(fa, ff, tau), lip * (dx.limsup_estimate + dx.spread)) + 1e-9
        h = Shift(x, f)
        rep = find_translation_numbers(h, 2 * eps, (tau - 0.02, tau + 0.02), 0.01, CFG, refine=False)
        if not rep.accepted:
            bad.append(seed)
    return bad


def check_bohr_bochner(n=N_INSTANCES):
    bad = []
    for seed in range(n):
        rng, base, tau0 = _instance(seed)
        f, _, _ = _near_commensurate(rng, base, 3)
        eps = 1.5 * translation_estimate(f, tau0, CFG).limsup_estimate + 1e-6
        rep = find_translation_numbers(f, eps, (tau0 - 0.03, tau0 + 0.03), 0.01, CFG, refine=False)
        if not rep.accepted:
            bad.append(seed)
            continue
        for tau, _ in rep.accepted[:3]:
            net = bochner_compactness_test(f, [0.0, tau], eps, CFG)
            if net.net_size != 1 or not net.max_within_cluster_distance < eps:
                bad.append(seed)
                break
    return bad


CHECKS = {
    "sum closure": check_sum_closure,
    "scalar closure": check_scalar_closure,
    "common translation numbers": check_common_translation,
    "product bound": check_product_bound,
    "composition": check_composition,
    "Bohr implies Bochner": check_bohr_bochner,
}
