"""Command-line front end: ``besicovitch [command] --config run.ini``.

Exit status: 0 success, 1 bad configuration or input, 2 hypothesis or
stability violation, 3 non-convergence (the residual trace is still written).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import heatdelay
from .almostperiod import bochner_compactness_test, find_translation_numbers
from .config import COMMANDS, ConfigError, read_config
from .errors import (
    BesicovitchError,
    FnSpecSyntaxError,
    HypothesisViolationError,
    InvalidArgumentError,
    NonConvergenceError,
    OutOfRangeError,
    StabilityViolationError,
)
from .grid import SampledPath, make_grid, random_trig_path
from .semigroup import diagonal_semigroup
from .seminorm import SeminormConfig, besicovitch_seminorm, fourier_bohr_coefficient
from .solver import (
    DelaySystem,
    SolveConfig,
    empirical_contraction,
    extended_grid,
    iteration_grid,
    kappa_check,
    picard_solve,
)

EXIT_OK, EXIT_CONFIG, EXIT_HYPOTHESIS, EXIT_NONCONVERGENCE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="besicovitch", description=__doc__.splitlines()[0])
    p.add_argument("command", nargs="?", choices=COMMANDS, help="overrides [run] command")
    p.add_argument("--config", help="INI file with typed sections")
    p.add_argument("--output", help="output directory (overrides [run] output_dir)")
    p.add_argument("--seed", type=int, help="overrides [run] seed")
    p.add_argument("--threads", type=int, help="worker cap (overrides [run] threads)")
    p.add_argument(
        "--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
        help="override one config key; repeatable",
    )
    return p


class Run:
    """Artifacts of one command, written to ``out``."""

    def __init__(self, typed, raw, out: Path):
        self.cfg = typed
        self.raw = raw
        self.out = out
        self.command = typed["run"]["command"]

    def write(self, name: str, text: str):
        self.out.mkdir(parents=True, exist_ok=True)
        (self.out / name).write_text(text, encoding="utf-8", newline="\n")

    def summary(self, results: dict, status: str = "ok"):
        doc = {
            "command": self.command,
            "status": status,
            "config": {s: dict(self.raw[s]) for s in self.raw},
            "results": results,
        }
        self.write("summary.json", json.dumps(_jsonable(doc), indent=2) + "\n")


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": float(x.real), "im": float(x.imag)}
    return x


def _seminorm_config(c: dict, **changes) -> SeminormConfig:
    cfg = SeminormConfig(
        flat=c["flat"], T0=c["T0"], n_sweeps=c["n_sweeps"], growth=c["growth"],
        quad_step=c["quad_step"], tail_window=c["tail_window"], tol=c["tol"], center=c["center"],
    )
    return cfg.replace(**changes) if changes else cfg


def _scan_config(run: Run, section: str) -> SeminormConfig:
    s = run.cfg[section]
    base = _seminorm_config(run.cfg["seminorm"])
    return base.replace(T0=s["T0"], n_sweeps=s["n_sweeps"], tail_window=min(base.tail_window, s["n_sweeps"]))


def _cmd_seminorm(run: Run) -> str:
    f = run.cfg["function"]["expr"]
    s = run.cfg["seminorm"]
    cfg = _seminorm_config(s)
    est = besicovitch_seminorm(f, cfg)
    coeffs = []
    for lam in s["frequencies"]:
        c = fourier_bohr_coefficient(f, lam, cfg)
        coeffs.append({"frequency": lam, "value": complex(c.value), "spread": c.spread,
                       "unresolved": c.unresolved})
    run.write("seminorm.csv", est.to_csv())
    run.summary({
        "limsup_estimate": est.limsup_estimate,
        "spread": est.spread,
        "converged": est.converged,
        "per_T": est.per_T,
        "coefficients": coeffs,
    })
    return f"seminorm {est.limsup_estimate:.6g} (spread {est.spread:.3g}, converged={est.converged})"


def _cmd_translations(run: Run) -> str:
    s = run.cfg["translations"]
    rep = find_translation_numbers(
        run.cfg["function"]["expr"], s["epsilon"], (s["scan_min"], s["scan_max"]), s["scan_step"],
        _scan_config(run, "translations"), refine=s["refine"], threads=run.cfg["run"]["threads"],
    )
    run.write("scan_curve.csv", rep.curve_csv())
    run.summary(rep.to_dict())
    return f"{len(rep.accepted)} translation numbers, inclusion length {rep.inclusion_length:.6g}"


def _cmd_bochner(run: Run) -> str:
    s = run.cfg["bochner"]
    shifts = s["shifts"]
    if not shifts:
        rng = np.random.default_rng(run.cfg["run"]["seed"])
        shifts = rng.uniform(s["shift_min"], s["shift_max"], s["n_shifts"]).tolist()
    rep = bochner_compactness_test(
        run.cfg["function"]["expr"], shifts, s["epsilon"], _scan_config(run, "bochner"),
        threads=run.cfg["run"]["threads"],
    )
    run.summary(rep.to_dict())
    return f"net size {rep.net_size} for {len(shifts)} shifts at epsilon {rep.epsilon:g}"


def _cmd_kappa(run: Run) -> str:
    k = run.cfg["kappa"]
    constants = {"N": k["N"], "lambda": k["lambda"], "L1": k["L1"], "L2": k["L2"]}
    try:
        kappa = kappa_check(k["N"], k["lambda"], k["L1"], k["L2"])
    except HypothesisViolationError as exc:
        run.summary({**constants, "kappa": exc.value, "contraction": False}, status="hypothesis-violation")
        raise
    run.summary({**constants, "kappa": kappa, "contraction": True})
    return f"{kappa:.6f}"


def _system_from_config(c: dict) -> DelaySystem:
    return DelaySystem(
        semigroup=diagonal_semigroup(c["eigenvalues"]),
        F=c["F"], tau=c["tau"], tau_bar=c["tau_bar"], L1=c["L1"], L2=c["L2"],
    )


def _solve_config(c: dict) -> SolveConfig:
    return SolveConfig(
        grid=make_grid(c["t_min"], c["t_max"], c["step"]),
        history_horizon=c["history_horizon"], quad_step=c["quad_step"],
        tol=c["tol"], max_iter=c["max_iter"], interp_scheme=c["interp"],
    )


def _solve_and_write(run: Run, system: DelaySystem, x0, cfg: SolveConfig, extra=None):
    report = picard_solve(system, x0, cfg, raise_on_failure=False)
    run.write("residuals.csv", report.residual_csv())
    results = dict(extra or {})
    results.update(report.summary())
    results["apriori_satisfied"] = report.apriori_bound is None or report.iterations - 1 <= report.apriori_bound
    results["vanishes_at_zero"] = system.vanishes_at_zero()
    if not report.converged:
        run.summary(results, status="non-convergence")
        raise NonConvergenceError(
            f"no convergence after {report.iterations} iterations (last residual {report.residuals[-1]:.3e})",
            report=report,
        )
    run.write("solution.csv", report.solution_csv())
    return report, results


def _cmd_solve(run: Run) -> str:
    system = _system_from_config(run.cfg["system"])
    report, results = _solve_and_write(run, system, None, _solve_config(run.cfg["solve"]))
    run.summary(results)
    return f"converged in {report.iterations} iterations, residual {report.residuals[-1]:.3e}"


def _example_config(c: dict) -> heatdelay.HeatDelayConfig:
    solve = SolveConfig(
        grid=make_grid(c["t_min"], c["t_max"], c["step"]),
        history_horizon=c["history_horizon"], tol=c["tol"], max_iter=c["max_iter"],
    )
    return heatdelay.HeatDelayConfig(K=c["K"], x_quad_points=c["x_quad_points"], solve=solve)


def _cmd_contraction(run: Run) -> str:
    c = run.cfg["contraction"]
    if c["system"] == "example":
        system = heatdelay.build_example(_example_config(run.cfg["example"]))
    elif c["system"] == "config":
        system = _system_from_config(run.cfg["system"])
    else:
        raise ConfigError(f"[contraction] system must be 'example' or 'config', got {c['system']!r}")
    cfg = _solve_config(run.cfg["solve"])
    if cfg.history_horizon is None:
        raise ConfigError("[solve] history_horizon must be set for contraction runs")
    ext = extended_grid(cfg, cfg.history_horizon, system.tau_bar)
    rng = np.random.default_rng(run.cfg["run"]["seed"])

    def draw():
        return random_trig_path(rng, ext, system.dim, c["n_terms"], c["amplitude"], c["max_frequency"],
                                cfg.interp_scheme)

    pairs = [(draw(), draw()) for _ in range(c["n_pairs"])]
    stats = empirical_contraction(system, pairs, cfg)
    run.write("ratios.csv", "pair,ratio\n" + "".join(f"{i},{r!r}\n" for i, r in enumerate(stats.ratios)))
    run.summary({"kappa": system.kappa, "max_ratio": stats.max, "mean_ratio": stats.mean,
                 "ratios": stats.ratios, "skipped": stats.skipped,
                 "within_kappa": stats.max <= system.kappa})
    return f"max ratio {stats.max:.6f} (kappa {system.kappa:.6f})"


def _example_x0(c: dict, grid, dim: int, scheme: str):
    """Deterministic non-zero start: ``amp * cos(k t) / k`` in mode ``k``."""
    k = np.arange(1, dim + 1)
    values = c["x0_amplitude"] * np.cos(np.outer(grid.points, k)) / k
    return SampledPath(grid, values, scheme)


def _cmd_example(run: Run) -> str:
    c = run.cfg["example"]
    hcfg = _example_config(c)
    system = heatdelay.build_example(hcfg)
    cert = system.certificate
    kappa = kappa_check(cert.N, cert.lam, system.L1, system.L2)
    constants = {"N": cert.N, "lambda": cert.lam, "L1": system.L1, "L2": system.L2, "kappa": kappa,
                 "tau_bar": system.tau_bar}
    solve = hcfg.solve
    x0 = None
    if c["x0_amplitude"] != 0:
        x0 = _example_x0(c, iteration_grid(solve, solve.history_horizon, system.tau_bar), system.dim,
                         solve.interp_scheme)
    report, results = _solve_and_write(run, system, x0, solve, {"constants": constants})
    scan = (c["scan_min"], c["scan_max"])
    eps = heatdelay.solution_epsilon(report, c["epsilon_fraction"], scan)
    trep = heatdelay.verify_solution_almost_periodicity(
        report, eps, scan, c["scan_step"], threads=run.cfg["run"]["threads"],
    )
    run.write("translations.json", trep.to_json() + "\n")
    run.write("scan_curve.csv", trep.curve_csv())
    results["translations"] = {
        "epsilon": trep.epsilon,
        "accepted": len(trep.accepted),
        "inclusion_length": trep.inclusion_length,
        "max_spread": trep.max_spread,
    }
    run.summary(results)
    return (f"kappa {kappa:.6f}; converged in {report.iterations} iterations; "
            f"{len(trep.accepted)} translation numbers at epsilon {eps:.3g}")


HANDLERS = {
    "seminorm": _cmd_seminorm,
    "translations": _cmd_translations,
    "bochner": _cmd_bochner,
    "kappa": _cmd_kappa,
    "solve": _cmd_solve,
    "contraction": _cmd_contraction,
    "example": _cmd_example,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = list(args.set)
    if args.command:
        overrides.append(f"run.command={args.command}")
    if args.output:
        overrides.append(f"run.output_dir={args.output}")
    if args.seed is not None:
        overrides.append(f"run.seed={args.seed}")
    if args.threads is not None:
        overrides.append(f"run.threads={args.threads}")
    try:
        typed, raw = read_config(args.config, overrides)
        if typed["run"]["threads"] < 1:
            raise ConfigError("[run] threads must be >= 1")
        run = Run(typed, raw, Path(typed["run"]["output_dir"]))
        line = HANDLERS[run.command](run)
    except (ConfigError, FnSpecSyntaxError, InvalidArgumentError, OutOfRangeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (HypothesisViolationError, StabilityViolationError) as exc:
        print(f"hypothesis violation: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except NonConvergenceError as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except BesicovitchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(line)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
