"""Run configuration: an INI-style file of typed sections with one table of defaults.

Every key has a type and a default in ``DEFAULTS``; unknown sections or keys
are errors. Numbers may be written as fractions (``1/6``). ``auto`` selects a
derived value where the type allows it.
"""

from __future__ import annotations

import configparser
from fractions import Fraction

from .errors import BesicovitchError
from .fnspec import parse

COMMANDS = ("seminorm", "translations", "bochner", "kappa", "solve", "contraction", "example")


class ConfigError(BesicovitchError, ValueError):
    pass


def _float(text):
    text = text.strip()
    try:
        return float(Fraction(text)) if "/" in text else float(text)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"expected a number, got {text!r}") from None


def _auto_float(text):
    return None if text.strip().lower() == "auto" else _float(text)


def _int(text):
    try:
        return int(text.strip())
    except ValueError:
        raise ConfigError(f"expected an integer, got {text!r}") from None


def _auto_int(text):
    return None if text.strip().lower() == "auto" else _int(text)


def _bool(text):
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _floats(text):
    text = text.strip()
    if not text or text.lower() == "none":
        return []
    return [_float(part) for part in text.split(",")]


def _str(text):
    return text.strip()


def _expr(text):
    return parse(text)


PARSERS = {
    "float": _float,
    "float|auto": _auto_float,
    "int": _int,
    "int|auto": _auto_int,
    "bool": _bool,
    "floats": _floats,
    "str": _str,
    "expr": _expr,
}

# section -> key -> (type, default as written in a config file, description)
DEFAULTS = {
    "run": {
        "command": ("str", "kappa", "one of " + ", ".join(COMMANDS)),
        "output_dir": ("str", "out", "directory for JSON/CSV artifacts"),
        "seed": ("int", "0", "seed for every random draw"),
        "threads": ("int", "1", "worker cap for scans and nets"),
    },
    "function": {
        "expr": ("expr", "(sin 1.0 0.0)", "function analysed by seminorm/translations/bochner"),
    },
    "seminorm": {
        "flat": ("float", "2", "exponent p >= 1"),
        "T0": ("float", "100", "first horizon"),
        "n_sweeps": ("int", "8", "number of horizons T0*growth^j"),
        "growth": ("float", "2", "horizon growth factor"),
        "quad_step": ("float|auto", "auto", "Simpson step; auto = period/64 or 0.01"),
        "tail_window": ("int", "3", "horizons entering the limsup max"),
        "tol": ("float", "0.01", "relative spread tolerance for the converged flag"),
        "center": ("float", "0", "centre of the averaging windows"),
        "frequencies": ("floats", "", "Fourier-Bohr coefficients to report"),
    },
    "translations": {
        "epsilon": ("float", "0.1", "acceptance threshold"),
        "scan_min": ("float", "1", "scan range start"),
        "scan_max": ("float", "20", "scan range end"),
        "scan_step": ("float", "0.01", "scan spacing"),
        "refine": ("bool", "true", "golden-section refinement of local minima"),
        "T0": ("float", "50", "first horizon of the distance estimates"),
        "n_sweeps": ("int", "3", "horizons per distance estimate"),
    },
    "bochner": {
        "epsilon": ("float", "0.2", "net radius"),
        "shifts": ("floats", "", "explicit shifts; empty = random"),
        "n_shifts": ("int", "50", "number of random shifts"),
        "shift_min": ("float", "0", "random shift range start"),
        "shift_max": ("float", "100", "random shift range end"),
        "T0": ("float", "50", "first horizon of the distance estimates"),
        "n_sweeps": ("int", "3", "horizons per distance estimate"),
    },
    "kappa": {
        "N": ("float", "1", "semigroup bound constant"),
        "lambda": ("float", "1", "decay rate"),
        "L1": ("float", "1/6", "Lipschitz constant in the current state"),
        "L2": ("float", "1/2", "Lipschitz constant in the delayed state"),
    },
    "system": {
        "eigenvalues": ("floats", "-1", "diagonal generator spectrum"),
        "F": ("expr", "(cos 1.0 0.0)", "nonlinearity in t, (u k) and (v k)"),
        "tau": ("expr", "(const 1.0)", "delay"),
        "tau_bar": ("float", "1", "declared sup of the delay"),
        "L1": ("float", "0", "Lipschitz constant in u"),
        "L2": ("float", "0", "Lipschitz constant in v"),
    },
    "solve": {
        "t_min": ("float", "0", "solution window start"),
        "t_max": ("float", "100", "solution window end"),
        "step": ("float", "0.01", "grid step"),
        "history_horizon": ("float|auto", "40", "truncation H of the history integral"),
        "quad_step": ("float|auto", "auto", "quadrature step; auto = grid step"),
        "tol": ("float", "1e-8", "sup-residual stopping tolerance"),
        "max_iter": ("int", "200", "iteration cap"),
        "interp": ("str", "cubic", "delayed-argument interpolation: linear or cubic"),
    },
    "contraction": {
        "n_pairs": ("int", "20", "random path pairs"),
        "n_terms": ("int", "3", "cosines per coordinate"),
        "amplitude": ("float", "0.5", "sup bound of each coordinate"),
        "max_frequency": ("float", "3", "largest random frequency"),
        "system": ("str", "example", "'example' (heat system, K from [example]) or 'config' ([system])"),
    },
    "example": {
        "K": ("int", "8", "sine modes"),
        "x_quad_points": ("int|auto", "auto", "collocation nodes; auto = 4K"),
        "t_min": ("float", "0", "solution window start"),
        "t_max": ("float", "400", "solution window end"),
        "step": ("float", "0.01", "grid step"),
        "history_horizon": ("float", "40", "truncation H"),
        "tol": ("float", "1e-8", "sup-residual tolerance"),
        "max_iter": ("int", "200", "iteration cap"),
        "x0_amplitude": ("float", "0", "amplitude of a deterministic non-zero initial guess"),
        "epsilon_fraction": ("float", "0.05", "epsilon as a fraction of the solution seminorm"),
        "scan_min": ("float", "0", "translation scan start"),
        "scan_max": ("float", "200", "translation scan end"),
        "scan_step": ("float", "0.1", "translation scan spacing"),
    },
}

# Sections each command reads.
SECTIONS = {
    "seminorm": ("run", "function", "seminorm"),
    "translations": ("run", "function", "translations", "seminorm"),
    "bochner": ("run", "function", "bochner", "seminorm"),
    "kappa": ("run", "kappa"),
    "solve": ("run", "system", "solve"),
    "contraction": ("run", "system", "solve", "contraction", "example"),
    "example": ("run", "example"),
}


def read_config(path=None, overrides=()):
    """Resolve a config file plus ``section.key=value`` overrides to typed values.

    Returns ``(typed, raw)``: ``typed[section][key]`` holds parsed values and
    ``raw`` the strings they came from (defaults included).
    """
    raw = {section: {k: spec[1] for k, spec in keys.items()} for section, keys in DEFAULTS.items()}
    if path is not None:
        parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
        parser.optionxform = str
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except configparser.Error as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from None
        for section in parser.sections():
            _check_key(section, None)
            for key, value in parser.items(section):
                _check_key(section, key)
                raw[section][key] = value
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override must look like section.key=value, got {item!r}")
        name, value = item.split("=", 1)
        section, key = name.split(".", 1)
        _check_key(section, key)
        raw[section][key] = value
    typed = {}
    for section, keys in DEFAULTS.items():
        typed[section] = {}
        for key, (kind, _, _) in keys.items():
            try:
                typed[section][key] = PARSERS[kind](raw[section][key])
            except ConfigError as exc:
                raise ConfigError(f"[{section}] {key}: {exc}") from None
    command = typed["run"]["command"]
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
    return typed, raw


def _check_key(section, key):
    if section not in DEFAULTS:
        raise ConfigError(f"unknown section [{section}]")
    if key is not None and key not in DEFAULTS[section]:
        raise ConfigError(f"unknown key {key!r} in section [{section}]")


def defaults_table() -> str:
    """Markdown table of every key, for the README."""
    rows = ["| section | key | type | default | meaning |", "|---|---|---|---|---|"]
    for section, keys in DEFAULTS.items():
        for key, (kind, default, doc) in keys.items():
            rows.append(f"| {section} | {key} | {kind} | `{default}` | {doc} |")
    return "\n".join(rows)
