"""Closed-form function expressions of time (and, optionally, state).

An expression is an immutable tree. Leaves are constants, sinusoids, the two
integrable bumps ``exp(-a|t|)`` and ``1/(1+t^2)``, and references to the
coordinates of the current state ``u`` or the delayed state ``v``. Inner nodes
are sums, products, scalar multiples, pointwise ``sin``/``cos`` and an
argument shift ``t -> t - c(t)``.

Every tree has a canonical prefix text form::

    >>> f = parse("(+ (cos 1.0 0.0) (scale 2.0 (cos 2.23606797749979 0.0)))")
    >>> to_text(f)
    '(+ (cos 1.0 0.0) (scale 2.0 (cos 2.23606797749979 0.0)))'

and ``parse(to_text(f)) == f`` holds for every tree.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import FnSpecSyntaxError, InvalidArgumentError

Number = Union[float, complex]


def _number(x) -> Number:
    if isinstance(x, complex):
        if x.imag == 0.0:
            return float(x.real)
        return complex(x)
    return float(x)


class FnSpec:
    """Base node. Supports ``+``, ``-``, ``*`` with numbers and other nodes."""

    @property
    def dim(self) -> int:
        return 1

    def __add__(self, other):
        return Sum((self, _coerce(other)))

    def __radd__(self, other):
        return Sum((_coerce(other), self))

    def __sub__(self, other):
        return Sum((self, Scale(-1.0, _coerce(other))))

    def __rsub__(self, other):
        return Sum((_coerce(other), Scale(-1.0, self)))

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return Scale(other, self)
        return Prod((self, other))

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return Scale(other, self)
        return Prod((_coerce(other), self))

    def __neg__(self):
        return Scale(-1.0, self)

    def __str__(self):
        return to_text(self)


def _coerce(x) -> FnSpec:
    if isinstance(x, FnSpec):
        return x
    if isinstance(x, (int, float, complex)):
        return Const(x)
    raise TypeError(f"cannot combine FnSpec with {type(x).__name__}")


@dataclass(frozen=True, eq=True)
class Const(FnSpec):
    value: Number

    def __post_init__(self):
        object.__setattr__(self, "value", _number(self.value))


@dataclass(frozen=True)
class Sin(FnSpec):
    """``sin(omega*t + phase)``."""

    omega: float
    phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "omega", float(self.omega))
        object.__setattr__(self, "phase", float(self.phase))


@dataclass(frozen=True)
class Cos(FnSpec):
    """``cos(omega*t + phase)``."""

    omega: float
    phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "omega", float(self.omega))
        object.__setattr__(self, "phase", float(self.phase))


@dataclass(frozen=True)
class ExpDecay(FnSpec):
    """``exp(-rate*|t|)``; lies in every L^p, so its mean ``p``-th power vanishes."""

    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise InvalidArgumentError("ExpDecay rate must be positive")
        object.__setattr__(self, "rate", float(self.rate))


@dataclass(frozen=True)
class Lorentz(FnSpec):
    """``1/(1+t^2)``."""


@dataclass(frozen=True)
class State(FnSpec):
    """Coordinate ``index`` of the current (``'u'``) or delayed (``'v'``) state."""

    which: str
    index: int

    def __post_init__(self):
        if self.which not in ("u", "v"):
            raise InvalidArgumentError("State.which must be 'u' or 'v'")
        if self.index < 0:
            raise InvalidArgumentError("State.index must be non-negative")
        object.__setattr__(self, "index", int(self.index))


def _check_dims(children) -> int:
    dims = {c.dim for c in children} - {1}
    if len(dims) > 1:
        raise InvalidArgumentError(f"incompatible output dimensions {sorted(dims)}")
    return dims.pop() if dims else 1


@dataclass(frozen=True)
class Sum(FnSpec):
    terms: tuple

    def __post_init__(self):
        flat = []
        for term in self.terms:
            term = _coerce(term)
            flat.extend(term.terms if isinstance(term, Sum) else (term,))
        if not flat:
            raise InvalidArgumentError("empty sum")
        object.__setattr__(self, "terms", tuple(flat))
        _check_dims(flat)

    @property
    def dim(self):
        return _check_dims(self.terms)


@dataclass(frozen=True)
class Prod(FnSpec):
    factors: tuple

    def __post_init__(self):
        flat = []
        for factor in self.factors:
            factor = _coerce(factor)
            flat.extend(factor.factors if isinstance(factor, Prod) else (factor,))
        if not flat:
            raise InvalidArgumentError("empty product")
        object.__setattr__(self, "factors", tuple(flat))
        _check_dims(flat)

    @property
    def dim(self):
        return _check_dims(self.factors)


@dataclass(frozen=True)
class Scale(FnSpec):
    factor: Number
    arg: FnSpec

    def __post_init__(self):
        object.__setattr__(self, "factor", _number(self.factor))
        object.__setattr__(self, "arg", _coerce(self.arg))

    @property
    def dim(self):
        return self.arg.dim


@dataclass(frozen=True)
class SinOf(FnSpec):
    """Pointwise ``sin`` of a subexpression."""

    arg: FnSpec

    @property
    def dim(self):
        return self.arg.dim


@dataclass(frozen=True)
class CosOf(FnSpec):
    """Pointwise ``cos`` of a subexpression."""

    arg: FnSpec

    @property
    def dim(self):
        return self.arg.dim


@dataclass(frozen=True)
class Shift(FnSpec):
    """``arg`` evaluated at ``t - by(t)``; ``by`` is a scalar expression of time.

    State references inside ``arg`` are not shifted.
    """

    by: FnSpec
    arg: FnSpec

    def __post_init__(self):
        object.__setattr__(self, "by", _coerce(self.by))
        if self.by.dim != 1:
            raise InvalidArgumentError("shift amount must be scalar")

    @property
    def dim(self):
        return self.arg.dim


@dataclass(frozen=True)
class Vec(FnSpec):
    components: tuple

    def __post_init__(self):
        comps = tuple(_coerce(c) for c in self.components)
        if not comps:
            raise InvalidArgumentError("empty vector")
        if any(c.dim != 1 for c in comps):
            raise InvalidArgumentError("vector components must be scalar")
        object.__setattr__(self, "components", comps)

    @property
    def dim(self):
        return len(self.components)


# ---------------------------------------------------------------------------
# evaluation


def evaluate(f: FnSpec, t, u=None, v=None) -> np.ndarray:
    """Vectorized evaluation.

    Parameters
    ----------
    f
        Expression to evaluate.
    t
        1-d array of times, shape ``(n,)``.
    u, v
        Optional state arrays of shape ``(n, d)`` referenced by ``State`` leaves.

    Returns
    -------
    ndarray of shape ``(n, f.dim)``; complex only if a complex constant occurs.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if t.ndim != 1:
        raise InvalidArgumentError("t must be one-dimensional")
    out = _eval(f, t, u, v)
    return np.broadcast_to(out, (t.shape[0], f.dim)).copy() if out.shape[1] != f.dim else out


def _eval(f, t, u, v):
    n = t.shape[0]
    if isinstance(f, Const):
        return np.full((n, 1), f.value)
    if isinstance(f, Sin):
        return np.sin(f.omega * t + f.phase)[:, None]
    if isinstance(f, Cos):
        return np.cos(f.omega * t + f.phase)[:, None]
    if isinstance(f, ExpDecay):
        return np.exp(-f.rate * np.abs(t))[:, None]
    if isinstance(f, Lorentz):
        return (1.0 / (1.0 + t * t))[:, None]
    if isinstance(f, State):
        arr = u if f.which == "u" else v
        if arr is None:
            raise InvalidArgumentError(f"expression references state '{f.which}' but none given")
        arr = np.asarray(arr)
        if arr.ndim == 1:
            arr = arr[:, None]
        if f.index >= arr.shape[1]:
            raise InvalidArgumentError(
                f"state index {f.index} out of range for dimension {arr.shape[1]}"
            )
        return np.broadcast_to(arr[:, f.index], (n,))[:, None]
    if isinstance(f, Sum):
        acc = _eval(f.terms[0], t, u, v)
        for term in f.terms[1:]:
            acc = acc + _eval(term, t, u, v)
        return acc
    if isinstance(f, Prod):
        acc = _eval(f.factors[0], t, u, v)
        for factor in f.factors[1:]:
            acc = acc * _eval(factor, t, u, v)
        return acc
    if isinstance(f, Scale):
        return f.factor * _eval(f.arg, t, u, v)
    if isinstance(f, SinOf):
        return np.sin(_eval(f.arg, t, u, v))
    if isinstance(f, CosOf):
        return np.cos(_eval(f.arg, t, u, v))
    if isinstance(f, Shift):
        by = _eval(f.by, t, u, v)[:, 0]
        return _eval(f.arg, t - by.real, u, v)
    if isinstance(f, Vec):
        return np.concatenate([_eval(c, t, u, v) for c in f.components], axis=1)
    raise TypeError(f"not an FnSpec node: {f!r}")


def eval_fnspec(f: FnSpec, t: float, u=None, v=None) -> np.ndarray:
    """Evaluate at a single time; returns a state vector of length ``f.dim``."""
    uu = None if u is None else np.atleast_1d(np.asarray(u))[None, :]
    vv = None if v is None else np.atleast_1d(np.asarray(v))[None, :]
    return evaluate(f, np.array([float(t)]), uu, vv)[0]


def uses_state(f: FnSpec) -> bool:
    return any(isinstance(node, State) for node in _walk(f))


def _walk(f):
    yield f
    for child in _children(f):
        yield from _walk(child)


def _children(f):
    if isinstance(f, Sum):
        return f.terms
    if isinstance(f, Prod):
        return f.factors
    if isinstance(f, Vec):
        return f.components
    if isinstance(f, Shift):
        return (f.by, f.arg)
    if isinstance(f, (Scale, SinOf, CosOf)):
        return (f.arg,)
    return ()


def max_frequency(f: FnSpec) -> Optional[float]:
    """Largest ``|omega|`` over all sinusoid leaves, or None if there are none."""
    omegas = [abs(n.omega) for n in _walk(f) if isinstance(n, (Sin, Cos)) and n.omega != 0]
    return max(omegas) if omegas else None


def spectrum(f: FnSpec) -> Optional[frozenset]:
    """Signed frequencies of the almost periodic part of ``f``.

    Integrable leaves contribute nothing. Returns None when the spectrum is not
    a finite set computable from the tree (state references, pointwise
    ``sin``/``cos`` of non-constant arguments, time-varying shifts).
    """
    if isinstance(f, Const):
        return frozenset() if f.value == 0 else frozenset({0.0})
    if isinstance(f, (Sin, Cos)):
        return frozenset({f.omega, -f.omega})
    if isinstance(f, (ExpDecay, Lorentz)):
        return frozenset()
    if isinstance(f, State):
        return None
    if isinstance(f, (Sum, Vec)):
        parts = [spectrum(c) for c in _children(f)]
        if any(p is None for p in parts):
            return None
        return frozenset().union(*parts)
    if isinstance(f, Prod):
        acc = frozenset({0.0})
        for factor in f.factors:
            s = spectrum(factor)
            if s is None:
                return None
            acc = frozenset(a + b for a in acc for b in s)
        return acc
    if isinstance(f, Scale):
        return frozenset() if f.factor == 0 else spectrum(f.arg)
    if isinstance(f, (SinOf, CosOf)):
        inner = spectrum(f.arg)
        if inner is not None and inner <= {0.0}:
            return inner if isinstance(f, SinOf) else frozenset({0.0})
        return None
    if isinstance(f, Shift):
        if isinstance(f.by, Const):
            return spectrum(f.arg)
        return None
    raise TypeError(f"not an FnSpec node: {f!r}")


# ---------------------------------------------------------------------------
# text form

_HEADS = {
    "const": Const,
    "sin": Sin,
    "cos": Cos,
    "expdecay": ExpDecay,
    "lorentz": Lorentz,
    "u": State,
    "v": State,
    "+": Sum,
    "*": Prod,
    "scale": Scale,
    "sinof": SinOf,
    "cosof": CosOf,
    "shift": Shift,
    "vec": Vec,
}


def _fmt_number(x: Number) -> str:
    if isinstance(x, complex):
        re_part = repr(float(x.real))
        im = float(x.imag)
        sign = "-" if math.copysign(1.0, im) < 0 else "+"
        return f"{re_part}{sign}{repr(abs(im))}j"
    return repr(float(x))


def to_text(f: FnSpec) -> str:
    """Canonical prefix form of ``f``."""
    if isinstance(f, Const):
        return f"(const {_fmt_number(f.value)})"
    if isinstance(f, Sin):
        return f"(sin {_fmt_number(f.omega)} {_fmt_number(f.phase)})"
    if isinstance(f, Cos):
        return f"(cos {_fmt_number(f.omega)} {_fmt_number(f.phase)})"
    if isinstance(f, ExpDecay):
        return f"(expdecay {_fmt_number(f.rate)})"
    if isinstance(f, Lorentz):
        return "(lorentz)"
    if isinstance(f, State):
        return f"({f.which} {f.index})"
    if isinstance(f, Sum):
        return "(+ " + " ".join(to_text(c) for c in f.terms) + ")"
    if isinstance(f, Prod):
        return "(* " + " ".join(to_text(c) for c in f.factors) + ")"
    if isinstance(f, Scale):
        return f"(scale {_fmt_number(f.factor)} {to_text(f.arg)})"
    if isinstance(f, SinOf):
        return f"(sinof {to_text(f.arg)})"
    if isinstance(f, CosOf):
        return f"(cosof {to_text(f.arg)})"
    if isinstance(f, Shift):
        return f"(shift {to_text(f.by)} {to_text(f.arg)})"
    if isinstance(f, Vec):
        return "(vec " + " ".join(to_text(c) for c in f.components) + ")"
    raise TypeError(f"not an FnSpec node: {f!r}")


_TOKEN = re.compile(r"\s*(?:(;[^\n]*)|(\()|(\))|([^\s()]+))")


def _tokenize(text):
    pos = 0
    tokens = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        if m.group(1) is None:
            kind = "(" if m.group(2) else ")" if m.group(3) else "atom"
            start = m.start(2) if m.group(2) else m.start(3) if m.group(3) else m.start(4)
            value = m.group(2) or m.group(3) or m.group(4)
            tokens.append((kind, value, start))
        pos = m.end()
    return tokens


def _parse_number(tok, text) -> Number:
    _, value, pos = tok
    try:
        x = complex(value) if value.endswith("j") else float(value)
    except ValueError:
        raise FnSpecSyntaxError(f"expected a number, got {value!r}", text, pos) from None
    if not np.isfinite(x):
        raise FnSpecSyntaxError(f"non-finite number {value!r}", text, pos)
    return _number(x)


def parse(text: str) -> FnSpec:
    """Parse the prefix form. Numbers alone are constants; ``;`` starts a comment."""
    tokens = _tokenize(text)
    if not tokens:
        raise FnSpecSyntaxError("empty expression", text, len(text))
    node, i = _parse_expr(tokens, 0, text)
    if i != len(tokens):
        raise FnSpecSyntaxError("unexpected trailing input", text, tokens[i][2])
    return node


def _parse_expr(tokens, i, text):
    if i >= len(tokens):
        raise FnSpecSyntaxError("unexpected end of input", text, len(text))
    kind, value, pos = tokens[i]
    if kind == "atom":
        return Const(_parse_number(tokens[i], text)), i + 1
    if kind == ")":
        raise FnSpecSyntaxError("unexpected ')'", text, pos)
    i += 1
    if i >= len(tokens) or tokens[i][0] != "atom":
        raise FnSpecSyntaxError("expected an operator name after '('", text, pos)
    head, hpos = tokens[i][1], tokens[i][2]
    if head not in _HEADS:
        raise FnSpecSyntaxError(f"unknown operator {head!r}", text, hpos)
    i += 1
    args = []
    while True:
        if i >= len(tokens):
            raise FnSpecSyntaxError(f"unclosed '(' for {head!r}", text, pos)
        if tokens[i][0] == ")":
            break
        args.append(i)
        if tokens[i][0] == "(":
            _, i = _parse_expr(tokens, i, text)
        else:
            i += 1
    end = i + 1

    def number_at(k):
        idx = args[k]
        if tokens[idx][0] != "atom":
            raise FnSpecSyntaxError(f"{head!r} expects a number here", text, tokens[idx][2])
        return _parse_number(tokens[idx], text)

    def expr_at(k):
        return _parse_expr(tokens, args[k], text)[0]

    def arity(*allowed):
        if len(args) not in allowed:
            want = " or ".join(str(a) for a in allowed)
            raise FnSpecSyntaxError(
                f"{head!r} takes {want} argument(s), got {len(args)}", text, hpos
            )

    try:
        if head == "const":
            arity(1)
            node = Const(number_at(0))
        elif head in ("sin", "cos"):
            arity(1, 2)
            omega = number_at(0)
            phase = number_at(1) if len(args) == 2 else 0.0
            if isinstance(omega, complex) or isinstance(phase, complex):
                raise FnSpecSyntaxError("frequencies and phases must be real", text, hpos)
            node = _HEADS[head](omega, phase)
        elif head == "expdecay":
            arity(1)
            node = ExpDecay(number_at(0))
        elif head == "lorentz":
            arity(0)
            node = Lorentz()
        elif head in ("u", "v"):
            arity(1)
            idx = number_at(0)
            if isinstance(idx, complex) or idx != int(idx):
                raise FnSpecSyntaxError("state index must be an integer", text, hpos)
            node = State(head, int(idx))
        elif head in ("+", "*", "vec"):
            if not args:
                raise FnSpecSyntaxError(f"{head!r} needs at least one argument", text, hpos)
            node = _HEADS[head](tuple(expr_at(k) for k in range(len(args))))
        elif head == "scale":
            arity(2)
            node = Scale(number_at(0), expr_at(1))
        elif head in ("sinof", "cosof"):
            arity(1)
            node = _HEADS[head](expr_at(0))
        elif head == "shift":
            arity(2)
            node = Shift(expr_at(0), expr_at(1))
        else:  # pragma: no cover - table and branches kept in sync
            raise FnSpecSyntaxError(f"unknown operator {head!r}", text, hpos)
    except InvalidArgumentError as exc:
        raise FnSpecSyntaxError(str(exc), text, hpos) from None
    return node, end


# ---------------------------------------------------------------------------
# builders


def zero(dim: int = 1) -> FnSpec:
    return Const(0.0) if dim == 1 else Vec(tuple(Const(0.0) for _ in range(dim)))


def trig_polynomial(amplitudes, frequencies, phases=None) -> FnSpec:
    """``sum_k a_k cos(lambda_k t + phi_k)`` with real amplitudes."""
    phases = [0.0] * len(amplitudes) if phases is None else phases
    return Sum(
        tuple(Scale(a, Cos(w, p)) for a, w, p in zip(amplitudes, frequencies, phases))
    )


def complex_exponentials(amplitudes, frequencies) -> FnSpec:
    """``sum_k a_k exp(i lambda_k t)`` with complex amplitudes."""
    terms = []
    for a, w in zip(amplitudes, frequencies):
        terms.append(Scale(a, Cos(w)))
        terms.append(Scale(1j * a, Sin(w)))
    return Sum(tuple(terms))


def example_time_factor() -> FnSpec:
    """``cos t + 2 cos(sqrt5 t) + 4 exp(-|t|) - 3/(1+t^2)``."""
    return Sum(
        (
            Cos(1.0),
            Scale(2.0, Cos(math.sqrt(5.0))),
            Scale(4.0, ExpDecay(1.0)),
            Scale(-3.0, Lorentz()),
        )
    )


def example_delay() -> FnSpec:
    """``3 - sin(sqrt3 t)``."""
    return Sum((Const(3.0), Scale(-1.0, Sin(math.sqrt(3.0)))))
