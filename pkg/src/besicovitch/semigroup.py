"""Exponentially stable diagonal C0-semigroups ``T(t) = diag(exp(mu_k t))``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, StabilityViolationError


@dataclass(frozen=True, eq=False)
class SemigroupSpec:
    eigenvalues: np.ndarray

    def __post_init__(self):
        mu = np.atleast_1d(np.asarray(self.eigenvalues, dtype=float))
        if mu.ndim != 1 or mu.size == 0:
            raise InvalidArgumentError("need a non-empty list of eigenvalues")
        if not np.all(np.isfinite(mu)):
            raise InvalidArgumentError("eigenvalues must be finite")
        unstable = mu[mu >= 0]
        if unstable.size:
            raise StabilityViolationError(
                f"eigenvalue {unstable[0]} >= 0: the semigroup is not exponentially stable"
            )
        mu = mu.copy()
        mu.setflags(write=False)
        object.__setattr__(self, "eigenvalues", mu)

    @property
    def dimension(self) -> int:
        return self.eigenvalues.size


@dataclass(frozen=True)
class StabilityCertificate:
    """``||T(t)|| <= N exp(-lambda t)`` for ``t >= 0``."""

    N: float
    lam: float

    def bound(self, t):
        return self.N * np.exp(-self.lam * np.asarray(t, dtype=float))


def diagonal_semigroup(eigenvalues) -> SemigroupSpec:
    return SemigroupSpec(eigenvalues)


def heat_semigroup(n_modes: int) -> SemigroupSpec:
    """Dirichlet Laplacian on ``(0, pi)`` truncated to ``n_modes`` sine modes."""
    if n_modes < 1:
        raise InvalidArgumentError("need at least one mode")
    k = np.arange(1, n_modes + 1, dtype=float)
    return SemigroupSpec(-(k**2))


def apply_semigroup(s: SemigroupSpec, t: float, v) -> np.ndarray:
    """``T(t) v``; ``v`` may also be a stack of vectors with shape ``(..., d)``."""
    if t < 0:
        raise InvalidArgumentError(f"semigroup time must be >= 0, got {t}")
    v = np.asarray(v)
    if v.shape[-1:] != (s.dimension,):
        raise InvalidArgumentError(
            f"vector dimension {v.shape[-1:]} does not match semigroup dimension {s.dimension}"
        )
    if t == 0:
        return v.copy()
    return np.exp(s.eigenvalues * t) * v


def stability_certificate(s: SemigroupSpec) -> StabilityCertificate:
    """Exact for diagonal generators: ``N = 1``, ``lambda = min |mu_k|``."""
    return StabilityCertificate(1.0, float(np.min(-s.eigenvalues)))


def operator_norm(s: SemigroupSpec, t: float) -> float:
    """``||T(t)||`` in the Euclidean norm, i.e. ``exp(max mu * t)``."""
    if t < 0:
        raise InvalidArgumentError(f"semigroup time must be >= 0, got {t}")
    return float(np.exp(np.max(s.eigenvalues) * t))
