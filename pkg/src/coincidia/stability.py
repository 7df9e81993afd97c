"""Comparison functions and generalized Ulam-Hyers inversion.

The comparison family consists of nondecreasing functions
``phi: [0, inf) -> [0, inf)`` with ``phi(r) = 0`` exactly at ``r = 0``.
Strictly increasing, onto members can be inverted numerically, which turns
an approximate-solution defect ``eps`` into the localization radius
``psi(eps) = phi^{-1}(eps)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigurationError, DomainError, RangeError
from .numerics import bracket_root

_PROBE_SEED = 180451
_PROBE_SAMPLES = 1000
_PROBE_SPAN = 100.0


@dataclass(frozen=True)
class PhiFunction:
    """A comparison function with a bracket generator for inversion.

    ``upper_bracket(eps)`` must return some ``hi`` with ``phi(hi) >= eps``.
    Membership in the comparison family (zero exactly at zero,
    nondecreasing) is spot-checked on 1000 probe points at construction;
    black-box callables cannot be verified continuously.
    """

    eval: Callable[[float], float]
    upper_bracket: Callable[[float], float]
    strictly_increasing: bool = True
    name: str = "phi"

    def __post_init__(self) -> None:
        at_zero = float(self.eval(0.0))
        if abs(at_zero) > 1e-12:
            raise ConfigurationError(f"comparison function must vanish at 0, got {at_zero}")
        rng = np.random.default_rng(_PROBE_SEED)
        probes = np.sort(rng.uniform(0.0, _PROBE_SPAN, _PROBE_SAMPLES))
        vals = np.array([float(self.eval(t)) for t in probes])
        if np.any(vals[probes > 0.0] <= 0.0):
            raise ConfigurationError("comparison function must be positive away from 0")
        if np.any(np.diff(vals) < -1e-12):
            raise ConfigurationError("comparison function must be nondecreasing")

    def __call__(self, r: float) -> float:
        return float(self.eval(r))


def geraghty_phi(alpha: Callable[[float], float], decreasing: bool) -> PhiFunction:
    """Comparison function ``phi(t) = (1 - alpha(t)) t`` from a Geraghty modulus.

    ``alpha`` must map into ``[0, 1)`` and be decreasing, which makes
    ``phi`` strictly increasing with ``phi(t) >= (1 - alpha(0)) t``.
    """
    if not decreasing:
        raise ConfigurationError("the Geraghty modulus must be decreasing")
    alpha0 = float(alpha(0.0))
    # alpha(0) = 1 is tolerated (the constant-modulus convention pins the
    # value 1 at t = 0 only); away from 0 the modulus must stay below 1
    if not 0.0 <= alpha0 <= 1.0:
        raise ConfigurationError(f"alpha(0) must lie in [0, 1], got {alpha0}")
    rng = np.random.default_rng(_PROBE_SEED)
    probes = np.sort(rng.uniform(0.0, _PROBE_SPAN, _PROBE_SAMPLES))
    avals = np.array([float(alpha(t)) for t in probes])
    if np.any(avals < 0.0) or np.any(avals >= 1.0):
        raise ConfigurationError("alpha must map into [0, 1) away from 0")
    if np.any(np.diff(avals) > 1e-12):
        raise ConfigurationError("alpha was declared decreasing but increases on probe points")
    slope = 1.0 - float(alpha(1.0))
    if slope <= 0.0:
        raise ConfigurationError("alpha(1) must be strictly below 1")

    def evaluate(t: float) -> float:
        return (1.0 - float(alpha(t))) * t

    # phi(t) >= slope * t for t >= 1 because alpha is decreasing
    return PhiFunction(
        eval=evaluate,
        upper_bracket=lambda eps: max(1.0, eps / slope + 1.0),
        strictly_increasing=True,
        name="geraghty",
    )


def invert(phi: PhiFunction, eps: float, tol: float) -> float:
    """Numeric inverse ``psi(eps)`` with ``|phi(psi) - eps| <= tol``."""
    if not phi.strictly_increasing:
        raise ConfigurationError("inversion requires a strictly increasing comparison function")
    if eps < 0.0:
        raise DomainError(f"eps must be nonnegative, got {eps}")
    if tol <= 0.0:
        raise ConfigurationError("inversion tolerance must be positive")
    if eps == 0.0:
        return 0.0
    hi = float(phi.upper_bracket(eps))
    if not math.isfinite(hi) or hi <= 0.0:
        raise RangeError(f"bracket generator returned an unusable upper end {hi}")
    if float(phi.eval(hi)) < eps:
        raise RangeError(f"eps={eps} exceeds the reachable range of phi on [0, {hi}]")
    return bracket_root(phi.eval, eps, 0.0, hi, tol)
