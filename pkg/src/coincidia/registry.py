"""Built-in problems with their default parameters.

Each entry names the parameters a caller may override and builds a fully
wired problem object.  Nonlinearities beyond these built-ins are a library
concern: plain-text configuration cannot safely encode functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bvp3 import Bvp3Problem, H1Data, H2Data
from .caputo import CaputoProblem, NonlocalTerm
from .errors import ConfigurationError
from .pendulum import PendulumProblem, sqrt_linear_A, sqrt_linear_inverse
from .stability import PhiFunction

_SLOPE_BOUND = 3.0 * math.sqrt(3.0) / 4.0  # max slope of 2 x^2 / (1 + x^2)


def bvp3_example(kappa: float = 0.4) -> Bvp3Problem:
    """The rational/logarithmic example problem

        (x''^3 + 2 x'') / (x''^2 + 3)
            = kappa x^2 / (t + t x^2) + log(t sqrt(1 + 2 e^{x'})),
        x(0) = 0,  10 x'(1) + x'(1/2) = 0,

    i.e. delta = -1/10, eta = 1/2.  The Lipschitz condition binds at
    |kappa| = (4 pi - 6) / (9 sqrt(3)) ~ 0.42123.
    """
    kappa = float(kappa)
    delta, eta = -0.1, 0.5

    def g(t, u1, u2, u3):
        t = np.asarray(t, dtype=float)
        saturating = 2.0 * u1 * u1 / (1.0 + u1 * u1)
        # log(sqrt(1 + 2 e^{u2})) without overflowing exp
        soft = 0.5 * np.logaddexp(math.log(2.0) + np.asarray(u2, dtype=float), 0.0)
        damped = u3 / (u3 * u3 + 3.0)
        return (kappa / (2.0 * t)) * saturating + soft + damped + np.log(t)

    def k1(t):
        return _SLOPE_BOUND * abs(kappa) / (2.0 * np.asarray(t, dtype=float))

    def a1(t):
        return abs(kappa) / (2.0 * np.asarray(t, dtype=float))

    def a4(t):
        return np.abs(np.log(np.asarray(t, dtype=float)) + 0.5 * math.log(3.0))

    m = kappa * kappa / 4.0
    return Bvp3Problem(
        delta=delta,
        eta=eta,
        g=g,
        h1_data=H1Data(k1=k1, K2=0.5, K3=1.0 / 3.0, ell=_SLOPE_BOUND ** 2 * m),
        h2_data=H2Data(a1=a1, A2=0.5, A3=1.0 / 3.0, a4=a4, m=m),
    )


def pendulum_pa(a: float = 1.0) -> PendulumProblem:
    """The forced pendulum u'' - a^2 sin(u) = f0(t) with f0(t) = sin(pi t),
    rescaled to A(r) = r / a^2 and driving f0 / a^2.  Requires 0 < |a| <= 1
    so that A is expansive."""
    a = float(a)
    if not 0.0 < abs(a) <= 1.0:
        raise ConfigurationError("the pendulum parameter needs 0 < |a| <= 1")
    a2 = a * a

    def f_lower(t):
        return a2 * np.asarray(t, dtype=float)

    return PendulumProblem(
        A=lambda r: np.asarray(r, dtype=float) / a2,
        A_inverse=lambda y: np.asarray(y, dtype=float) * a2,
        driving=lambda t: np.sin(math.pi * np.asarray(t, dtype=float)) / a2,
        f_lower=PhiFunction(
            eval=lambda t: a2 * float(t),
            upper_bracket=lambda eps: eps / a2 + 1.0,
            strictly_increasing=True,
            name="scaled-identity",
        ),
    )


def pendulum_sqrt_linear(k: float = 2.0, driving: Callable | None = None) -> PendulumProblem:
    """Pendulum-type problem with the odd sqrt-linear nonlinearity."""
    return PendulumProblem(
        A=sqrt_linear_A(k),
        A_inverse=sqrt_linear_inverse(k) if k == 2.0 else None,
        driving=driving if driving is not None else (lambda t: np.zeros_like(np.asarray(t, dtype=float))),
        f_lower=None,
    )


def caputo_constant(q: float = 0.5, x0: float = 0.0) -> CaputoProblem:
    """D^q x = 1, x(0) = x0: for q = 1/2, x0 = 0 the solution is
    2 sqrt(t / pi)."""
    return CaputoProblem(
        q=float(q),
        f=lambda t, x: np.ones_like(np.asarray(t, dtype=float)),
        L_f=1.0,
        x0=float(x0),
        nonlocal_terms=(),
        horizon=1.0,
    )


def caputo_linear(q: float = 0.5, x0: float = 1.0, lf: float = 1.0) -> CaputoProblem:
    """D^q x = x, x(0) = x0: the solution is x0 E_q(t^q)."""
    return CaputoProblem(
        q=float(q),
        f=lambda t, x: np.asarray(x, dtype=float),
        L_f=float(lf),
        x0=float(x0),
        nonlocal_terms=(),
        horizon=1.0,
    )


def caputo_nonlocal(x0: float = 1.0) -> CaputoProblem:
    """D^q x = 0 with the nonlocal datum x(0) = x0 + x(1/2) / 2; the
    solution is the constant 2 x0."""
    return CaputoProblem(
        q=0.5,
        f=lambda t, x: np.zeros_like(np.asarray(t, dtype=float)),
        L_f=0.1,
        x0=float(x0),
        nonlocal_terms=(NonlocalTerm(t=0.5, g=lambda v: 0.5 * v, c=0.5),),
        horizon=1.0,
    )


@dataclass(frozen=True)
class RegistryEntry:
    name: str
    kind: str
    description: str
    build: Callable
    defaults: dict = field(default_factory=dict)

    def make(self, **params):
        unknown = set(params) - set(self.defaults)
        if unknown:
            raise ConfigurationError(
                f"problem {self.name!r} does not take parameters {sorted(unknown)}; "
                f"allowed: {sorted(self.defaults)}"
            )
        return self.build(**{**self.defaults, **params})


_ENTRIES = [
    RegistryEntry(
        name="bvp3-example",
        kind="bvp3",
        description="three-point BVP with rational/log nonlinearity; delta=-1/10, eta=1/2",
        build=bvp3_example,
        defaults={"kappa": 0.4},
    ),
    RegistryEntry(
        name="pendulum-Pa",
        kind="pendulum",
        description="forced pendulum u'' - a^2 sin(u) = sin(pi t), Dirichlet conditions",
        build=pendulum_pa,
        defaults={"a": 1.0},
    ),
    RegistryEntry(
        name="caputo-constant",
        kind="caputo",
        description="D^q x = 1, x(0) = x0; analytic solution x0 + t^q/Gamma(q+1)",
        build=caputo_constant,
        defaults={"q": 0.5, "x0": 0.0},
    ),
    RegistryEntry(
        name="caputo-linear",
        kind="caputo",
        description="D^q x = x, x(0) = x0; Mittag-Leffler solution x0 E_q(t^q)",
        build=caputo_linear,
        defaults={"q": 0.5, "x0": 1.0, "lf": 1.0},
    ),
    RegistryEntry(
        name="caputo-nonlocal",
        kind="caputo",
        description="D^q x = 0 with x(0) = x0 + x(1/2)/2; constant solution 2 x0",
        build=caputo_nonlocal,
        defaults={"x0": 1.0},
    ),
]

REGISTRY = {entry.name: entry for entry in _ENTRIES}


def available_problems() -> list[RegistryEntry]:
    return list(_ENTRIES)


def build_problem(name: str, **params):
    if name not in REGISTRY:
        raise ConfigurationError(
            f"unknown problem {name!r}; available: {sorted(REGISTRY)}"
        )
    return REGISTRY[name].make(**params)
