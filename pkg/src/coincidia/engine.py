"""Fixed-point iteration schemes for coincidence problems.

A coincidence problem T(u) = S(u) is iterated at the level of the image
variable ``y = T(u)`` through the single-valued map ``h = S o T^{-1}``.
Three schemes are provided:

* ``solve_picard``     -- plain iteration ``y <- h(y)``, the workhorse for
  contractions (known modulus ``k < 1``) and Geraghty-type maps.
* ``solve_averaged``   -- Krasnoselskii-Mann averaging ``y <- (y + h(y)) / 2``
  for nonexpansive maps with no usable rate.
* ``solve_resolvent``  -- the almost-fixed-point sequence solving
  ``y_n = (y_0 + n h(y_n)) / (n + 1)`` for an increasing schedule of ``n``;
  its residual decays like ``|y_0 - y_n| / n`` for nonexpansive ``h``.

Every scheme records the full residual history ``|y_k - h(y_k)|`` in the
operator's declared norm, and the reported solution always satisfies
``residual(h, y) == final_residual`` under recomputation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .errors import ConfigurationError, DomainError, NumericError
from .numerics import GridFunction, l2_norm, sup_norm
from .stability import PhiFunction, invert

PICARD = "picard"
AVERAGED = "averaged"
RESOLVENT = "resolvent"

_NORM_KINDS = ("sup", "l2")
_GROWTH_LIMIT = 1e14
_STAGNATION_WINDOW = 50
_STAGNATION_EPS = 1e-15


@dataclass(frozen=True)
class OperatorHandle:
    """A self-map of grid functions together with its working norm.

    ``apply`` must be a pure function that returns a function on the same
    grid.  A declared ``modulus`` asserts that the map is a contraction
    with that constant in the declared norm; leave it ``None`` for maps
    that are merely nonexpansive or of Geraghty type.
    """

    apply: Callable[[GridFunction], GridFunction]
    norm_kind: str = "l2"
    modulus: float | None = None

    def __post_init__(self) -> None:
        if self.norm_kind not in _NORM_KINDS:
            raise ConfigurationError(f"norm_kind must be one of {_NORM_KINDS}")
        if self.modulus is not None and not 0.0 <= self.modulus < 1.0:
            raise ConfigurationError(f"a declared modulus must lie in [0, 1), got {self.modulus}")

    def norm(self, f: GridFunction) -> float:
        return sup_norm(f) if self.norm_kind == "sup" else l2_norm(f)


@dataclass
class SolveReport:
    """Outcome of one solve: iterates, residual history and certificates.

    ``converged`` holds exactly when ``final_residual <= tol`` for the
    schemes that take a tolerance; the resolvent scheme has no target
    tolerance (``tol is None``) and reports ``converged=True`` when every
    scheduled stage completed its inner iteration.
    """

    solution: GridFunction
    iterations: int
    residual_history: list[float]
    final_residual: float
    scheme: str
    converged: bool
    tol: float | None = None
    stability_radius: float | None = None
    stagnated: bool = False
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        payload = {
            "scheme": self.scheme,
            "iterations": self.iterations,
            "residual_history": [float(r) for r in self.residual_history],
            "final_residual": float(self.final_residual),
            "converged": bool(self.converged),
            "tol": self.tol,
            "stability_radius": self.stability_radius,
            "stagnated": bool(self.stagnated),
            "solution": {
                "grid": {
                    "a": self.solution.grid.a,
                    "b": self.solution.grid.b,
                    "n": self.solution.grid.n,
                    "style": self.solution.grid.style,
                },
                "values": [float(v) for v in self.solution.values],
            },
        }
        for key, value in self.extras.items():
            if isinstance(value, GridFunction):
                payload[key] = [float(v) for v in value.values]
            elif hasattr(value, "to_dict"):
                payload[key] = value.to_dict()
            else:
                payload[key] = value
        return payload


def _apply(h: OperatorHandle, y: GridFunction) -> GridFunction:
    out = h.apply(y)
    if not isinstance(out, GridFunction) or out.grid != y.grid:
        raise ConfigurationError("operator must map a grid function to the same grid")
    return out


def _guard_growth(y: GridFunction) -> None:
    if sup_norm(y) > _GROWTH_LIMIT:
        raise NumericError("iterate norm grew beyond 1e14; the iteration is diverging")


def residual(h: OperatorHandle, y: GridFunction) -> float:
    """Coincidence defect ``|y - h(y)|`` in the operator's declared norm."""
    return h.norm(y - _apply(h, y))


def _validate_stopping(tol: float, max_iter: int) -> None:
    if tol <= 0.0:
        raise ConfigurationError("tolerance must be positive")
    if max_iter < 1:
        raise ConfigurationError("max_iter must be at least 1")


def solve_picard(
    h: OperatorHandle,
    y0: GridFunction,
    tol: float,
    max_iter: int,
) -> SolveReport:
    """Iterate ``y <- h(y)`` until the residual drops to ``tol``.

    With a declared modulus ``k`` the residuals decay geometrically with
    ratio ``k``.  Without one (Geraghty case, no rate available) the loop
    additionally stops with ``stagnated=True`` if the residual fails to
    improve by 1e-15 over 50 consecutive steps.  When the residual first
    hits ``tol`` one more image step is taken, which tightens the iterate
    for contractive maps; if the starting point already meets the
    tolerance it is returned unchanged.
    """
    _validate_stopping(tol, max_iter)
    y = y0
    hy = _apply(h, y)
    r = h.norm(y - hy)
    history = [r]
    if r <= tol:
        return SolveReport(
            solution=y, iterations=0, residual_history=history, final_residual=r,
            scheme=PICARD, converged=True, tol=tol,
        )
    iterations = 0
    best, flat_steps = r, 0
    stagnated = False
    while iterations < max_iter:
        y = hy
        iterations += 1
        _guard_growth(y)
        hy = _apply(h, y)
        r = h.norm(y - hy)
        history.append(r)
        if r <= tol:
            if iterations < max_iter:
                y = hy
                iterations += 1
                hy = _apply(h, y)
                r = h.norm(y - hy)
                history.append(r)
            break
        if h.modulus is None:
            if r < best - _STAGNATION_EPS:
                best, flat_steps = r, 0
            else:
                flat_steps += 1
                if flat_steps >= _STAGNATION_WINDOW:
                    stagnated = True
                    break
    return SolveReport(
        solution=y, iterations=iterations, residual_history=history,
        final_residual=history[-1], scheme=PICARD,
        converged=history[-1] <= tol, tol=tol, stagnated=stagnated,
    )


def solve_averaged(
    h: OperatorHandle,
    y0: GridFunction,
    tol: float,
    max_iter: int,
) -> SolveReport:
    """Krasnoselskii-Mann iteration ``y <- (y + h(y)) / 2``.

    For nonexpansive ``h`` the recorded residuals ``|y - h(y)|`` are
    nonincreasing; no convergence rate is claimed.
    """
    _validate_stopping(tol, max_iter)
    y = y0
    hy = _apply(h, y)
    r = h.norm(y - hy)
    history = [r]
    iterations = 0
    best, flat_steps = r, 0
    stagnated = False
    while r > tol and iterations < max_iter:
        y = 0.5 * (y + hy)
        iterations += 1
        _guard_growth(y)
        hy = _apply(h, y)
        r = h.norm(y - hy)
        history.append(r)
        if r < best - _STAGNATION_EPS:
            best, flat_steps = r, 0
        else:
            flat_steps += 1
            if flat_steps >= _STAGNATION_WINDOW:
                stagnated = True
                break
    return SolveReport(
        solution=y, iterations=iterations, residual_history=history,
        final_residual=history[-1], scheme=AVERAGED,
        converged=history[-1] <= tol, tol=tol, stagnated=stagnated,
    )


def default_n_schedule() -> list[int]:
    """Geometric schedule 1, 2, 4, ..., 2**14 balancing outer progress
    (residual ~ 1/n) against inner cost (~ n iterations per stage)."""
    return [2 ** k for k in range(15)]


def solve_resolvent(
    h: OperatorHandle,
    y0: GridFunction,
    n_schedule: Sequence[int],
    inner_tol: float,
) -> SolveReport:
    """Almost-fixed-point sequence through the resolvent of ``I - h``.

    For each ``n`` in the schedule the implicit equation
    ``y_n = (y_0 + n h(y_n)) / (n + 1)`` is solved by inner Picard
    iteration; the inner map is an ``n/(n+1)``-contraction whenever ``h``
    is nonexpansive.  Stages warm-start from the previous ``y_n``.  On
    completion of stage ``n`` the identity
    ``y_n - h(y_n) = (y_0 - y_n) / n`` holds within ``2 * inner_tol``.
    """
    if inner_tol <= 0.0:
        raise ConfigurationError("inner tolerance must be positive")
    schedule = [int(n) for n in n_schedule]
    if not schedule or any(n < 1 for n in schedule):
        raise ConfigurationError("n_schedule must contain positive integers")
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ConfigurationError("n_schedule must be strictly increasing")

    y = y0
    history: list[float] = []
    stages: list[dict] = []
    total_inner = 0
    for n in schedule:
        ratio = n / (n + 1.0)
        budget = 50
        if inner_tol < 1.0:
            budget += max(0, math.ceil(math.log(inner_tol) / math.log(ratio)))
        w = y
        inner_steps = 0
        for _ in range(budget):
            hw = _apply(h, w)
            gw = (y0 + float(n) * hw) / float(n + 1)
            defect = h.norm(w - gw)
            w = gw
            inner_steps += 1
            _guard_growth(w)
            if defect <= inner_tol:
                break
        else:
            raise NumericError(
                f"inner iteration at stage n={n} exceeded its budget of {budget} steps"
            )
        total_inner += inner_steps
        outer = h.norm(w - _apply(h, w))
        history.append(outer)
        stages.append({"n": n, "inner_steps": inner_steps, "outer_residual": outer})
        y = w
    return SolveReport(
        solution=y, iterations=total_inner, residual_history=history,
        final_residual=history[-1], scheme=RESOLVENT, converged=True, tol=None,
        extras={"stages": stages, "inner_tol": inner_tol},
    )


def error_bound(phi: PhiFunction, eps: float) -> float:
    """Localization radius ``psi(eps) = phi^{-1}(eps)`` for the coincidence point.

    If ``w`` is an approximate solution with defect ``|T(w) - S(w)| <= eps``
    and ``T - S`` is ``phi``-expansive, the unique coincidence point lies
    within ``psi(eps)`` of ``w``.
    """
    if eps < 0.0:
        raise DomainError("the defect eps must be nonnegative")
    return invert(phi, eps, tol=1e-9)
