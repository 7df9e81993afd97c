"""Forced pendulum-type problem with homogeneous Dirichlet conditions:

    A(u''(t)) - sin(u(t)) = g(t)   on [0, 1],
    u(0) = u(1) = 0,

where A is continuous and expansive: |A(x) - A(y)| >= |x - y|, with a lower
comparison bound f(|A(x) - A(y)|) <= |x - y|.  The problem is iterated on
the image variable y = A(u'') in the sup norm:

    h(y)(t) = sin(u(t)) + g(t),   u = Green reconstruction of A^{ -1}(y),

with Green's function G(t, s) = s (t - 1) for s <= t and t (s - 1) for
s > t.  Since max_t int_0^1 |G(t, s)| ds = 1/8 and the inverse of A is
1-Lipschitz, the map contracts with modulus 1/8.

The defect eps = sup_t |A(w''(t)) - sin(w(t)) - g(t)| of a trial function
w localizes the true solution within psi(eps) = phi^{-1}(eps), where phi
is the strictly increasing comparison function

    phi(r) = r - 2 sin(r / 2)  for r <= pi,    r - 2  for r > pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import engine
from .engine import OperatorHandle, SolveReport
from .errors import ConfigurationError, NumericError, RangeError
from .numerics import NODES, Grid, GridFunction, cumulative_integral, sup_norm
from .stability import PhiFunction

GREEN_MODULUS = 0.125

_EXPANSIVE_PROBE_SEED = 74207
_EXPANSIVE_PROBE_PAIRS = 200


def _eval_map(fn: Callable, arr: np.ndarray) -> np.ndarray:
    """Apply a scalar-or-vector real map to an array."""
    try:
        out = np.asarray(fn(arr), dtype=float)
        if out.shape == arr.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([float(fn(float(x))) for x in arr])


@dataclass(frozen=True)
class PendulumProblem:
    """Problem data: the nonlinearity A, the driving force, and optionally a
    closed-form inverse of A plus the lower comparison bound of A."""

    A: Callable
    driving: Callable
    A_inverse: Callable | None = None
    f_lower: PhiFunction | None = None

    def __post_init__(self) -> None:
        # expansiveness |A(x) - A(y)| >= |x - y| is spot-checked, not proved
        rng = np.random.default_rng(_EXPANSIVE_PROBE_SEED)
        x = rng.uniform(-5.0, 5.0, _EXPANSIVE_PROBE_PAIRS)
        y = rng.uniform(-5.0, 5.0, _EXPANSIVE_PROBE_PAIRS)
        ax, ay = _eval_map(self.A, x), _eval_map(self.A, y)
        gap = np.abs(ax - ay) - np.abs(x - y)
        if np.any(gap < -1e-9):
            bad = int(np.argmin(gap))
            raise ConfigurationError(
                f"A is not expansive: |A({x[bad]}) - A({y[bad]})| < |{x[bad]} - {y[bad]}|"
            )


def invert_A(p: PendulumProblem, y: float, tol: float) -> float:
    """Solve A(x) = y to |A(x) - y| <= tol.

    Uses the supplied closed-form inverse when available; otherwise the
    bracket [-1, 1] is expanded by doubling (at most 60 times) and the
    monotone branch is bisected.
    """
    if tol <= 0.0:
        raise ConfigurationError("inversion tolerance must be positive")
    if p.A_inverse is not None:
        return float(p.A_inverse(y))
    sign = 1.0 if float(p.A(1.0)) >= float(p.A(-1.0)) else -1.0

    def oriented(x: float) -> float:
        return sign * float(p.A(x))

    target = sign * y
    lo, hi = -1.0, 1.0
    for _ in range(60):
        if oriented(hi) >= target:
            break
        lo, hi = hi, hi * 2.0
    else:
        raise RangeError(f"A does not appear to reach {y} above the start bracket")
    for _ in range(60):
        if oriented(lo) <= target:
            break
        lo, hi = lo * 2.0, lo
    else:
        raise RangeError(f"A does not appear to reach {y} below the start bracket")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = oriented(mid)
        if abs(val - target) <= tol:
            return mid
        if val < target:
            lo = mid
        else:
            hi = mid
    raise NumericError(f"bisection stalled inverting A at y = {y}; is A discontinuous there?")


def _invert_values(p: PendulumProblem, values: np.ndarray, tol: float) -> np.ndarray:
    if p.A_inverse is not None:
        return _eval_map(p.A_inverse, values)
    return np.array([invert_A(p, float(v), tol) for v in values])


def _require_green_grid(grid: Grid) -> None:
    if grid.style != NODES or (grid.a, grid.b) != (0.0, 1.0):
        raise ConfigurationError("Green reconstruction needs a nodes grid on [0, 1]")


def green_apply_with_derivative(w: GridFunction) -> tuple[GridFunction, GridFunction]:
    """Solve u'' = w with u(0) = u(1) = 0; returns (u, u').

    Splitting the Green integral at the kink, u(t) = (t - 1) P(t)
    + t (Q(1) - Q(t)) and u'(t) = P(t) + Q(1) - Q(t) with
    P(t) = int_0^t s w(s) ds and Q(t) = int_0^t (s - 1) w(s) ds, so both
    running integrands stay smooth and the endpoints vanish exactly.
    """
    grid = w.grid
    _require_green_grid(grid)
    t = grid.points()
    P = cumulative_integral(GridFunction(grid, t * w.values)).values
    Q = cumulative_integral(GridFunction(grid, (t - 1.0) * w.values)).values
    u = (t - 1.0) * P + t * (Q[-1] - Q)
    u_prime = P + (Q[-1] - Q)
    return GridFunction(grid, u), GridFunction(grid, u_prime)


def green_apply(w: GridFunction) -> GridFunction:
    return green_apply_with_derivative(w)[0]


def coincidence_operator(p: PendulumProblem, grid: Grid, inversion_tol: float = 1e-12) -> OperatorHandle:
    """The sup-norm map h(y) = sin(Green(A^{-1} y)) + g with modulus 1/8."""
    _require_green_grid(grid)
    g_vals = _eval_map(p.driving, grid.points())

    def apply(y: GridFunction) -> GridFunction:
        u_dd = _invert_values(p, y.values, inversion_tol)
        u = green_apply(GridFunction(grid, u_dd))
        return GridFunction(grid, np.sin(u.values) + g_vals)

    return OperatorHandle(apply=apply, norm_kind="sup", modulus=GREEN_MODULUS)


def solve(
    p: PendulumProblem,
    grid: Grid,
    tol: float = 1e-10,
    max_iter: int = 100,
    y0: GridFunction | None = None,
    inversion_tol: float | None = None,
) -> SolveReport:
    """Picard iteration on y = A(u''), starting from the driving force.

    The contraction modulus 1/8 comes from the Green kernel bound and the
    1-Lipschitz inverse of A, so roughly log(tol) / log(1/8) iterations
    are expected.  The reconstructed u and u' are embedded in the report.
    """
    _require_green_grid(grid)
    itol = inversion_tol if inversion_tol is not None else max(1e-14, min(1e-12, 1e-3 * tol))
    handle = coincidence_operator(p, grid, itol)
    start = y0 if y0 is not None else GridFunction(grid, _eval_map(p.driving, grid.points()))
    report = engine.solve_picard(handle, start, tol, max_iter)
    u, u_prime = green_apply_with_derivative(
        GridFunction(grid, _invert_values(p, report.solution.values, itol))
    )
    # defect of the returned iterate localizes the true solution within
    # phi^{-1}(defect) in the sup norm
    report.stability_radius = engine.error_bound(phi_pendulum(), report.final_residual)
    report.extras.update({
        "u": u,
        "u_prime": u_prime,
        "certified_modulus": GREEN_MODULUS,
        "inversion_tol": itol,
    })
    return report


def epsilon_defect(p: PendulumProblem, w: GridFunction, w_second: GridFunction) -> float:
    """Approximate-solution defect eps = sup_t |A(w''(t)) - sin(w(t)) - g(t)|.

    ``w_second`` must be supplied analytically by the caller; numerical
    differentiation of sampled data would pollute the defect.
    """
    if w.grid != w_second.grid:
        raise ConfigurationError("w and w'' must share a grid")
    t = w.grid.points()
    vals = _eval_map(p.A, w_second.values) - np.sin(w.values) - _eval_map(p.driving, t)
    return float(np.max(np.abs(vals)))


def phi_pendulum() -> PhiFunction:
    """The comparison function of the pendulum problem.

    phi(r) = r - 2 sin(r/2) on [0, pi] and r - 2 beyond; continuous at pi,
    strictly increasing, onto [0, inf).  Since phi(r) >= r - 2, the
    bracket [0, eps + 4] always contains phi^{-1}(eps).
    """

    def evaluate(r: float) -> float:
        r = float(r)
        return r - 2.0 * math.sin(0.5 * r) if r <= math.pi else r - 2.0

    return PhiFunction(
        eval=evaluate,
        upper_bracket=lambda eps: eps + 4.0,
        strictly_increasing=True,
        name="pendulum",
    )


@dataclass(frozen=True)
class StabilityRow:
    """One localization row: defect, radius, and actual distance to u*."""

    epsilon: float
    psi: float
    sup_distance: float


def stability_table(
    p: PendulumProblem,
    candidates: Sequence[tuple[GridFunction, GridFunction]],
    u_star: GridFunction | None = None,
    tol: float = 1e-10,
    max_iter: int = 100,
) -> list[StabilityRow]:
    """Per candidate (w, w''): the defect eps, the localization radius
    psi(eps) = phi^{-1}(eps), and the realized distance sup|w - u*|.

    The true solution satisfies sup|w - u*| <= psi(eps) for every row.
    """
    if not candidates:
        raise ConfigurationError("at least one candidate is required")
    grid = candidates[0][0].grid
    for w, w2 in candidates:
        if w.grid != grid or w2.grid != grid:
            raise ConfigurationError("all candidates must share one grid")
    if u_star is None:
        u_star = solve(p, grid, tol=tol, max_iter=max_iter).extras["u"]
    phi = phi_pendulum()
    rows = []
    for w, w2 in candidates:
        eps = epsilon_defect(p, w, w2)
        rows.append(StabilityRow(
            epsilon=eps,
            psi=engine.error_bound(phi, eps),
            sup_distance=sup_norm(w - u_star),
        ))
    return rows


def table1_candidates(grid: Grid) -> list[tuple[str, GridFunction, GridFunction]]:
    """The four built-in trial functions with hard-coded second derivatives."""
    _require_green_grid(grid)
    t = grid.points()
    s = np.sin(math.pi * t)
    pi2 = math.pi ** 2

    w1 = np.zeros_like(t)
    w1_dd = np.zeros_like(t)

    w2 = (t - 1.0) * t / 4.0
    w2_dd = np.full_like(t, 0.5)

    w3 = -s / pi2
    w3_dd = s.copy()

    inner = s / math.pi ** 4
    w4 = w3 + np.sin(inner)
    # d^2/dt^2 sin(sin(pi t)/pi^4), chain rule, written out once
    w4_dd = s - np.sin(inner) * np.cos(math.pi * t) ** 2 / math.pi ** 6 - np.cos(inner) * s / pi2

    return [
        ("w1", GridFunction(grid, w1), GridFunction(grid, w1_dd)),
        ("w2", GridFunction(grid, w2), GridFunction(grid, w2_dd)),
        ("w3", GridFunction(grid, w3), GridFunction(grid, w3_dd)),
        ("w4", GridFunction(grid, w4), GridFunction(grid, w4_dd)),
    ]


def sqrt_linear_A(k: float = 2.0) -> Callable:
    """The expansive family A(x) = 2 sqrt(x) on [0, 1], k x for x > 1
    (k >= 2), extended to the real line as an odd function."""
    if k < 2.0:
        raise ConfigurationError("the sqrt-linear family needs k >= 2")

    def A(x):
        xa = np.asarray(x, dtype=float)
        mag = np.abs(xa)
        out = np.where(mag <= 1.0, 2.0 * np.sqrt(mag), k * mag) * np.sign(xa)
        return out if isinstance(x, np.ndarray) else float(out)

    return A


def sqrt_linear_f(k: float = 2.0) -> Callable:
    """Lower comparison bound f(t) = min(t^2 / 4, t / k) for the
    sqrt-linear family: f(|Ax - Ay|) <= |x - y| <= |Ax - Ay|."""

    def f(t):
        ta = np.asarray(t, dtype=float)
        out = np.minimum(ta * ta / 4.0, ta / k)
        return out if isinstance(t, np.ndarray) else float(out)

    return f


def sqrt_linear_inverse(k: float = 2.0) -> Callable:
    """Closed-form inverse of the odd sqrt-linear A; continuous (onto) only
    for k = 2."""
    if k != 2.0:
        raise ConfigurationError("a closed-form inverse is only provided for k = 2")

    def A_inv(y):
        ya = np.asarray(y, dtype=float)
        mag = np.abs(ya)
        out = np.where(mag <= 2.0, (mag / 2.0) ** 2, mag / k) * np.sign(ya)
        return out if isinstance(y, np.ndarray) else float(out)

    return A_inv
