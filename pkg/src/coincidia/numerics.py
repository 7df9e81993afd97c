"""Shared numeric substrate: uniform grids, composite quadrature, norms,
bisection root finding, and the Gamma / Mittag-Leffler special functions.

All quantities are IEEE-754 doubles and every tolerance is an explicit
argument of the operation that uses it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    BracketingError,
    ConfigurationError,
    DomainError,
    NumericError,
)

NODES = "nodes"
MIDPOINTS = "midpoints"

_BISECTION_CAP = 200


@dataclass(frozen=True)
class Grid:
    """Uniform grid with ``n`` cells on ``[a, b]``.

    ``nodes`` style samples the ``n + 1`` cell boundaries; ``midpoints``
    style samples the ``n`` cell centers, which keeps integrands that are
    singular at the interval ends away from the endpoints.
    """

    a: float
    b: float
    n: int
    style: str = NODES

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and math.isfinite(self.b) and self.a < self.b):
            raise ConfigurationError(f"grid endpoints must satisfy a < b, got [{self.a}, {self.b}]")
        if self.n < 2:
            raise ConfigurationError(f"grid needs at least 2 cells, got n={self.n}")
        if self.style not in (NODES, MIDPOINTS):
            raise ConfigurationError(f"unknown grid style {self.style!r}")

    @property
    def spacing(self) -> float:
        return (self.b - self.a) / self.n

    @property
    def size(self) -> int:
        """Number of sample points carried by functions on this grid."""
        return self.n + 1 if self.style == NODES else self.n

    def points(self) -> np.ndarray:
        if self.style == NODES:
            return np.linspace(self.a, self.b, self.n + 1)
        return self.a + (np.arange(self.n) + 0.5) * self.spacing


@dataclass(frozen=True, eq=False)
class GridFunction:
    """A real function sampled on a :class:`Grid`.

    Values are stored as a read-only float array; all samples must be
    finite.  Instances are immutable and safe to share between threads.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=float, copy=True).reshape(-1)
        if vals.shape != (self.grid.size,):
            raise ConfigurationError(
                f"expected {self.grid.size} samples for this grid, got {vals.shape[0]}"
            )
        if not np.all(np.isfinite(vals)):
            raise NumericError("grid function contains non-finite samples")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @classmethod
    def sample(cls, grid: Grid, fn: Callable) -> "GridFunction":
        pts = grid.points()
        vals = np.asarray(fn(pts), dtype=float)
        if vals.ndim == 0:
            vals = np.full(pts.shape, float(vals))
        return cls(grid, vals)

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "GridFunction":
        return cls(grid, np.full(grid.size, float(value)))

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls.constant(grid, 0.0)

    def with_values(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(self.grid, values)

    def _require_same_grid(self, other: "GridFunction") -> None:
        if self.grid != other.grid:
            raise ConfigurationError("grid functions live on different grids")

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self._require_same_grid(other)
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        self._require_same_grid(other)
        return GridFunction(self.grid, self.values - other.values)

    def __mul__(self, scalar: float) -> "GridFunction":
        return GridFunction(self.grid, self.values * float(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> "GridFunction":
        return GridFunction(self.grid, self.values / float(scalar))

    def __neg__(self) -> "GridFunction":
        return GridFunction(self.grid, -self.values)


def integrate(f: GridFunction) -> float:
    """Composite quadrature of ``f`` over its grid interval.

    Nodes grids use composite Simpson (the cell count must be even);
    midpoints grids use the composite midpoint rule.  Simpson is exact for
    cubics, the midpoint rule for linear integrands.
    """
    grid, v = f.grid, f.values
    h = grid.spacing
    if grid.style == MIDPOINTS:
        return float(h * v.sum())
    if grid.n % 2:
        raise ConfigurationError("Simpson integration needs an even cell count on nodes grids")
    return float(h / 3.0 * (v[0] + v[-1] + 4.0 * v[1:-1:2].sum() + 2.0 * v[2:-2:2].sum()))


def cumulative_integral(f: GridFunction) -> GridFunction:
    """Running integral ``F(t_j) = int_a^{t_j} f``, one value per grid point.

    Nodes grids accumulate Simpson panels, with the half-panel rule
    ``h (5 f_0 + 8 f_1 - f_2) / 12`` filling the odd points, so the result
    is exact for quadratics and ``F(a) = 0``.  Midpoints grids accumulate
    whole cells plus a linearly interpolated half cell, which is exact for
    linear integrands.
    """
    grid, v = f.grid, f.values
    h = grid.spacing
    if grid.style == MIDPOINTS:
        head = np.concatenate(([0.0], np.cumsum(v)[:-1]))
        corr = np.empty_like(v)
        corr[0] = (5.0 * v[0] - v[1]) / 8.0
        corr[1:] = (v[:-1] + 3.0 * v[1:]) / 8.0
        return GridFunction(grid, h * (head + corr))
    n = grid.n
    F = np.zeros(n + 1)
    m = n // 2
    k = 2 * np.arange(m)
    F[k + 2] = np.cumsum(h / 3.0 * (v[k] + 4.0 * v[k + 1] + v[k + 2]))
    j = k + 1
    F[j] = F[j - 1] + h * (5.0 * v[j - 1] + 8.0 * v[j] - v[j + 1]) / 12.0
    if n % 2:
        F[n] = F[n - 1] + h * (-v[n - 2] + 8.0 * v[n - 1] + 5.0 * v[n]) / 12.0
    return GridFunction(grid, F)


def cell_edge_cumulative(f: GridFunction) -> np.ndarray:
    """Exact partial sums ``int_a^{a+kh} f`` at the ``n + 1`` cell edges of a
    midpoints grid (the midpoint rule integrates each cell as ``h f_i``)."""
    if f.grid.style != MIDPOINTS:
        raise ConfigurationError("cell-edge cumulative integrals require a midpoints grid")
    return np.concatenate(([0.0], f.grid.spacing * np.cumsum(f.values)))


def sup_norm(f: GridFunction) -> float:
    return float(np.max(np.abs(f.values)))


def l2_norm(f: GridFunction) -> float:
    return math.sqrt(max(integrate(f.with_values(f.values * f.values)), 0.0))


def bracket_root(
    g: Callable[[float], float],
    target: float,
    lo: float,
    hi: float,
    tol: float,
) -> float:
    """Solve ``g(r) = target`` for a nondecreasing ``g`` by bisection.

    Requires ``g(lo) <= target <= g(hi)``.  Bisection runs until both the
    bracket width and the value defect ``|g(r) - target|`` drop to ``tol``,
    so the returned ``r`` is accurate in the argument even where ``g`` is
    flat and in the value even where ``g`` is steep.
    """
    if tol <= 0.0:
        raise ConfigurationError("bisection tolerance must be positive")
    if not lo < hi:
        raise ConfigurationError(f"invalid bracket [{lo}, {hi}]")
    glo, ghi = float(g(lo)), float(g(hi))
    if not (math.isfinite(glo) and math.isfinite(ghi)):
        raise NumericError("bracket endpoint evaluated to a non-finite value")
    if not glo <= target <= ghi:
        raise BracketingError(
            f"target {target} outside bracket values [{glo}, {ghi}] on [{lo}, {hi}]"
        )
    if abs(glo - target) <= tol and hi - lo <= tol:
        return float(lo)
    for _ in range(_BISECTION_CAP):
        mid = 0.5 * (lo + hi)
        gm = float(g(mid))
        if not math.isfinite(gm):
            raise NumericError(f"function evaluated to a non-finite value at {mid}")
        if abs(gm - target) <= tol and hi - lo <= 2.0 * tol:
            return float(mid)
        if gm < target:
            lo = mid
        else:
            hi = mid
    raise NumericError(
        f"bisection did not reach |g(r) - target| <= {tol}; is g discontinuous at the root?"
    )


def gamma(x: float) -> float:
    """Gamma function for ``x > 0``."""
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"gamma requires x > 0, got {x}")
    try:
        return math.gamma(x)
    except OverflowError as exc:
        raise NumericError(f"gamma({x}) overflows double precision") from exc


def mittag_leffler(q: float, z: float, tol: float, max_terms: int = 100_000) -> float:
    """One-parameter Mittag-Leffler function ``E_q(z) = sum_k z^k / Gamma(qk + 1)``.

    The series is summed until a term falls below ``tol * max(1, |partial sum|)``.
    Restricted to real ``|z| <= 30`` and ``0 < q <= 1``; ``E_1`` reduces to exp.
    """
    q, z = float(q), float(z)
    if not 0.0 < q <= 1.0:
        raise DomainError(f"order q must lie in (0, 1], got {q}")
    if not abs(z) <= 30.0:
        raise DomainError(f"|z| <= 30 required, got {z}")
    if tol <= 0.0:
        raise ConfigurationError("series tolerance must be positive")
    if z == 0.0:
        return 1.0
    total = 1.0
    log_abs_z = math.log(abs(z))
    for k in range(1, max_terms + 1):
        # terms via logs so z**k and Gamma(qk+1) cannot overflow separately
        log_mag = k * log_abs_z - math.lgamma(q * k + 1.0)
        if log_mag > 700.0:
            raise NumericError("Mittag-Leffler series term overflows double precision")
        mag = math.exp(log_mag)
        total += mag if (z > 0.0 or k % 2 == 0) else -mag
        if not math.isfinite(total):
            raise NumericError("Mittag-Leffler partial sums are non-finite")
        if mag < tol * max(1.0, abs(total)):
            return total
    raise NumericError(f"Mittag-Leffler series did not converge within {max_terms} terms")
