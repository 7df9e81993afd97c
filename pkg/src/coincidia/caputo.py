"""Caputo-type Cauchy problem with nonlocal initial data:

    D^q x(t) = f(t, x(t))  on [0, T],   0 < q < 1,
    x(0) = x0 + sum_i g_i(x(t_i)),

solved through the equivalent Volterra integral equation

    x(t) = x0 + sum_i g_i(x(t_i))
              + (1 / Gamma(q)) int_0^t (t - s)^(q-1) f(s, x(s)) ds

by Picard iteration.  The weakly singular kernel is handled by product
trapezoidal quadrature: weights integrate (t_j - s)^(q-1) exactly against
the piecewise-linear interpolant, so naive quadrature blowup near s = t
never occurs and constant integrands reproduce t^q / q to rounding.

The iteration is certified by the contraction condition

    L_f t_N^q / (Gamma(q) q) + L_g < 1,
    rho(lambda) = L_f / Gamma(q) * (t_N^q / q + Gamma(q) / (lambda L_f)^q) + L_g,

where t_N is the last nonlocal point (0 for a plain initial value
problem, which makes the lambda constraint vacuous), L_g = sum_i c_i, and
lambda > q / (L_f t_N) is found by doubling.  rho(lambda) < 1 is a
contraction factor in the weighted sup norm with weight
omega(t) = exp(lambda L_f max(t, t_N)).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import engine
from .engine import OperatorHandle, SolveReport
from .errors import CertificateError, ConfigurationError, DomainError, NumericError
from .numerics import NODES, Grid, GridFunction, gamma
from .reports import HypothesisReport


@dataclass(frozen=True)
class NonlocalTerm:
    """One nonlocal measurement g_i(x(t_i)) with Lipschitz constant c_i."""

    t: float
    g: Callable[[float], float]
    c: float

    def __post_init__(self) -> None:
        if self.t <= 0.0:
            raise ConfigurationError("nonlocal points must be positive")
        if self.c < 0.0:
            raise ConfigurationError("nonlocal Lipschitz constants must be nonnegative")


@dataclass(frozen=True)
class CaputoProblem:
    q: float
    f: Callable
    L_f: float
    x0: float
    nonlocal_terms: tuple[NonlocalTerm, ...] = ()
    horizon: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.q < 1.0:
            raise ConfigurationError(f"the order q must lie in (0, 1), got {self.q}")
        if self.L_f <= 0.0:
            raise ConfigurationError("L_f must be positive")
        if self.horizon <= 0.0:
            raise ConfigurationError("the horizon must be positive")
        ts = [term.t for term in self.nonlocal_terms]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ConfigurationError("nonlocal points must be strictly increasing")
        if ts and ts[-1] > self.horizon:
            raise ConfigurationError("nonlocal points must not exceed the horizon")

    @property
    def L_g(self) -> float:
        return float(sum(term.c for term in self.nonlocal_terms))

    @property
    def t_N(self) -> float:
        """Last nonlocal point; 0 by convention for a plain IVP."""
        return self.nonlocal_terms[-1].t if self.nonlocal_terms else 0.0


def _require_volterra_grid(grid: Grid) -> None:
    if grid.style != NODES or grid.a != 0.0:
        raise ConfigurationError("Volterra iterates live on nodes grids starting at 0")


def kernel_weights(grid: Grid, q: float) -> list[np.ndarray]:
    """Product-trapezoidal rows for int_0^{t_j} (t_j - s)^(q-1) phi(s) ds.

    Row j holds weights for nodes 0..j and is exact for piecewise-linear
    phi; row 0 is empty (integral over an empty interval).  All weights
    are nonnegative and row j sums to t_j^q / q.
    """
    _require_volterra_grid(grid)
    if not 0.0 < q < 1.0:
        raise DomainError(f"the order q must lie in (0, 1), got {q}")
    n = grid.n
    h = grid.spacing
    m = np.arange(n, dtype=float)
    mp = m + 1.0
    hq = h ** q
    # A(m): hat rising over [mh, (m+1)h]; B(m): hat falling over the same cell
    d1 = (mp ** (q + 1.0) - m ** (q + 1.0)) / (q + 1.0)
    d0 = (mp ** q - m ** q) / q
    A = hq * (d1 - m * d0)
    B = hq * (mp * d0 - d1)
    rows: list[np.ndarray] = [np.zeros(0)]
    for j in range(1, n + 1):
        row = np.empty(j + 1)
        row[0] = A[j - 1]
        row[j] = B[0]
        if j >= 2:
            row[1:j] = A[j - 2::-1] + B[j - 1:0:-1]
        rows.append(row)
    return rows


def weight_matrix(grid: Grid, q: float) -> np.ndarray:
    """Dense lower-triangular matrix form of :func:`kernel_weights`."""
    rows = kernel_weights(grid, q)
    W = np.zeros((grid.n + 1, grid.n + 1))
    for j, row in enumerate(rows):
        W[j, : row.size] = row
    return W


def snap_nonlocal_points(p: CaputoProblem, grid: Grid) -> list[tuple[int, float]]:
    """Snap each nonlocal point to its nearest grid node; the snap distance
    is at most half a cell."""
    out = []
    for term in p.nonlocal_terms:
        idx = int(round(term.t / grid.spacing))
        idx = min(max(idx, 0), grid.n)
        out.append((idx, abs(idx * grid.spacing - term.t)))
    return out


def _eval_f(p: CaputoProblem, t: np.ndarray, x: np.ndarray) -> np.ndarray:
    vals = np.asarray(p.f(t, x), dtype=float)
    if vals.ndim == 0:
        vals = np.full(t.shape, float(vals))
    if not np.all(np.isfinite(vals)):
        bad = t[~np.isfinite(vals)][0]
        raise NumericError(f"f evaluated to a non-finite value at t = {bad}")
    return vals


def picard_step(p: CaputoProblem, x: GridFunction, weights) -> GridFunction:
    """One Volterra iteration
    x+(t_j) = x0 + sum_i g_i(x(t_i)) + (1/Gamma(q)) sum_i w_{j,i} f(t_i, x(t_i)).

    ``weights`` may be the row list from :func:`kernel_weights` or the
    dense matrix from :func:`weight_matrix`.
    """
    grid = x.grid
    _require_volterra_grid(grid)
    if isinstance(weights, np.ndarray):
        W = weights
    else:
        W = np.zeros((grid.n + 1, grid.n + 1))
        for j, row in enumerate(weights):
            W[j, : len(row)] = row
    if W.shape != (grid.n + 1, grid.n + 1):
        raise ConfigurationError("weights do not match the grid")
    t = grid.points()
    fv = _eval_f(p, t, x.values)
    nonlocal_sum = 0.0
    for (idx, _), term in zip(snap_nonlocal_points(p, grid), p.nonlocal_terms):
        nonlocal_sum += float(term.g(float(x.values[idx])))
    return GridFunction(grid, p.x0 + nonlocal_sum + (W @ fv) / gamma(p.q))


def contraction_certificate(p: CaputoProblem, lambda_max: float = 1e8) -> HypothesisReport:
    """Check the contraction condition and search a usable weight rate lambda.

    Passes when L_f t_N^q / (Gamma(q) q) + L_g < 1 and doubling lambda from
    max(1, 2 q / (L_f t_N)) finds rho(lambda) < 1 below ``lambda_max``.
    """
    if lambda_max <= 0.0:
        raise ConfigurationError("lambda_max must be positive")
    q, L_f, L_g, t_N = p.q, p.L_f, p.L_g, p.t_N
    limit_value = L_f * t_N ** q / (gamma(q) * q) + L_g
    constants = {"q": q, "L_f": L_f, "L_g": L_g, "t_N": t_N, "limit_value": limit_value}
    if limit_value >= 1.0:
        return HypothesisReport(
            condition="Volterra contraction",
            passed=False,
            constants=constants,
            margins={"limit_margin": 1.0 - limit_value},
            witnesses=[],
        )
    lam = 1.0 if t_N == 0.0 else max(1.0, 2.0 * q / (L_f * t_N))
    rho = limit_value + L_f ** (1.0 - q) / lam ** q
    while rho >= 1.0 and lam <= lambda_max:
        lam *= 2.0
        rho = limit_value + L_f ** (1.0 - q) / lam ** q
    if rho >= 1.0:
        return HypothesisReport(
            condition="Volterra contraction",
            passed=False,
            constants={**constants, "lambda_max": lambda_max},
            margins={"limit_margin": 1.0 - limit_value, "rho_margin": 1.0 - rho},
            witnesses=[],
        )
    constants.update({"lambda": lam, "rho": rho})
    return HypothesisReport(
        condition="Volterra contraction",
        passed=True,
        constants=constants,
        margins={"limit_margin": 1.0 - limit_value, "rho_margin": 1.0 - rho},
        witnesses=[],
    )


def weighted_sup_norm(x: GridFunction, lam: float, L_f: float, t_N: float) -> float:
    """sup_j |x(t_j)| / omega(t_j) with omega(t) = exp(lam L_f max(t, t_N))."""
    if lam <= 0.0 or L_f <= 0.0:
        raise ConfigurationError("lambda and L_f must be positive")
    if t_N < 0.0:
        raise ConfigurationError("t_N must be nonnegative")
    t = x.grid.points()
    return float(np.max(np.abs(x.values) * np.exp(-lam * L_f * np.maximum(t, t_N))))


def volterra_operator(p: CaputoProblem, grid: Grid) -> OperatorHandle:
    """Sup-norm handle around :func:`picard_step` with precomputed weights."""
    _require_volterra_grid(grid)
    W = weight_matrix(grid, p.q)
    return OperatorHandle(apply=lambda x: picard_step(p, x, W), norm_kind="sup", modulus=None)


def solve(
    p: CaputoProblem,
    grid: Grid,
    tol: float = 1e-10,
    max_iter: int = 200,
    x_init: GridFunction | None = None,
    override_certificate: bool = False,
    lambda_max: float = 1e8,
) -> SolveReport:
    """Picard-iterate the Volterra equation from a constant initial iterate.

    The contraction certificate must pass unless ``override_certificate``
    is set.  Stopping is on the sup norm of successive iterate differences;
    when certified, the report also carries the a-posteriori bound
    rho / (1 - rho) * (last weighted step difference).

    Two-start agreement (distinct initial iterates converging to the same
    function) is the package's uniqueness evidence; it is evidence, not a
    proof.
    """
    _require_volterra_grid(grid)
    for term in p.nonlocal_terms:
        if term.t > grid.b + 1e-12:
            raise ConfigurationError("nonlocal points must lie inside the grid interval")
    certificate = contraction_certificate(p, lambda_max)
    if not certificate.passed and not override_certificate:
        raise CertificateError(
            "the contraction certificate failed "
            f"(limit value {certificate.constants['limit_value']:.6g}); "
            "pass override_certificate=True to iterate anyway"
        )
    handle = volterra_operator(p, grid)
    start = x_init if x_init is not None else GridFunction.constant(grid, p.x0)
    report = engine.solve_picard(handle, start, tol, max_iter)
    report.extras["certificate"] = certificate
    report.extras["nonlocal_snap_distances"] = [d for _, d in snap_nonlocal_points(p, grid)]
    if certificate.passed:
        lam = certificate.constants["lambda"]
        rho = certificate.constants["rho"]
        step = handle.apply(report.solution)
        d_w = weighted_sup_norm(step - report.solution, lam, p.L_f, p.t_N)
        bound = rho / (1.0 - rho) * d_w
        report.extras["posterior_weighted_error_bound"] = bound
        report.stability_radius = bound  # in the weighted sup norm
    return report


def brute_force_kernel_integral(
    t: float,
    q: float,
    phi: Callable[[np.ndarray], np.ndarray],
    panels: int = 1_000_000,
) -> float:
    """Independent oracle for int_0^t (t - s)^(q-1) phi(s) ds.

    Substituting u = (t - s)^q removes the singularity:
    the integral equals (1/q) int_0^{t^q} phi(t - u^(1/q)) du, evaluated
    with a plain midpoint Riemann sum.
    """
    if t <= 0.0:
        return 0.0
    u = (np.arange(panels) + 0.5) * (t ** q / panels)
    s = t - u ** (1.0 / q)
    vals = np.asarray(phi(np.clip(s, 0.0, t)), dtype=float)
    return float((t ** q / panels) * vals.sum() / q)
