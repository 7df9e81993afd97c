"""Three-point boundary value problem of second order:

    x''(t) = g(t, x(t), x'(t), x''(t))   a.e. on [0, 1],
    x(0) = 0,   x'(1) = delta * x'(eta),      delta != 1, eta in (0, 1).

The problem is solved as a coincidence problem on the second derivative
``y = x''``: inverting the boundary operator gives

    v(t)  = int_0^t (t - s) y(s) ds + c t,
    v'(t) = int_0^t y(s) ds + c,
    c     = (delta int_0^eta y - int_0^1 y) / (1 - delta),

and the iterated map is ``h(y)(t) = g(t, v(t), v'(t), y(t))`` in the L2
norm.  Collocation uses midpoints grids because the nonlinearities of
interest carry 1/t and log(t) terms that are square integrable but
unbounded at the left endpoint.

The solvability constants follow the Wirtinger-type bounds

    F(delta, eta) = [delta^2 (1-eta)^2 + (delta^2 - 2 delta) eta^2 + 1]
                    / (2 (delta - 1)^2),
    C(delta, eta) = sqrt(F)                if delta > 0,
                    min(sqrt(F), 2/pi)     if delta <= 0,
    Lambda        = (2 sqrt(ell) + Q) C(delta, eta) + R,

and the growth/Lipschitz hypotheses are certified by ``check_h1`` /
``check_h2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import engine
from .engine import OperatorHandle, SolveReport
from .errors import ConfigurationError, DomainError, NumericError
from .numerics import (
    MIDPOINTS,
    Grid,
    GridFunction,
    cell_edge_cumulative,
    cumulative_integral,
)
from .reports import HypothesisReport

_Z_SLACK = 1e-9
_LAMBDA_SLACK = 1e-12
_DEFAULT_PROBE_CELLS = 512


def f_constant(delta: float, eta: float) -> float:
    """F(delta, eta), the square of the Wirtinger-type derivative bound."""
    if delta == 1.0:
        raise DomainError("delta = 1 makes the boundary condition degenerate")
    if not 0.0 < eta < 1.0:
        raise DomainError(f"eta must lie in (0, 1), got {eta}")
    num = delta * delta * (1.0 - eta) ** 2 + (delta * delta - 2.0 * delta) * eta * eta + 1.0
    return num / (2.0 * (delta - 1.0) ** 2)


def c_constant(delta: float, eta: float) -> float:
    """C(delta, eta): bounds ||x'||_2 <= C ||x''||_2 on the boundary class."""
    root = math.sqrt(f_constant(delta, eta))
    return root if delta > 0.0 else min(root, 2.0 / math.pi)


def lambda_constant(ell: float, Q: float, R: float, delta: float, eta: float) -> float:
    """Lambda = (2 sqrt(ell) + Q) C(delta, eta) + R, the solvability constant."""
    if min(ell, Q, R) < 0.0:
        raise DomainError("ell, Q and R must be nonnegative")
    return (2.0 * math.sqrt(ell) + Q) * c_constant(delta, eta) + R


@dataclass(frozen=True)
class H1Data:
    """Lipschitz data: |g(t,u) - g(t,v)| <= k1(t)|u1-v1| + K2|u2-v2| + K3|u3-v3|
    with k1^2 integrating like ell/t."""

    k1: Callable
    K2: float
    K3: float
    ell: float

    def __post_init__(self) -> None:
        if min(self.K2, self.K3, self.ell) < 0.0:
            raise ConfigurationError("K2, K3 and ell must be nonnegative")


@dataclass(frozen=True)
class H2Data:
    """Growth data: |g(t,u)| <= a1(t)|u1| + A2|u2| + A3|u3| + a4(t)
    with a1^2 integrating like m/t and a4 square integrable."""

    a1: Callable
    A2: float
    A3: float
    a4: Callable
    m: float

    def __post_init__(self) -> None:
        if min(self.A2, self.A3, self.m) < 0.0:
            raise ConfigurationError("A2, A3 and m must be nonnegative")


@dataclass(frozen=True)
class Bvp3Problem:
    delta: float
    eta: float
    g: Callable
    h1_data: H1Data | None = None
    h2_data: H2Data | None = None

    def __post_init__(self) -> None:
        if self.delta == 1.0:
            raise ConfigurationError("delta must differ from 1")
        if not 0.0 < self.eta < 1.0:
            raise ConfigurationError(f"eta must lie in (0, 1), got {self.eta}")


def _sample_finite(h: Callable, pts: np.ndarray) -> np.ndarray:
    vals = np.asarray(h(pts), dtype=float)
    if vals.ndim == 0:
        vals = np.full(pts.shape, float(vals))
    if not np.all(np.isfinite(vals)):
        bad = pts[~np.isfinite(vals)][0]
        raise NumericError(f"h evaluated to a non-finite value at t = {bad}")
    return vals


def check_z_membership(h: Callable, ell: float, probe_grid: Grid) -> HypothesisReport:
    """Check ``int_t^1 h(s) ds <= ell / t`` on every probe point.

    ``h`` may be singular at 0, so probing is restricted to midpoints
    grids over [0, 1], which never evaluate at the endpoints.  Tails are
    evaluated with midpoint rules only (whole cells plus the half cell to
    the right of each probe), which underestimate convex integrands such
    as the 1/t^2 family and therefore never fail them spuriously.
    """
    if probe_grid.style != MIDPOINTS or (probe_grid.a, probe_grid.b) != (0.0, 1.0):
        raise ConfigurationError("membership probing needs a midpoints grid on [0, 1]")
    if ell < 0.0:
        raise DomainError("ell must be nonnegative")
    pts = probe_grid.points()
    step = probe_grid.spacing
    cells = step * _sample_finite(h, pts)
    half = 0.5 * step * _sample_finite(h, pts + 0.25 * step)
    suffix = np.concatenate((np.cumsum(cells[::-1])[::-1][1:], [0.0]))
    tails = half + suffix
    margins = ell / pts + _Z_SLACK - tails
    worst_idx = int(np.argmin(margins))
    worst = float(margins[worst_idx])
    passed = worst >= 0.0
    witnesses = []
    if not passed:
        witnesses.append({
            "t": float(pts[worst_idx]),
            "tail_integral": float(tails[worst_idx]),
            "bound": float(ell / pts[worst_idx]),
        })
    return HypothesisReport(
        condition="tail-integral class Z(ell)",
        passed=passed,
        constants={"ell": float(ell)},
        margins={"worst_tail_margin": worst},
        witnesses=witnesses,
    )


def _eval_g(g: Callable, t, u1, u2, u3) -> float:
    return float(g(t, u1, u2, u3))


def check_h1(p: Bvp3Problem, sample_count: int = 200, rng_seed: int = 0) -> HypothesisReport:
    """Certify the Lipschitz hypothesis: k1^2 in Z(ell), Lambda <= 1, and the
    pointwise Lipschitz inequality on random probe tuples.

    The constants-based parts are checked deterministically; the Lipschitz
    inequality is sampled, so this is a falsifier, not a proof.
    """
    if p.h1_data is None:
        raise ConfigurationError("check_h1 needs h1_data on the problem")
    d = p.h1_data
    probe = Grid(0.0, 1.0, _DEFAULT_PROBE_CELLS, MIDPOINTS)
    z_report = check_z_membership(lambda t: np.asarray(d.k1(t), dtype=float) ** 2, d.ell, probe)
    lam = lambda_constant(d.ell, d.K2, d.K3, p.delta, p.eta)
    lam_margin = 1.0 + _LAMBDA_SLACK - lam

    rng = np.random.default_rng(rng_seed)
    witnesses = []
    lip_margin = math.inf
    for _ in range(sample_count):
        t = float(rng.uniform(1e-9, 1.0))
        u = rng.uniform(-5.0, 5.0, 3)
        v = rng.uniform(-5.0, 5.0, 3)
        lhs = abs(_eval_g(p.g, t, u[0], u[1], u[2]) - _eval_g(p.g, t, v[0], v[1], v[2]))
        rhs = (
            float(d.k1(t)) * abs(u[0] - v[0])
            + d.K2 * abs(u[1] - v[1])
            + d.K3 * abs(u[2] - v[2])
        )
        margin = rhs - lhs + 1e-9 * (1.0 + rhs)
        lip_margin = min(lip_margin, margin)
        if margin < 0.0:
            witnesses.append({"t": t, "u": u.tolist(), "v": v.tolist(),
                              "lhs": lhs, "rhs": rhs})
    passed = z_report.passed and lam_margin >= 0.0 and not witnesses
    return HypothesisReport(
        condition="H1 (Lipschitz data with Lambda <= 1)",
        passed=passed,
        constants={
            "C": c_constant(p.delta, p.eta),
            "F": f_constant(p.delta, p.eta),
            "Lambda": lam,
            "ell": d.ell,
            "K2": d.K2,
            "K3": d.K3,
        },
        margins={
            "lambda_margin": lam_margin,
            "lipschitz_margin": lip_margin,
            "z_membership_margin": z_report.margins["worst_tail_margin"],
        },
        witnesses=witnesses + z_report.witnesses,
    )


def check_h2(p: Bvp3Problem, sample_count: int = 200, rng_seed: int = 0) -> HypothesisReport:
    """Certify the growth hypothesis: a1^2 in Z(m), strict inequality
    (2 sqrt(m) + A2) C + A3 < 1, and the sampled growth bound."""
    if p.h2_data is None:
        raise ConfigurationError("check_h2 needs h2_data on the problem")
    d = p.h2_data
    probe = Grid(0.0, 1.0, _DEFAULT_PROBE_CELLS, MIDPOINTS)
    z_report = check_z_membership(lambda t: np.asarray(d.a1(t), dtype=float) ** 2, d.m, probe)
    value = lambda_constant(d.m, d.A2, d.A3, p.delta, p.eta)
    strict_margin = 1.0 - _LAMBDA_SLACK - value

    rng = np.random.default_rng(rng_seed)
    witnesses = []
    growth_margin = math.inf
    for _ in range(sample_count):
        t = float(rng.uniform(1e-9, 1.0))
        u = rng.uniform(-5.0, 5.0, 3)
        lhs = abs(_eval_g(p.g, t, u[0], u[1], u[2]))
        rhs = (
            float(d.a1(t)) * abs(u[0])
            + d.A2 * abs(u[1])
            + d.A3 * abs(u[2])
            + float(d.a4(t))
        )
        margin = rhs - lhs + 1e-9 * (1.0 + rhs)
        growth_margin = min(growth_margin, margin)
        if margin < 0.0:
            witnesses.append({"t": t, "u": u.tolist(), "lhs": lhs, "rhs": rhs})
    passed = z_report.passed and strict_margin >= 0.0 and not witnesses
    return HypothesisReport(
        condition="H2 (growth data with strict bound < 1)",
        passed=passed,
        constants={
            "C": c_constant(p.delta, p.eta),
            "growth_bound": value,
            "m": d.m,
            "A2": d.A2,
            "A3": d.A3,
        },
        margins={
            "strict_margin": strict_margin,
            "growth_margin": growth_margin,
            "z_membership_margin": z_report.margins["worst_tail_margin"],
        },
        witnesses=witnesses + z_report.witnesses,
    )


def snap_eta(grid: Grid, eta: float) -> tuple[int, float, float]:
    """Snap eta to the nearest cell edge so that int_0^eta is an exact
    partial sum.  Returns (edge index, snapped value, snap distance); the
    distance never exceeds half a cell."""
    k = int(round(eta / grid.spacing))
    k = min(max(k, 0), grid.n)
    snapped = k * grid.spacing
    return k, snapped, abs(snapped - eta)


def _require_problem_grid(grid: Grid) -> None:
    if grid.style != MIDPOINTS or (grid.a, grid.b) != (0.0, 1.0):
        raise ConfigurationError("second-derivative iterates live on midpoints grids over [0, 1]")


def apply_T_inverse(y: GridFunction, delta: float, eta: float) -> tuple[GridFunction, GridFunction]:
    """Reconstruct (v, v') with v'' = y, v(0) = 0 and v'(1) = delta v'(eta).

    Uses v(t) = t int_0^t y - int_0^t s y(s) ds + c t with the boundary
    constant c built from exact partial sums at cell edges, so the
    identity v'(1) = delta v'(eta) holds to rounding by construction.
    """
    if delta == 1.0:
        raise DomainError("delta = 1 makes the boundary condition degenerate")
    grid = y.grid
    _require_problem_grid(grid)
    pts = grid.points()
    running = cumulative_integral(y).values
    edges = cell_edge_cumulative(y)
    k, _, _ = snap_eta(grid, eta)
    c = (delta * edges[k] - edges[-1]) / (1.0 - delta)
    running_sy = cumulative_integral(GridFunction(grid, pts * y.values)).values
    v = pts * running - running_sy + c * pts
    v_prime = running + c
    return GridFunction(grid, v), GridFunction(grid, v_prime)


def coincidence_operator(p: Bvp3Problem, grid: Grid, modulus: float | None = None) -> OperatorHandle:
    """The iterated map h(y)(t) = g(t, v(t), v'(t), y(t)) in the L2 norm."""
    _require_problem_grid(grid)
    pts = grid.points()

    def apply(y: GridFunction) -> GridFunction:
        v, v_prime = apply_T_inverse(y, p.delta, p.eta)
        out = np.asarray(p.g(pts, v.values, v_prime.values, y.values), dtype=float)
        if out.ndim == 0:
            out = np.full(pts.shape, float(out))
        if not np.all(np.isfinite(out)):
            bad = pts[~np.isfinite(out)][0]
            raise NumericError(f"g evaluated to a non-finite value at t = {bad}")
        return GridFunction(grid, out)

    return OperatorHandle(apply=apply, norm_kind="l2", modulus=modulus)


def ode_defect(p: Bvp3Problem, y: GridFunction) -> float:
    """L2 norm of the pointwise equation defect y - g(., v, v', y)."""
    return engine.residual(coincidence_operator(p, y.grid), y)


def solve(
    p: Bvp3Problem,
    grid: Grid,
    scheme: str = "auto",
    tol: float = 1e-9,
    max_iter: int = 5000,
    n_schedule: list[int] | None = None,
    inner_tol: float | None = None,
) -> SolveReport:
    """Solve the boundary value problem by fixed-point iteration on y = x''.

    ``auto`` runs Picard with certified modulus Lambda when the Lipschitz
    hypothesis holds with Lambda < 1, and falls back to averaged iteration
    otherwise (including the boundary case Lambda = 1, where existence
    holds but no rate is available).  The report embeds the reconstructed
    u and u' and the certificate that was computed.
    """
    _require_problem_grid(grid)
    certificate = None
    lam = None
    if p.h1_data is not None:
        certificate = check_h1(p)
        lam = certificate.constants["Lambda"]
    certified = certificate is not None and certificate.passed and lam is not None and lam < 1.0 - _LAMBDA_SLACK

    chosen = scheme
    if scheme == "auto":
        chosen = engine.PICARD if certified else engine.AVERAGED
    elif scheme == engine.PICARD and lam is not None and not certified:
        # at Lambda = 1 the map is only nonexpansive; refuse the rate claim
        chosen = engine.AVERAGED

    handle = coincidence_operator(p, grid, modulus=lam if (certified and chosen == engine.PICARD) else None)
    y0 = GridFunction.zeros(grid)
    if chosen == engine.PICARD:
        report = engine.solve_picard(handle, y0, tol, max_iter)
    elif chosen == engine.AVERAGED:
        report = engine.solve_averaged(handle, y0, tol, max_iter)
    elif chosen == engine.RESOLVENT:
        report = engine.solve_resolvent(
            handle, y0,
            n_schedule if n_schedule is not None else engine.default_n_schedule(),
            inner_tol if inner_tol is not None else max(tol, 1e-12),
        )
    else:
        raise ConfigurationError(f"unknown scheme {scheme!r}")

    u, u_prime = apply_T_inverse(report.solution, p.delta, p.eta)
    _, snapped, snap_dist = snap_eta(grid, p.eta)
    report.extras.update({
        "u": u,
        "u_prime": u_prime,
        "certified_modulus": handle.modulus,
        "lambda_constant": lam,
        "scheme_requested": scheme,
        "scheme_used": chosen,
        "eta_snapped_to": snapped,
        "eta_snap_distance": snap_dist,
    })
    if certificate is not None:
        report.extras["hypothesis_check"] = certificate
    return report
