"""Command-line front end.

    coincidia <check|solve|stability|oracle> --problem NAME
              [--grid-n N] [--tol X] [--max-iter N] [--scheme S]
              [--seed N] [--out DIR] [--config FILE]
              [problem parameters: --kappa --a --q --lf --x0]

Every run writes ``report.json`` (schema-versioned, deterministic for a
fixed config and seed).  Solves additionally write ``solution.csv``;
stability runs write ``table.csv`` plus ``localization.csv`` with the
band data for plotting.  Exit codes: 0 ok, 2 configuration error,
3 certificate/hypothesis failure, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import bvp3, caputo, pendulum, registry
from .engine import SolveReport
from .errors import (
    BracketingError,
    CertificateError,
    ConfigurationError,
    DomainError,
    NumericError,
    RangeError,
)
from .numerics import MIDPOINTS, NODES, Grid, mittag_leffler

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CERTIFICATE = 3
EXIT_NUMERIC = 4

_COMMANDS = ("check", "solve", "stability", "oracle")
_SCHEMES = ("auto", "picard", "averaged", "resolvent")
_PARAM_FLAGS = ("kappa", "a", "q", "lf", "x0")


@dataclass
class RunConfig:
    command: str
    problem: str
    grid_n: int = 1000
    tol: float = 1e-10
    max_iter: int = 5000
    scheme: str = "auto"
    seed: int = 0
    output_dir: str = "."
    params: dict = field(default_factory=dict)
    candidates: str = "table1"

    def validate(self) -> None:
        if self.command not in _COMMANDS:
            raise ConfigurationError(f"unknown command {self.command!r}")
        if self.grid_n < 8:
            raise ConfigurationError(f"grid_n must be at least 8, got {self.grid_n}")
        if not 0.0 < self.tol < 1.0:
            raise ConfigurationError(f"tol must lie in (0, 1), got {self.tol}")
        if self.max_iter < 1:
            raise ConfigurationError("max_iter must be positive")
        if self.scheme not in _SCHEMES:
            raise ConfigurationError(f"unknown scheme {self.scheme!r}")
        unknown = set(self.params) - set(_PARAM_FLAGS)
        if unknown:
            raise ConfigurationError(f"unknown problem parameters {sorted(unknown)}")

    def to_json_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in cls.__dataclass_fields__.values()}  # type: ignore[attr-defined]
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys {sorted(unknown)}")
        if "command" not in data or "problem" not in data:
            raise ConfigurationError("a config needs at least 'command' and 'problem'")
        return cls(**data)


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + f".tmp{os.getpid()}")
    tmp.write_text(text)
    os.replace(tmp, path)


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _write_csv(path: Path, header: list[str], rows: list[list[float]]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    _write_atomic(path, "\n".join(lines) + "\n")


def _write_report(out_dir: Path, payload: dict) -> None:
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    _write_atomic(out_dir / "report.json", json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _solution_csv_rows(kind: str, report: SolveReport) -> tuple[list[str], list[list[float]]]:
    t = report.solution.grid.points()
    y = report.solution.values
    if kind == "caputo":
        return ["t", "u", "y"], [[t[i], y[i], y[i]] for i in range(t.size)]
    u = report.extras["u"].values
    u_prime = report.extras["u_prime"].values
    return ["t", "u", "u_prime", "y"], [[t[i], u[i], u_prime[i], y[i]] for i in range(t.size)]


def _problem_grid(kind: str, problem, grid_n: int) -> Grid:
    if kind == "bvp3":
        return Grid(0.0, 1.0, grid_n, MIDPOINTS)
    if kind == "pendulum":
        return Grid(0.0, 1.0, grid_n, NODES)
    return Grid(0.0, problem.horizon, grid_n, NODES)


def _run_check(config: RunConfig, entry, problem, out_dir: Path) -> int:
    reports = []
    if entry.kind == "bvp3":
        reports.append(bvp3.check_h1(problem, rng_seed=config.seed))
        reports.append(bvp3.check_h2(problem, rng_seed=config.seed))
    elif entry.kind == "caputo":
        reports.append(caputo.contraction_certificate(problem))
    else:
        reports.append(_check_pendulum(problem, config.seed))
    all_pass = all(r.passed for r in reports)
    payload = {
        "command": "check",
        "problem": config.problem,
        "config": config.to_json_dict(),
        "result": {"passed": all_pass, "checks": [r.to_dict() for r in reports]},
    }
    if not all_pass:
        failed = ", ".join(r.condition for r in reports if not r.passed)
        payload["error"] = {
            "type": "HypothesisFailure",
            "message": f"failed checks: {failed}",
            "exit_code": EXIT_CERTIFICATE,
        }
    _write_report(out_dir, payload)
    return EXIT_OK if all_pass else EXIT_CERTIFICATE


def _check_pendulum(problem, seed: int):
    from .reports import HypothesisReport

    rng = np.random.default_rng(seed)
    x = rng.uniform(-5.0, 5.0, 500)
    y = rng.uniform(-5.0, 5.0, 500)
    ax = pendulum._eval_map(problem.A, x)
    ay = pendulum._eval_map(problem.A, y)
    expansive = float(np.min(np.abs(ax - ay) - np.abs(x - y)))
    margins = {"expansiveness_margin": expansive + 1e-9}
    if problem.f_lower is not None:
        lower = np.array([float(problem.f_lower.eval(v)) for v in np.abs(ax - ay)])
        margins["lower_bound_margin"] = float(np.min(np.abs(x - y) - lower)) + 1e-9
    passed = all(m >= 0.0 for m in margins.values())
    return HypothesisReport(
        condition="A2 (expansive nonlinearity with lower comparison bound)",
        passed=passed,
        constants={"probe_pairs": 500},
        margins=margins,
        witnesses=[],
    )


def _run_solve(config: RunConfig, entry, problem, out_dir: Path) -> int:
    grid = _problem_grid(entry.kind, problem, config.grid_n)
    if entry.kind == "bvp3":
        report = bvp3.solve(problem, grid, scheme=config.scheme,
                            tol=config.tol, max_iter=config.max_iter)
    elif entry.kind == "pendulum":
        if config.scheme not in ("auto", "picard"):
            raise ConfigurationError("pendulum solves support only the picard scheme")
        report = pendulum.solve(problem, grid, tol=config.tol, max_iter=config.max_iter)
    else:
        if config.scheme not in ("auto", "picard"):
            raise ConfigurationError("Volterra solves support only the picard scheme")
        report = caputo.solve(problem, grid, tol=config.tol, max_iter=config.max_iter)
    header, rows = _solution_csv_rows(entry.kind, report)
    _write_csv(out_dir / "solution.csv", header, rows)
    _write_report(out_dir, {
        "command": "solve",
        "problem": config.problem,
        "config": config.to_json_dict(),
        "result": report.to_dict(),
    })
    return EXIT_OK


def _run_stability(config: RunConfig, entry, problem, out_dir: Path) -> int:
    if entry.kind != "pendulum":
        raise ConfigurationError("stability tables are defined for the pendulum problem class")
    if config.candidates != "table1":
        raise ConfigurationError(f"unknown candidate set {config.candidates!r}")
    grid = _problem_grid(entry.kind, problem, config.grid_n)
    named = pendulum.table1_candidates(grid)
    solve_report = pendulum.solve(problem, grid, tol=config.tol, max_iter=config.max_iter)
    u_star = solve_report.extras["u"]
    rows = pendulum.stability_table(problem, [(w, w2) for _, w, w2 in named], u_star=u_star)

    table_lines = ["name,epsilon,psi,sup_distance_to_solution"]
    table_lines.extend(
        f"{name},{_fmt(r.epsilon)},{_fmt(r.psi)},{_fmt(r.sup_distance)}"
        for (name, _, _), r in zip(named, rows)
    )
    _write_atomic(out_dir / "table.csv", "\n".join(table_lines) + "\n")
    t = grid.points()
    loc_lines = ["name,t,w,u_star,band"]
    for (name, w, _), row in zip(named, rows):
        for i in range(t.size):
            loc_lines.append(
                f"{name},{_fmt(t[i])},{_fmt(w.values[i])},{_fmt(u_star.values[i])},{_fmt(row.psi)}"
            )
    _write_atomic(out_dir / "localization.csv", "\n".join(loc_lines) + "\n")

    _write_report(out_dir, {
        "command": "stability",
        "problem": config.problem,
        "config": config.to_json_dict(),
        "result": {
            "rows": [
                {"name": name, "epsilon": r.epsilon, "psi": r.psi,
                 "sup_distance_to_solution": r.sup_distance,
                 "localized": r.sup_distance <= r.psi}
                for (name, _, _), r in zip(named, rows)
            ],
            "solver": solve_report.to_dict(),
        },
    })
    return EXIT_OK


def _run_oracle(config: RunConfig, entry, problem, out_dir: Path) -> int:
    """Compare a solve against an independent reference for this problem."""
    grid = _problem_grid(entry.kind, problem, config.grid_n)
    result: dict = {"problem": config.problem}
    if config.problem == "caputo-constant":
        report = caputo.solve(problem, grid, tol=config.tol, max_iter=config.max_iter)
        t = grid.points()
        q = problem.q
        exact = problem.x0 + t ** q / math.gamma(q + 1.0)
        err = float(np.max(np.abs(report.solution.values - exact)))
        result.update({"reference": "closed form x0 + t^q/Gamma(q+1)",
                       "max_error": err, "tolerance": 1e-8, "ok": err <= 1e-8})
    elif config.problem == "caputo-linear":
        report = caputo.solve(problem, grid, tol=config.tol, max_iter=config.max_iter)
        t = grid.points()
        exact = np.array([problem.x0 * mittag_leffler(problem.q, ti ** problem.q, 1e-14)
                          for ti in t])
        err = float(np.max(np.abs(report.solution.values - exact)))
        tol = 5e-4 if config.grid_n >= 1024 else None
        result.update({"reference": "Mittag-Leffler series x0 E_q(t^q)",
                       "max_error": err, "tolerance": tol,
                       "ok": err <= tol if tol is not None else True})
    elif config.problem == "caputo-nonlocal":
        report = caputo.solve(problem, grid, tol=config.tol, max_iter=config.max_iter)
        exact = 2.0 * problem.x0
        err = float(np.max(np.abs(report.solution.values - exact)))
        result.update({"reference": "scalar fixed point 2 x0",
                       "max_error": err, "tolerance": 10.0 * config.tol,
                       "ok": err <= 10.0 * config.tol})
    elif entry.kind == "pendulum":
        coarse_n = config.grid_n // 2
        if coarse_n % 2 or coarse_n < 8:
            raise ConfigurationError("oracle refinement needs grid_n divisible by 4 and >= 16")
        fine = pendulum.solve(problem, grid, tol=config.tol, max_iter=config.max_iter)
        coarse = pendulum.solve(problem, Grid(0.0, 1.0, coarse_n, NODES),
                                tol=config.tol, max_iter=config.max_iter)
        diff = float(np.max(np.abs(
            fine.extras["u"].values[::2] - coarse.extras["u"].values
        )))
        result.update({"reference": f"cross-grid refinement n={coarse_n} vs n={config.grid_n}",
                       "max_error": diff, "tolerance": 1e-5, "ok": diff <= 1e-5})
        report = fine
    else:
        report = bvp3.solve(problem, grid, scheme=config.scheme,
                            tol=config.tol, max_iter=config.max_iter)
        defect = bvp3.ode_defect(problem, report.solution)
        result.update({"reference": "pointwise equation defect of the returned iterate",
                       "max_error": defect, "tolerance": 10.0 * config.tol,
                       "ok": defect <= 10.0 * config.tol})
    payload = {
        "command": "oracle",
        "problem": config.problem,
        "config": config.to_json_dict(),
        "result": result,
    }
    if not result["ok"]:
        payload["error"] = {
            "type": "OracleMismatch",
            "message": f"max error {result['max_error']:.6g} exceeds "
                       f"tolerance {result['tolerance']:.6g}",
            "exit_code": EXIT_NUMERIC,
        }
    _write_report(out_dir, payload)
    return EXIT_OK if result["ok"] else EXIT_NUMERIC


def run(config: RunConfig) -> int:
    """Execute one configured run, writing report/data files to the output
    directory and returning the process exit status."""
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def fail(exc: Exception, code: int) -> int:
        _write_report(out_dir, {
            "command": config.command,
            "problem": config.problem,
            "config": config.to_json_dict(),
            "error": {"type": type(exc).__name__, "message": str(exc), "exit_code": code},
        })
        print(f"error: {exc}", file=sys.stderr)
        return code

    try:
        config.validate()
        entry = registry.REGISTRY.get(config.problem)
        if entry is None:
            raise ConfigurationError(
                f"unknown problem {config.problem!r}; available: {sorted(registry.REGISTRY)}"
            )
        problem = entry.make(**config.params)
        if config.command == "check":
            return _run_check(config, entry, problem, out_dir)
        if config.command == "solve":
            return _run_solve(config, entry, problem, out_dir)
        if config.command == "stability":
            return _run_stability(config, entry, problem, out_dir)
        return _run_oracle(config, entry, problem, out_dir)
    except (ConfigurationError, DomainError) as exc:
        return fail(exc, EXIT_CONFIG)
    except CertificateError as exc:
        return fail(exc, EXIT_CERTIFICATE)
    except (NumericError, BracketingError, RangeError) as exc:
        return fail(exc, EXIT_NUMERIC)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coincidia",
        description="coincidence-problem solvers with Ulam-Hyers stability certificates",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command in _COMMANDS:
        p = sub.add_parser(command, argument_default=argparse.SUPPRESS)
        p.add_argument("--problem", help="registry name, e.g. pendulum-Pa")
        p.add_argument("--config", help="JSON config file (flags override its values)")
        p.add_argument("--grid-n", dest="grid_n", type=int)
        p.add_argument("--tol", type=float)
        p.add_argument("--max-iter", dest="max_iter", type=int)
        p.add_argument("--scheme", choices=_SCHEMES)
        p.add_argument("--seed", type=int)
        p.add_argument("--out", dest="output_dir")
        if command == "stability":
            p.add_argument("--builtin-candidates", dest="candidates", choices=["table1"])
        for flag in _PARAM_FLAGS:
            p.add_argument(f"--{flag}", type=float)
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        ns = vars(_build_parser().parse_args(argv))
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    command = ns.pop("command")
    data: dict = {"command": command}
    config_path = ns.pop("config", None)
    if config_path is not None:
        try:
            loaded = json.loads(Path(config_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read config {config_path}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        data.update(loaded)
        data["command"] = command
    params = dict(data.get("params", {}))
    for flag in _PARAM_FLAGS:
        if flag in ns:
            params[flag] = ns.pop(flag)
    data.update(ns)
    data["params"] = params
    if "problem" not in data:
        print("error: --problem is required (or supply it in --config)", file=sys.stderr)
        return EXIT_CONFIG
    try:
        config = RunConfig.from_json_dict(data)
    except (ConfigurationError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(config)


def console_main() -> None:
    sys.exit(main())
