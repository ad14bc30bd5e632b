"""``semikit <command> --config path.json [--key=value ...]``.

Exit status: 0 success, 1 configuration or precondition error, 2 numerical
contract violation. ``summary.json`` is written on every path; wall-clock
timestamps go to ``run.log`` so that the other artifacts are byte-stable.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import platform
import sys
import time
from contextlib import nullcontext
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import __version__
from .chernoff import (
    ChernoffScheme,
    chernoff_iterate,
    exact_scheme,
    integral_scheme,
    scalar_chernoff,
    shift_scheme,
    verify_growth_bound,
    verify_tangency,
)
from .config import COMMANDS, ConfigError, FunctionSpec, RunConfig, apply_overrides, parse_config
from .expr import compile_expression
from .grid import GridFunction, SpatialGrid, l2_norm, make_grid, sample, sup_norm, to_csv
from .operators import (
    MAX_DENSE_POINTS,
    OperatorCoefficients,
    multiplier_semigroup,
    oracle_evolve,
)
from .plot import emit_plot
from .quasifeynman import (
    SeriesNotConverged,
    hamiltonian_coefficients,
    remizov_exponential,
    strang_heat_potential_scheme,
)
from .rates import ErrorCurve, error_curve, fit_order, rate_csv
from .resolvent import ResolventRequest, elliptic_residual, fourier_resolvent, resolvent_solve

__all__ = ["ContractViolation", "run", "main"]

# N above which the schrodinger command skips its dense reference
_SCHRODINGER_ORACLE_MAX = 512


class ContractViolation(RuntimeError):
    """A computed quantity broke a numerical guarantee."""


def _function(grid: SpatialGrid, spec: FunctionSpec) -> GridFunction:
    if isinstance(spec, str):
        return sample(grid, compile_expression(spec))
    if isinstance(spec, list):
        return GridFunction(grid, np.asarray(spec, dtype=float))
    return GridFunction(grid, np.full(grid.n_points, float(spec)))


def _coefficients(cfg: RunConfig, grid: SpatialGrid) -> OperatorCoefficients:
    spec = cfg.coefficients
    return OperatorCoefficients(
        _function(grid, spec.a), _function(grid, spec.b), _function(grid, spec.c)
    )


def _scheme(cfg: RunConfig, coeffs: OperatorCoefficients) -> ChernoffScheme:
    kind = cfg.scheme.kind
    try:
        if kind == "shift":
            return shift_scheme(coeffs)
        if kind == "integral":
            return integral_scheme(coeffs, cfg.scheme.hermite_order)
    except ValueError as exc:
        raise ConfigError([("coefficients.a", str(exc))]) from None
    if not coeffs.is_constant():
        raise ConfigError([("scheme.kind", "exact requires constant coefficients")])
    return exact_scheme(coeffs.symbols())


def _reference(
    cfg: RunConfig, coeffs: OperatorCoefficients
) -> Optional[tuple[str, Callable[[float, GridFunction], GridFunction]]]:
    choice = cfg.oracle
    if choice == "none":
        return None
    if choice == "multiplier" or (choice == "auto" and coeffs.is_constant()):
        if not coeffs.is_constant():
            raise ConfigError([("oracle", "multiplier oracle requires constant coefficients")])
        sym = coeffs.symbols()
        return "multiplier", lambda t, u: multiplier_semigroup(sym, t, u)
    if coeffs.grid.n_points > MAX_DENSE_POINTS:
        if choice == "matrix":
            raise ConfigError([("grid.n_points", f"dense oracle needs N <= {MAX_DENSE_POINTS}")])
        return None
    return "matrix", lambda t, u: oracle_evolve(coeffs, t, u)


def _write(out: Path, name: str, text: str) -> None:
    (out / name).write_text(text)


def _run_evolve(cfg: RunConfig, grid: SpatialGrid, out: Path) -> dict:
    coeffs = _coefficients(cfg, grid)
    scheme = _scheme(cfg, coeffs)
    u0 = _function(grid, cfg.initial)
    u = chernoff_iterate(scheme, cfg.t, cfg.n, u0)
    _write(out, "solution.csv", to_csv(u))
    results = {"scheme": scheme.label, "t": cfg.t, "n": cfg.n}
    ref = _reference(cfg, coeffs)
    if ref is not None:
        name, oracle = ref
        exact = oracle(cfg.t, u0)
        results.update(
            oracle=name, sup_error=sup_norm(u - exact), l2_error=l2_norm(u - exact)
        )
    return results


def _run_rate(cfg: RunConfig, grid: SpatialGrid, out: Path) -> dict:
    coeffs = _coefficients(cfg, grid)
    scheme = _scheme(cfg, coeffs)
    ref = _reference(cfg, coeffs)
    if ref is None:
        raise ConfigError([("oracle", "rate study needs a reference oracle")])
    u0 = _function(grid, cfg.initial)
    curve = error_curve(scheme, ref[1], cfg.t, cfg.ns, u0, cfg.norm_kind)
    report = fit_order(curve)
    _write(out, "rate.csv", rate_csv(curve))
    emit_plot(curve, out / "plot.svg")
    return {"scheme": scheme.label, "oracle": ref[0], "floor": curve.floor, **report.summary()}


def _run_tangency(cfg: RunConfig, grid: SpatialGrid, out: Path) -> dict:
    coeffs = _coefficients(cfg, grid)
    scheme = _scheme(cfg, coeffs)
    f = _function(grid, cfg.initial)
    report = verify_tangency(scheme, coeffs, f, cfg.t_values)
    lines = ["t,residual"] + [f"{t:.17g},{r:.17g}" for t, r in report.table()]
    _write(out, "tangency.csv", "\n".join(lines) + "\n")
    trials = [f, sample(grid, np.cos), sample(grid, lambda x: np.exp(np.cos(x)))]
    w_est = verify_growth_bound(scheme, trials, [t for t in cfg.t_values if t <= 1])
    results = {
        "scheme": scheme.label,
        "order": None if report.degenerate else report.order,
        "degenerate": report.degenerate,
        "growth_bound_estimate": w_est,
        "growth_bound_hint": scheme.growth_bound_hint,
    }
    if w_est > scheme.growth_bound_hint + 0.1:
        raise ContractViolation(
            f"growth bound estimate {w_est:.6g} exceeds declared {scheme.growth_bound_hint:.6g} + 0.1",
            results,
        )
    return results


def _run_schrodinger(cfg: RunConfig, grid: SpatialGrid, out: Path) -> dict:
    V = _function(grid, cfg.potential)
    S = strang_heat_potential_scheme(V)
    u0 = _function(grid, cfg.initial)
    norm0 = l2_norm(u0)
    if norm0 == 0:
        raise ConfigError([("initial", "initial state has zero norm")])
    step = cfg.t / cfg.n
    u = u0
    log = ["step,l2_norm,drift"]
    try:
        for k in range(1, cfg.n + 1):
            u = remizov_exponential(S, step, cfg.a, u, cfg.tol, cfg.max_terms)
            norm = l2_norm(u)
            log.append(f"{k},{norm:.17g},{abs(norm - norm0) / norm0:.17g}")
    finally:
        _write(out, "norm_drift.csv", "\n".join(log) + "\n")
    _write(out, "solution.csv", to_csv(u))
    drift = abs(l2_norm(u) - norm0) / norm0
    results = {"a": cfg.a, "t": cfg.t, "n": cfg.n, "tol": cfg.tol, "norm_drift": drift}
    if cfg.oracle != "none" and grid.n_points <= _SCHRODINGER_ORACLE_MAX:
        exact = oracle_evolve(hamiltonian_coefficients(V), cfg.t, u0, prefactor=-1j * cfg.a)
        results["l2_error"] = l2_norm(u - exact)
    if drift > cfg.norm_drift_tol:
        raise ContractViolation(
            f"norm drift {drift:.3e} exceeds {cfg.norm_drift_tol:.3e}", results
        )
    return results


def _run_resolvent(cfg: RunConfig, grid: SpatialGrid, out: Path) -> dict:
    coeffs = _coefficients(cfg, grid)
    scheme = _scheme(cfg, coeffs)
    g = _function(grid, cfg.rhs)
    q = cfg.quadrature
    req = ResolventRequest(cfg.lambda_, g, cfg.n, q.t_max, q.panels, q.nodes_per_panel)
    try:
        f = resolvent_solve(scheme, req)
    except ValueError as exc:
        raise ConfigError([("lambda", str(exc))]) from None
    _write(out, "solution.csv", to_csv(f))
    results = {
        "scheme": scheme.label,
        "lambda": [cfg.lambda_.real, cfg.lambda_.imag],
        "residual": elliptic_residual(coeffs, cfg.lambda_, f, g),
    }
    if coeffs.is_constant():
        exact = fourier_resolvent(coeffs.symbols(), cfg.lambda_, g)
        results["reference_error"] = l2_norm(f - exact)
    return results


def _run_scalar(cfg: RunConfig, grid: SpatialGrid, out: Path) -> dict:
    limit = math.exp(cfg.t * cfg.l)
    values = [scalar_chernoff(cfg.l, cfg.t, n) for n in cfg.ns]
    errors = [abs(v - limit) for v in values]
    lines = ["n,value"] + [f"{n},{v:.17g}" for n, v in zip(cfg.ns, values)]
    _write(out, "scalar.csv", "\n".join(lines) + "\n")
    curve = ErrorCurve(cfg.t, np.asarray(cfg.ns), np.asarray(errors), "sup", abs(limit))
    _write(out, "rate.csv", rate_csv(curve))
    emit_plot(curve, out / "plot.svg")
    return {"limit": limit, "final_value": values[-1], "final_error": errors[-1], **fit_order(curve).summary()}


_DISPATCH = {
    "evolve": _run_evolve,
    "rate": _run_rate,
    "tangency": _run_tangency,
    "schrodinger": _run_schrodinger,
    "resolvent": _run_resolvent,
    "scalar": _run_scalar,
}


def _versions() -> dict:
    return {
        "semikit": __version__,
        "numpy": np.__version__,
        "python": platform.python_version(),
    }


def _write_summary(out: Path, summary: dict) -> None:
    out.mkdir(parents=True, exist_ok=True)
    text = json.dumps(summary, indent=2, sort_keys=True, allow_nan=False, default=str)
    (out / "summary.json").write_text(text + "\n")


def _thread_limit(cfg: RunConfig):
    threads = cfg.threads
    if threads is None and os.environ.get("SEMIKIT_THREADS"):
        threads = int(os.environ["SEMIKIT_THREADS"])
    if threads is None:
        return nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=threads)


def _clean(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


def run(cfg: RunConfig) -> int:
    """Execute a validated config; returns the exit status."""
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = {
        "command": cfg.command,
        "inputs": cfg.model_dump(mode="json", by_alias=True),
        "versions": _versions(),
        "status": "ok",
        "error": None,
        "results": {},
    }
    started = time.time()
    status = 0
    try:
        with _thread_limit(cfg):
            grid = make_grid(cfg.grid.x0, cfg.grid.period, cfg.grid.n_points)
            summary["results"] = _DISPATCH[cfg.command](cfg, grid, out)
    except ConfigError as exc:
        status, summary["status"], summary["error"] = 1, "config_error", str(exc)
        summary["field_errors"] = [{"field": f, "message": m} for f, m in exc.errors]
    except ContractViolation as exc:
        status, summary["status"], summary["error"] = 2, "contract_violation", exc.args[0]
        if len(exc.args) > 1:
            summary["results"] = exc.args[1]
    except SeriesNotConverged as exc:
        status, summary["status"], summary["error"] = 2, "contract_violation", str(exc)
    except ValueError as exc:
        # precondition of a core operation, e.g. a non-finite sampled value
        status, summary["status"], summary["error"] = 1, "config_error", str(exc)
    summary["exit_code"] = status
    _write_summary(out, _clean(summary))
    with open(out / "run.log", "a") as log:
        log.write(
            f"{time.strftime('%Y-%m-%dT%H:%M:%S')} command={cfg.command} "
            f"status={status} elapsed={time.time() - started:.3f}s\n"
        )
    return status


def _split_overrides(extra: list[str]) -> dict[str, str]:
    overrides = {}
    for item in extra:
        if not item.startswith("--") or "=" not in item:
            raise ConfigError([(item, "overrides must look like --key=value")])
        key, value = item[2:].split("=", 1)
        overrides[key] = value
    return overrides


def _fallback_output_dir(text: str, overrides: dict[str, str]) -> Path:
    if "output_dir" in overrides:
        return Path(overrides["output_dir"])
    try:
        doc = json.loads(text)
        if isinstance(doc, dict) and isinstance(doc.get("output_dir"), str):
            return Path(doc["output_dir"])
    except (json.JSONDecodeError, TypeError):
        pass
    return Path("out")


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="semikit",
        description="Chernoff approximations of operator semigroups.",
        epilog="Any other --dotted.key=value overrides the matching config entry.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="JSON config file (optional; defaults apply)")
    args, extra = parser.parse_known_args(argv)

    text = ""
    overrides: dict[str, str] = {}
    try:
        overrides = _split_overrides(extra)
        if args.config:
            text = Path(args.config).read_text()
        cfg = parse_config(text, args.command, overrides)
    except (ConfigError, OSError) as exc:
        errors = exc.errors if isinstance(exc, ConfigError) else [("--config", str(exc))]
        print(f"semikit: configuration error: {exc}", file=sys.stderr)
        doc: dict = {}
        try:
            doc = apply_overrides(json.loads(text) if text.strip() else {}, overrides)
        except (json.JSONDecodeError, AttributeError, TypeError):
            pass
        _write_summary(
            _fallback_output_dir(text, overrides),
            {
                "command": args.command,
                "inputs": doc if isinstance(doc, dict) else {},
                "versions": _versions(),
                "status": "config_error",
                "error": str(exc),
                "field_errors": [{"field": f, "message": m} for f, m in errors],
                "results": {},
                "exit_code": 1,
            },
        )
        return 1

    status = run(cfg)
    summary = json.loads((Path(cfg.output_dir) / "summary.json").read_text())
    if status:
        print(f"semikit: {summary['status']}: {summary['error']}", file=sys.stderr)
    else:
        print(json.dumps(summary["results"], indent=2, sort_keys=True))
    return status


if __name__ == "__main__":
    sys.exit(main())
