"""Run configuration: JSON document validated into a :class:`RunConfig`.

Unknown keys are rejected. Every error names the offending field as a dotted
path (``grid.period``), both for schema violations and for the cross-field
checks applied after schema validation.
"""

from __future__ import annotations

import json
import math
from typing import Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .expr import ExpressionError, compile_expression
from .rates import DEFAULT_LADDER

__all__ = [
    "COMMANDS",
    "ConfigError",
    "RunConfig",
    "parse_config",
    "apply_overrides",
]

COMMANDS = ("evolve", "schrodinger", "tangency", "rate", "resolvent", "scalar")

FunctionSpec = Union[str, float, list[float]]


class ConfigError(ValueError):
    def __init__(self, errors: list[tuple[str, str]]):
        self.errors = errors
        super().__init__("; ".join(f"{field}: {msg}" for field, msg in errors))


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


def _check_function_spec(v: FunctionSpec) -> FunctionSpec:
    if isinstance(v, str):
        try:
            compile_expression(v)
        except ExpressionError as exc:
            raise ValueError(str(exc)) from None
    elif isinstance(v, list):
        if not all(math.isfinite(s) for s in v):
            raise ValueError("sample arrays must be finite")
    elif not math.isfinite(v):
        raise ValueError("constant must be finite")
    return v


class GridSpec(_Strict):
    x0: float = 0.0
    period: float = 2.0 * math.pi
    n_points: int = 128

    @field_validator("period")
    @classmethod
    def _period(cls, v: float) -> float:
        if not (math.isfinite(v) and v > 0):
            raise ValueError("period must be positive")
        return v

    @field_validator("n_points")
    @classmethod
    def _n_points(cls, v: int) -> int:
        if v < 4:
            raise ValueError("n_points must be >= 4")
        return v


class CoefficientSpec(_Strict):
    a: FunctionSpec = "1"
    b: FunctionSpec = "0"
    c: FunctionSpec = "0"

    @field_validator("a", "b", "c")
    @classmethod
    def _function(cls, v: FunctionSpec) -> FunctionSpec:
        return _check_function_spec(v)


class SchemeSpec(_Strict):
    kind: Literal["shift", "integral", "exact"] = "shift"
    hermite_order: int = Field(20, ge=2)


class QuadratureSpec(_Strict):
    t_max: Optional[float] = Field(None, gt=0)
    panels: int = Field(16, ge=1)
    nodes_per_panel: int = Field(8, ge=1)


class RunConfig(_Strict):
    command: Literal[COMMANDS]
    grid: GridSpec = GridSpec()
    coefficients: CoefficientSpec = CoefficientSpec()
    potential: FunctionSpec = "0"
    initial: FunctionSpec = "cos(x)"
    rhs: FunctionSpec = "cos(x)"
    scheme: SchemeSpec = SchemeSpec()
    t: float = Field(1.0, ge=0)
    n: int = Field(256, ge=1)
    ns: list[int] = Field(default_factory=lambda: list(DEFAULT_LADDER))
    t_values: list[float] = Field(default_factory=lambda: [1e-1, 3e-2, 1e-2, 3e-3, 1e-3])
    a: float = 1.0
    tol: float = Field(1e-12, gt=0)
    max_terms: int = Field(200, ge=1)
    norm_drift_tol: float = Field(1e-6, gt=0)
    lam: tuple[float, float] = Field((2.0, 0.0), alias="lambda")
    quadrature: QuadratureSpec = QuadratureSpec()
    l: float = 1.0
    output_dir: str = "out"
    norm_kind: Literal["sup", "l2"] = "sup"
    oracle: Literal["auto", "multiplier", "matrix", "none"] = "auto"
    threads: Optional[int] = Field(None, ge=1)

    @field_validator("potential", "initial", "rhs")
    @classmethod
    def _function(cls, v: FunctionSpec) -> FunctionSpec:
        return _check_function_spec(v)

    @field_validator("lam", mode="before")
    @classmethod
    def _lam(cls, v: Any):
        if isinstance(v, str):
            parts = v.split(",")
            if len(parts) == 1:
                parts.append("0")
            if len(parts) != 2:
                raise ValueError("lambda must be 're,im'")
            try:
                return (float(parts[0]), float(parts[1]))
            except ValueError:
                raise ValueError("lambda must be 're,im'") from None
        if isinstance(v, (int, float)):
            return (float(v), 0.0)
        return v

    @field_validator("ns")
    @classmethod
    def _ns(cls, v: list[int]) -> list[int]:
        if not v:
            raise ValueError("ns must be nonempty")
        if v[0] < 1 or any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("ns must be positive and strictly increasing")
        return v

    @property
    def lambda_(self) -> complex:
        return complex(*self.lam)


def _cross_field_errors(cfg: RunConfig) -> list[tuple[str, str]]:
    errors: list[tuple[str, str]] = []
    n = cfg.grid.n_points

    def check_array(field: str, v: FunctionSpec) -> None:
        if isinstance(v, list) and len(v) != n:
            errors.append((field, f"expected {n} samples, got {len(v)}"))

    for name in "abc":
        check_array(f"coefficients.{name}", getattr(cfg.coefficients, name))
    for name in ("potential", "initial", "rhs"):
        check_array(name, getattr(cfg, name))

    if cfg.command == "schrodinger" and cfg.a == 0:
        errors.append(("a", "must be nonzero"))
    if cfg.command == "tangency":
        ts = cfg.t_values
        if len(ts) < 4:
            errors.append(("t_values", "need at least 4 values"))
        elif any(t <= 0 for t in ts) or any(b >= a for a, b in zip(ts, ts[1:])):
            errors.append(("t_values", "must be positive and strictly decreasing"))
        elif ts[0] / ts[-1] < 100:
            errors.append(("t_values", "must span at least two decades"))
    return errors


def _set_dotted(doc: dict, path: str, value: Any) -> None:
    keys = path.split(".")
    node = doc
    for k in keys[:-1]:
        child = node.get(k)
        if not isinstance(child, dict):
            child = {}
            node[k] = child
        node = child
    node[keys[-1]] = value


def apply_overrides(doc: dict, overrides: dict[str, str]) -> dict:
    """Set ``--key=value`` overrides; values are JSON where they parse as JSON."""
    for path, raw in overrides.items():
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        _set_dotted(doc, path, value)
    return doc


def parse_config(
    text: str,
    command: Optional[str] = None,
    overrides: Optional[dict[str, str]] = None,
) -> RunConfig:
    """Validate a JSON config; raises :class:`ConfigError` listing field errors."""
    try:
        doc = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError([("<json>", f"malformed JSON: {exc.msg} at line {exc.lineno}")]) from None
    if not isinstance(doc, dict):
        raise ConfigError([("<json>", "top level must be an object")])
    if overrides:
        apply_overrides(doc, overrides)
    if command is not None:
        if "command" in doc and doc["command"] != command:
            raise ConfigError([("command", f"config says {doc['command']!r}, CLI says {command!r}")])
        doc["command"] = command
    try:
        cfg = RunConfig.model_validate(doc)
    except ValidationError as exc:
        raise ConfigError(
            [(".".join(str(p) for p in e["loc"]) or "<root>", e["msg"]) for e in exc.errors()]
        ) from None
    errors = _cross_field_errors(cfg)
    if errors:
        raise ConfigError(errors)
    return cfg
