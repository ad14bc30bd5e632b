"""Empirical convergence rates of Chernoff approximations.

Everything here is measurement on a finite ladder of n; a fitted order or a
subspace verdict suggests asymptotic behaviour but never proves it.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .chernoff import ChernoffScheme, chernoff_iterate
from .grid import GridFunction, l2_norm, sup_norm

__all__ = [
    "ErrorCurve",
    "RateReport",
    "SubspaceVerdict",
    "DEFAULT_LADDER",
    "FLOOR_FACTOR",
    "error_curve",
    "fit_order",
    "classify_rate",
    "subspace_test",
    "rate_csv",
    "rate_summary_json",
]

DEFAULT_LADDER = (8, 16, 32, 64, 128, 256, 512, 1024)
FLOOR_FACTOR = 1e-11
MIN_FIT_POINTS = 4

STANDARD, FAST, SUPERFAST, FLOOR_LIMITED, SLOW = (
    "standard",
    "fast",
    "superfast-candidate",
    "floor-limited",
    "slow",
)

_NORMS = {"sup": sup_norm, "l2": l2_norm}


@dataclass(frozen=True)
class ErrorCurve:
    t: float
    ns: np.ndarray
    errors: np.ndarray
    norm_kind: str = "sup"
    reference_norm: float = 1.0

    def __post_init__(self) -> None:
        ns = np.asarray(self.ns, dtype=int)
        errors = np.asarray(self.errors, dtype=float)
        if ns.shape != errors.shape or ns.ndim != 1:
            raise ValueError("ns and errors must be 1-d sequences of equal length")
        if ns.size and (np.any(np.diff(ns) <= 0) or ns[0] < 1):
            raise ValueError("ns must be positive and strictly increasing")
        if not np.all(np.isfinite(errors)) or np.any(errors < 0):
            raise ValueError("errors must be finite and nonnegative")
        if self.norm_kind not in _NORMS:
            raise ValueError(f"norm_kind must be one of {sorted(_NORMS)}")
        object.__setattr__(self, "ns", ns)
        object.__setattr__(self, "errors", errors)

    @property
    def floor(self) -> float:
        return FLOOR_FACTOR * self.reference_norm

    @property
    def above_floor(self) -> np.ndarray:
        return self.errors > self.floor


@dataclass(frozen=True)
class RateReport:
    curve: ErrorCurve
    fitted_order: float
    fit_quality: float
    classification: str
    intercept: float = float("nan")

    def summary(self) -> dict:
        return {
            "order": _json_float(self.fitted_order),
            "quality": _json_float(self.fit_quality),
            "classification": self.classification,
        }


@dataclass(frozen=True)
class SubspaceVerdict:
    ratios: np.ndarray
    usable: np.ndarray
    consistent: bool
    note: str = "empirical trend only; not a proof of membership"


def _json_float(v: float):
    return None if not np.isfinite(v) else float(v)


def error_curve(
    scheme: ChernoffScheme,
    reference: Callable[[float, GridFunction], GridFunction],
    t: float,
    ns: Sequence[int],
    u0: GridFunction,
    norm_kind: str = "sup",
) -> ErrorCurve:
    """E_n = ||reference(t, u0) - C(t/n)^n u0|| over the ladder ``ns``."""
    if len(ns) == 0:
        raise ValueError("ns must be nonempty")
    norm = _NORMS[norm_kind]
    exact = reference(t, u0)
    errors = [norm(exact - chernoff_iterate(scheme, t, n, u0)) for n in ns]
    return ErrorCurve(t, np.asarray(ns), np.asarray(errors), norm_kind, norm(u0))


def classify_rate(report: RateReport) -> str:
    """Map a fitted order and floor flags to a label.

    Total over all inputs: fewer than 4 usable points is floor-limited, an
    order below 0.5 is reported as slow.
    """
    order = report.fitted_order
    if not np.isfinite(order):
        return FLOOR_LIMITED
    if order > 3 and not np.all(report.curve.above_floor):
        return SUPERFAST
    if order > 1.15:
        return FAST
    if order >= 0.5:
        return STANDARD
    return SLOW


def fit_order(curve: ErrorCurve) -> RateReport:
    """Least-squares slope of log E_n against log n over above-floor points."""
    mask = curve.above_floor
    if mask.sum() < MIN_FIT_POINTS:
        return RateReport(curve, float("nan"), float("nan"), FLOOR_LIMITED)
    x = np.log(curve.ns[mask].astype(float))
    y = np.log(curve.errors[mask])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    if ss_tot <= 1e-24:
        quality = 1.0 if ss_res <= 1e-24 else 0.0
    else:
        quality = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    report = RateReport(curve, -float(slope), quality, "", float(intercept))
    return replace(report, classification=classify_rate(report))


def subspace_test(curve: ErrorCurve, comparison: Sequence[float]) -> SubspaceVerdict:
    """Does E_n / a_n appear to tend to zero on this ladder?"""
    a = np.asarray(comparison, dtype=float)
    if a.shape != curve.errors.shape:
        raise ValueError("comparison sequence must match the ladder length")
    if np.any(a <= 0):
        raise ValueError("comparison sequence must be positive")
    ratios = curve.errors / a
    usable = curve.above_floor
    r = ratios[usable]
    consistent = bool(
        r.size >= 3 and r[-1] < 0.5 * r[0] and np.all(np.diff(r[-3:]) <= 0)
    )
    return SubspaceVerdict(ratios, usable, consistent)


def rate_csv(curve: ErrorCurve) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n", "error"])
    for n, e in zip(curve.ns, curve.errors):
        writer.writerow([int(n), f"{e:.17g}"])
    return buf.getvalue()


def rate_summary_json(report: RateReport) -> str:
    return json.dumps(report.summary(), indent=2, sort_keys=True)
