"""Chernoff functions for L = a d^2 + b d + c and their iterates.

A scheme is an operator family t -> C(t) with C(0) = I whose first-order
behaviour at t = 0 matches L. Iterating C(t/n) n times approximates e^{tL}.

The shift and integral schemes evaluate the trigonometric interpolant at
points ``x + t b(x) + sqrt(2 t a(x)) * s`` for a symmetric set of offsets
``s`` with positive weights summing to one, then multiply by e^{t c(x)}.
For a fixed step the whole map is a fixed N x N matrix, so it is built
once per distinct step and cached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .grid import (
    GridFunction,
    SpatialGrid,
    basis_to_sample_operator,
    mode_basis,
    sup_norm,
)
from .operators import ConstantSymbols, OperatorCoefficients, apply_L, multiplier_semigroup

__all__ = [
    "ChernoffScheme",
    "TangencyReport",
    "DEFAULT_HERMITE_ORDER",
    "shift_scheme",
    "integral_scheme",
    "exact_scheme",
    "identity_scheme",
    "gaussian_nodes",
    "chernoff_iterate",
    "verify_tangency",
    "verify_growth_bound",
    "scalar_chernoff",
]

DEFAULT_HERMITE_ORDER = 20


@dataclass(frozen=True)
class ChernoffScheme:
    apply: Callable[[float, GridFunction], GridFunction] = field(repr=False)
    growth_bound_hint: float
    is_symmetric: bool
    label: str

    def __call__(self, t: float, f: GridFunction) -> GridFunction:
        return self.apply(t, f)


def gaussian_nodes(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights integrating polynomials of degree < 2*order
    exactly against the standard normal density; weights sum to 1."""
    s, w = np.polynomial.hermite_e.hermegauss(order)
    return s, w / w.sum()


def _averaging_scheme(
    coeffs: OperatorCoefficients,
    offsets: np.ndarray,
    weights: np.ndarray,
    label: str,
    cache_size: int = 16,
) -> ChernoffScheme:
    grid = coeffs.grid
    x = grid.nodes
    a = coeffs.a.samples.real
    b = coeffs.b.samples.real
    c = coeffs.c.samples.real
    # a = b = 0: every target is a node, interpolation is the identity
    pure_reaction = not (np.any(a) or np.any(b))

    @lru_cache(maxsize=cache_size)
    def step_matrix(t: float) -> np.ndarray:
        center = x + t * b
        spread = np.sqrt(2.0 * t * a)
        basis = np.zeros((grid.n_points, grid.n_points), dtype=complex)
        for s, w in zip(offsets, weights):
            basis += w * mode_basis(grid, center + s * spread)
        return np.exp(t * c)[:, None] * basis_to_sample_operator(basis)

    def apply(t: float, f: GridFunction) -> GridFunction:
        if t < 0:
            raise ValueError("t must be >= 0")
        if f.grid != grid:
            raise ValueError("grid mismatch")
        if t == 0:
            return f
        if pure_reaction:
            return f.with_samples(np.exp(t * c) * f.samples)
        return f.with_samples(step_matrix(float(t)) @ f.samples)

    return ChernoffScheme(
        apply=apply,
        growth_bound_hint=max(0.0, float(c.max())),
        is_symmetric=False,
        label=label,
    )


def shift_scheme(coeffs: OperatorCoefficients) -> ChernoffScheme:
    """(C(t)f)(x) = e^{t c} [f(x + tb + sqrt(2ta)) + f(x + tb - sqrt(2ta))] / 2."""
    coeffs.require_parabolic()
    return _averaging_scheme(coeffs, np.array([1.0, -1.0]), np.array([0.5, 0.5]), "shift")


def integral_scheme(
    coeffs: OperatorCoefficients, hermite_order: int = DEFAULT_HERMITE_ORDER
) -> ChernoffScheme:
    """Gaussian average of f around x + tb with variance 2ta, times e^{tc}.

    The Gaussian expectation is replaced by ``hermite_order``-point
    Gauss-Hermite quadrature, whose weights are positive.
    """
    coeffs.require_parabolic()
    if int(hermite_order) != hermite_order or hermite_order < 2:
        raise ValueError(f"hermite_order must be an integer >= 2, got {hermite_order}")
    s, w = gaussian_nodes(int(hermite_order))
    return _averaging_scheme(coeffs, s, w, f"integral(M={int(hermite_order)})")


def exact_scheme(sym: ConstantSymbols) -> ChernoffScheme:
    """The semigroup itself, used as a control."""

    def apply(t: float, f: GridFunction) -> GridFunction:
        if t == 0:
            return f
        return multiplier_semigroup(sym, t, f)

    symmetric = all(complex(v).imag == 0 for v in (sym.a0, sym.c0)) and complex(sym.b0) == 0
    return ChernoffScheme(
        apply=apply,
        growth_bound_hint=max(0.0, complex(sym.c0).real),
        is_symmetric=symmetric,
        label="exact",
    )


def identity_scheme() -> ChernoffScheme:
    return ChernoffScheme(lambda t, f: f, 0.0, True, "identity")


def chernoff_iterate(scheme: ChernoffScheme, t: float, n: int, u0: GridFunction) -> GridFunction:
    """C(t/n)^n u0."""
    if int(n) != n or n < 1:
        raise ValueError(f"n must be an integer >= 1, got {n}")
    if t < 0:
        raise ValueError("t must be >= 0")
    step = t / n
    u = u0
    for _ in range(int(n)):
        u = scheme.apply(step, u)
    return u


@dataclass(frozen=True)
class TangencyReport:
    order: float
    t_values: np.ndarray
    residuals: np.ndarray
    degenerate: bool

    def table(self) -> list[tuple[float, float]]:
        return [(float(t), float(r)) for t, r in zip(self.t_values, self.residuals)]


def _loglog_slope(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def verify_tangency(
    scheme: ChernoffScheme,
    coeffs: OperatorCoefficients,
    f: GridFunction,
    t_values: Sequence[float],
) -> TangencyReport:
    """Fit p in ||C(t)f - f - t L f||_inf ~ t^p.

    p close to 2 means C'(0) f = L f with an O(t^2) remainder. If the
    residual vanishes (to roundoff) at any t, no order can be fitted and the
    report is flagged degenerate.
    """
    ts = np.asarray(t_values, dtype=float)
    if ts.size < 4:
        raise ValueError("need at least 4 t values")
    if np.any(ts <= 0) or np.any(np.diff(ts) >= 0):
        raise ValueError("t values must be positive and strictly decreasing")
    if ts[0] / ts[-1] < 100:
        raise ValueError("t values must span at least two decades")

    Lf = apply_L(coeffs, f)
    residuals = np.array(
        [sup_norm(scheme.apply(t, f) - f - t * Lf) for t in ts]
    )
    floor = 1e-14 * max(sup_norm(f), sup_norm(Lf), 1e-300)
    if np.any(residuals <= floor):
        return TangencyReport(math.nan, ts, residuals, True)
    return TangencyReport(_loglog_slope(ts, residuals), ts, residuals, False)


def verify_growth_bound(
    scheme: ChernoffScheme,
    trial_fs: Sequence[GridFunction],
    t_values: Sequence[float],
) -> float:
    """Largest observed log(||C(t)f|| / ||f||) / t in sup norm, clamped at 0."""
    if not trial_fs:
        raise ValueError("need at least one trial function")
    w = 0.0
    for f in trial_fs:
        norm = sup_norm(f)
        if norm == 0:
            raise ValueError("trial function has zero norm")
        for t in t_values:
            if t <= 0:
                raise ValueError("t values must be positive")
            ratio = sup_norm(scheme.apply(t, f)) / norm
            if ratio > 0:
                w = max(w, math.log(ratio) / t)
    return w


def scalar_chernoff(l: float, t: float, n: int) -> float:
    """(1 + t l / n)^n, the one-dimensional Chernoff approximation of e^{tl}."""
    if int(n) != n or n < 1:
        raise ValueError("n must be an integer >= 1")
    return (1.0 + t * l / n) ** int(n)
