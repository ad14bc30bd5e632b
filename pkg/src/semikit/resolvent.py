"""Elliptic problems (lambda - L) f = g through the Laplace transform.

f = int_0^inf e^{-lambda t} e^{tL} g dt, with e^{tL} g replaced by its
Chernoff approximation C(t/n)^n g and the integral truncated at t_max and
evaluated by composite Gauss-Legendre quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .chernoff import ChernoffScheme, chernoff_iterate
from .grid import GridFunction, dft, idft, l2_norm
from .operators import ConstantSymbols, OperatorCoefficients, apply_L

__all__ = [
    "ResolventRequest",
    "TRUNCATION_TOL",
    "default_t_max",
    "composite_gauss_legendre",
    "resolvent_solve",
    "elliptic_residual",
    "fourier_resolvent",
]

TRUNCATION_TOL = 1e-10


@dataclass(frozen=True)
class ResolventRequest:
    lam: complex
    g: GridFunction
    n: int = 64
    t_max: Optional[float] = None
    panels: int = 16
    nodes_per_panel: int = 8

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.panels < 1 or self.nodes_per_panel < 1:
            raise ValueError("panels and nodes_per_panel must be >= 1")
        if self.t_max is not None and not self.t_max > 0:
            raise ValueError("t_max must be positive")


def default_t_max(lam: complex, w: float) -> float:
    """Smallest t_max with e^{-(Re lam - w) t_max} <= 1e-10."""
    return math.log(1.0 / TRUNCATION_TOL) / (complex(lam).real - w)


def composite_gauss_legendre(t_max: float, panels: int, nodes_per_panel: int):
    """Nodes (ascending) and weights on [0, t_max]."""
    x, w = np.polynomial.legendre.leggauss(nodes_per_panel)
    h = t_max / panels
    left = np.arange(panels) * h
    nodes = (left[:, None] + 0.5 * h * (x + 1.0)[None, :]).ravel()
    weights = np.tile(0.5 * h * w, panels)
    return nodes, weights


def resolvent_solve(scheme: ChernoffScheme, req: ResolventRequest) -> GridFunction:
    w = scheme.growth_bound_hint
    lam = complex(req.lam)
    if lam.real <= w:
        raise ValueError(
            f"Re(lambda)={lam.real} must exceed the growth bound w={w}; "
            "the Laplace integral diverges otherwise"
        )
    t_max = req.t_max if req.t_max is not None else default_t_max(lam, w)
    truncation = math.exp(-(lam.real - w) * t_max)
    if truncation > TRUNCATION_TOL:
        raise ValueError(
            f"t_max={t_max} leaves a truncation error estimate {truncation:.3e} "
            f"above {TRUNCATION_TOL:.0e}"
        )
    nodes, weights = composite_gauss_legendre(t_max, req.panels, req.nodes_per_panel)
    total = np.zeros(req.g.grid.n_points, dtype=complex)
    for t, omega in zip(nodes, weights):
        u = chernoff_iterate(scheme, float(t), req.n, req.g)
        total += omega * np.exp(-lam * t) * u.samples
    return req.g.with_samples(total)


def elliptic_residual(
    coeffs: OperatorCoefficients, lam: complex, f: GridFunction, g: GridFunction
) -> float:
    """||lam f - L f - g|| / ||g|| in discrete L2; absolute when g = 0."""
    r = l2_norm(f * complex(lam) - apply_L(coeffs, f) - g)
    norm_g = l2_norm(g)
    return r / norm_g if norm_g > 0 else r


def fourier_resolvent(sym: ConstantSymbols, lam: complex, g: GridFunction) -> GridFunction:
    """Exact (lam - L)^{-1} g for constant coefficients, mode by mode."""
    xi = g.grid.wavenumbers
    ik = 1j * xi
    if g.grid.n_points % 2 == 0:
        ik[g.grid.n_points // 2] = 0.0
    symbol = complex(sym.a0) * -(xi**2) + complex(sym.b0) * ik + complex(sym.c0)
    denom = complex(lam) - symbol
    if np.any(denom == 0):
        raise ZeroDivisionError("lambda is an eigenvalue of L")
    return idft(dft(g) / denom, g.grid)
