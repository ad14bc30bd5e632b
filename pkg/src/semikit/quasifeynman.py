"""Schrödinger-type propagation e^{-itH} through R(t) = exp(ia(S(t) - I)).

H = -d^2/dx^2 + V acts in the discrete L2 space. S is a self-adjoint
Chernoff function; R(t) is defined by its power series, which only
involves the bounded operator S(t) - I. Sign convention: S is tangent to
-H, so ia(S(t) - I) ~ -iatH and with a = +1 the iterates R(t/n)^n u0
converge to e^{-itH} u0. Negative a runs time backwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .chernoff import ChernoffScheme
from .grid import GridFunction, dft, idft, l2_norm, sample
from .operators import OperatorCoefficients

__all__ = [
    "SymmetricScheme",
    "SeriesNotConverged",
    "hamiltonian_coefficients",
    "strang_heat_potential_scheme",
    "remizov_exponential",
    "quasi_feynman_propagate",
    "DEFAULT_MAX_TERMS",
]

DEFAULT_MAX_TERMS = 200


class SeriesNotConverged(ArithmeticError):
    """The exponential series did not reach the requested tolerance."""


@dataclass(frozen=True)
class SymmetricScheme:
    scheme: ChernoffScheme
    potential: GridFunction
    tangent_sign: str = "-H"

    def __post_init__(self) -> None:
        if not self.scheme.is_symmetric:
            raise ValueError("underlying scheme must be self-adjoint")
        if np.any(self.potential.samples.imag != 0):
            raise ValueError("potential must be real-valued")
        if self.tangent_sign not in ("-H", "+H"):
            raise ValueError("tangent_sign must be '-H' or '+H'")

    def apply(self, t: float, f: GridFunction) -> GridFunction:
        return self.scheme.apply(t, f)


def hamiltonian_coefficients(V: GridFunction) -> OperatorCoefficients:
    """Coefficients of H = -d^2 + V in the a f'' + b f' + c f form."""
    grid = V.grid
    return OperatorCoefficients(
        sample(grid, lambda x: -np.ones_like(x)),
        sample(grid, np.zeros_like),
        V,
    )


def strang_heat_potential_scheme(V: GridFunction) -> SymmetricScheme:
    """S(t) = e^{-tV/2} e^{t d^2} e^{-tV/2}.

    Each factor is a real symmetric operator and the product is
    palindromic, so S(t) is self-adjoint for every t.
    """
    if np.any(np.abs(V.samples.imag) > 0):
        raise ValueError("potential must be real-valued")
    v = V.samples.real
    grid = V.grid
    xi2 = grid.wavenumbers**2

    @lru_cache(maxsize=16)
    def factors(t: float) -> tuple[np.ndarray, np.ndarray]:
        return np.exp(-0.5 * t * v), np.exp(-t * xi2)

    def apply(t: float, f: GridFunction) -> GridFunction:
        if t < 0:
            raise ValueError("t must be >= 0")
        if t == 0:
            return f
        half, heat = factors(float(t))
        u = half * f.samples
        u = idft(heat * dft(f.with_samples(u)), grid).samples
        return f.with_samples(half * u)

    scheme = ChernoffScheme(
        apply=apply,
        growth_bound_hint=max(0.0, -float(v.min())),
        is_symmetric=True,
        label="strang-heat-potential",
    )
    return SymmetricScheme(scheme, V.with_samples(v), "-H")


def remizov_exponential(
    S: SymmetricScheme,
    t: float,
    a: float,
    f: GridFunction,
    tol: float = 1e-12,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> GridFunction:
    """Sum (ia)^k/k! (S(t) - I)^k f until the next term is below tol*||f||."""
    if a == 0:
        raise ValueError("a must be nonzero")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if t == 0:
        return f
    norm_f = l2_norm(f)
    if norm_f == 0:
        return f
    total = f.samples.copy()
    power = f  # (S - I)^k f
    for k in range(1, max_terms + 1):
        power = S.apply(t, power) - power
        term = (1j * a) ** k / math.factorial(k) * power.samples
        term_norm = math.sqrt(np.mean(np.abs(term) ** 2) * f.grid.period)
        if term_norm < tol * norm_f:
            return f.with_samples(total)
        total = total + term
    raise SeriesNotConverged(
        f"series did not converge within {max_terms} terms (t={t}, a={a})"
    )


def quasi_feynman_propagate(
    S: SymmetricScheme,
    a: float,
    t: float,
    n: int,
    u0: GridFunction,
    tol: float = 1e-12,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> GridFunction:
    """R(t/n)^n u0 with R(s) = exp(ia(S(s) - I))."""
    if int(n) != n or n < 1:
        raise ValueError(f"n must be an integer >= 1, got {n}")
    if t < 0:
        raise ValueError("t must be >= 0")
    step = t / n
    u = u0
    for _ in range(int(n)):
        u = remizov_exponential(S, step, a, u, tol, max_terms)
    return u
