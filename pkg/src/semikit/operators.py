"""Second-order operators L f = a f'' + b f' + c f and reference semigroups.

Three independent routes to L and e^{tL} live here: spectral application
of L, exact Fourier multipliers for constant coefficients, and a dense
matrix exponential for variable coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import GridFunction, SpatialGrid, dft, idft, sample

__all__ = [
    "OperatorCoefficients",
    "ConstantSymbols",
    "MAX_DENSE_POINTS",
    "coefficients_from_callables",
    "apply_L",
    "build_matrix",
    "matrix_exponential",
    "multiplier_semigroup",
    "oracle_evolve",
]

MAX_DENSE_POINTS = 1024


@dataclass(frozen=True)
class OperatorCoefficients:
    a: GridFunction
    b: GridFunction
    c: GridFunction

    def __post_init__(self) -> None:
        if not (self.a.grid == self.b.grid == self.c.grid):
            raise ValueError("coefficients must share one grid")
        for name in ("a", "b", "c"):
            imag = getattr(self, name).samples.imag
            if np.any(np.abs(imag) > 1e-14):
                raise ValueError(f"coefficient {name} must be real-valued")

    @property
    def grid(self) -> SpatialGrid:
        return self.a.grid

    def is_constant(self) -> bool:
        return all(np.ptp(getattr(self, k).samples.real) == 0.0 for k in "abc")

    def symbols(self) -> ConstantSymbols:
        if not self.is_constant():
            raise ValueError("coefficients are not constant")
        return ConstantSymbols(
            complex(self.a.samples[0].real),
            complex(self.b.samples[0].real),
            complex(self.c.samples[0].real),
        )

    def require_parabolic(self) -> None:
        if np.any(self.a.samples.real < 0):
            j = int(np.argmin(self.a.samples.real))
            raise ValueError(
                f"coefficient a must be >= 0, got {self.a.samples[j].real} "
                f"at x={self.grid.nodes[j]}"
            )


@dataclass(frozen=True)
class ConstantSymbols:
    a0: complex
    b0: complex = 0.0
    c0: complex = 0.0

    def __post_init__(self) -> None:
        if complex(self.a0).real < 0:
            raise ValueError("Re(a0) must be >= 0")


def coefficients_from_callables(grid: SpatialGrid, a, b=0.0, c=0.0) -> OperatorCoefficients:
    """Sample a, b, c on ``grid``; numbers are treated as constants."""

    def as_fn(v):
        return v if callable(v) else (lambda x, v=v: np.full_like(x, v, dtype=float))

    return OperatorCoefficients(
        sample(grid, as_fn(a)), sample(grid, as_fn(b)), sample(grid, as_fn(c))
    )


def _derivative_symbols(grid: SpatialGrid) -> tuple[np.ndarray, np.ndarray]:
    xi = grid.wavenumbers
    ik = 1j * xi
    if grid.n_points % 2 == 0:
        # odd derivative of the Nyquist cosine has no representable partner
        ik[grid.n_points // 2] = 0.0
    return ik, -(xi**2)


def _apply_L_samples(coeffs: OperatorCoefficients, u: np.ndarray) -> np.ndarray:
    """Apply L along axis 0 (works for vectors and column stacks)."""
    ik, k2 = _derivative_symbols(coeffs.grid)
    shape = (-1,) + (1,) * (u.ndim - 1)
    u_hat = np.fft.fft(u, axis=0)
    du = np.fft.ifft(ik.reshape(shape) * u_hat, axis=0)
    d2u = np.fft.ifft(k2.reshape(shape) * u_hat, axis=0)
    a = coeffs.a.samples.real.reshape(shape)
    b = coeffs.b.samples.real.reshape(shape)
    c = coeffs.c.samples.real.reshape(shape)
    return a * d2u + b * du + c * u


def apply_L(coeffs: OperatorCoefficients, f: GridFunction) -> GridFunction:
    if f.grid != coeffs.grid:
        raise ValueError("grid mismatch between coefficients and function")
    return f.with_samples(_apply_L_samples(coeffs, f.samples))


def build_matrix(coeffs: OperatorCoefficients) -> np.ndarray:
    n = coeffs.grid.n_points
    if n > MAX_DENSE_POINTS:
        raise ValueError(f"dense oracle limited to N <= {MAX_DENSE_POINTS}, got {n}")
    return _apply_L_samples(coeffs, np.eye(n, dtype=complex))


def matrix_exponential(M: np.ndarray, t: complex = 1.0) -> np.ndarray:
    """exp(t*M) by scaling and squaring around a truncated Taylor series."""
    A = np.asarray(M, dtype=complex) * t
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    n = A.shape[0]
    norm = np.linalg.norm(A, 1)
    squarings = max(0, math.ceil(math.log2(norm / 0.5))) if norm > 0.5 else 0
    A = A / 2.0**squarings

    result = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    scaled = np.linalg.norm(A, 1)
    for k in range(1, 40):
        term = term @ A / k
        result = result + term
        # ||A||^k / k! bounds the tail once ||A|| <= 1/2
        if scaled**k / math.factorial(k) < 1e-18:
            break
    for _ in range(squarings):
        result = result @ result
    return result


def multiplier_semigroup(sym: ConstantSymbols, t: float, f: GridFunction) -> GridFunction:
    """Exact e^{tL} for constant coefficients, applied mode by mode."""
    if t < 0:
        raise ValueError("t must be >= 0")
    ik, k2 = _derivative_symbols(f.grid)
    exponent = t * (complex(sym.a0) * k2 + complex(sym.b0) * ik + complex(sym.c0))
    return idft(dft(f) * np.exp(exponent), f.grid)


def oracle_evolve(
    coeffs: OperatorCoefficients,
    t: float,
    u0: GridFunction,
    prefactor: complex = 1.0,
) -> GridFunction:
    """exp(prefactor * t * M) u0 with M the dense spectral matrix of L.

    ``prefactor=-1j`` with Hamiltonian coefficients gives e^{-itH}.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if u0.grid != coeffs.grid:
        raise ValueError("grid mismatch")
    if t == 0:
        return u0
    M = build_matrix(coeffs)
    return u0.with_samples(matrix_exponential(M, prefactor * t) @ u0.samples)
