"""Periodic uniform grids and sampled complex-valued functions.

Samples are stored in a numpy array; the Fourier convention puts the 1/N
factor on the forward transform, so ``dft(ones)`` is 1 at mode 0.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "SpatialGrid",
    "GridFunction",
    "make_grid",
    "sample",
    "dft",
    "idft",
    "eval_interpolant",
    "interpolation_matrix",
    "mode_basis",
    "basis_to_sample_operator",
    "sup_norm",
    "l2_norm",
    "inner",
    "to_csv",
    "from_csv",
]


@dataclass(frozen=True)
class SpatialGrid:
    x0: float
    period: float
    n_points: int

    def __post_init__(self) -> None:
        if not np.isfinite(self.x0):
            raise ValueError("x0 must be finite")
        if not (np.isfinite(self.period) and self.period > 0):
            raise ValueError(f"period must be positive, got {self.period}")
        if int(self.n_points) != self.n_points or self.n_points < 4:
            raise ValueError(f"n_points must be an integer >= 4, got {self.n_points}")

    @property
    def spacing(self) -> float:
        return self.period / self.n_points

    @property
    def nodes(self) -> np.ndarray:
        return self.x0 + np.arange(self.n_points) * self.spacing

    @property
    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers 2*pi*k/period in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=1.0 / self.n_points) / self.period


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: SpatialGrid
    samples: np.ndarray

    def __post_init__(self) -> None:
        s = np.array(self.samples, dtype=complex)
        if s.shape != (self.grid.n_points,):
            raise ValueError(
                f"expected {self.grid.n_points} samples, got shape {s.shape}"
            )
        if not np.all(np.isfinite(s)):
            raise ValueError("samples must be finite")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    def with_samples(self, samples: np.ndarray) -> GridFunction:
        return GridFunction(self.grid, samples)

    def _check(self, other: GridFunction) -> None:
        if other.grid != self.grid:
            raise ValueError("grid mismatch")

    def __add__(self, other: GridFunction) -> GridFunction:
        self._check(other)
        return self.with_samples(self.samples + other.samples)

    def __sub__(self, other: GridFunction) -> GridFunction:
        self._check(other)
        return self.with_samples(self.samples - other.samples)

    def __mul__(self, scalar: complex) -> GridFunction:
        return self.with_samples(self.samples * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> GridFunction:
        return self.with_samples(-self.samples)

    @property
    def real(self) -> np.ndarray:
        return self.samples.real


def make_grid(x0: float, period: float, n_points: int) -> SpatialGrid:
    if int(n_points) != n_points:
        raise ValueError(f"n_points must be an integer, got {n_points}")
    return SpatialGrid(float(x0), float(period), int(n_points))


def sample(grid: SpatialGrid, f: Callable) -> GridFunction:
    """Evaluate ``f`` at every node.

    ``f`` may be vectorized (called once on the node array) or a plain
    scalar function such as ``math.cos``.
    """
    x = grid.nodes
    try:
        values = np.asarray(f(x), dtype=complex)
        if values.shape == ():
            values = np.full(grid.n_points, complex(values))
        elif values.shape != x.shape:
            raise TypeError
    except TypeError:
        values = np.array([f(float(xj)) for xj in x], dtype=complex)
    if not np.all(np.isfinite(values)):
        bad = int(np.flatnonzero(~np.isfinite(values))[0])
        raise ValueError(f"non-finite value at node x={x[bad]!r}")
    return GridFunction(grid, values)


def dft(f: GridFunction) -> np.ndarray:
    """Fourier coefficients (1/N) * sum_j f_j exp(-2 pi i k j / N), FFT order."""
    return np.fft.fft(f.samples, norm="forward")


def idft(coeffs: np.ndarray, grid: SpatialGrid) -> GridFunction:
    return GridFunction(grid, np.fft.ifft(np.asarray(coeffs), norm="forward"))


def mode_basis(grid: SpatialGrid, targets: np.ndarray) -> np.ndarray:
    """Matrix E[t, k] of Fourier basis values at ``targets`` (FFT mode order).

    For even N the Nyquist mode is split symmetrically between +N/2 and
    -N/2, i.e. evaluated as a cosine, which keeps the interpolant real for
    real data.
    """
    n = grid.n_points
    modes = np.fft.fftfreq(n, d=1.0 / n)
    phase = 2.0 * np.pi * np.outer((targets - grid.x0) / grid.period, modes)
    basis = np.exp(1j * phase)
    if n % 2 == 0:
        basis[:, n // 2] = np.cos(phase[:, n // 2])
    return basis


def _check_targets(targets) -> np.ndarray:
    t = np.atleast_1d(np.asarray(targets, dtype=float))
    if not np.all(np.isfinite(t)):
        raise ValueError("interpolation targets must be finite")
    return t


def eval_interpolant(f: GridFunction, targets: Sequence[float] | np.ndarray) -> np.ndarray:
    """Band-limited trigonometric interpolant of ``f`` evaluated at ``targets``.

    Direct summation of the Fourier series, O(N) work per target.
    Targets are taken modulo the period.
    """
    t = _check_targets(targets)
    return mode_basis(f.grid, t) @ dft(f)


def interpolation_matrix(grid: SpatialGrid, targets: Sequence[float] | np.ndarray) -> np.ndarray:
    """Matrix P with ``P @ f.samples == eval_interpolant(f, targets)``."""
    t = _check_targets(targets)
    return basis_to_sample_operator(mode_basis(grid, t))


def basis_to_sample_operator(basis: np.ndarray) -> np.ndarray:
    """Compose mode-basis rows with the forward DFT: ``basis @ F``.

    F is symmetric, so this is a row-wise forward FFT.
    """
    return np.fft.fft(basis, axis=1, norm="forward")


def sup_norm(f: GridFunction) -> float:
    return float(np.max(np.abs(f.samples)))


def l2_norm(f: GridFunction) -> float:
    return float(np.sqrt(np.mean(np.abs(f.samples) ** 2) * f.grid.period))


def inner(f: GridFunction, g: GridFunction) -> complex:
    """Discrete L2 inner product, linear in the first argument."""
    f._check(g)
    return complex(np.sum(f.samples * np.conj(g.samples)) * f.grid.spacing)


def to_csv(f: GridFunction) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x", "re", "im"])
    for x, v in zip(f.grid.nodes, f.samples):
        writer.writerow([f"{x:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}"])
    return buf.getvalue()


def from_csv(text: str) -> GridFunction:
    """Inverse of :func:`to_csv`; the grid is recovered from the x column."""
    rows = list(csv.DictReader(io.StringIO(text)))
    if len(rows) < 4:
        raise ValueError("need at least 4 rows")
    x = np.array([float(r["x"]) for r in rows])
    values = np.array([complex(float(r["re"]), float(r["im"])) for r in rows])
    h = x[1] - x[0]
    if not np.allclose(np.diff(x), h, rtol=1e-9, atol=1e-12):
        raise ValueError("x column is not uniformly spaced")
    grid = make_grid(x[0], h * len(x), len(x))
    return GridFunction(grid, values)
