"""Periodic square grid and Fourier-multiplier calculus.

Layout conventions (used by every module in the package):

* The box is ``[-L/2, L/2)^2`` sampled at ``x_m = -L/2 + m h``, ``h = L/N``.
* Field arrays have shape ``(N, N)`` with ``values[i1, i2]`` sampling the
  point ``(x1[i1], x2[i2])``; axis 0 is x1, axis 1 is x2 (``indexing="ij"``).
* Angular frequencies per axis are ``2 pi m / L`` in FFT order
  (``m = 0, 1, ..., N/2-1, -N/2, ..., -1``).
* Odd-order derivative multipliers vanish at the unmatched mode ``m = -N/2``
  so that derivatives of real fields stay real.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from .errors import InvalidInputError

REAL_TOL = 1e-12


@dataclass(frozen=True)
class Grid2D:
    L: float
    N: int

    def __post_init__(self):
        if not np.isfinite(self.L) or self.L <= 0:
            raise InvalidInputError(f"side length must be positive, got L={self.L}")
        if int(self.N) != self.N or self.N < 8 or self.N % 2:
            raise InvalidInputError(f"points per axis must be an even integer >= 8, got N={self.N}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "L", float(self.L))

    @property
    def h(self) -> float:
        return self.L / self.N

    @property
    def shape(self) -> tuple[int, int]:
        return (self.N, self.N)

    @cached_property
    def x(self) -> np.ndarray:
        """Node coordinates along either axis."""
        return -0.5 * self.L + self.h * np.arange(self.N)

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return tuple(np.meshgrid(self.x, self.x, indexing="ij"))

    @cached_property
    def xi(self) -> np.ndarray:
        """Angular frequencies per axis in FFT order."""
        return 2.0 * np.pi * sfft.fftfreq(self.N, d=self.h)

    @cached_property
    def xi_odd(self) -> np.ndarray:
        """Frequencies with the Nyquist entry zeroed (odd-order multipliers)."""
        xi = self.xi.copy()
        xi[self.N // 2] = 0.0
        return xi

    def frequencies(self) -> np.ndarray:
        """Sorted angular frequencies ``2 pi m / L``, ``m = -N/2 .. N/2-1``."""
        return 2.0 * np.pi * np.arange(-self.N // 2, self.N // 2) / self.L

    def multiplier(self, order: tuple[int, int]) -> np.ndarray:
        j1, j2 = order
        if j1 < 0 or j2 < 0:
            raise InvalidInputError(f"derivative order must be non-negative, got {order}")
        m1 = (1j * (self.xi_odd if j1 % 2 else self.xi)) ** j1
        m2 = (1j * (self.xi_odd if j2 % 2 else self.xi)) ** j2
        return m1[:, None] * m2[None, :]

    @cached_property
    def dz_symbol(self) -> np.ndarray:
        x1, x2 = self.xi_odd[:, None], self.xi_odd[None, :]
        return 0.5j * (x1 - 1j * x2)

    @cached_property
    def dzbar_symbol(self) -> np.ndarray:
        x1, x2 = self.xi_odd[:, None], self.xi_odd[None, :]
        return 0.5j * (x1 + 1j * x2)

    @cached_property
    def laplacian_symbol(self) -> np.ndarray:
        return -(self.xi[:, None] ** 2 + self.xi[None, :] ** 2)

    # array-level helpers; inputs are (N, N) arrays in the documented layout

    def fft(self, values):
        return sfft.fft2(values, workers=-1)

    def ifft(self, values):
        return sfft.ifft2(values, workers=-1)

    def apply(self, symbol, values, real=None):
        """Apply a Fourier multiplier; returns a real array when ``real`` is set
        (default: when the input is real and the caller promises realness)."""
        out = self.ifft(symbol * self.fft(values))
        return out.real if real else out

    def deriv(self, values, order):
        return self.apply(self.multiplier(order), values, real=np.isrealobj(values))

    def dz(self, values):
        return self.apply(self.dz_symbol, values)

    def dzbar(self, values):
        return self.apply(self.dzbar_symbol, values)

    def laplacian(self, values):
        return self.apply(self.laplacian_symbol, values, real=np.isrealobj(values))

    def l2_norm(self, values) -> float:
        """Discrete L^2 norm ``sqrt(h^2 sum |f|^2)``."""
        return float(self.h * np.sqrt(np.sum(np.abs(values) ** 2)))

    def mean(self, values):
        return np.mean(values)

    def check(self, values):
        values = np.asarray(values)
        if values.shape != self.shape:
            raise InvalidInputError(f"field shape {values.shape} does not match grid {self.shape}")
        return values


def make_grid(L: float, N: int) -> Grid2D:
    return Grid2D(L, N)


@dataclass(frozen=True)
class Field2D:
    """A sampled field on a grid. ``real`` tags fields promised to be real."""

    grid: Grid2D
    values: np.ndarray = field(repr=False)
    real: bool = False

    def __post_init__(self):
        vals = self.grid.check(self.values)
        if self.real:
            if np.iscomplexobj(vals):
                if vals.size and np.max(np.abs(vals.imag)) > REAL_TOL * max(1.0, np.max(np.abs(vals))):
                    raise InvalidInputError("field tagged real has a significant imaginary part")
                vals = vals.real
            vals = np.asarray(vals, dtype=float)
        else:
            vals = np.asarray(vals, dtype=complex)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def l2_norm(self) -> float:
        return self.grid.l2_norm(self.values)


def _same_grid(a: Field2D, b: Field2D):
    if a.grid != b.grid:
        raise InvalidInputError("fields live on different grids")


def spectral_deriv(f: Field2D, order: tuple[int, int]) -> Field2D:
    """Derivative via the multiplier ``(i xi1)^j1 (i xi2)^j2``; up to total order 3."""
    if sum(order) > 3:
        raise InvalidInputError(f"derivative orders up to 3 are supported, got {order}")
    return Field2D(f.grid, f.grid.deriv(f.values, order), real=f.real)


def dz(f: Field2D) -> Field2D:
    """``(d/dx1 - i d/dx2) / 2``."""
    return Field2D(f.grid, f.grid.dz(f.values))


def dzbar(f: Field2D) -> Field2D:
    """``(d/dx1 + i d/dx2) / 2``."""
    return Field2D(f.grid, f.grid.dzbar(f.values))


def laplacian(f: Field2D) -> Field2D:
    return Field2D(f.grid, f.grid.laplacian(f.values), real=f.real)


def real_part(f: Field2D) -> Field2D:
    return Field2D(f.grid, np.real(f.values), real=True)
