"""Novikov-Veselov evolution on a periodic grid and the 1D KdV reduction.

The NV system at fixed energy E::

    dv/dt = 4 Re(4 dz^3 v + dz(v w) - E dz w),    dzbar w = -3 dz v,  v real.

Time stepping uses an integrating factor for the full linear part
``v -> 4 Re(4 dz^3 v - E dz w(v))`` (exact exponential of its Fourier symbol)
and classical RK4 for the remaining quadratic term ``4 Re dz(v w)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
import scipy.fft as sfft

from .errors import InstabilityError, InvalidInputError
from .grid import Field2D, Grid2D

STABILITY_C = 0.5


def _as_real_field(v, grid: Grid2D | None = None) -> Field2D:
    if isinstance(v, Field2D):
        return v if v.real else Field2D(v.grid, v.values, real=True)
    field_ = getattr(v, "field", None)  # a potentials.Potential
    if isinstance(field_, Field2D):
        return field_
    if grid is None:
        raise InvalidInputError("a grid is required when passing a bare array")
    return Field2D(grid, v, real=True)


def w_symbol(grid: Grid2D) -> np.ndarray:
    """Multiplier ``-3 (xi1 - i xi2)/(xi1 + i xi2)``, zero at the origin.

    Built from the Nyquist-zeroed frequencies so the discrete constraint
    ``dzbar w = -3 dz v`` holds exactly for every grid field.
    """
    num = grid.dz_symbol
    den = grid.dzbar_symbol
    out = np.zeros(grid.shape, dtype=complex)
    nz = den != 0
    out[nz] = -3.0 * num[nz] / den[nz]
    return out


def _w_from_hat(grid, v_hat):
    return sfft.ifft2(w_symbol(grid) * v_hat, workers=-1)


def solve_w(v, grid: Grid2D | None = None) -> Field2D:
    """Mean-zero periodic solution of ``dzbar w = -3 dz v``."""
    v = _as_real_field(v, grid)
    return Field2D(v.grid, _w_from_hat(v.grid, v.grid.fft(v.values)))


def constraint_residual(v, w: Field2D) -> float:
    """Discrete L2 norm of ``dzbar w + 3 dz v``."""
    v = _as_real_field(v, w.grid)
    g = w.grid
    return g.l2_norm(g.dzbar(w.values) + 3.0 * g.dz(v.values))


def _rhs_array(grid: Grid2D, v: np.ndarray, w: np.ndarray, E: float) -> np.ndarray:
    dz = grid.dz_symbol
    v_hat = grid.fft(v)
    x_hat = 4.0 * dz**3 * v_hat + dz * grid.fft(v * w) - E * dz * grid.fft(w)
    return 4.0 * grid.ifft(x_hat).real


@dataclass(frozen=True)
class NVState:
    v: Field2D
    w: Field2D
    t: float
    E: float
    diagnostics: tuple = field(default=(), repr=False, compare=False)

    @property
    def grid(self) -> Grid2D:
        return self.v.grid

    @classmethod
    def from_v(cls, v, E: float, t: float = 0.0, grid: Grid2D | None = None) -> "NVState":
        if not E > 0:
            raise InvalidInputError(f"energy must be positive, got E={E}")
        v = _as_real_field(v, grid)
        return cls(v, solve_w(v), float(t), float(E))


def nv_rhs(state: NVState) -> Field2D:
    """``dv/dt`` for the state; real by construction."""
    return Field2D(state.grid, _rhs_array(state.grid, state.v.values, state.w.values, state.E), real=True)


def linear_symbol(grid: Grid2D, E: float) -> np.ndarray:
    """Fourier symbol (purely imaginary) of ``v -> 4 Re(4 dz^3 v - E dz w(v))``."""
    s = 4.0 * grid.dz_symbol**3 - E * grid.dz_symbol * w_symbol(grid)
    # s is odd in xi, so the real-part projection keeps 1j * Im(s)
    return 4j * s.imag


def nonlinear_term(grid: Grid2D, v: np.ndarray, v_hat=None) -> np.ndarray:
    """Fourier coefficients of ``4 Re dz(v w)``."""
    if v_hat is None:
        v_hat = grid.fft(v)
    w = _w_from_hat(grid, v_hat)
    x = grid.ifft(grid.dz_symbol * grid.fft(v * w))
    return grid.fft(4.0 * x.real)


def stability_dt(grid: Grid2D, E: float, C: float = STABILITY_C) -> float:
    """``C / (16 (pi N/L)^3 + 4 E (pi N/L))``."""
    kmax = math.pi * grid.N / grid.L
    return C / (16.0 * kmax**3 + 4.0 * E * kmax)


class IFRK4Stepper:
    """Integrating-factor RK4 for a fixed grid, energy and step size.

    A negative ``dt`` integrates backwards in time (the time-reversed run).
    """

    def __init__(self, grid: Grid2D, E: float, dt: float):
        if not E > 0:
            raise InvalidInputError(f"energy must be positive, got E={E}")
        self.grid, self.E, self.dt = grid, float(E), float(dt)
        lin = linear_symbol(grid, E)
        self.e_half = np.exp(0.5 * dt * lin)
        self.e_full = self.e_half**2

    def advance(self, v: np.ndarray) -> np.ndarray:
        g, dt = self.grid, self.dt
        e2, e1 = self.e_half, self.e_full
        v_hat = g.fft(v)
        k1 = nonlinear_term(g, v, v_hat)
        a_hat = e2 * (v_hat + 0.5 * dt * k1)
        k2 = nonlinear_term(g, g.ifft(a_hat).real, a_hat)
        b_hat = e2 * v_hat + 0.5 * dt * k2
        k3 = nonlinear_term(g, g.ifft(b_hat).real, b_hat)
        c_hat = e1 * v_hat + dt * e2 * k3
        k4 = nonlinear_term(g, g.ifft(c_hat).real, c_hat)
        new_hat = e1 * v_hat + (dt / 6.0) * (e1 * k1 + 2.0 * e2 * (k2 + k3) + k4)
        new = g.ifft(new_hat).real
        old_sup = np.max(np.abs(v))
        new_sup = np.max(np.abs(new))
        if not np.all(np.isfinite(new)) or (old_sup > 0 and new_sup > 10.0 * old_sup):
            raise InstabilityError(f"sup|v| grew from {old_sup:.3e} to {new_sup:.3e} in one step")
        return new


def step(state: NVState, dt: float, C: float = STABILITY_C, enforce_bound: bool = True) -> NVState:
    if enforce_bound and abs(dt) > stability_dt(state.grid, state.E, C) * (1 + 1e-12):
        raise InvalidInputError(
            f"|dt|={abs(dt):.3e} exceeds the stability bound {stability_dt(state.grid, state.E, C):.3e}"
        )
    new = IFRK4Stepper(state.grid, state.E, dt).advance(state.v.values)
    return NVState.from_v(Field2D(state.grid, new, real=True), state.E, state.t + dt)


def _diag(grid, t, v):
    return (float(t), float(np.mean(v)), grid.l2_norm(v), float(np.max(np.abs(v))))


def evolve(
    v0,
    E: float,
    T: float,
    dt: float | None = None,
    *,
    grid: Grid2D | None = None,
    C: float = STABILITY_C,
    backward: bool = False,
    enforce_bound: bool = True,
    record_every: int | None = None,
    callback: Callable[[int, float, np.ndarray], None] | None = None,
) -> NVState:
    """Integrate from t=0 to t=T (to t=-T with ``backward``).

    ``dt`` defaults to the stability bound; the step actually taken is
    ``T / ceil(T / dt)``. Diagnostics ``(t, mean, L2, sup)`` are stored on the
    returned state. ``callback(i, t, v)`` is called after every step.
    """
    v0 = _as_real_field(v0, grid)
    grid = v0.grid
    if not E > 0:
        raise InvalidInputError(f"energy must be positive, got E={E}")
    if not T >= 0:
        raise InvalidInputError(f"final time must be non-negative, got T={T}")
    bound = stability_dt(grid, E, C)
    if dt is None:
        dt = bound
    if not dt > 0:
        raise InvalidInputError(f"time step must be positive, got dt={dt}")
    if enforce_bound and dt > bound * (1 + 1e-12):
        raise InvalidInputError(f"dt={dt:.3e} exceeds the stability bound {bound:.3e}")
    if T == 0:
        state = NVState.from_v(v0, E)
        return NVState(state.v, state.w, 0.0, state.E, (_diag(grid, 0.0, v0.values),))
    n = max(1, math.ceil(T / dt - 1e-9))
    h = (-1.0 if backward else 1.0) * T / n
    every = record_every or max(1, n // 200)
    stepper = IFRK4Stepper(grid, E, h)
    v = np.array(v0.values)
    diags = [_diag(grid, 0.0, v)]
    for i in range(1, n + 1):
        v = stepper.advance(v)
        t = i * h
        if i % every == 0 or i == n:
            diags.append(_diag(grid, t, v))
        if callback is not None:
            callback(i, t, v)
    state = NVState.from_v(Field2D(grid, v, real=True), E, n * h)
    return NVState(state.v, state.w, state.t, state.E, tuple(diags))


# --- 1D KdV reduction -------------------------------------------------------


@dataclass(frozen=True)
class PeriodicLine:
    """Periodic interval ``[-L/2, L/2)`` with N nodes."""

    L: float
    N: int

    def __post_init__(self):
        if not self.L > 0 or self.N < 8 or self.N % 2:
            raise InvalidInputError(f"need L > 0 and even N >= 8, got L={self.L}, N={self.N}")

    @cached_property
    def x(self) -> np.ndarray:
        return -0.5 * self.L + (self.L / self.N) * np.arange(self.N)

    @cached_property
    def xi(self) -> np.ndarray:
        return 2.0 * np.pi * sfft.fftfreq(self.N, d=self.L / self.N)

    def deriv(self, u, order: int = 1) -> np.ndarray:
        xi = self.xi.copy()
        if order % 2:
            xi[self.N // 2] = 0.0
        return sfft.ifft((1j * xi) ** order * sfft.fft(u)).real


@dataclass(frozen=True)
class KdVProfile:
    line: PeriodicLine
    u: np.ndarray = field(repr=False)


def kdv_soliton(kappa: float, phi: float, x, t: float = 0.0):
    """``-2 kappa^2 / cosh^2(kappa (x - 4 kappa^2 t - phi))``."""
    if kappa == 0:
        return np.zeros_like(np.asarray(x, dtype=float))
    return -2.0 * kappa**2 / np.cosh(kappa * (np.asarray(x) - 4.0 * kappa**2 * t - phi)) ** 2


def kdv_rhs(profile: KdVProfile) -> KdVProfile:
    """``du/dt = 6 u u_x - u_xxx``."""
    line, u = profile.line, profile.u
    return KdVProfile(line, 6.0 * u * line.deriv(u, 1) - line.deriv(u, 3))


def kdv_residual_soliton(kappa: float, phi: float, line: PeriodicLine) -> float:
    """Sup-norm of ``u_t - 6 u u_x + u_xxx`` for the exact traveling soliton."""
    if kappa < 0:
        raise InvalidInputError("kappa must be non-negative")
    u = kdv_soliton(kappa, phi, line.x)
    ux = line.deriv(u, 1)
    ut = -4.0 * kappa**2 * ux
    return float(np.max(np.abs(ut - 6.0 * u * ux + line.deriv(u, 3))))


_FD6 = np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60.0


def kdv_reduction_map_check(
    u: Callable[[np.ndarray, float], np.ndarray],
    E: float,
    line: PeriodicLine,
    times: Sequence[float] = (0.0, 0.01, 0.02),
    dt_fd: float = 1e-3,
) -> float:
    """Sup-residual of ``v_t = 2 v_xxx - 12 v v_x + 6E v_x`` for
    ``v(x, t) = u(x + 6Et, -2t)``, where ``u(xi, tau)`` solves
    ``u_tau - 6 u u_xi + u_xixixi = 0``.

    Time derivatives use a sixth-order central difference of width ``dt_fd``;
    space derivatives are spectral.
    """
    x = line.x

    def v_at(t):
        return np.asarray(u(x + 6.0 * E * t, -2.0 * t), dtype=float) * np.ones_like(x)

    worst = 0.0
    for t in times:
        v = v_at(t)
        vt = sum(c * v_at(t + (j - 3) * dt_fd) for j, c in enumerate(_FD6) if c) / dt_fd
        vx = line.deriv(v, 1)
        res = vt - (2.0 * line.deriv(v, 3) - 12.0 * v * vx + 6.0 * E * vx)
        worst = max(worst, float(np.max(np.abs(res))))
    return worst
