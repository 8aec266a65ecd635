"""Fixed-energy scattering for ``-Lap psi + v psi = E psi`` in the plane.

The outgoing solution solves the Lippmann-Schwinger equation

    psi(x) = exp(i k.x) + int G(x - y) v(y) psi(y) dy,   G(r) = -(i/4) H0^(1)(sqrt(E) r),

discretized by Nystrom quadrature on the grid nodes where
``|v| > support_tol * sup|v|``. Off-diagonal weights are point values
``G(h |i - j|) h^2``; the diagonal weight is the exact integral of the series
expansion of ``G`` over one grid cell. The amplitude is

    f(k, l) = (2 pi)^-2 int exp(-i l.y) v(y) psi(y, k) dy,

normalized so that ``psi - exp(i k.x) ~ -i pi sqrt(2 pi) e^{-i pi/4} f(k, l)
exp(i |k||x|) / sqrt(|k||x|)`` with ``l = |k| x/|x|`` (checked by
:func:`far_field_fit`).

Two linear-algebra routes solve the same discrete system: a dense LU
factorization (small supports) and GMRES with FFT-based matrix-vector
products (any support size).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft
import scipy.linalg as sla
from scipy.sparse.linalg import LinearOperator, gmres

from .errors import AnnulusError, InvalidInputError, NumericalError, SingularSystemError
from .grid import Field2D, Grid2D
from .kernels import assemble_system, hankel1_0


EULER_GAMMA = 0.5772156649015329
FAR_FIELD_CONSTANT = -1j * math.pi * math.sqrt(2.0 * math.pi) * np.exp(-0.25j * math.pi)
COND_FAIL = 1e12
COND_WARN = 1e8
MAX_DENSE = 5000


class ResonanceWarning(UserWarning):
    """The Lippmann-Schwinger system is poorly conditioned."""


def _check_energy(E):
    if not (np.isfinite(E) and E > 0):
        raise InvalidInputError(f"energy must be positive, got E={E}")


def greens_kernel(E: float, r):
    """Outgoing Green function ``-(i/4) H0^(1)(sqrt(E) r)`` for ``r > 0``."""
    _check_energy(E)
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise InvalidInputError("the Green kernel is singular at r = 0; use cell_average_green")
    return -0.25j * hankel1_0(math.sqrt(E) * r)


def _square_log_moments(a: float, m: int):
    """Averages of ``r^{2m}`` and ``r^{2m} ln r`` over the square ``[-a, a]^2``.

    The radial integrals are done in closed form on the triangle
    ``0 <= theta <= pi/4, r <= a sec(theta)``; the remaining smooth angular
    integral uses Gauss-Legendre quadrature.
    """
    nodes, weights = np.polynomial.legendre.leggauss(40)
    theta = 0.125 * math.pi * (nodes + 1.0)
    w = 0.125 * math.pi * weights
    R = a / np.cos(theta)
    p = 2 * m + 2
    rp = R**p
    scale = 2.0 / (a * a)
    plain = scale * np.sum(w * rp / p)
    logged = scale * np.sum(w * rp * (np.log(R) / p - 1.0 / p**2))
    return plain, logged


def cell_average_green(E: float, h: float) -> complex:
    """Average of the Green kernel over one ``h x h`` cell centred at the origin.

    Uses ``G = -(i/4) J0(z) + Y0(z)/4`` with the ascending series of J0, Y0
    (``z = sqrt(E) r``), integrated term by term.
    """
    _check_energy(E)
    a = 0.5 * h
    q = 0.25 * E
    total = 0.0 + 0.0j
    jm = 1.0  # (-1)^m q^m / (m!)^2
    harmonic = 0.0
    for m in range(0, 40):
        if m > 0:
            jm *= -q / (m * m)
            harmonic += 1.0 / m
        plain, logged = _square_log_moments(a, m)
        const = -0.25j * jm + (math.log(0.5 * math.sqrt(E)) + EULER_GAMMA) * jm / (2 * math.pi)
        if m > 0:
            const += -jm * harmonic / (2 * math.pi)
        term = const * plain + jm / (2 * math.pi) * logged
        total += term
        if m > 2 and abs(term) < 1e-18 * abs(total):
            break
    return complex(total)


def green_table(grid: Grid2D, E: float) -> np.ndarray:
    """Kernel on the ``2N x 2N`` circulant embedding: entry ``[d1 % 2N, d2 % 2N]``
    holds the weight for node offset ``(d1, d2)``, ``|d| <= N-1``."""
    N, h = grid.N, grid.h
    d = np.arange(2 * N)
    d = np.where(d < N, d, d - 2 * N).astype(float)
    d[N] = 1.0  # unused Nyquist row/column, zeroed below
    r = h * np.hypot(d[:, None], d[None, :])
    r[0, 0] = 1.0
    table = -0.25j * hankel1_0(math.sqrt(E) * r)
    table[0, 0] = cell_average_green(E, h)
    table[N, :] = 0.0
    table[:, N] = 0.0
    return table


@dataclass(frozen=True)
class IncidentWave:
    k: np.ndarray
    E: float

    def __post_init__(self):
        _check_energy(self.E)
        k = np.asarray(self.k, dtype=float).reshape(2)
        if abs(k @ k - self.E) > 1e-12 * self.E:
            raise InvalidInputError(f"incident momentum is off shell: |k|^2={k @ k}, E={self.E}")
        object.__setattr__(self, "k", k)

    @classmethod
    def from_angle(cls, E: float, theta: float) -> "IncidentWave":
        _check_energy(E)
        s = math.sqrt(E)
        return cls(np.array([s * math.cos(theta), s * math.sin(theta)]), E)

    @property
    def theta(self) -> float:
        return math.atan2(self.k[1], self.k[0]) % (2 * math.pi)


def _potential_values(p):
    values = getattr(p, "values", p)
    grid = getattr(p, "grid", None)
    if isinstance(values, Field2D):
        grid, values = values.grid, values.values
    if grid is None:
        raise InvalidInputError("expected a Potential or a real Field2D")
    values = np.asarray(values)
    if np.iscomplexobj(values):
        if np.max(np.abs(values.imag)) > 1e-12 * max(1.0, np.max(np.abs(values))):
            raise InvalidInputError("potential must be real")
        values = values.real
    return grid, np.asarray(values, dtype=float)


class LippmannSchwingerSolver:
    """Assembled Nystrom system for one potential at one energy.

    ``method`` is ``"dense"``, ``"fft"`` or ``"auto"`` (dense when the support
    has at most ``max_dense`` nodes). The object is immutable after assembly
    and can be reused for any number of incident directions.
    """

    def __init__(self, potential, E: float, tol: float = 1e-10, method: str = "auto",
                 support_tol: float = 1e-12, max_dense: int = MAX_DENSE):
        _check_energy(E)
        if method not in ("auto", "dense", "fft"):
            raise InvalidInputError(f"unknown solver method {method!r}")
        self.grid, v = _potential_values(potential)
        self.E, self.tol = float(E), float(tol)
        self.potential = potential
        g = self.grid
        vmax = float(np.max(np.abs(v))) if v.size else 0.0
        self.mask = np.abs(v) > support_tol * vmax if vmax > 0 else np.zeros(g.shape, bool)
        self.i1, self.i2 = np.nonzero(self.mask)
        self.v_active = v[self.mask]
        self.weights = self.v_active * g.h**2
        self.n_active = len(self.v_active)
        if method == "auto":
            method = "dense" if self.n_active <= max_dense else "fft"
        self.method = method
        self.condition_estimate = 1.0
        self.iterations: list[int] = []
        self._table = green_table(g, self.E)
        self._table_hat = sfft.fft2(self._table, workers=-1)
        if self.n_active and method == "dense":
            self._factor()

    @property
    def support_radius(self) -> float:
        if not self.n_active:
            return 0.0
        x = self.grid.x
        return float(np.max(np.hypot(x[self.i1], x[self.i2])))

    def _factor(self):
        N = self.grid.N
        idx = np.arange(-(N - 1), N) % (2 * N)
        table = self._table[np.ix_(idx, idx)]
        A = assemble_system(table, self.i1, self.i2, self.weights, N - 1)
        anorm = np.max(np.sum(np.abs(A), axis=0))
        lu, piv = sla.lu_factor(A, overwrite_a=True, check_finite=False)
        rcond, info = sla.lapack.zgecon(lu, anorm, norm="1")
        cond = np.inf if rcond == 0 else 1.0 / rcond
        self.condition_estimate = float(cond)
        if not cond < COND_FAIL:
            raise SingularSystemError(f"Lippmann-Schwinger system condition ~{cond:.2e} exceeds {COND_FAIL:g}")
        if cond > COND_WARN:
            warnings.warn(f"condition estimate {cond:.2e}: near a resonance", ResonanceWarning, stacklevel=3)
        self._lu = (lu, piv)

    def convolve(self, dens: np.ndarray) -> np.ndarray:
        """``sum_j K(x_i - y_j) dens_j`` on the whole grid; ``dens`` on the support."""
        N = self.grid.N
        pad = np.zeros((2 * N, 2 * N), dtype=complex)
        pad[self.i1, self.i2] = dens
        out = sfft.ifft2(self._table_hat * sfft.fft2(pad, workers=-1), workers=-1)
        return out[:N, :N]

    def _matvec(self, x):
        conv = self.convolve(self.weights * x)
        return x - conv[self.i1, self.i2]

    def _solve_active(self, rhs: np.ndarray) -> np.ndarray:
        """Solve on the support for one or several right-hand sides (columns)."""
        if self.method == "dense":
            return sla.lu_solve(self._lu, rhs, check_finite=False)
        n = self.n_active
        op = LinearOperator((n, n), matvec=self._matvec, dtype=complex)
        cols = rhs.reshape(n, -1)
        out = np.empty_like(cols)
        for j in range(cols.shape[1]):
            count = [0]

            def cb(_):
                count[0] += 1

            sol, info = gmres(op, cols[:, j], x0=cols[:, j], rtol=self.tol, atol=0.0, restart=60,
                              maxiter=40, callback=cb, callback_type="pr_norm")
            if info != 0:
                raise NumericalError(f"GMRES did not reach rtol={self.tol:g} (info={info})")
            self.iterations.append(count[0])
            out[:, j] = sol
        return out.reshape(rhs.shape)

    def incident_on_support(self, thetas) -> np.ndarray:
        x = self.grid.x
        s = math.sqrt(self.E)
        thetas = np.atleast_1d(thetas)
        phase = np.outer(x[self.i1], np.cos(thetas)) + np.outer(x[self.i2], np.sin(thetas))
        return np.exp(1j * s * phase)

    def solve_thetas(self, thetas) -> np.ndarray:
        """psi on the support for incidence angles ``thetas`` (one column each)."""
        rhs = self.incident_on_support(thetas)
        if not self.n_active:
            return rhs
        return self._solve_active(rhs)

    def solve(self, k: IncidentWave) -> "ScatteringSolution":
        if abs(k.E - self.E) > 1e-12 * self.E:
            raise InvalidInputError("incident wave energy differs from the solver energy")
        g = self.grid
        x1, x2 = g.mesh
        plane = np.exp(1j * (k.k[0] * x1 + k.k[1] * x2))
        if not self.n_active:
            return ScatteringSolution(Field2D(g, plane), k, self, np.zeros(0, complex))
        rhs = np.exp(1j * (k.k[0] * g.x[self.i1] + k.k[1] * g.x[self.i2]))
        psi_active = self._solve_active(rhs)
        density = self.weights * psi_active
        psi = plane + self.convolve(density)
        return ScatteringSolution(Field2D(g, psi), k, self, density)


@dataclass(frozen=True)
class ScatteringSolution:
    psi_plus: Field2D
    incident: IncidentWave
    solver: LippmannSchwingerSolver = field(repr=False)
    density: np.ndarray = field(repr=False)  # h^2 v psi on the support nodes

    @property
    def E(self) -> float:
        return self.incident.E

    def scattered_at(self, points) -> np.ndarray:
        """``psi - exp(i k.x)`` at arbitrary points (Nystrom interpolant)."""
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        if not len(self.density):
            return np.zeros(len(points), complex)
        s = self.solver
        y1, y2 = s.grid.x[s.i1], s.grid.x[s.i2]
        out = np.empty(len(points), complex)
        for start in range(0, len(points), 16):
            p = points[start:start + 16]
            r = np.hypot(p[:, :1] - y1[None, :], p[:, 1:] - y2[None, :])
            if np.any(r == 0):
                raise InvalidInputError("evaluation point coincides with a quadrature node")
            out[start:start + 16] = (-0.25j * hankel1_0(math.sqrt(self.E) * r)) @ self.density
        return out


@dataclass(frozen=True)
class FarFieldRow:
    """Amplitude ``f(k, l(theta))`` for one incident direction."""

    theta_k: float
    angles: np.ndarray
    values: np.ndarray
    E: float


def _outgoing_phase(solver, angles):
    x = solver.grid.x
    s = math.sqrt(solver.E)
    ph = np.outer(np.cos(angles), x[solver.i1]) + np.outer(np.sin(angles), x[solver.i2])
    return np.exp(-1j * s * ph)


def far_field_amplitude(sol: ScatteringSolution, directions) -> FarFieldRow:
    """``f(k, l) = (2 pi)^-2 int exp(-i l.y) v psi dy`` for ``l = sqrt(E)(cos t, sin t)``."""
    angles = np.atleast_1d(np.asarray(directions, dtype=float))
    if not len(sol.density):
        vals = np.zeros(len(angles), complex)
    else:
        vals = _outgoing_phase(sol.solver, angles) @ sol.density / (4 * math.pi**2)
    return FarFieldRow(sol.incident.theta, angles, vals, sol.E)


@dataclass(frozen=True)
class ScatteringAmplitude:
    """``samples[i, j] = f(k(theta[i]), l(theta[j]))`` on a uniform angle grid.

    Torus coordinates are ``lam = exp(i theta_k)``, ``lam' = exp(i theta_l)``.
    """

    E: float
    theta: np.ndarray
    samples: np.ndarray = field(repr=False)
    theta_l: np.ndarray | None = None

    def __post_init__(self):
        if self.theta_l is None:
            object.__setattr__(self, "theta_l", self.theta)
        if not np.all(np.isfinite(self.samples)):
            raise NumericalError("scattering amplitude contains NaN or Inf")

    @property
    def M(self) -> int:
        return len(self.theta)

    @property
    def lam(self) -> np.ndarray:
        return np.exp(1j * self.theta)

    @property
    def lam_prime(self) -> np.ndarray:
        return np.exp(1j * self.theta_l)

    def continuity_proxy(self) -> float:
        """Largest periodic second difference along either angle axis."""
        f = self.samples
        d0 = np.roll(f, 1, 0) - 2 * f + np.roll(f, -1, 0)
        d1 = np.roll(f, 1, 1) - 2 * f + np.roll(f, -1, 1)
        return float(max(np.max(np.abs(d0)), np.max(np.abs(d1))))


def angle_grid(M: int) -> np.ndarray:
    if M < 1:
        raise InvalidInputError("need at least one angle")
    return 2.0 * math.pi * np.arange(M) / M


def amplitude_from_solver(solver: LippmannSchwingerSolver, M: int = 64, theta_l=None) -> ScatteringAmplitude:
    theta = angle_grid(M)
    theta_l = theta if theta_l is None else np.asarray(theta_l, dtype=float)
    if not solver.n_active:
        return ScatteringAmplitude(solver.E, theta, np.zeros((len(theta), len(theta_l)), complex), theta_l)
    psi = solver.solve_thetas(theta)
    dens = solver.weights[:, None] * psi
    f = (_outgoing_phase(solver, theta_l) @ dens).T / (4 * math.pi**2)
    return ScatteringAmplitude(solver.E, theta, f, theta_l)


def scattering_amplitude(potential, E: float, M: int = 64, **solver_kw) -> ScatteringAmplitude:
    """Amplitude on the ``M x M`` torus grid (one linear solve per incident angle)."""
    return amplitude_from_solver(LippmannSchwingerSolver(potential, E, **solver_kw), M)


def solve_lippmann_schwinger(potential, k: IncidentWave, tol: float = 1e-10, **solver_kw) -> ScatteringSolution:
    return LippmannSchwingerSolver(potential, k.E, tol=tol, **solver_kw).solve(k)


def far_field_fit(sol: ScatteringSolution, amp: FarFieldRow | None = None, radius_fraction: float = 0.35,
                  n_angles: int = 64) -> float:
    """Relative sup-mismatch between ``psi - exp(ikx)`` on the circle
    ``|x| = radius_fraction * L/2`` and the leading far-field term built from
    ``amp`` (computed from ``sol`` when omitted), normalized by the sup of the
    computed scattered wave on that circle."""
    g = sol.solver.grid
    inner, outer = 0.3 * g.L / 2, 0.45 * g.L / 2
    if not inner <= radius_fraction * g.L / 2 <= outer + 1e-12:
        raise AnnulusError(f"radius fraction {radius_fraction} outside the fitting annulus [0.3, 0.45]")
    if sol.solver.support_radius >= inner:
        raise AnnulusError(
            f"support radius {sol.solver.support_radius:.3f} reaches the annulus (inner radius {inner:.3f}); enlarge L"
        )
    if amp is None:
        amp = far_field_amplitude(sol, angle_grid(n_angles))
    R = radius_fraction * g.L / 2
    pts = R * np.column_stack([np.cos(amp.angles), np.sin(amp.angles)])
    scattered = sol.scattered_at(pts)
    kr = math.sqrt(sol.E) * R
    predicted = FAR_FIELD_CONSTANT * amp.values * np.exp(1j * kr) / math.sqrt(kr)
    scale = np.max(np.abs(scattered))
    mismatch = np.max(np.abs(scattered - predicted))
    if scale == 0:
        return 0.0 if mismatch == 0 else math.inf
    return float(mismatch / scale)


def amplitude_norm(amp) -> float:
    """``sup |f|`` over the samples."""
    samples = getattr(amp, "samples", getattr(amp, "values", amp))
    samples = np.asarray(samples)
    return float(np.max(np.abs(samples))) if samples.size else 0.0


def gaussian_born_amplitude(A: float, sigma: float, E: float, theta_k, theta_l, center=(0.0, 0.0)):
    """Closed-form first Born amplitude ``(2 pi)^-2 vhat(l - k)`` for
    ``v = A exp(-|x - c|^2 / sigma^2)``, ``vhat(xi) = A pi sigma^2 exp(-sigma^2 |xi|^2 / 4)``."""
    s = math.sqrt(E)
    tk, tl = np.meshgrid(np.atleast_1d(theta_k), np.atleast_1d(theta_l), indexing="ij")
    q1 = s * (np.cos(tl) - np.cos(tk))
    q2 = s * (np.sin(tl) - np.sin(tk))
    vhat = A * math.pi * sigma**2 * np.exp(-0.25 * sigma**2 * (q1**2 + q2**2))
    return vhat * np.exp(-1j * (q1 * center[0] + q2 * center[1])) / (4 * math.pi**2)
