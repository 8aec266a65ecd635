"""Candidate potentials: construction, translation, decay analysis and the
traveling-wave residual.

Families (``x`` measured from a center ``y``, ``r = |x - y|``):

``gaussian``          ``A exp(-r^2 / sigma^2)``
``multi-gaussian``    sum of gaussians
``exponential-bump``  ``A sech(r / sigma)`` (smooth, decays like ``2A e^{-r/sigma}``)
``kdv-line``          ``-2 kappa^2 sech^2(kappa (x1 - phi))``, independent of x2
``custom-grid``       user-supplied samples on a grid (decay unverified)
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import BoundaryLeakError, DegenerateFitError, InvalidInputError
from .grid import Field2D, Grid2D
from .nv import NVState, nv_rhs

FAMILIES = ("gaussian", "multi-gaussian", "exponential-bump", "kdv-line", "custom-grid")
LEAK_TOL = 1e-8
SHELL_FLOOR = 1e-14


@dataclass(frozen=True)
class PotentialSpec:
    family: str
    amplitudes: tuple = (1.0,)
    widths: tuple = (1.0,)
    centers: tuple = ((0.0, 0.0),)
    kappa: float = 1.0
    phi: float = 0.0
    values: np.ndarray | None = field(default=None, repr=False, compare=False)
    grid: Grid2D | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidInputError(f"unknown potential family {self.family!r}; expected one of {FAMILIES}")
        object.__setattr__(self, "amplitudes", tuple(float(a) for a in np.atleast_1d(self.amplitudes)))
        object.__setattr__(self, "widths", tuple(float(s) for s in np.atleast_1d(self.widths)))
        centers = np.asarray(self.centers, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "centers", tuple(tuple(c) for c in centers))
        if self.family in ("gaussian", "exponential-bump", "multi-gaussian"):
            n = len(self.amplitudes)
            if self.family != "multi-gaussian" and n != 1:
                raise InvalidInputError(f"{self.family} takes a single amplitude")
            if len(self.widths) != n or len(self.centers) != n:
                raise InvalidInputError("amplitudes, widths and centers must have equal length")
            if any(not s > 0 for s in self.widths):
                raise InvalidInputError("widths must be positive")
        if self.family == "kdv-line" and not self.kappa > 0:
            raise InvalidInputError("kdv-line needs kappa > 0")
        if self.family == "custom-grid":
            if self.values is None or self.grid is None:
                raise InvalidInputError("custom-grid needs sampled values and a grid")
            vals = np.asarray(self.values)
            if vals.shape != self.grid.shape:
                raise InvalidInputError(f"custom-grid values have shape {vals.shape}, grid is {self.grid.shape}")
            if not np.all(np.isfinite(vals)):
                raise InvalidInputError("custom-grid values contain NaN or Inf")
            if np.iscomplexobj(vals) and np.max(np.abs(vals.imag)) > 1e-12 * max(1.0, np.max(np.abs(vals))):
                raise InvalidInputError("custom-grid values must be real")
            object.__setattr__(self, "values", np.array(np.real(vals), dtype=float))

    @property
    def localized(self) -> bool:
        """Exponentially localized in both directions (by construction)."""
        return self.family in ("gaussian", "multi-gaussian", "exponential-bump")

    @property
    def scale(self) -> float:
        if self.family == "kdv-line":
            return 2.0 * self.kappa**2
        if self.family == "custom-grid":
            return float(np.max(np.abs(self.values)))
        return float(sum(abs(a) for a in self.amplitudes))

    def evaluate(self, x1, x2):
        """Closed-form values at arbitrary points (analytic families only)."""
        x1, x2 = np.asarray(x1, dtype=float), np.asarray(x2, dtype=float)
        if self.family == "custom-grid":
            raise InvalidInputError("custom-grid potentials have no closed form")
        if self.family == "kdv-line":
            return -2.0 * self.kappa**2 / np.cosh(self.kappa * (x1 - self.phi)) ** 2 + 0.0 * x2
        out = np.zeros(np.broadcast(x1, x2).shape)
        for a, s, (c1, c2) in zip(self.amplitudes, self.widths, self.centers):
            r2 = (x1 - c1) ** 2 + (x2 - c2) ** 2
            if self.family == "exponential-bump":
                out += a / np.cosh(np.sqrt(r2) / s)
            else:
                out += a * np.exp(-r2 / s**2)
        return out


def gaussian(A: float = 1.0, sigma: float = 1.0, center=(0.0, 0.0)) -> PotentialSpec:
    return PotentialSpec("gaussian", (A,), (sigma,), (tuple(center),))


@dataclass(frozen=True)
class Potential:
    field: Field2D
    spec: PotentialSpec
    decay_exponent_estimate: float
    sup_norm: float
    super_exponential: bool = False
    decay_verified: bool = True

    @property
    def grid(self) -> Grid2D:
        return self.field.grid

    @property
    def values(self) -> np.ndarray:
        return self.field.values

    @property
    def localized(self) -> bool:
        return self.spec.localized


def _boundary_ring(values, axes=(0, 1)):
    parts = []
    if 0 in axes:
        parts += [values[:2, :], values[-2:, :]]
    if 1 in axes:
        parts += [values[:, :2], values[:, -2:]]
    return max(float(np.max(np.abs(p))) for p in parts)


def sample_potential(spec: PotentialSpec, grid: Grid2D) -> Potential:
    """Sample a spec on the grid; rejects fields that leak onto the boundary ring."""
    if spec.family == "custom-grid":
        if spec.grid != grid:
            raise InvalidInputError(f"custom-grid data live on {spec.grid}, requested {grid}")
        values = spec.values
    else:
        values = spec.evaluate(*grid.mesh)
    scale = spec.scale
    # kdv-line is not localized in x2; only the x1 edges are checked
    axes = (0,) if spec.family == "kdv-line" else (0, 1)
    if scale > 0 and spec.family != "custom-grid" and _boundary_ring(values, axes) > LEAK_TOL * scale:
        raise BoundaryLeakError(
            f"boundary-ring maximum {_boundary_ring(values, axes):.3e} exceeds {LEAK_TOL:g} x amplitude; enlarge L"
        )
    f = Field2D(grid, values, real=True)
    sup = f.sup_norm()
    alpha, superexp = 0.0, False
    if sup > 0 and spec.family != "kdv-line":
        try:
            alpha, superexp = _fit_decay(f)
        except DegenerateFitError:
            pass
    return Potential(f, spec, alpha, sup, superexp, decay_verified=spec.family != "custom-grid")


def translate_spec(spec: PotentialSpec, y) -> PotentialSpec:
    """Spec of ``v_y(x) = v(x - y)``."""
    y = np.asarray(y, dtype=float).reshape(2)
    if spec.family == "kdv-line":
        return replace(spec, phi=spec.phi + y[0])
    if spec.family == "custom-grid":
        g = spec.grid
        phase = np.exp(-1j * (g.xi[:, None] * y[0] + g.xi[None, :] * y[1]))
        # the Nyquist row/column has no symmetric partner; drop it to stay real
        phase[g.N // 2, :] = 0.0
        phase[:, g.N // 2] = 0.0
        shifted = g.ifft(phase * g.fft(spec.values)).real
        return replace(spec, values=shifted)
    centers = tuple((c1 + y[0], c2 + y[1]) for c1, c2 in spec.centers)
    return replace(spec, centers=centers)


def radial_max_profile(f: Field2D):
    """Max |v| over radial shells of width h, up to the inscribed radius L/2."""
    g = f.grid
    x1, x2 = g.mesh
    r = np.hypot(x1, x2)
    inside = r < 0.5 * g.L
    idx = (r[inside] / g.h).astype(int)
    prof = np.zeros(idx.max() + 1)
    np.maximum.at(prof, idx, np.abs(f.values[inside]))
    radii = (np.arange(len(prof)) + 0.5) * g.h
    return radii, prof


def _fit_decay(f: Field2D):
    radii, prof = radial_max_profile(f)
    sig = np.nonzero(prof > SHELL_FLOOR)[0]
    if len(sig) < 4:
        raise DegenerateFitError(f"only {len(sig)} radial shells exceed {SHELL_FLOOR:g}")
    r_hi = radii[sig[-1]]
    use = sig[radii[sig] >= 0.5 * r_hi]
    if len(use) < 4:
        use = sig[-4:]
    slope = -np.polyfit(radii[use], np.log(prof[use]), 1)[0]
    # curvature test: compare slopes on the two halves of the window
    half = len(use) // 2
    superexp = False
    if half >= 2:
        s_in = -np.polyfit(radii[use[:half]], np.log(prof[use[:half]]), 1)[0]
        s_out = -np.polyfit(radii[use[half:]], np.log(prof[use[half:]]), 1)[0]
        superexp = s_in > 0 and s_out > 1.2 * s_in
    return max(0.0, float(slope)), bool(superexp)


def decay_rate_estimate(p: Potential) -> float:
    """Log-slope of the radial max profile over the outer half of the
    significant radius range. Check ``p.super_exponential`` for Gaussian-type
    decay, where the slope keeps growing with the window."""
    return _fit_decay(p.field)[0]


def kdv_soliton_profile(kappa: float, phi: float, x):
    """``-2 kappa^2 / cosh^2(kappa (x - phi))``."""
    if not kappa > 0:
        raise InvalidInputError("kappa must be positive")
    return -2.0 * kappa**2 / np.cosh(kappa * (np.asarray(x, dtype=float) - phi)) ** 2


def traveling_wave_field(V: Potential, c, E: float) -> np.ndarray:
    """Pointwise ``-c . grad V - nv_rhs(V)``; vanishes for ``v(x, t) = V(x - ct)``."""
    if not E > 0:
        raise InvalidInputError(f"energy must be positive, got E={E}")
    c = np.asarray(c, dtype=float).reshape(2)
    g = V.grid
    state = NVState.from_v(V.field, E)
    dv = -(c[0] * g.deriv(V.values, (1, 0)) + c[1] * g.deriv(V.values, (0, 1)))
    return dv - nv_rhs(state).values


def traveling_wave_residual(V: Potential, c, E: float) -> float:
    """Discrete L2 norm of :func:`traveling_wave_field`."""
    return V.grid.l2_norm(traveling_wave_field(V, c, E))
