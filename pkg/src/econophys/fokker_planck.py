"""Drift-diffusion model of income with additive and multiplicative parts.

The income density P(r, t) evolves by

    dP/dt = d/dr [ A(r) P ] + d^2/dr^2 [ B(r) P ]

with linear drift A(r) = a0 + a1*r and diffusion B(r) = b0 + b2*r^2
combining an additive component (a0, b0) with a multiplicative one
(a1, b2).  These coefficient forms are a modeling choice: they are the
simplest ones whose stationary state interpolates between an exponential
law at low income and a power law at high income (a Pearson Type IV
shape), which is exactly the observed two-class structure.

The probability flux is J = -(A P + d(B P)/dr); both boundaries are
reflecting (zero flux), which is what makes a normalizable stationary
state possible on r >= 0.

Setting A P + d(B P)/dr = 0 and integrating gives the stationary density

    P(r) = C / B(r) * exp( -int_0^r A(s)/B(s) ds )

The inner integral has a closed form for the linear/quadratic
coefficients, so ``stationary_density`` is exact up to the grid
normalization.  The density tail falls off as r^-(2 + a1/b2); the
corresponding cumulative-distribution (Pareto) exponent is

    alpha = 1 + a1/b2
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import CcdfCurve


@dataclass(frozen=True)
class DriftDiffusionModel:
    """Coefficients of the income drift-diffusion equation.

    a0: additive drift magnitude (money/time), > 0
    a1: multiplicative drift rate (1/time), >= 0
    b0: additive diffusion (money^2/time), > 0
    b2: multiplicative diffusion rate (1/time), >= 0
    """

    a0: float
    a1: float
    b0: float
    b2: float

    def __post_init__(self):
        if not self.a0 > 0:
            raise ValueError("a0 must be positive")
        if not self.b0 > 0:
            raise ValueError("b0 must be positive")
        if self.a1 < 0 or self.b2 < 0:
            raise ValueError("a1 and b2 must be non-negative")

    def drift(self, r):
        return self.a0 + self.a1 * np.asarray(r, dtype=float)

    def diffusion(self, r):
        r = np.asarray(r, dtype=float)
        return self.b0 + self.b2 * r * r

    @property
    def temperature(self) -> float:
        """Exponential temperature b0/a0 of the additive-only limit."""
        return self.b0 / self.a0


@dataclass(frozen=True)
class DensityOnGrid:
    """Probability density values on an income grid starting at 0.

    Normalized so that the trapezoidal integral over the grid is 1
    (within 1e-6); values are non-negative.
    """

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.size < 3:
            raise ValueError("grid must be 1-D with at least 3 points")
        if grid[0] != 0.0:
            raise ValueError("grid must start at 0")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if values.shape != grid.shape:
            raise ValueError("values and grid must have equal length")
        floor = -1e-12 * max(values.max(initial=0.0), 1.0)
        if np.any(values < floor):
            raise ValueError("density values must be non-negative")
        values = np.maximum(values, 0.0)
        mass = np.trapezoid(values, grid)
        if abs(mass - 1.0) > 1e-6:
            raise ValueError(f"density integrates to {mass!r}, expected 1")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def mass(self) -> float:
        return float(np.trapezoid(self.values, self.grid))


def make_grid(r_max: float, points: int, kind: str = "uniform", r_min: float = 1e-3) -> np.ndarray:
    """Income grid on [0, r_max]: uniform, or geometric for tail work.

    The geometric grid is log-spaced from r_min to r_max with the origin
    prepended, which resolves a power-law tail with far fewer points.
    """
    if not r_max > 0:
        raise ValueError("r_max must be positive")
    if points < 3:
        raise ValueError("need at least 3 grid points")
    if kind == "uniform":
        return np.linspace(0.0, r_max, points)
    if kind == "geometric":
        if not 0 < r_min < r_max:
            raise ValueError("need 0 < r_min < r_max for a geometric grid")
        return np.concatenate(([0.0], np.geomspace(r_min, r_max, points - 1)))
    raise ValueError(f"unknown grid kind {kind!r}")


def _log_weight(model: DriftDiffusionModel, r: np.ndarray) -> np.ndarray:
    """ln of the unnormalized stationary density C=1: -phi(r) - ln B(r).

    phi(r) = int_0^r A/B ds, in closed form for A = a0 + a1 s and
    B = b0 + b2 s^2.
    """
    a0, a1, b0, b2 = model.a0, model.a1, model.b0, model.b2
    if b2 == 0.0:
        phi = (a0 * r + 0.5 * a1 * r * r) / b0
    else:
        k = np.sqrt(b2 / b0)
        phi = (a0 / np.sqrt(b0 * b2)) * np.arctan(k * r)
        phi += (a1 / (2.0 * b2)) * np.log1p(b2 * r * r / b0)
    return -phi - np.log(model.diffusion(r))


def stationary_density(model: DriftDiffusionModel, grid) -> DensityOnGrid:
    """Zero-flux stationary solution of the income equation on a grid.

    For a purely additive model (a1 = b2 = 0) this is the exponential law
    with temperature T = b0/a0.  With b2 > 0 the tail decays as
    r^-(2 + a1/b2).

    Raises if the grid is too short to capture all but 1e-6 of the
    stationary mass, suggesting a sufficient r_max.
    """
    grid = np.asarray(grid, dtype=float)
    logw = _log_weight(model, grid)
    w = np.exp(logw - logw.max())
    z = np.trapezoid(w, grid)

    r_max = grid[-1]
    tail = _tail_mass_estimate(model, r_max, w[-1])
    if tail > 1e-6 * (z + tail):
        suggested = _suggest_r_max(model, logw.max(), z, r_max)
        raise ValueError(
            f"grid r_max={r_max:g} too short: about {tail / (z + tail):.2e} "
            f"of the stationary mass lies beyond it; try r_max >= {suggested:g}"
        )
    return DensityOnGrid(grid, w / z)


def _tail_mass_estimate(model, r_max, w_end):
    # integral of the unnormalized density beyond r_max: exponential-type
    # decay gives w * B/A, power-law decay w * r/(1 + a1/b2); both are
    # per-mode exact and we take the larger to stay conservative.
    est_exp = w_end * model.diffusion(r_max) / model.drift(r_max)
    if model.b2 > 0:
        est_pow = w_end * r_max / (1.0 + model.a1 / model.b2)
        return max(est_exp, est_pow)
    return est_exp


def _suggest_r_max(model, logw_max, z, r_max):
    for _ in range(200):
        r_max *= 2.0
        w_end = float(np.exp(_log_weight(model, np.array([r_max]))[0] - logw_max))
        if _tail_mass_estimate(model, r_max, w_end) <= 0.5e-6 * z:
            return r_max
    return r_max


def stationary_flux(model: DriftDiffusionModel, density: DensityOnGrid) -> np.ndarray:
    """Numerical flux residual A P + d(B P)/dr at interior grid points.

    Vanishes (to discretization error) for the stationary density.
    """
    r = density.grid
    bp = model.diffusion(r) * density.values
    dbp = np.gradient(bp, r)
    return (model.drift(r) * density.values + dbp)[1:-1]


def stability_limit(model: DriftDiffusionModel, grid) -> float:
    """Largest stable explicit time step on this grid: dr^2 / (2 max B)."""
    grid = np.asarray(grid, dtype=float)
    dr = np.diff(grid)
    if not np.allclose(dr, dr[0], rtol=1e-9, atol=0.0):
        raise ValueError("time evolution requires a uniform grid")
    b_max = float(model.diffusion(grid).max())
    return float(dr[0] ** 2 / (2.0 * b_max))


def evolve(model: DriftDiffusionModel, initial: DensityOnGrid, dt: float, steps: int) -> DensityOnGrid:
    """Explicit conservative finite-volume update of the income equation.

    Faces sit halfway between grid nodes; the flux through each face is
    F = A P + d(B P)/dr with arithmetic-mean P and a centered difference
    of B P, and the boundary faces carry zero flux.  The trapezoidal mass
    is then conserved exactly (to float roundoff) at every step.

    ``dt`` must respect the explicit stability bound dr^2 / (2 max B),
    see :func:`stability_limit`.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    limit = stability_limit(model, initial.grid)
    if dt > limit:
        raise ValueError(
            f"dt={dt:g} violates the stability bound dr^2/(2 max B) = {limit:g}"
        )
    r = initial.grid
    h = r[1] - r[0]
    a = model.drift(r)
    b = model.diffusion(r)
    # per-node cell widths: half cells at the two boundaries
    cell = np.full(r.size, h)
    cell[0] = cell[-1] = h / 2.0

    p = initial.values.copy()
    for _ in range(steps):
        bp = b * p
        face = 0.5 * (a[:-1] * p[:-1] + a[1:] * p[1:]) + (bp[1:] - bp[:-1]) / h
        dp = np.zeros_like(p)
        dp[0] = face[0]
        dp[1:-1] = face[1:] - face[:-1]
        dp[-1] = -face[-1]
        p += dt * dp / cell
    return DensityOnGrid(r, p)


def predicted_tail_exponent(model: DriftDiffusionModel) -> float:
    """Pareto exponent alpha = 1 + a1/b2 of the stationary upper tail.

    This is the cumulative-distribution exponent; the density itself
    decays one power faster, as r^-(2 + a1/b2).  alpha = 1 (pure
    multiplicative diffusion, a1 = 0) sits on the boundary where the mean
    income diverges and is flagged with a warning.
    """
    if model.b2 == 0:
        raise ValueError("no power-law tail (pure exponential regime)")
    alpha = 1.0 + model.a1 / model.b2
    if alpha <= 1.0:
        warnings.warn(
            "alpha = 1: boundary of finite mean income", stacklevel=2
        )
    return alpha


def ccdf_from_density(density: DensityOnGrid) -> CcdfCurve:
    """Complementary cumulative curve of a density on its own grid.

    c(r_i) is the trapezoidal integral of the density from r_i to the end
    of the grid; c(0) = 1 by normalization.  The last grid point is
    dropped (c = 0 there, which a CCDF in log space cannot carry).
    """
    r = density.grid
    p = density.values
    seg = 0.5 * (p[1:] + p[:-1]) * np.diff(r)
    c = np.concatenate((np.cumsum(seg[::-1])[::-1], [0.0]))
    c = np.minimum(c / c[0], 1.0)
    return CcdfCurve(r[:-1], c[:-1])
