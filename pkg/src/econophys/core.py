"""Shared domain types: money samples, binned densities, and CCDF curves.

Conventions used throughout the package:

* money/income is real-valued, in an arbitrary currency unit;
* the complementary cumulative distribution c(r) counts the fraction of
  the population with income *at or above* r, so c starts at 1 for r at
  or below the smallest observation;
* histogram masses are normalized to sum to 1, empty bins kept at zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MASS_TOL = 1e-9


def _as_float_array(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class MoneySample:
    """A set of non-negative money/income amounts for one population.

    ``unit_label`` is free text ("USD 2018", "kWh/yr", ...); no unit
    conversion happens anywhere in this package.
    """

    values: np.ndarray
    unit_label: str = "money"

    def __post_init__(self):
        arr = _as_float_array(self.values, "values")
        if arr.size == 0:
            raise ValueError("no data")
        if not np.all(np.isfinite(arr)):
            raise ValueError("sample contains non-finite values")
        if np.any(arr < 0):
            bad = float(arr[arr < 0][0])
            raise ValueError(f"sample contains negative value {bad}")
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class BinnedDensity:
    """Histogram probability masses on a fixed grid of bin edges.

    ``edges`` has K+1 strictly increasing entries, ``masses`` has K
    non-negative entries summing to 1 (within 1e-9).
    """

    edges: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        edges = _as_float_array(self.edges, "edges")
        masses = _as_float_array(self.masses, "masses")
        if edges.size < 2:
            raise ValueError("need at least two bin edges")
        if np.any(np.diff(edges) <= 0):
            raise ValueError("bin edges must be strictly increasing")
        if masses.size != edges.size - 1:
            raise ValueError(
                f"got {masses.size} masses for {edges.size - 1} bins"
            )
        if np.any(masses < 0):
            raise ValueError("bin masses must be non-negative")
        total = masses.sum()
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"bin masses sum to {total!r}, expected 1")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "masses", masses)

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])


@dataclass(frozen=True)
class CcdfCurve:
    """Complementary cumulative distribution: fraction with income >= r.

    Points are (r, c) with r strictly increasing and c non-increasing in
    [0, 1].  Empirical curves built from samples carry one point per
    distinct value; published tables are carried verbatim.
    """

    r: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        r = _as_float_array(self.r, "r")
        c = _as_float_array(self.c, "c")
        if r.size == 0:
            raise ValueError("no data")
        if r.size != c.size:
            raise ValueError("r and c must have equal length")
        if np.any(np.diff(r) <= 0):
            raise ValueError("income values must be strictly increasing")
        if np.any(np.diff(c) > 0):
            raise ValueError("cumulative fractions must be non-increasing")
        if c[0] > 1.0 or c[-1] < 0.0:
            raise ValueError("cumulative fractions must lie in [0, 1]")
        if r[0] == 0.0 and c[0] != 1.0:
            raise ValueError("curve starting at r=0 must start at c=1")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "c", c)

    def __len__(self) -> int:
        return self.r.size

    @property
    def points(self):
        return list(zip(self.r.tolist(), self.c.tolist()))

    def mean_income(self) -> float:
        """Mean income via the trapezoidal integral of the curve.

        Uses the identity <r> = integral of c(r) dr over [0, inf).  The
        segment from r=0 to the first point is included exactly (c = 1
        there); the tail beyond the last point is dropped, which is
        negligible whenever the curve extends until c is small.
        """
        head = self.r[0] * 1.0 if self.r[0] > 0 else 0.0
        return head + float(np.trapezoid(self.c, self.r))

    def interp_c(self, r):
        """Piecewise-linear interpolation of c at income r.

        Clamps to c=1 left of the data (the whole population sits at or
        above any income below the smallest observed) and to the last c
        on the right.
        """
        return np.interp(r, self.r, self.c, left=1.0, right=float(self.c[-1]))


def build_ccdf(samples: MoneySample) -> CcdfCurve:
    """Empirical CCDF of a sample, evaluated at its sorted distinct values.

    c(r) = (#values >= r) / N, so the first point of the curve always has
    c = 1.  Scaling every sample by a positive factor scales r and leaves
    c untouched.
    """
    values = samples.values
    n = values.size
    distinct, counts = np.unique(values, return_counts=True)
    below = np.concatenate(([0], np.cumsum(counts)[:-1]))  # strictly below
    c = (n - below) / n
    return CcdfCurve(distinct, c)


def bin_density(samples: MoneySample, edges) -> BinnedDensity:
    """Histogram the sample onto the given edges, normalized to unit mass.

    Every sample must fall inside [edges[0], edges[-1]]; a sample outside
    the grid is an error naming the offending value.  Values exactly on
    the last edge land in the last bin.
    """
    edges = _as_float_array(edges, "edges")
    values = samples.values
    outside = (values < edges[0]) | (values > edges[-1])
    if np.any(outside):
        bad = float(values[outside][0])
        raise ValueError(
            f"sample value {bad} outside bin grid [{edges[0]}, {edges[-1]}]"
        )
    counts, _ = np.histogram(values, bins=edges)
    return BinnedDensity(edges, counts / values.size)
