"""Lorenz curves, Gini coefficients, and inequality-saturation detection.

Gini is available through four routes that cross-check each other:

* trapezoidal area under an empirical Lorenz curve (the workhorse);
* the O(n^2) pairwise mean-difference formula (reference oracle, exact
  match with the trapezoidal route for piecewise-linear curves);
* the closed form G = (1+f)/2 of the two-class decomposition, where f is
  the upper-class income share;
* G = 1/2 exactly for the analytic exponential Lorenz curve.

Population-weighted variants treat each record (a country, say) as a
block of identical persons, which is how per-capita panels enter.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import MoneySample


@dataclass(frozen=True)
class LorenzCurve:
    """Piecewise-linear Lorenz curve from (0,0) to (1,1).

    x is the cumulative population share, y the cumulative share of
    income (or energy, or emissions) held by the poorest fraction x;
    sorting by income makes the curve convex and keeps y <= x.
    """

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 1 or x.size < 2 or x.shape != y.shape:
            raise ValueError("need matching 1-D x and y with at least 2 points")
        if x[0] != 0.0 or y[0] != 0.0 or abs(x[-1] - 1.0) > 1e-12 or abs(y[-1] - 1.0) > 1e-12:
            raise ValueError("Lorenz curve must run from (0,0) to (1,1)")
        if np.any(np.diff(x) < 0) or np.any(np.diff(y) < -1e-15):
            raise ValueError("Lorenz curve must be non-decreasing")
        if np.any(y - x > 1e-9):
            raise ValueError("Lorenz curve must satisfy y <= x")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def points(self):
        return list(zip(self.x.tolist(), self.y.tolist()))


@dataclass(frozen=True)
class CountryRecord:
    """One country-year: total population and total quantity consumed."""

    code: str
    population: float
    quantity: float
    per_capita: float = field(init=False)

    def __post_init__(self):
        if not self.population > 0:
            raise ValueError(f"{self.code}: population must be positive")
        if self.quantity < 0:
            raise ValueError(f"{self.code}: quantity must be non-negative")
        object.__setattr__(self, "per_capita", self.quantity / self.population)


@dataclass(frozen=True)
class GiniSeries:
    """Gini coefficient per year, years strictly increasing."""

    years: np.ndarray
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        years = np.asarray(self.years, dtype=int)
        values = np.asarray(self.values, dtype=float)
        if years.ndim != 1 or years.size == 0 or years.shape != values.shape:
            raise ValueError("need matching non-empty years and values")
        if np.any(np.diff(years) <= 0):
            raise ValueError("years must be strictly increasing")
        if np.any((values < 0) | (values > 1)):
            raise ValueError("Gini values must lie in [0, 1]")
        object.__setattr__(self, "years", years)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.years.size


@dataclass(frozen=True)
class SaturationReport:
    saturated: bool
    level: float
    tol: float
    min_run: int
    year: int | None = None
    run_length: int = 0
    pre_slope: float | None = None


def lorenz_from_samples(samples: MoneySample) -> LorenzCurve:
    """Empirical Lorenz curve of individual amounts.

    Sort ascending; after k of N values the curve reaches
    (k/N, partial_sum/total).
    """
    v = np.sort(samples.values)
    total = v.sum()
    if total <= 0:
        raise ValueError("total must be positive to build a Lorenz curve")
    n = v.size
    x = np.arange(n + 1) / n
    y = np.concatenate(([0.0], np.cumsum(v))) / total
    y[-1] = 1.0
    return LorenzCurve(x, y)


def lorenz_weighted(records) -> LorenzCurve:
    """Population-weighted Lorenz curve of per-capita quantities.

    Countries are sorted by per-capita consumption; x accumulates
    population share and y quantity share.  Input order is irrelevant.
    """
    records = list(records)
    if len(records) < 2:
        raise ValueError("need at least two records")
    order = sorted(records, key=lambda rec: rec.per_capita)
    pop = np.array([rec.population for rec in order], dtype=float)
    qty = np.array([rec.quantity for rec in order], dtype=float)
    if qty.sum() <= 0:
        raise ValueError("total quantity must be positive")
    x = np.concatenate(([0.0], np.cumsum(pop))) / pop.sum()
    y = np.concatenate(([0.0], np.cumsum(qty))) / qty.sum()
    x[-1] = 1.0
    y[-1] = 1.0
    return LorenzCurve(x, y)


def gini_from_lorenz(curve: LorenzCurve) -> float:
    """G = 1 - 2 * area under the Lorenz curve (trapezoidal).

    Trapezoids are exact for the piecewise-linear empirical curve, which
    makes this route agree with :func:`gini_pairwise` to float precision.
    """
    area = float(np.trapezoid(curve.y, curve.x))
    return 1.0 - 2.0 * area


def gini_pairwise(values, weights=None) -> float:
    """Reference Gini: normalized mean absolute pairwise difference.

    G = sum_ij w_i w_j |v_i - v_j| / (2 (sum w)^2 mu).  Quadratic in the
    input size; it exists to check the Lorenz-curve route, not to be fast.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("need a non-empty 1-D value array")
    if np.any(v < 0):
        raise ValueError("values must be non-negative")
    if weights is None:
        w = np.ones_like(v)
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != v.shape:
            raise ValueError("weights must match values")
        if np.any(w < 0) or w.sum() <= 0:
            raise ValueError("weights must be non-negative with positive sum")
    mu = float(np.dot(w, v) / w.sum())
    if mu <= 0:
        raise ValueError("weighted mean must be positive")
    diffs = np.abs(v[:, None] - v[None, :])
    total = float(w @ diffs @ w)
    return total / (2.0 * w.sum() ** 2 * mu)


def exponential_lorenz(x):
    """Analytic Lorenz curve of the exponential distribution.

    y(x) = x + (1-x) ln(1-x), with y(1) = 1 as the limit.  Its Gini
    coefficient is exactly 1/2.
    """
    x_arr = np.asarray(x, dtype=float)
    if np.any((x_arr < 0) | (x_arr > 1)):
        raise ValueError("population share must lie in [0, 1]")
    one_minus = 1.0 - x_arr
    y = np.where(
        one_minus > 0,
        x_arr + one_minus * np.log(np.where(one_minus > 0, one_minus, 1.0)),
        1.0,
    )
    return float(y) if np.isscalar(x) else y


def gini_two_class(f: float) -> float:
    """Gini of the two-class decomposition, G = (1 + f)/2.

    Exact when the upper class holds an income share f with negligible
    population while the lower class stays exponential; f = 0 recovers
    the pure exponential value 1/2, f = 1 the maximal value 1.
    """
    if not 0 <= f <= 1:
        raise ValueError("upper income share must lie in [0, 1]")
    return (1.0 + f) / 2.0


def detect_saturation(
    series: GiniSeries,
    level: float = 0.5,
    tol: float = 0.02,
    min_run: int = 5,
) -> SaturationReport:
    """Earliest year from which the series stays within level +- tol.

    Saturation requires every subsequent point to sit in the band and the
    run to contain at least ``min_run`` points.  The report carries the
    least-squares slope of the points before the saturation year (None
    when fewer than two).  A series that never settles is a result, not
    an error.
    """
    if len(series) < min_run:
        raise ValueError(f"need at least min_run={min_run} points")
    inside = np.abs(series.values - level) <= tol
    start = len(series)
    while start > 0 and inside[start - 1]:
        start -= 1
    run_length = len(series) - start
    if run_length < min_run:
        return SaturationReport(False, level, tol, min_run)
    pre_slope = None
    if start >= 2:
        pre_slope = float(
            np.polyfit(series.years[:start].astype(float), series.values[:start], 1)[0]
        )
    return SaturationReport(
        True,
        level,
        tol,
        min_run,
        year=int(series.years[start]),
        run_length=run_length,
        pre_slope=pre_slope,
    )
