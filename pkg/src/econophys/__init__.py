"""Statistical-mechanics toolkit for money and income distributions.

The modules cover the full pipeline: kinetic exchange simulation
(:mod:`econophys.kinetic`), drift-diffusion income dynamics
(:mod:`econophys.fokker_planck`), two-class distribution fitting
(:mod:`econophys.classfit`), Lorenz/Gini analytics
(:mod:`econophys.inequality`) and dataset ingest
(:mod:`econophys.ingest`), orchestrated by the ``econophys`` command
line (:mod:`econophys.cli`).
"""

from .core import BinnedDensity, CcdfCurve, MoneySample, bin_density, build_ccdf

__version__ = "0.1.0"

__all__ = [
    "MoneySample",
    "BinnedDensity",
    "CcdfCurve",
    "build_ccdf",
    "bin_density",
    "__version__",
]
