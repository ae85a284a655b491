"""kzt: Kloosterman sums, Hecke coefficient algebra, Bessel-kernel test functions
and explicit density-bound calculators."""

__version__ = "0.1.0"

__all__ = ["arith", "dirichlet", "kloosterman", "heckealg", "analytic", "geomside", "densitycalc", "checks", "cli"]
