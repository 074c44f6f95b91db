"""Exact arithmetic toolkit for sums of products of few-variable polynomials.

The package is organized as:

  algebra  -- exact rational / prime-field coefficients, sparse multivariate
              polynomials, and the scalar utilities (primes, integer roots).
  circuit  -- the circuit model (weighted sums of products of polynomials that
              each touch few variables) and its transforms.
  nw       -- the combinatorial hard-polynomial family built from low-degree
              univariates over a prime field.
  measure  -- the projected-shifted-partial-derivative rank measure, random
              restrictions, and the large-parameter ratio calculators.
  pit      -- set designs, hitting-set enumeration, and the blackbox
              zero-testing drivers (deterministic and randomized).
  cli      -- the `fewvar` command-line entry point.
"""

__version__ = "0.1.0"

from .algebra import SparsePolynomial, GFElem, bertrand_prime, is_prime
from .circuit import FewVarCircuit, FactorPoly, RestrictionMask

__all__ = [
    "SparsePolynomial",
    "GFElem",
    "FewVarCircuit",
    "FactorPoly",
    "RestrictionMask",
    "bertrand_prime",
    "is_prime",
    "__version__",
]
