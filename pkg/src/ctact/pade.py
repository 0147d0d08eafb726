"""Shared rational core: a [3/3] Pade approximant of tanh in u = x*x.

All four smooth activations reduce to one fixed-shape rational evaluation

    R(x) = x * P(x*x) / Q(x*x)

with degree-3 polynomials P and Q whose coefficients are exact rationals,
stored as their round-to-nearest binary32 values.  Both polynomials are
evaluated by Horner's rule, so every call costs exactly

    1 multiply (u = x*x) + 3 multiplies + 3 adds per polynomial
    + 1 divide + 1 final multiply

independent of the input.  Q(u) >= 1 for u >= 0 and Q has no real zeros, so
the divide cannot trap on any finite input.

R is odd bit-exactly: negating x flips only the sign of the final multiply,
because u = (-x)*(-x) rounds to the identical product.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._ops import f_add, f_div, f_mul

__all__ = [
    "PadeCoefficients",
    "NUMERATOR_EXACT",
    "DENOMINATOR_EXACT",
    "DEFAULT_COEFFICIENTS",
    "rational_tanh",
]

# Exact coefficients, low order first: P(u) = 1 + (5/39)u + ..., likewise Q.
NUMERATOR_EXACT: tuple[Fraction, ...] = (
    Fraction(1),
    Fraction(5, 39),
    Fraction(2, 715),
    Fraction(1, 135135),
)
DENOMINATOR_EXACT: tuple[Fraction, ...] = (
    Fraction(1),
    Fraction(6, 13),
    Fraction(10, 429),
    Fraction(4, 19305),
)


@dataclass(frozen=True)
class PadeCoefficients:
    """Binary32 coefficient set for the rational core, low order first."""

    numerator: tuple
    denominator: tuple

    def __post_init__(self) -> None:
        if len(self.numerator) != 4 or len(self.denominator) != 4:
            raise ValueError("both polynomials must have exactly 4 coefficients")
        if self.numerator[0] != np.float32(1.0) or self.denominator[0] != np.float32(1.0):
            raise ValueError("constant terms must be exactly 1.0")


DEFAULT_COEFFICIENTS = PadeCoefficients(
    numerator=tuple(np.float32(float(c)) for c in NUMERATOR_EXACT),
    denominator=tuple(np.float32(float(c)) for c in DENOMINATOR_EXACT),
)

_P0, _P1, _P2, _P3 = DEFAULT_COEFFICIENTS.numerator
_Q0, _Q1, _Q2, _Q3 = DEFAULT_COEFFICIENTS.denominator


def _rational_tanh(x):
    """Fixed-shape kernel; accepts binary32 scalars or arrays."""
    u = f_mul(x, x)
    p = f_add(f_mul(_P3, u), _P2)
    p = f_add(f_mul(p, u), _P1)
    p = f_add(f_mul(p, u), _P0)
    q = f_add(f_mul(_Q3, u), _Q2)
    q = f_add(f_mul(q, u), _Q1)
    q = f_add(f_mul(q, u), _Q0)
    return f_mul(x, f_div(p, q))


def rational_tanh(x) -> np.float32:
    """Evaluate the rational core at a finite binary32 scalar.

    Accurate as a tanh approximation on the clamp interval used by the
    activation kernels; callers are expected to clamp first.  The evaluation
    itself is defined for any input whose powers stay finite in binary32.
    """
    v = np.float32(x)
    if not np.isfinite(v):
        raise ValueError(f"input must be finite in binary32, got {v!r}")
    return _rational_tanh(v)
