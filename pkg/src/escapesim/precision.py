"""Scalar arithmetic modes.

All derivation and strategy code is written against the small function set
below so the same formulas run in two modes:

* ``standard`` — IEEE binary64 via the ``math`` module.
* ``extended`` — gmpy2/MPFR with a 128-bit significand, for cascades whose
  decision periods underflow the float64 precision guard.

The float branch always comes first: it is the fallback hot path.
"""

from __future__ import annotations

import math

import gmpy2

from .errors import DomainError

STANDARD = "standard"
EXTENDED = "extended"

EXTENDED_PRECISION_BITS = 128


def setup_mode(mode: str) -> None:
    """Configure the thread-local MPFR context. Call once per run/thread."""
    if mode not in (STANDARD, EXTENDED):
        raise DomainError(f"unknown precision mode {mode!r}")
    if mode == EXTENDED:
        gmpy2.get_context().precision = EXTENDED_PRECISION_BITS


def from_float(x: float, mode: str):
    """Lift a float into the mode's scalar type (exact: binary64 embeds in MPFR)."""
    if mode == STANDARD:
        return float(x)
    return gmpy2.mpfr(x)


def to_float(x) -> float:
    if type(x) is float:
        return x
    return float(x)


def sqrt(x):
    if type(x) is float:
        return math.sqrt(x)
    return gmpy2.sqrt(x)


def hypot(x, y):
    # sqrt(x*x + y*y) rather than math.hypot: CPython's hypot is a custom
    # scaled algorithm whose last bit can differ from the compiled kernels'
    # sqrt form; our magnitudes never approach over/underflow.
    if type(x) is float and type(y) is float:
        return math.sqrt(x * x + y * y)
    return gmpy2.sqrt(x * x + y * y)


def sin(x):
    if type(x) is float:
        return math.sin(x)
    return gmpy2.sin(x)


def cos(x):
    if type(x) is float:
        return math.cos(x)
    return gmpy2.cos(x)


def tan(x):
    if type(x) is float:
        return math.tan(x)
    return gmpy2.tan(x)


def asin(x):
    if type(x) is float:
        return math.asin(x)
    return gmpy2.asin(x)


def acos(x):
    if type(x) is float:
        return math.acos(x)
    return gmpy2.acos(x)


def atan2(y, x):
    if type(y) is float and type(x) is float:
        return math.atan2(y, x)
    return gmpy2.atan2(y, x)


def pi_for(x):
    """π in the scalar type of ``x``."""
    if type(x) is float:
        return math.pi
    return gmpy2.const_pi()


def is_finite(x) -> bool:
    if type(x) is float:
        return math.isfinite(x)
    return bool(gmpy2.is_finite(x))


def ulp(x) -> float:
    """Unit in the last place of |x| in x's own precision, as a float."""
    if type(x) is float:
        return math.ulp(x)
    if x == 0:
        return math.ulp(0.0)
    # MPFR: |x| = m * 2^e with 0.5 <= m < 1; spacing is 2^(e - precision).
    e = gmpy2.get_exp(x)
    return math.ldexp(1.0, e - gmpy2.get_context().precision)
