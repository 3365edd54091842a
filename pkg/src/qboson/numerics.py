"""Scalar backends and truncated power-series arithmetic.

Every coefficient extraction in this package is a read from a truncated
formal power series; there are no numerical contour integrals anywhere.
Two interchangeable scalar backends are provided:

* rational -- ``fractions.Fraction``; arithmetic is exact and equality is
  decidable.  Default for small and moderate systems.
* float    -- ``mpmath.mpf`` at a configurable mantissa precision (default
  256 bits).  Used for large-N scaling sweeps.  Results computed on this
  backend are accepted only after recomputation at doubled precision
  agrees to a relative tolerance (see ``verify_at_double_precision``).
"""

from __future__ import annotations

import contextlib
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import mpmath


class InputError(ValueError):
    """Invalid model parameters or malformed request (CLI exit code 2)."""


class PrecisionError(ArithmeticError):
    """Float-backend result failed the doubled-precision check (exit code 3)."""


class SolverError(RuntimeError):
    """Iterative or linear solver failed to converge (exit code 4)."""


DEFAULT_PREC_BITS = 256
DEFAULT_VERIFY_RTOL = 1e-12


# ---------------------------------------------------------------------------
# Scalar backends
# ---------------------------------------------------------------------------

class RationalBackend:
    """Exact scalars: arbitrary-size ``fractions.Fraction``."""

    kind = "rational"
    exact = True

    def ratio(self, num, den=1) -> Fraction:
        return Fraction(num, den)

    def integer(self, n: int) -> Fraction:
        return Fraction(n)

    def parse(self, text: str) -> Fraction:
        """Parse 'a/b', an integer, or a terminating decimal, exactly."""
        return Fraction(text)

    def workprec(self):
        return contextlib.nullcontext()

    def to_float(self, x) -> float:
        return float(x)

    def __repr__(self):
        return "RationalBackend()"


class FloatBackend:
    """Arbitrary-precision binary floats via mpmath.

    All arithmetic must run inside ``with backend.workprec():`` so that
    intermediate results carry ``prec_bits`` of mantissa.  The module-level
    entry points of this package do that themselves.
    """

    kind = "float"
    exact = False

    def __init__(self, prec_bits: int = DEFAULT_PREC_BITS):
        if prec_bits < 53:
            raise InputError(f"prec_bits must be >= 53, got {prec_bits}")
        self.prec_bits = prec_bits

    def ratio(self, num, den=1) -> mpmath.mpf:
        with self.workprec():
            return mpmath.mpf(num) / den

    def integer(self, n: int) -> mpmath.mpf:
        with self.workprec():
            return mpmath.mpf(n)

    def parse(self, text: str) -> mpmath.mpf:
        frac = Fraction(text)
        return self.ratio(frac.numerator, frac.denominator)

    def workprec(self):
        return mpmath.workprec(self.prec_bits)

    def to_float(self, x) -> float:
        return float(x)

    def doubled(self) -> "FloatBackend":
        return FloatBackend(2 * self.prec_bits)

    def __repr__(self):
        return f"FloatBackend(prec_bits={self.prec_bits})"


RATIONAL = RationalBackend()

Backend = RationalBackend | FloatBackend


def rel_close(a, b, rtol) -> bool:
    """|a - b| <= rtol * max(|a|, |b|, 1)."""
    scale = max(abs(a), abs(b), 1)
    return abs(a - b) <= rtol * scale


def verify_at_double_precision(compute: Callable[[Backend], dict],
                               backend: FloatBackend,
                               rtol: float = DEFAULT_VERIFY_RTOL) -> dict:
    """Run ``compute`` at P and 2P bits; accept only if all values agree.

    ``compute`` maps a backend to a flat dict of scalar values.  Returns the
    P-bit result.  Raises PrecisionError naming the first offending key.
    Coefficient growth of F^N is hard to bound a priori, so acceptance by
    recomputation is the contract of the float backend.
    """
    with backend.workprec():
        base = compute(backend)
    doubled = backend.doubled()
    with doubled.workprec():
        check = compute(doubled)
    with doubled.workprec():
        for key, val in base.items():
            ref = check[key]
            if not rel_close(mpmath.mpf(val), mpmath.mpf(ref), rtol):
                raise PrecisionError(
                    f"value {key!r} changed under doubled precision: "
                    f"{mpmath.nstr(mpmath.mpf(val), 20)} vs "
                    f"{mpmath.nstr(mpmath.mpf(ref), 20)} (rtol={rtol})")
    return base


# ---------------------------------------------------------------------------
# q bookkeeping
# ---------------------------------------------------------------------------

REGIME_GENERIC = "minus_one_to_one"   # |q| < 1, covers negative q down to -1
REGIME_GREATER_ONE = "greater_one"    # q > 1
REGIME_UNITY = "unity"                # q = 1 (free-particle degeneration)


@dataclass(frozen=True)
class QValue:
    """Deformation parameter with regime tag and geometric ratio r.

    r = q for |q| < 1 and r = 1/q for q > 1, so |r| < 1 off the unity
    regime; r is the common ratio of every geometric resummation in the
    diffusion-coefficient formula.
    """

    q: object
    regime: str
    r: object
    backend: Backend

    @property
    def is_unity(self) -> bool:
        return self.regime == REGIME_UNITY

    def require_series_regime(self, what: str = "this operation"):
        if self.is_unity:
            raise InputError(f"{what} is undefined at q = 1; "
                             "use the free-particle values J = Delta = p")


def qvalue(q, backend: Backend = RATIONAL) -> QValue:
    """Classify q (rates are positive only for q > -1)."""
    if q <= -1:
        raise InputError(f"q must be > -1, got {q}")
    if q == 1:
        return QValue(q=q, regime=REGIME_UNITY, r=None, backend=backend)
    if q > 1:
        with backend.workprec():
            r = backend.integer(1) / q
        return QValue(q=q, regime=REGIME_GREATER_ONE, r=r, backend=backend)
    return QValue(q=q, regime=REGIME_GENERIC, r=q, backend=backend)


def parse_qvalue(text: str, backend: Backend = RATIONAL) -> QValue:
    return qvalue(backend.parse(text), backend)


# ---------------------------------------------------------------------------
# Truncated power series
# ---------------------------------------------------------------------------

class TruncSeries:
    """A formal power series truncated at a fixed degree D.

    Coefficients are backend scalars, index 0..D.  Arithmetic is closed at
    the same degree; multiplication is the Cauchy product truncated at D.
    Instances are immutable.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence):
        self.coeffs = tuple(coeffs)
        if not self.coeffs:
            raise InputError("a truncated series needs at least the constant term")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def constant(cls, value, degree: int, backend: Backend = RATIONAL):
        zero = backend.integer(0)
        return cls((value,) + (zero,) * degree)

    @classmethod
    def one(cls, degree: int, backend: Backend = RATIONAL):
        return cls.constant(backend.integer(1), degree, backend)

    def coeff(self, k: int):
        if not 0 <= k <= self.degree:
            raise InputError(f"coefficient index {k} out of range 0..{self.degree}")
        return self.coeffs[k]

    def _check_degree(self, other: "TruncSeries"):
        if self.degree != other.degree:
            raise InputError(
                f"degree mismatch: {self.degree} vs {other.degree}")

    def add(self, other: "TruncSeries") -> "TruncSeries":
        self._check_degree(other)
        return TruncSeries([a + b for a, b in zip(self.coeffs, other.coeffs)])

    def mul(self, other: "TruncSeries") -> "TruncSeries":
        self._check_degree(other)
        a, b = self.coeffs, other.coeffs
        out = []
        for k in range(len(a)):
            acc = a[0] * b[k]
            for i in range(1, k + 1):
                acc += a[i] * b[k - i]
            out.append(acc)
        return TruncSeries(out)

    def pow(self, n: int, backend: Backend = RATIONAL) -> "TruncSeries":
        """Binary exponentiation; O(D^2 log n) scalar multiplications."""
        if n < 0:
            raise InputError("series_pow exponent must be nonnegative")
        result = TruncSeries.one(self.degree, backend)
        base = self
        while n:
            if n & 1:
                result = result.mul(base)
            n >>= 1
            if n:
                base = base.mul(base)
        return result

    def scale_arg(self, c) -> "TruncSeries":
        """Substitute z -> c*z: coefficient k picks up a factor c^k."""
        out = [self.coeffs[0]]
        power = 1
        for coeff in self.coeffs[1:]:
            power = power * c
            out.append(coeff * power)
        return TruncSeries(out)

    def __add__(self, other):
        return self.add(other)

    def __mul__(self, other):
        return self.mul(other)

    def __eq__(self, other):
        return isinstance(other, TruncSeries) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        head = ", ".join(str(c) for c in self.coeffs[:4])
        tail = ", ..." if self.degree > 3 else ""
        return f"TruncSeries([{head}{tail}], D={self.degree})"


def series_add(a: TruncSeries, b: TruncSeries) -> TruncSeries:
    return a.add(b)


def series_mul(a: TruncSeries, b: TruncSeries) -> TruncSeries:
    return a.mul(b)


def series_pow(a: TruncSeries, n: int, backend: Backend = RATIONAL) -> TruncSeries:
    return a.pow(n, backend)


def series_coeff(a: TruncSeries, k: int):
    return a.coeff(k)


def series_scale_arg(a: TruncSeries, c) -> TruncSeries:
    return a.scale_arg(c)


def geometric_factor(r, a: int):
    """Closed form of sum_{i>=1} r^(i*a)  =  r^a / (1 - r^a), |r| < 1."""
    if a < 1:
        raise InputError("geometric_factor needs a >= 1 (a = 0 diverges)")
    if not abs(r) < 1:
        raise InputError(f"geometric_factor needs |r| < 1, got r = {r}")
    ra = r ** a
    return ra / (1 - ra)
