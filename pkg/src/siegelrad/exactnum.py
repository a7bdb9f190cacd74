"""Exact dyadic numbers, outward-rounded intervals, quadratic surds and real oracles.

Everything here is immutable.  Transcendental enclosures are delegated to
``mpmath.libmp.libmpi``, whose functions take the working precision as an
argument and keep no global state.
"""

from __future__ import annotations

import contextlib
import contextvars
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering
from typing import Callable, Iterator, Union

from mpmath.libmp import from_man_exp, libmpi

from .errors import ConsistencyViolation, DomainError, PrecisionExhausted, Terminated

__all__ = [
    "Dyadic",
    "DyadicInterval",
    "QuadraticSurd",
    "RealOracle",
    "CheckedOracle",
    "oracle_query",
    "interval_eval",
    "surd_gauss_step",
    "working_precision",
    "get_precision",
    "iexp",
    "ilog",
    "isin",
    "icos",
    "ipi",
    "isqrt_interval",
]

DEFAULT_PRECISION = 64
MAX_PRECISION = 1 << 14

_precision: contextvars.ContextVar[int] = contextvars.ContextVar(
    "siegelrad_precision", default=DEFAULT_PRECISION
)


@contextlib.contextmanager
def working_precision(bits: int) -> Iterator[int]:
    """Temporarily set the number of bits used by divisions and transcendentals."""
    if bits < 2:
        raise ValueError("working precision must be at least 2 bits")
    token = _precision.set(int(bits))
    try:
        yield int(bits)
    finally:
        _precision.reset(token)


def get_precision() -> int:
    return _precision.get()


# --------------------------------------------------------------------------
# Dyadic rationals
# --------------------------------------------------------------------------

_DYADIC_RE = re.compile(r"^\s*([+-]?\d+)\s*/\s*2\s*\^\s*(\d+)\s*$")

Number = Union[int, Fraction, "Dyadic"]


def _trailing_zeros(n: int) -> int:
    return (n & -n).bit_length() - 1


@total_ordering
class Dyadic:
    """The rational ``numerator / 2**exponent`` kept in lowest terms."""

    __slots__ = ("numerator", "exponent")

    def __init__(self, numerator: int = 0, exponent: int = 0):
        numerator = int(numerator)
        exponent = int(exponent)
        if exponent < 0:
            numerator <<= -exponent
            exponent = 0
        if numerator == 0:
            exponent = 0
        elif exponent:
            shift = min(_trailing_zeros(numerator), exponent)
            numerator >>= shift
            exponent -= shift
        object.__setattr__(self, "numerator", numerator)
        object.__setattr__(self, "exponent", exponent)

    def __setattr__(self, name, value):
        raise AttributeError("Dyadic is immutable")

    # construction -------------------------------------------------------
    @classmethod
    def coerce(cls, x) -> "Dyadic":
        if isinstance(x, Dyadic):
            return x
        if isinstance(x, bool):
            return cls(int(x))
        if isinstance(x, int):
            return cls(x)
        if isinstance(x, float):
            if not math.isfinite(x):
                raise DomainError(f"cannot represent {x} as a dyadic")
            return cls.from_fraction(Fraction(x))
        if isinstance(x, Fraction):
            return cls.from_fraction(x)
        if isinstance(x, str):
            return cls.parse(x)
        raise TypeError(f"cannot convert {type(x).__name__} to Dyadic")

    @classmethod
    def from_fraction(cls, q: Fraction) -> "Dyadic":
        den = q.denominator
        if den & (den - 1):
            raise DomainError(f"{q} is not a dyadic rational")
        return cls(q.numerator, den.bit_length() - 1)

    @classmethod
    def parse(cls, text: str) -> "Dyadic":
        """Parse ``"p/2^m"`` or an exact decimal string such as ``"0.375"``."""
        m = _DYADIC_RE.match(text)
        if m:
            return cls(int(m.group(1)), int(m.group(2)))
        try:
            q = Fraction(text.strip())
        except ValueError:
            raise DomainError(f"cannot parse dyadic from {text!r}") from None
        return cls.from_fraction(q)

    @classmethod
    def approx(cls, x, bits: int, rounding: str = "floor") -> "Dyadic":
        """Round a real (``Fraction``, int, float or decimal string) to a multiple of 2**-bits."""
        if isinstance(x, str):
            x = Fraction(x.strip())
        elif isinstance(x, Dyadic):
            x = x.to_fraction()
        else:
            x = Fraction(x)
        scaled = x * (1 << bits)
        if rounding == "floor":
            k = math.floor(scaled)
        elif rounding == "ceil":
            k = math.ceil(scaled)
        elif rounding == "nearest":
            k = round(scaled)
        else:
            raise ValueError(f"unknown rounding {rounding!r}")
        return cls(k, bits)

    # conversions --------------------------------------------------------
    def to_fraction(self) -> Fraction:
        return Fraction(self.numerator, 1 << self.exponent)

    def __float__(self) -> float:
        return self.numerator / (1 << self.exponent) if self.exponent < 1000 else float(self.to_fraction())

    def to_mpf(self):
        return from_man_exp(self.numerator, -self.exponent)

    @classmethod
    def from_mpf(cls, value) -> "Dyadic":
        sign, man, exp, _ = value
        if not man and exp:
            raise PrecisionExhausted("non-finite value in an enclosure")
        return cls(-int(man) if sign else int(man), -int(exp))

    def to_string(self) -> str:
        return f"{self.numerator}/2^{self.exponent}"

    def to_decimal(self) -> str:
        """Exact decimal expansion (always finite for dyadics)."""
        if self.exponent == 0:
            return str(self.numerator)
        sign = "-" if self.numerator < 0 else ""
        digits = str(abs(self.numerator) * 5**self.exponent).rjust(self.exponent + 1, "0")
        whole, frac = digits[: -self.exponent], digits[-self.exponent :]
        return f"{sign}{whole}.{frac}"

    def __str__(self) -> str:
        return self.to_decimal() if self.exponent <= 128 else self.to_string()

    def __repr__(self) -> str:
        return f"Dyadic({self.to_string()})"

    def __hash__(self) -> int:
        return hash(self.to_fraction())

    # arithmetic ---------------------------------------------------------
    def _align(self, other: "Dyadic") -> tuple[int, int, int]:
        e = max(self.exponent, other.exponent)
        return self.numerator << (e - self.exponent), other.numerator << (e - other.exponent), e

    def __add__(self, other):
        other = _maybe_dyadic(other)
        if other is None:
            return NotImplemented
        a, b, e = self._align(other)
        return Dyadic(a + b, e)

    __radd__ = __add__

    def __sub__(self, other):
        other = _maybe_dyadic(other)
        if other is None:
            return NotImplemented
        a, b, e = self._align(other)
        return Dyadic(a - b, e)

    def __rsub__(self, other):
        other = _maybe_dyadic(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = _maybe_dyadic(other)
        if other is None:
            return NotImplemented
        return Dyadic(self.numerator * other.numerator, self.exponent + other.exponent)

    __rmul__ = __mul__

    def __neg__(self) -> "Dyadic":
        return Dyadic(-self.numerator, self.exponent)

    def __pos__(self) -> "Dyadic":
        return self

    def __abs__(self) -> "Dyadic":
        return Dyadic(abs(self.numerator), self.exponent)

    def shift(self, k: int) -> "Dyadic":
        """Multiply by 2**k exactly."""
        return Dyadic(self.numerator, self.exponent - k)

    def floor(self) -> int:
        return self.numerator >> self.exponent

    def round_bits(self, bits: int, up: bool) -> "Dyadic":
        """Round to ``bits`` significant bits, toward +inf if ``up`` else toward -inf."""
        excess = abs(self.numerator).bit_length() - bits
        if excess <= 0:
            return self
        n = self.numerator >> excess
        if up and (n << excess) != self.numerator:
            n += 1
        return Dyadic(n, self.exponent - excess)

    def sign(self) -> int:
        return (self.numerator > 0) - (self.numerator < 0)

    # comparisons --------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, Dyadic):
            return self.numerator == other.numerator and self.exponent == other.exponent
        if isinstance(other, (int, Fraction)):
            return self.to_fraction() == other
        return NotImplemented

    def __lt__(self, other):
        if isinstance(other, Dyadic):
            a, b, _ = self._align(other)
            return a < b
        if isinstance(other, (int, Fraction)):
            return self.to_fraction() < other
        if isinstance(other, float):
            return self.to_fraction() < Fraction(other)
        return NotImplemented

    def __bool__(self) -> bool:
        return self.numerator != 0


def _maybe_dyadic(x) -> Dyadic | None:
    if isinstance(x, Dyadic):
        return x
    if isinstance(x, int):
        return Dyadic(x)
    return None


def _div_round(num: Dyadic, den: Dyadic, prec: int, up: bool) -> Dyadic:
    """num / den rounded to ``prec`` significant bits, upward or downward."""
    q = num.to_fraction() / den.to_fraction()
    if q == 0:
        return Dyadic(0)
    magnitude = abs(q.numerator).bit_length() - q.denominator.bit_length()
    shift = prec - magnitude + 1
    scaled = q * (1 << shift) if shift >= 0 else q / (1 << -shift)
    k = math.ceil(scaled) if up else math.floor(scaled)
    return Dyadic(k, shift)


# --------------------------------------------------------------------------
# Intervals
# --------------------------------------------------------------------------


class DyadicInterval:
    """Closed interval ``[lo, hi]`` with dyadic endpoints.

    Endpoints are rounded outward to the current working precision (in
    significant bits) after every operation, so results always enclose the
    exact value; sums and products of short dyadics stay exact.
    """

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        lo = Dyadic.coerce(lo)
        hi = lo if hi is None else Dyadic.coerce(hi)
        if hi < lo:
            raise DomainError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def __setattr__(self, name, value):
        raise AttributeError("DyadicInterval is immutable")

    @classmethod
    def coerce(cls, x) -> "DyadicInterval":
        if isinstance(x, DyadicInterval):
            return x
        if isinstance(x, Fraction) and x.denominator & (x.denominator - 1):
            return cls.from_fraction(x, get_precision())
        return cls(Dyadic.coerce(x))

    @classmethod
    def from_fraction(cls, q: Fraction, prec: int | None = None) -> "DyadicInterval":
        """Tightest enclosure of ``q`` with endpoints on the 2**-prec grid."""
        den = q.denominator
        if not den & (den - 1):
            return cls(Dyadic.from_fraction(q))
        prec = get_precision() if prec is None else prec
        scaled = q * (1 << prec)
        return cls(Dyadic(math.floor(scaled), prec), Dyadic(math.ceil(scaled), prec))

    @classmethod
    def from_mpi(cls, value) -> "DyadicInterval":
        a, b = value
        return cls(Dyadic.from_mpf(a), Dyadic.from_mpf(b))

    def to_mpi(self):
        return (self.lo.to_mpf(), self.hi.to_mpf())

    # accessors ----------------------------------------------------------
    @property
    def width(self) -> Dyadic:
        return self.hi - self.lo

    @property
    def mid(self) -> Dyadic:
        return (self.lo + self.hi).shift(-1)

    def contains(self, x) -> bool:
        if isinstance(x, DyadicInterval):
            return self.lo <= x.lo and x.hi <= self.hi
        if isinstance(x, float):
            x = Fraction(x)
        if isinstance(x, Fraction):
            return self.lo.to_fraction() <= x <= self.hi.to_fraction()
        x = Dyadic.coerce(x)
        return self.lo <= x <= self.hi

    __contains__ = contains

    def overlaps(self, other: "DyadicInterval") -> bool:
        other = DyadicInterval.coerce(other)
        return not (self.hi < other.lo or other.hi < self.lo)

    def hull(self, other: "DyadicInterval") -> "DyadicInterval":
        other = DyadicInterval.coerce(other)
        return DyadicInterval(min(self.lo, other.lo), max(self.hi, other.hi))

    def widen(self, amount) -> "DyadicInterval":
        amount = Dyadic.coerce(amount)
        return DyadicInterval(self.lo - amount, self.hi + amount)

    def is_positive(self) -> bool:
        return self.lo.sign() > 0

    def is_negative(self) -> bool:
        return self.hi.sign() < 0

    def __float__(self) -> float:
        return float(self.mid)

    def __repr__(self) -> str:
        return f"DyadicInterval([{float(self.lo)!r}, {float(self.hi)!r}])"

    def __eq__(self, other):
        if not isinstance(other, DyadicInterval):
            return NotImplemented
        return self.lo == other.lo and self.hi == other.hi

    def __hash__(self) -> int:
        return hash((self.lo, self.hi))

    def to_json(self) -> dict:
        return {"lo": self.lo.to_string(), "hi": self.hi.to_string()}

    # arithmetic ---------------------------------------------------------
    def __add__(self, other):
        other = _maybe_interval(other)
        if other is None:
            return NotImplemented
        return _outward(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __sub__(self, other):
        other = _maybe_interval(other)
        if other is None:
            return NotImplemented
        return _outward(self.lo - other.hi, self.hi - other.lo)

    def __rsub__(self, other):
        other = _maybe_interval(other)
        if other is None:
            return NotImplemented
        return other - self

    def __neg__(self) -> "DyadicInterval":
        return DyadicInterval(-self.hi, -self.lo)

    def __mul__(self, other):
        other = _maybe_interval(other)
        if other is None:
            return NotImplemented
        products = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return _outward(min(products), max(products))

    __rmul__ = __mul__

    def square(self) -> "DyadicInterval":
        if self.lo.sign() >= 0:
            return _outward(self.lo * self.lo, self.hi * self.hi)
        if self.hi.sign() <= 0:
            return _outward(self.hi * self.hi, self.lo * self.lo)
        return _outward(Dyadic(0), max(self.lo * self.lo, self.hi * self.hi))

    def __abs__(self) -> "DyadicInterval":
        if self.lo.sign() >= 0:
            return self
        if self.hi.sign() <= 0:
            return -self
        return DyadicInterval(Dyadic(0), max(-self.lo, self.hi))

    def div(self, other, prec: int | None = None) -> "DyadicInterval":
        other = DyadicInterval.coerce(other)
        if other.lo.sign() <= 0 <= other.hi.sign():
            raise DomainError("division by an interval containing 0")
        prec = get_precision() if prec is None else prec
        candidates_lo = []
        candidates_hi = []
        for a in (self.lo, self.hi):
            for b in (other.lo, other.hi):
                candidates_lo.append(_div_round(a, b, prec, up=False))
                candidates_hi.append(_div_round(a, b, prec, up=True))
        return DyadicInterval(min(candidates_lo), max(candidates_hi))

    def __truediv__(self, other):
        other = _maybe_interval(other)
        if other is None:
            return NotImplemented
        return self.div(other)

    def __rtruediv__(self, other):
        other = _maybe_interval(other)
        if other is None:
            return NotImplemented
        return other.div(self)

    def __pow__(self, k: int) -> "DyadicInterval":
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        result = DyadicInterval(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base.square()
        return result


def _outward(lo: Dyadic, hi: Dyadic) -> DyadicInterval:
    bits = get_precision()
    return DyadicInterval(lo.round_bits(bits, up=False), hi.round_bits(bits, up=True))


def _maybe_interval(x) -> DyadicInterval | None:
    if isinstance(x, DyadicInterval):
        return x
    if isinstance(x, (Dyadic, int)):
        return DyadicInterval(Dyadic.coerce(x))
    if isinstance(x, Fraction):
        return DyadicInterval.from_fraction(x)
    return None


# transcendental enclosures -------------------------------------------------


def _prec(prec: int | None) -> int:
    return get_precision() if prec is None else prec


def iexp(x, prec: int | None = None) -> DyadicInterval:
    x = DyadicInterval.coerce(x)
    return DyadicInterval.from_mpi(libmpi.mpi_exp(x.to_mpi(), _prec(prec)))


def ilog(x, prec: int | None = None) -> DyadicInterval:
    x = DyadicInterval.coerce(x)
    if x.lo.sign() <= 0:
        raise DomainError("log of an interval that is not strictly positive")
    return DyadicInterval.from_mpi(libmpi.mpi_log(x.to_mpi(), _prec(prec)))


def icos(x, prec: int | None = None) -> DyadicInterval:
    x = DyadicInterval.coerce(x)
    c, _ = libmpi.mpi_cos_sin(x.to_mpi(), _prec(prec))
    return DyadicInterval.from_mpi(c)


def isin(x, prec: int | None = None) -> DyadicInterval:
    x = DyadicInterval.coerce(x)
    _, s = libmpi.mpi_cos_sin(x.to_mpi(), _prec(prec))
    return DyadicInterval.from_mpi(s)


def ipi(prec: int | None = None) -> DyadicInterval:
    return DyadicInterval.from_mpi(libmpi.mpi_pi(_prec(prec)))


def isqrt_interval(x, prec: int | None = None) -> DyadicInterval:
    x = DyadicInterval.coerce(x)
    if x.lo.sign() < 0:
        raise DomainError("square root of an interval with negative part")
    return DyadicInterval.from_mpi(libmpi.mpi_sqrt(x.to_mpi(), _prec(prec)))


def interval_eval(
    fn: Callable[..., DyadicInterval],
    *operands,
    tol=None,
    prec: int = DEFAULT_PRECISION,
    max_prec: int = MAX_PRECISION,
) -> DyadicInterval:
    """Evaluate ``fn(*operands)`` in interval arithmetic.

    ``fn`` builds its expression from interval operators and the ``i*``
    helpers above.  Without ``tol`` one evaluation at ``prec`` bits is
    returned.  With ``tol`` the working precision doubles until the result is
    no wider than ``tol``; :class:`PrecisionExhausted` is raised past
    ``max_prec`` (operand widths may make the target unreachable).
    """
    operands = tuple(DyadicInterval.coerce(op) for op in operands)
    target = None if tol is None else Dyadic.coerce(tol) if not isinstance(tol, float) else Dyadic.approx(tol, 64)
    bits = prec
    while True:
        with working_precision(bits):
            result = fn(*operands)
        if target is None or result.width <= target:
            return result
        bits *= 2
        if bits > max_prec:
            raise PrecisionExhausted(
                f"result width {float(result.width):.3g} above {float(target):.3g} at {bits // 2} bits"
            )


# --------------------------------------------------------------------------
# Quadratic surds
# --------------------------------------------------------------------------


def _squarefree_split(d: int) -> tuple[int, int]:
    """Return (s, f) with d = s**2 * f and f square-free."""
    s, f = 1, d
    p = 2
    while p * p <= f:
        while f % (p * p) == 0:
            f //= p * p
            s *= p
        p += 1 if p == 2 else 2
    return s, f


def _sign_surd(a: int, b: int, d: int) -> int:
    """Sign of a + b*sqrt(d) for square-free d > 1 (or b == 0)."""
    if b == 0 or d == 1:
        v = a + b
        return (v > 0) - (v < 0)
    sa = (a > 0) - (a < 0)
    sb = (b > 0) - (b < 0)
    if sa == 0:
        return sb
    if sa == sb:
        return sa
    return sa if a * a > b * b * d else sb


def _floor_surd(a: int, b: int, c: int, d: int) -> int:
    """floor((a + b*sqrt(d)) / c) for c > 0."""
    if b == 0 or d == 1:
        return (a + b) // c
    t = math.isqrt(b * b * d)
    n = a + t if b > 0 else a - t - 1
    return n // c


@dataclass(frozen=True)
class QuadraticSurd:
    """The number ``(a + b*sqrt(d)) / c`` in canonical form.

    ``c > 0``, ``gcd(a, b, c) == 1`` and ``d`` is square-free; rationals are
    stored with ``b == 0`` and ``d == 1``.
    """

    a: int
    b: int = 0
    c: int = 1
    d: int = 1

    def __post_init__(self):
        a, b, c, d = int(self.a), int(self.b), int(self.c), int(self.d)
        if c == 0:
            raise DomainError("surd with zero denominator")
        if d <= 0:
            raise DomainError("surd radicand must be positive")
        if b:
            s, d = _squarefree_split(d)
            b *= s
        if d == 1:
            a, b = a + b, 0
        if b == 0:
            d = 1
        if c < 0:
            a, b, c = -a, -b, -c
        g = math.gcd(math.gcd(a, b), c)
        if g > 1:
            a, b, c = a // g, b // g, c // g
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)

    @classmethod
    def rational(cls, q) -> "QuadraticSurd":
        q = Fraction(q)
        return cls(q.numerator, 0, q.denominator, 1)

    @classmethod
    def golden(cls) -> "QuadraticSurd":
        """(sqrt(5) - 1) / 2, the golden mean."""
        return cls(-1, 1, 2, 5)

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def _other(self, other) -> "QuadraticSurd":
        if isinstance(other, QuadraticSurd):
            if other.b and self.b and other.d != self.d:
                raise DomainError("mixed radicals are not supported")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadraticSurd.rational(other)
        if isinstance(other, Dyadic):
            return QuadraticSurd.rational(other.to_fraction())
        raise TypeError(f"cannot combine QuadraticSurd with {type(other).__name__}")

    def _radicand(self, other: "QuadraticSurd") -> int:
        return self.d if self.b else other.d

    def __add__(self, other):
        o = self._other(other)
        d = self._radicand(o)
        return QuadraticSurd(self.a * o.c + o.a * self.c, self.b * o.c + o.b * self.c, self.c * o.c, d)

    __radd__ = __add__

    def __neg__(self) -> "QuadraticSurd":
        return QuadraticSurd(-self.a, -self.b, self.c, self.d)

    def __sub__(self, other):
        return self + (-self._other(other))

    def __rsub__(self, other):
        return self._other(other) - self

    def __mul__(self, other):
        o = self._other(other)
        d = self._radicand(o)
        return QuadraticSurd(
            self.a * o.a + self.b * o.b * d,
            self.a * o.b + self.b * o.a,
            self.c * o.c,
            d,
        )

    __rmul__ = __mul__

    def reciprocal(self) -> "QuadraticSurd":
        norm = self.a * self.a - self.b * self.b * self.d
        if norm == 0:
            raise DomainError("reciprocal of zero")
        return QuadraticSurd(self.c * self.a, -self.c * self.b, norm, self.d)

    def __truediv__(self, other):
        return self * self._other(other).reciprocal()

    def __rtruediv__(self, other):
        return self._other(other) * self.reciprocal()

    def sign(self) -> int:
        return _sign_surd(self.a, self.b, self.d)

    def floor(self) -> int:
        return _floor_surd(self.a, self.b, self.c, self.d)

    def conjugate(self) -> "QuadraticSurd":
        return QuadraticSurd(self.a, -self.b, self.c, self.d)

    def __eq__(self, other):
        if isinstance(other, QuadraticSurd):
            return (self.a, self.b, self.c, self.d) == (other.a, other.b, other.c, other.d)
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and Fraction(self.a, self.c) == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.a, self.b, self.c, self.d))

    def __lt__(self, other):
        return (self - self._other(other)).sign() < 0

    def __le__(self, other):
        return (self - self._other(other)).sign() <= 0

    def __gt__(self, other):
        return (self - self._other(other)).sign() > 0

    def __ge__(self, other):
        return (self - self._other(other)).sign() >= 0

    def to_fraction(self) -> Fraction:
        if self.b:
            raise DomainError("irrational surd has no exact fraction")
        return Fraction(self.a, self.c)

    def to_interval(self, prec: int | None = None) -> DyadicInterval:
        """Enclosure of width at most 2**-prec (exact for dyadic rationals)."""
        prec = get_precision() if prec is None else prec
        if self.b == 0:
            return DyadicInterval.from_fraction(Fraction(self.a, self.c), prec)
        k = _floor_surd(self.a << prec, self.b << prec, self.c, self.d)
        return DyadicInterval(Dyadic(k, prec), Dyadic(k + 1, prec))

    def __float__(self) -> float:
        iv = self.to_interval(80)
        return float(iv.mid)

    def __repr__(self) -> str:
        if self.b == 0:
            return f"QuadraticSurd({self.a}/{self.c})"
        return f"QuadraticSurd(({self.a} + {self.b}*sqrt({self.d}))/{self.c})"

    def to_string(self) -> str:
        if self.b == 0:
            return f"{self.a}/{self.c}"
        return f"({self.a}+{self.b}*sqrt({self.d}))/{self.c}"


def surd_gauss_step(s: QuadraticSurd) -> tuple[int, QuadraticSurd]:
    """One exact step of the Gauss map: ``1/s = k + t`` with ``0 <= t < 1``.

    Raises :class:`Terminated` for ``s == 0`` (the expansion already ended)
    and :class:`DomainError` outside ``(0, 1)``.
    """
    if s.sign() == 0:
        raise Terminated("expansion terminated: value is 0")
    if s.sign() < 0 or s >= 1:
        raise DomainError(f"{s!r} is not in (0, 1)")
    inv = s.reciprocal()
    k = inv.floor()
    return k, inv - k


# --------------------------------------------------------------------------
# Oracles
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RealOracle:
    """Answers ``query(n)`` with a dyadic within 2**-n of a fixed real.

    ``exact`` optionally carries a certified exact value (a ``Fraction`` or
    :class:`QuadraticSurd`) used by procedures that may exploit it, and
    ``budget`` caps the precision a consumer is allowed to request.
    """

    query: Callable[[int], Dyadic]
    exact: object = None
    budget: int | None = None
    label: str = ""

    def __call__(self, n: int) -> Dyadic:
        return oracle_query(self, n)

    @classmethod
    def from_surd(cls, s: QuadraticSurd, budget: int | None = None) -> "RealOracle":
        def query(n: int) -> Dyadic:
            return s.to_interval(n + 1).lo

        return cls(query, exact=s, budget=budget, label=s.to_string())

    @classmethod
    def from_rational(cls, q, budget: int | None = None) -> "RealOracle":
        q = Fraction(q)

        def query(n: int) -> Dyadic:
            return DyadicInterval.from_fraction(q, n + 1).lo

        return cls(query, exact=q, budget=budget, label=str(q))

    @classmethod
    def from_callable(cls, fn: Callable[[int], object], budget: int | None = None) -> "RealOracle":
        return cls(lambda n: Dyadic.coerce(fn(n)), budget=budget)

    def enclosure(self, n: int) -> tuple[Fraction, Fraction]:
        """Open interval (as fractions) known to contain the real."""
        d = oracle_query(self, n).to_fraction()
        r = Fraction(1, 1 << n)
        return d - r, d + r


def oracle_query(o: RealOracle, n: int) -> Dyadic:
    if n < 0:
        raise ValueError("precision index must be non-negative")
    return Dyadic.coerce(o.query(n))


@dataclass
class CheckedOracle:
    """Wraps a third-party oracle and rejects mutually impossible answers."""

    inner: RealOracle
    answers: dict[int, Dyadic] = field(default_factory=dict)

    def __call__(self, n: int) -> Dyadic:
        d = oracle_query(self.inner, n)
        for m, e in self.answers.items():
            bound = Dyadic(1, n) + Dyadic(1, m)
            if abs(d - e) >= bound:
                raise ConsistencyViolation(
                    f"answers at precision {m} and {n} differ by {float(abs(d - e)):.3g} >= {float(bound):.3g}"
                )
        self.answers[n] = d
        return d

    def as_oracle(self) -> RealOracle:
        return RealOracle(self, exact=self.inner.exact, budget=self.inner.budget, label=self.inner.label)
