"""Continued fractions: prefixes, convergents, Gauss-map orbits and noble numbers.

Indexing follows ``p_n/q_n = [r_0, ..., r_{n-1}]`` and
``theta_n = [r_{n-1}, r_n, ...]``, so ``theta_1`` is the number itself.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .errors import DomainError, EmptyPrefix, PrecisionExhausted, Terminated
from .exactnum import Dyadic, DyadicInterval, QuadraticSurd, RealOracle, oracle_query, surd_gauss_step

__all__ = [
    "CFracPrefix",
    "NobleNumber",
    "eval_prefix",
    "convergents",
    "gauss_orbit",
    "cfrac_digits_of",
    "noble_value",
    "parse_prefix",
]

_PREFIX_RE = re.compile(r"^\s*\[([^\]]*)\]\s*$")


@dataclass(frozen=True)
class CFracPrefix:
    terms: tuple[int, ...] = ()

    def __post_init__(self):
        terms = tuple(int(t) for t in self.terms)
        if any(t < 1 for t in terms):
            raise DomainError("continued-fraction terms must be positive integers")
        object.__setattr__(self, "terms", terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __getitem__(self, i):
        return self.terms[i]

    def extend(self, more: Iterable[int]) -> "CFracPrefix":
        return CFracPrefix(self.terms + tuple(more))

    def is_prefix_of(self, other: "CFracPrefix") -> bool:
        return other.terms[: len(self.terms)] == self.terms

    def padded(self, length: int) -> "CFracPrefix":
        """The prefix continued with 1's (the noble tail) up to ``length`` terms."""
        return CFracPrefix(self.terms + (1,) * max(0, length - len(self.terms)))

    def to_string(self, noble: bool = False) -> str:
        body = ",".join(str(t) for t in self.terms)
        if noble:
            return f"[{body};1*]" if body else "[;1*]"
        return f"[{body}]"

    def __str__(self) -> str:
        return self.to_string()


def parse_prefix(text: str) -> tuple[CFracPrefix, bool]:
    """Parse ``"[a0,...,ak]"`` or ``"[a0,...,ak;1*]"``.

    Returns the prefix and whether the noble tail marker was present.
    """
    m = _PREFIX_RE.match(text)
    if not m:
        raise DomainError(f"cannot parse continued-fraction prefix {text!r}")
    body = m.group(1)
    noble = False
    if ";" in body:
        body, tail = body.split(";", 1)
        if tail.strip() != "1*":
            raise DomainError(f"unsupported tail {tail!r}; only '1*' is allowed")
        noble = True
    body = body.strip()
    terms = tuple(int(t) for t in body.split(",")) if body else ()
    return CFracPrefix(terms), noble


def _as_prefix(p) -> CFracPrefix:
    if isinstance(p, CFracPrefix):
        return p
    if isinstance(p, str):
        return parse_prefix(p)[0]
    return CFracPrefix(tuple(p))


def prefix_fraction(p) -> Fraction:
    p = _as_prefix(p)
    if not p.terms:
        raise EmptyPrefix("empty continued-fraction prefix")
    x = Fraction(0)
    for r in reversed(p.terms):
        x = 1 / (r + x)
    return x


def eval_prefix(p, prec: int = 64) -> DyadicInterval:
    """Enclosure of the rational ``[r_0, ..., r_{n-1}]`` of width at most 2**-prec."""
    return DyadicInterval.from_fraction(prefix_fraction(p), prec)


def convergents(p) -> list[tuple[int, int]]:
    """``(p_n, q_n)`` for n = 1..len(p), via the standard recurrence."""
    p = _as_prefix(p)
    out = []
    # p_{-1}, q_{-1} = 1, 0 and p_0, q_0 = 0, 1 in this indexing
    p_prev, q_prev = 1, 0
    p_cur, q_cur = 0, 1
    for r in p.terms:
        p_prev, p_cur = p_cur, r * p_cur + p_prev
        q_prev, q_cur = q_cur, r * q_cur + q_prev
        out.append((p_cur, q_cur))
    return out


def denominators(p) -> list[int]:
    return [q for _, q in convergents(p)]


# --------------------------------------------------------------------------
# Noble numbers
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class NobleNumber:
    """``[prefix, 1, 1, 1, ...]`` with its exact value in Q(sqrt 5)."""

    prefix: CFracPrefix
    value: QuadraticSurd

    def terms(self, n: int) -> list[int]:
        return list(self.prefix.padded(n).terms[:n])

    def __float__(self) -> float:
        return float(self.value)

    def to_string(self) -> str:
        return self.prefix.to_string(noble=True)

    def oracle(self, budget: int | None = None) -> RealOracle:
        return RealOracle.from_surd(self.value, budget=budget)


def noble_value(prefix) -> NobleNumber:
    """Exact value of ``[prefix, 1, 1, ...]`` by folding the prefix onto the golden mean."""
    prefix = _as_prefix(prefix)
    y = QuadraticSurd.golden()
    for r in reversed(prefix.terms):
        y = (y + r).reciprocal()
    return NobleNumber(prefix, y)


# --------------------------------------------------------------------------
# Gauss map
# --------------------------------------------------------------------------

Angle = Union[QuadraticSurd, NobleNumber, RealOracle]


def gauss_orbit(x: Angle, n: int, *, max_bits: int = 4096) -> list:
    """The first ``n`` points ``theta_1, ..., theta_n`` of the Gauss-map orbit.

    Surd (or noble) input gives exact surds.  Oracle input gives enclosing
    :class:`DyadicInterval` values; the oracle is queried at increasing
    precision until every integer part is certified.
    """
    if isinstance(x, NobleNumber):
        x = x.value
    if isinstance(x, QuadraticSurd):
        if not (0 < x < 1):
            raise DomainError("Gauss orbit needs a point of (0, 1)")
        orbit = [x]
        while len(orbit) < n:
            _, nxt = surd_gauss_step(orbit[-1])
            if nxt.sign() == 0:
                raise Terminated("rational value: expansion ended", terms=_surd_terms(x, len(orbit)))
            orbit.append(nxt)
        return orbit[:n]
    if isinstance(x, RealOracle):
        _, orbit = _oracle_expand(x, n, max_bits)
        return orbit
    raise TypeError(f"unsupported angle type {type(x).__name__}")


def _surd_terms(x: QuadraticSurd, n: int) -> list[int]:
    terms = []
    while len(terms) < n and x.sign() != 0:
        k, x = surd_gauss_step(x)
        terms.append(k)
    return terms


def _exact_terms(value, n: int) -> list[int]:
    """Continued-fraction terms of an exact rational or surd (may be shorter than n)."""
    if isinstance(value, QuadraticSurd):
        return _surd_terms(value, n)
    q = Fraction(value)
    terms = []
    while len(terms) < n and q != 0:
        inv = 1 / q
        k = inv.numerator // inv.denominator
        terms.append(k)
        q = inv - k
    return terms


def _oracle_expand(o: RealOracle, n: int, max_bits: int) -> tuple[list[int], list[DyadicInterval]]:
    """Certified digits and orbit enclosures from an oracle."""
    if isinstance(o.exact, Fraction):
        if not 0 < o.exact < 1:
            raise DomainError(f"continued-fraction digits need a real in (0, 1), got {o.exact}")
        # a certified rational: its finite expansion is known exactly
        terms = _exact_terms(o.exact, n)
        if len(terms) < n:
            raise Terminated("certified rational: expansion ended", terms=terms)
        orbit = []
        q = o.exact
        for k in terms:
            orbit.append(DyadicInterval.from_fraction(q, 64))
            q = 1 / q - k
        return terms, orbit
    limit = max_bits if o.budget is None else min(max_bits, o.budget)
    bits = min(32, limit)
    while True:
        lo, hi = o.enclosure(bits)
        if lo >= 1 or hi <= 0:
            raise DomainError("continued-fraction digits need a real in (0, 1)")
        lo = max(lo, Fraction(0))
        hi = min(hi, Fraction(1))
        terms: list[int] = []
        orbit: list[DyadicInterval] = []
        ok = True
        while len(terms) < n:
            if lo <= 0:
                ok = False
                break
            orbit.append(DyadicInterval(Dyadic.approx(lo, bits + 8, "floor"), Dyadic.approx(hi, bits + 8, "ceil")))
            inv_lo, inv_hi = 1 / hi, 1 / lo
            k = inv_lo.numerator // inv_lo.denominator
            # the whole reciprocal interval must sit strictly inside (k, k + 1)
            if inv_lo <= k or inv_hi >= k + 1:
                ok = False
                break
            terms.append(k)
            lo, hi = inv_lo - k, inv_hi - k
        if ok:
            return terms, orbit[:n]
        if bits >= limit:
            raise PrecisionExhausted(
                f"oracle precision {bits} bits cannot certify {n} continued-fraction terms "
                f"(certified {len(terms)})",
                step=len(terms),
            )
        bits = min(limit, bits * 2)


def cfrac_digits_of(o: RealOracle, count: int, *, max_bits: int = 4096) -> CFracPrefix:
    """The first ``count`` continued-fraction terms of the oracle's real, certified.

    Refuses to guess near integer-reciprocal boundaries: raises
    :class:`PrecisionExhausted` when the budget cannot separate them, and
    :class:`Terminated` when the oracle certifies a rational whose expansion
    is shorter than ``count``.
    """
    terms, _ = _oracle_expand(o, count, max_bits)
    return CFracPrefix(tuple(terms))


def oracle_value_interval(o: RealOracle, n: int) -> DyadicInterval:
    d = oracle_query(o, n)
    r = Dyadic(1, n)
    return DyadicInterval(d - r, d + r)


def terms_of(x: Angle, n: int) -> list[int]:
    """The first ``n`` terms for a surd, noble or oracle angle."""
    if isinstance(x, NobleNumber):
        return x.terms(n)
    if isinstance(x, QuadraticSurd):
        terms = _surd_terms(x, n)
        if len(terms) < n:
            raise Terminated("rational value: expansion ended", terms=terms)
        return terms
    return list(cfrac_digits_of(x, n).terms)
