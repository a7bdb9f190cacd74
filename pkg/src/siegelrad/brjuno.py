"""Brjuno sums and Yoccoz's Brjuno function with interval error control.

Yoccoz's function is

    Phi(theta) = sum_{n>=1} theta_1 ... theta_{n-1} * log(1/theta_n)

along the Gauss orbit theta_{n+1} = {1/theta_n}.  For quadratic surds the
orbit is eventually periodic, so the tail after a full period is a
geometric series and is summed exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .cfrac import CFracPrefix, NobleNumber, _as_prefix, convergents, gauss_orbit, noble_value
from .errors import DomainError, EmptyPrefix, InsufficientTerms, PrecisionExhausted
from .exactnum import Dyadic, DyadicInterval, QuadraticSurd, RealOracle, ilog, surd_gauss_step, working_precision

__all__ = [
    "PhiEstimate",
    "phi_truncated",
    "phi_noble",
    "phi_cylinder_lower_bound",
    "phi_extensions_exceed",
    "brjuno_B_partial",
    "beta_product",
    "periodic_orbit",
]

MAX_PERIOD_SEARCH = 10_000


@dataclass(frozen=True)
class PhiEstimate:
    """Enclosure of Phi, or of a partial sum when no tail is certified.

    ``partial`` always encloses the sum of the first ``terms_used`` terms.
    When ``tail_certified`` is set, ``tail_bound`` bounds the remaining sum
    from above and ``value`` encloses Phi itself.
    """

    value: DyadicInterval
    partial: DyadicInterval
    terms_used: int
    tail_bound: Dyadic | None = None
    tail_certified: bool = False

    def to_json(self) -> dict:
        return {
            "value_lo": self.value.lo.to_string(),
            "value_hi": self.value.hi.to_string(),
            "value_lo_decimal": f"{float(self.value.lo):.17g}",
            "value_hi_decimal": f"{float(self.value.hi):.17g}",
            "terms_used": self.terms_used,
            "tail_certified": self.tail_certified,
            "tail_bound": None if self.tail_bound is None else self.tail_bound.to_string(),
        }


def periodic_orbit(x: QuadraticSurd, max_steps: int = MAX_PERIOD_SEARCH) -> tuple[list[QuadraticSurd], int, int]:
    """Gauss orbit of a quadratic irrational up to its first repetition.

    Returns ``(orbit, start, period)`` with ``orbit[start + period] == orbit[start]``
    (the repeated element is not duplicated in ``orbit``).
    """
    if x.is_rational:
        raise DomainError("rational input has no periodic Gauss orbit")
    seen: dict[QuadraticSurd, int] = {}
    orbit: list[QuadraticSurd] = []
    cur = x
    for i in range(max_steps):
        if cur in seen:
            start = seen[cur]
            return orbit, start, i - start
        seen[cur] = i
        orbit.append(cur)
        _, cur = surd_gauss_step(cur)
    raise PrecisionExhausted(f"no period found within {max_steps} Gauss steps")


def _term(beta: DyadicInterval, theta: DyadicInterval, prec: int) -> DyadicInterval:
    return beta * -ilog(theta, prec)


def _periodic_phi(cycle: list[QuadraticSurd], prec: int) -> DyadicInterval:
    """Phi at the first point of a purely periodic Gauss cycle.

    Phi(y) = S / (1 - P) with S the sum over one period and P the product of
    the period's points.
    """
    beta = DyadicInterval(1)
    s = DyadicInterval(0)
    for y in cycle:
        th = y.to_interval(prec)
        s = s + _term(beta, th, prec)
        beta = beta * th
    return s.div(DyadicInterval(1) - beta, prec)


def _theta_interval(x, prec: int) -> DyadicInterval:
    if isinstance(x, QuadraticSurd):
        return x.to_interval(prec)
    return x


def phi_truncated(x, N: int, *, prec: int = 96) -> PhiEstimate:
    """Partial sum of Phi over ``N`` terms, with an exact tail for surds.

    ``x`` may be a :class:`QuadraticSurd`, a :class:`NobleNumber`, a
    :class:`CFracPrefix` (read as the noble ``[prefix, 1, 1, ...]``), or a
    :class:`RealOracle` (partial sum only, no tail claim).
    """
    with working_precision(prec):
        return _phi_truncated(x, N, prec)


def _phi_truncated(x, N: int, prec: int) -> PhiEstimate:
    if N < 0:
        raise DomainError("number of terms must be non-negative")
    if isinstance(x, (CFracPrefix, list, tuple)):
        x = noble_value(_as_prefix(x))
    if isinstance(x, NobleNumber):
        x = x.value
    if isinstance(x, RealOracle):
        orbit = gauss_orbit(x, max(N, 1))[:N]
        beta = DyadicInterval(1)
        total = DyadicInterval(0)
        for th in orbit:
            total = total + _term(beta, th, prec)
            beta = beta * th
        return PhiEstimate(total, total, N, None, False)
    if not isinstance(x, QuadraticSurd):
        raise TypeError(f"unsupported input {type(x).__name__}")
    if not (0 < x < 1) or x.is_rational:
        raise DomainError("Phi needs an irrational point of (0, 1)")
    orbit, start, period = periodic_orbit(x)

    def point(i: int) -> QuadraticSurd:
        if i < len(orbit):
            return orbit[i]
        return orbit[start + (i - start) % period]

    beta = DyadicInterval(1)
    total = DyadicInterval(0)
    for i in range(N):
        th = point(i).to_interval(prec)
        total = total + _term(beta, th, prec)
        beta = beta * th
    # remaining sum = beta_N * Phi(theta_{N+1}); rotate the cycle to start there
    j = N if N < start else start + (N - start) % period
    if j < start:
        # pre-periodic part still ahead: sum it explicitly, then the cycle
        tail = DyadicInterval(0)
        b = DyadicInterval(1)
        for i in range(j, start):
            th = orbit[i].to_interval(prec)
            tail = tail + _term(b, th, prec)
            b = b * th
        tail = tail + b * _periodic_phi(orbit[start:], prec)
    else:
        k = j - start
        cycle = orbit[start:]
        tail = _periodic_phi(cycle[k:] + cycle[:k], prec)
    tail = beta * tail
    tail_hi = tail.hi if tail.hi.sign() > 0 else Dyadic(0)
    value = DyadicInterval(total.lo + max(tail.lo, Dyadic(0)), total.hi + tail_hi)
    return PhiEstimate(value, total, N, tail_hi, True)


def phi_noble(n, tol=Dyadic(1, 40), *, max_prec: int = 4096) -> PhiEstimate:
    """Phi of a noble number with guaranteed enclosure width at most ``tol``.

    Exact surd Gauss steps run through the prefix; once the orbit reaches
    the golden mean the remaining series is the closed golden tail.
    """
    if not isinstance(n, NobleNumber):
        n = noble_value(_as_prefix(n))
    tol = Dyadic.coerce(tol) if not isinstance(tol, float) else Dyadic.approx(tol, 80)
    prec = 64
    golden = QuadraticSurd.golden()
    while True:
        with working_precision(prec + 8):
            beta = DyadicInterval(1)
            total = DyadicInterval(0)
            y = n.value
            steps = 0
            while y != golden:
                th = y.to_interval(prec)
                total = total + _term(beta, th, prec)
                beta = beta * th
                _, y = surd_gauss_step(y)
                steps += 1
            tail = beta * _periodic_phi([golden], prec)
            value = total + tail
        if value.width <= tol:
            return PhiEstimate(value, total, steps, tail.hi, True)
        prec *= 2
        if prec > max_prec:
            raise PrecisionExhausted(f"Phi enclosure width {float(value.width):.3g} above tolerance")


def phi_cylinder_lower_bound(prefix, *, prec: int = 96, splits: int = 8, tail_hi=1) -> DyadicInterval:
    """Lower bound of Phi over every irrational whose expansion starts with ``prefix``.

    All terms of Phi are non-negative, so the first ``len(prefix) + 1`` terms
    bound Phi from below.  They depend on the unknown remainder only through
    ``theta_{L+1}``, which lies in (0, ``tail_hi``) and is enclosed by
    interval arithmetic on ``splits`` sub-intervals.  Restricting
    ``tail_hi`` to 1/(A+1) covers the extensions whose next term exceeds A.
    Returns an interval whose ``lo`` is the bound.
    """
    with working_precision(prec):
        return _cylinder_bound(_as_prefix(prefix), prec, splits, tail_hi)


def _cylinder_bound(prefix: CFracPrefix, prec: int, splits: int, tail_hi) -> DyadicInterval:
    top = DyadicInterval.from_fraction(Fraction(tail_hi), prec).hi
    best = None
    for s in range(splits):
        tail = DyadicInterval(s, s + 1).div(DyadicInterval(splits), prec) * DyadicInterval(top)
        thetas = []
        y = tail
        for r in reversed(prefix.terms):
            y = DyadicInterval(1).div(y + r, prec)
            thetas.append(y)
        thetas.reverse()
        beta = DyadicInterval(1)
        total = DyadicInterval(0)
        for th in thetas:
            total = total + _term(beta, th, prec)
            beta = beta * th
        # next term: beta_L * log(1/theta_{L+1}) >= beta_L * log(1/upper end of the piece)
        if tail.hi < 1:
            total = total + _term(beta, DyadicInterval(tail.hi), prec)
        best = total if best is None else DyadicInterval(min(best.lo, total.lo), max(best.hi, total.hi))
    return best


def phi_extensions_exceed(prefix, threshold, *, max_depth: int = 12, branch: int = 3) -> bool:
    """Certify Phi(beta) > ``threshold`` for every irrational beta extending ``prefix``.

    Branch and bound over the next term: terms 1..``branch`` are explored
    recursively and all larger terms share one cylinder bound.  False means
    "not certified within ``max_depth``", not a counterexample.
    """
    prefix = _as_prefix(prefix)
    thr = threshold if isinstance(threshold, Dyadic) else Dyadic.approx(Fraction(threshold), 96, "ceil")

    def ok(p: CFracPrefix, depth: int) -> bool:
        if phi_cylinder_lower_bound(p).lo > thr:
            return True
        if depth == 0:
            return False
        if not phi_cylinder_lower_bound(p, tail_hi=Fraction(1, branch + 1)).lo > thr:
            return False
        return all(ok(p.extend([a]), depth - 1) for a in range(1, branch + 1))

    return ok(prefix, max_depth)


def brjuno_B_partial(p, N: int, *, noble_tail: bool = False, prec: int = 96) -> DyadicInterval:
    """Enclosure of sum_{n=1}^{N} log(q_{n+1}) / q_n.

    Needs ``N + 1`` convergents; a short prefix is continued with 1's only
    when ``noble_tail`` is set.
    """
    prefix = _as_prefix(p)
    if N < 0:
        raise DomainError("number of terms must be non-negative")
    if N == 0:
        return DyadicInterval(0)
    if len(prefix) < N + 1:
        if not noble_tail:
            raise InsufficientTerms(f"need {N + 1} terms, prefix has {len(prefix)}")
        prefix = prefix.padded(N + 1)
    qs = [q for _, q in convergents(prefix)]
    total = DyadicInterval(0)
    with working_precision(prec):
        for n in range(1, N + 1):
            total = total + ilog(DyadicInterval(qs[n]), prec).div(DyadicInterval(qs[n - 1]), prec)
    return total


def beta_product(p, *, prec: int = 96) -> DyadicInterval:
    """Enclosure of [a_1..a_M] * [a_2..a_M] * ... * [a_M] computed exactly in rationals."""
    prefix = _as_prefix(p)
    if not prefix.terms:
        raise EmptyPrefix("beta product of an empty prefix")
    product = Fraction(1)
    tail = Fraction(0)
    for a in reversed(prefix.terms):
        tail = 1 / (a + tail)
        product *= tail
    return DyadicInterval.from_fraction(product, prec)


Angle = Union[QuadraticSurd, NobleNumber, RealOracle]
