"""Quadratic dynamics: critical orbits of P_theta(z) = e^{2 pi i theta} z + z^2,
heuristic Julia rendering, and the Blaschke circle-map model.

Complex enclosures are midpoint-radius disks with a fixed-point center and
an integer radius bound, both in units of 2**-prec.  Disk arithmetic avoids the wrapping effect that makes rectangular
enclosures of long orbits blow up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from .cfrac import CFracPrefix, NobleNumber, convergents, denominators, noble_value, terms_of
from .errors import BudgetExceeded, DomainError, PrecisionExhausted
from .exactnum import Dyadic, DyadicInterval, QuadraticSurd, RealOracle, icos, ipi, isin, working_precision
from .setapprox import BallUnion

__all__ = [
    "ComplexInterval",
    "RotationAngle",
    "QuadParam",
    "OrbitSegment",
    "multiplier",
    "critical_point",
    "theta_to_c",
    "critical_orbit",
    "julia_render",
    "write_pgm",
    "CircleMap",
    "rotation_number_estimate",
    "tau_for_rotation",
    "dynamical_partition",
    "max_adjacent_ratio",
]

def _ldexp(n: int, e: int) -> float:
    """n * 2**e as a float, for integers too large for a direct conversion."""
    extra = max(0, n.bit_length() - 60)
    return math.ldexp(n >> extra if n >= 0 else -((-n) >> extra), e + extra)


# --------------------------------------------------------------------------
# Complex disks
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ComplexInterval:
    """The closed disk of radius ``ulps / 2**prec`` around ``(re + i*im) / 2**prec``.

    Centers and radii are integers in units of 2**-prec, so enclosures of
    any width (including far below the float range) stay exact; every
    rounding moves the center by at most half a unit and adds one unit to
    the radius.
    """

    re: int
    im: int
    prec: int
    ulps: int = 0

    @classmethod
    def from_complex(cls, z: complex, prec: int = 64) -> "ComplexInterval":
        scale = 1 << prec
        zr = Fraction(z.real) * scale
        zi = Fraction(z.imag) * scale
        re, im = round(zr), round(zi)
        exact = zr == re and zi == im
        return cls(re, im, prec, 0 if exact else 1)

    @classmethod
    def from_intervals(cls, re: DyadicInterval, im: DyadicInterval, prec: int) -> "ComplexInterval":
        scale = 1 << prec
        cr = re.mid.to_fraction() * scale
        ci = im.mid.to_fraction() * scale
        r, i = round(cr), round(ci)
        # |offset| <= half_w + half_h in the L1 bound; all in units of 2**-prec
        half_w = re.width.to_fraction() * scale / 2 + abs(cr - r)
        half_h = im.width.to_fraction() * scale / 2 + abs(ci - i)
        return cls(r, i, prec, math.ceil(half_w + half_h))

    @property
    def center(self) -> complex:
        return complex(_ldexp(self.re, -self.prec), _ldexp(self.im, -self.prec))

    @property
    def rad(self) -> float:
        return _ldexp(self.ulps, -self.prec)

    def _abs_center_ulps(self) -> int:
        """Upper bound of |center| in units of 2**-prec."""
        return math.isqrt(self.re * self.re + self.im * self.im) + 1

    def width(self) -> float:
        """Diameter of the enclosure (may underflow to 0.0 for tiny disks)."""
        return 2 * self.rad

    def width_exceeds(self, target: float) -> bool:
        return 2 * self.ulps > Fraction(target) * (1 << self.prec)

    def _align(self, other: "ComplexInterval") -> "ComplexInterval":
        if other.prec == self.prec:
            return other
        return ComplexInterval.from_intervals(*other.to_rectangle(), self.prec)

    def _coerce(self, other) -> "ComplexInterval":
        if not isinstance(other, ComplexInterval):
            other = ComplexInterval.from_complex(complex(other), self.prec)
        return self._align(other)

    def __add__(self, other):
        other = self._coerce(other)
        return ComplexInterval(self.re + other.re, self.im + other.im, self.prec, self.ulps + other.ulps)

    __radd__ = __add__

    def __neg__(self) -> "ComplexInterval":
        return ComplexInterval(-self.re, -self.im, self.prec, self.ulps)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __mul__(self, other):
        if isinstance(other, int):
            return ComplexInterval(self.re * other, self.im * other, self.prec, self.ulps * abs(other))
        other = self._coerce(other)
        p = self.prec
        re = self.re * other.re - self.im * other.im
        im = self.re * other.im + self.im * other.re
        # |xy - x0 y0| <= |x0| ry + |y0| rx + rx ry
        err = self._abs_center_ulps() * other.ulps + other._abs_center_ulps() * self.ulps + self.ulps * other.ulps
        half = 1 << (p - 1)
        return ComplexInterval((re + half) >> p, (im + half) >> p, p, -(-err >> p) + 1)

    __rmul__ = __mul__

    def square(self) -> "ComplexInterval":
        return self * self

    def scale_pow2(self, k: int) -> "ComplexInterval":
        """Multiply by 2**-k."""
        if k <= 0:
            return ComplexInterval(self.re << -k, self.im << -k, self.prec, self.ulps << -k)
        half = 1 << (k - 1)
        return ComplexInterval(
            (self.re + half) >> k, (self.im + half) >> k, self.prec, -(-self.ulps >> k) + 1
        )

    def half(self) -> "ComplexInterval":
        return self.scale_pow2(1)

    def abs_interval(self) -> tuple[float, float]:
        a = abs(self.center)
        slack = 1e-15 * a + math.ldexp(1.0, -self.prec)
        return max(0.0, a - self.rad - slack), a + self.rad + slack

    def contains(self, z: complex) -> bool:
        return abs(complex(z) - self.center) <= self.rad + 1e-15 * (1 + abs(self.center))

    def to_rectangle(self, bits: int | None = None) -> tuple[DyadicInterval, DyadicInterval]:
        """Bounding box of the disk, optionally rounded outward to ``bits`` fractional bits."""
        cr, ci, r = self.re, self.im, self.ulps
        p = self.prec
        if bits is not None and bits < p:
            k = p - bits
            lo_r, hi_r = (cr - r) >> k, -(-(cr + r) >> k)
            lo_i, hi_i = (ci - r) >> k, -(-(ci + r) >> k)
            p = bits
        else:
            lo_r, hi_r, lo_i, hi_i = cr - r, cr + r, ci - r, ci + r
        return (
            DyadicInterval(Dyadic(lo_r, p), Dyadic(hi_r, p)),
            DyadicInterval(Dyadic(lo_i, p), Dyadic(hi_i, p)),
        )

    def to_quadruple(self, bits: int | None = 96) -> list[str]:
        """``[re_lo, re_hi, im_lo, im_hi]`` as dyadic strings, rounded outward."""
        re, im = self.to_rectangle(bits)
        return [re.lo.to_string(), re.hi.to_string(), im.lo.to_string(), im.hi.to_string()]


# --------------------------------------------------------------------------
# Angles and parameters
# --------------------------------------------------------------------------

AngleLike = Union[QuadraticSurd, NobleNumber, RealOracle, Fraction, int, float, Dyadic, "RotationAngle"]


@dataclass(frozen=True)
class RotationAngle:
    """A rotation angle in [0, 1): a surd, a noble number, an oracle or a rational."""

    representation: object

    @classmethod
    def coerce(cls, x) -> "RotationAngle":
        if isinstance(x, RotationAngle):
            return x
        if isinstance(x, (CFracPrefix, list, tuple)):
            return cls(noble_value(x))
        if isinstance(x, float):
            x = Fraction(x)
        return cls(x)

    @property
    def is_rational(self) -> bool:
        r = self.representation
        if isinstance(r, (Fraction, int, Dyadic)):
            return True
        if isinstance(r, QuadraticSurd):
            return r.is_rational
        if isinstance(r, RealOracle):
            return isinstance(r.exact, Fraction)
        return False

    def interval(self, prec: int) -> DyadicInterval:
        r = self.representation
        if isinstance(r, NobleNumber):
            return r.value.to_interval(prec)
        if isinstance(r, QuadraticSurd):
            return r.to_interval(prec)
        if isinstance(r, RealOracle):
            d = r(prec)
            e = Dyadic(1, prec)
            return DyadicInterval(d - e, d + e)
        if isinstance(r, Dyadic):
            return DyadicInterval(r)
        if isinstance(r, (Fraction, int)):
            return DyadicInterval.from_fraction(Fraction(r), prec)
        raise TypeError(f"unsupported angle {type(r).__name__}")

    def __float__(self) -> float:
        return float(self.interval(64).mid)

    def terms(self, n: int) -> list[int]:
        r = self.representation
        if isinstance(r, (Fraction, int, Dyadic)):
            raise DomainError("rational angle has a finite expansion")
        return terms_of(r, n)

    def label(self) -> str:
        r = self.representation
        if isinstance(r, NobleNumber):
            return r.to_string()
        if isinstance(r, QuadraticSurd):
            return r.to_string()
        if isinstance(r, RealOracle):
            return r.label or "oracle"
        return str(r)


def multiplier(theta, prec: int = 128) -> ComplexInterval:
    """Enclosure of lambda = e^{2 pi i theta}."""
    theta = RotationAngle.coerce(theta)
    work = prec + 16
    with working_precision(work):
        th = theta.interval(work)
        arg = ipi(work) * th * 2
        return ComplexInterval.from_intervals(icos(arg, work), isin(arg, work), prec)


def critical_point(theta, prec: int = 128) -> ComplexInterval:
    """The critical point -lambda/2 of P_theta."""
    return -multiplier(theta, prec).half()


@dataclass(frozen=True)
class QuadParam:
    """``z^2 + c`` with an optional rotation angle of its alpha fixed point."""

    c: ComplexInterval
    theta: RotationAngle | None = None

    def to_json(self) -> dict:
        return {
            "c": self.c.to_quadruple(),
            "c_approx": [self.c.center.real, self.c.center.imag],
            "theta": None if self.theta is None else self.theta.label(),
        }


def theta_to_c(theta, prec: int = 128) -> QuadParam:
    """``c = lambda/2 - lambda^2/4``; the fixed point lambda/2 of z^2 + c has multiplier lambda."""
    theta = RotationAngle.coerce(theta)
    lam = multiplier(theta, prec)
    c = lam.half() - lam.square().scale_pow2(2)
    return QuadParam(c, theta)


# --------------------------------------------------------------------------
# Critical orbits
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class OrbitSegment:
    points: tuple[ComplexInterval, ...]
    precision: int

    @property
    def length(self) -> int:
        return len(self.points)

    @property
    def max_width(self) -> float:
        return max((p.width() for p in self.points), default=0.0)

    def centers(self) -> np.ndarray:
        return np.array([p.center for p in self.points], dtype=complex)

    def radii(self) -> np.ndarray:
        return np.array([p.rad for p in self.points], dtype=float)

    def to_json(self) -> list:
        return [p.to_quadruple() for p in self.points]


def _iterate(theta: RotationAngle, steps: int, prec: int, target: float) -> tuple[list[ComplexInterval], int | None]:
    lam = multiplier(theta, prec)
    z = -lam.half()
    pts = [z]
    for i in range(steps):
        z = lam * z + z.square()
        pts.append(z)
        if z.width_exceeds(target):
            return pts, i + 1
    return pts, None


def critical_orbit(
    theta,
    steps: int,
    precision: int = 128,
    *,
    target_width: float = 2.0**-40,
    max_precision: int = 16384,
) -> OrbitSegment:
    """Enclosures of c, P(c), ..., P^steps(c) for the critical point c of P_theta.

    The working precision doubles until every enclosure is at most
    ``target_width`` wide; past ``max_precision`` a :class:`PrecisionExhausted`
    reports the first step that exceeded the target.
    """
    if steps < 0:
        raise DomainError("steps must be non-negative")
    theta = RotationAngle.coerce(theta)
    prec = precision
    while True:
        pts, bad = _iterate(theta, steps, prec, target_width)
        if bad is None:
            return OrbitSegment(tuple(pts), prec)
        if prec >= max_precision:
            raise PrecisionExhausted(
                f"orbit enclosure wider than {target_width:.3g} at step {bad} with {prec} bits", step=bad
            )
        # widths grow roughly geometrically along the orbit: extrapolate the
        # bits needed for the full segment, at least doubling
        guess = int(prec * steps / bad * 1.15) + 64
        prec = min(max_precision, max(2 * prec, -(-guess // 64) * 64))


# --------------------------------------------------------------------------
# Julia sets (heuristic renderer)
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class JuliaRender:
    balls: BallUnion
    mask: np.ndarray = field(repr=False)
    escape: np.ndarray = field(repr=False)
    cell: float
    resolution: int


def _escape_grid(c: complex, n: int, max_iter: int, bailout: float):
    side = 1 << n
    cell = 4.0 / side
    coords = -2.0 + cell * (np.arange(side) + 0.5)
    z = coords[None, :] + 1j * coords[::-1, None]
    z = z.astype(complex)
    dz = np.ones_like(z)
    iters = np.full(z.shape, max_iter, dtype=np.int32)
    de = np.full(z.shape, np.inf)
    active = np.ones(z.shape, dtype=bool)
    zc, dc = z.copy(), dz.copy()
    for k in range(max_iter):
        idx = np.nonzero(active)
        if idx[0].size == 0:
            break
        zz = zc[idx]
        dd = dc[idx]
        dd = 2 * zz * dd
        zz = zz * zz + c
        zc[idx] = zz
        dc[idx] = dd
        mag = np.abs(zz)
        out = mag > bailout
        if out.any():
            oi = (idx[0][out], idx[1][out])
            iters[oi] = k + 1
            m = mag[out]
            de[oi] = 0.5 * m * np.log(m) / np.abs(dd[out])
            active[oi] = False
    return coords, cell, iters, de


def julia_render(
    p,
    resolution: int = 9,
    *,
    max_iter: int = 600,
    bailout: float = 1e8,
    budget: float = 5e9,
) -> JuliaRender:
    """Escape-time render of J_c as a union of balls over [-2, 2]^2.

    A cell of the 2**resolution grid is kept when the distance estimate of
    its center is below the cell's half-diagonal, or when it does not escape
    but touches an escaping cell.  Balls cover their cells and are clipped
    to B(0, 2 + 2**-resolution).  Heuristic: no Hausdorff certificate.
    """
    if resolution < 1:
        raise DomainError("resolution must be at least 1")
    c = p.c.center if isinstance(p, QuadParam) else complex(p)
    side = 1 << resolution
    if float(side) * side * max_iter > budget:
        raise BudgetExceeded(f"render of {side}x{side} cells x {max_iter} iterations exceeds budget")
    coords, cell, iters, de = _escape_grid(c, resolution, max_iter, bailout)
    half_diag = cell * math.sqrt(2) / 2
    escaped = iters < max_iter
    near = escaped & (de < half_diag)
    bounded = ~escaped
    touch = np.zeros_like(bounded)
    padded = np.pad(escaped, 1, constant_values=True)
    for di, dj in ((0, 1), (2, 1), (1, 0), (1, 2)):
        touch |= padded[di : di + side, dj : dj + side]
    mask = near | (bounded & touch)
    rows, cols = np.nonzero(mask)
    centers = coords[cols] + 1j * coords[::-1][rows]
    limit = 2.0 + 2.0**-resolution
    radii = np.minimum(half_diag, limit - np.abs(centers) - 2.0**-50)
    ok = radii > 0
    balls = BallUnion.from_arrays(centers[ok], radii[ok], bits=resolution + 30)
    # from_arrays pads radii by 2**-(resolution+30); keep the clip strict
    return JuliaRender(balls, mask, np.where(escaped, iters, 0), cell, resolution)


def write_pgm(path, image: np.ndarray) -> None:
    """Binary (P5) greyscale image."""
    img = np.asarray(image)
    if img.dtype != np.uint8:
        img = img.astype(np.float64)
        span = img.max() - img.min()
        img = ((img - img.min()) / span * 255 if span > 0 else np.zeros_like(img)).astype(np.uint8)
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


# --------------------------------------------------------------------------
# Circle maps
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CircleMap:
    """A degree-one circle homeomorphism given through its lift.

    ``kind == "rotation"``: x -> x + param.
    ``kind == "blaschke"``: the restriction of e^{2 pi i param} z^2 (z-3)/(1-3z)
    to the unit circle, with a cubic critical point at 1.
    """

    kind: str
    param: float

    def lift(self, x: float) -> float:
        if self.kind == "rotation":
            return x + self.param
        if self.kind == "blaschke":
            z = complex(math.cos(2 * math.pi * x), math.sin(2 * math.pi * x))
            w = z * (z - 3) / (1 - 3 * z)
            return x + self.param + math.atan2(w.imag, w.real) / (2 * math.pi)
        raise DomainError(f"unknown circle map kind {self.kind!r}")

    def orbit(self, x0: float, n: int) -> list[float]:
        out = [x0]
        x = x0
        for _ in range(n):
            x = self.lift(x)
            out.append(x)
        return out


# float error allowance per lift evaluation (relative to the orbit magnitude)
_LIFT_SLACK = 1e-13


def rotation_number_estimate(m: CircleMap, iterations: int) -> DyadicInterval:
    """Enclosure of the rotation number from ``iterations`` steps of the lift.

    For a lift F of a circle homeomorphism |F^N(x) - x - N rho| < 1, so
    (F^N(0) - 1)/N < rho < (F^N(0) + 1)/N.  For rigid rotations the orbit is
    exact up to float error and the estimate is tightened to that.
    """
    if iterations < 1:
        raise DomainError("need at least one iteration")
    if m.kind == "rotation":
        rho = Fraction(m.param)
        return DyadicInterval.from_fraction(rho, 64)
    x = 0.0
    for _ in range(iterations):
        x = m.lift(x)
    slack = _LIFT_SLACK * iterations * (1 + abs(x))
    lo = (x - 1 - slack) / iterations
    hi = (x + 1 + slack) / iterations
    return DyadicInterval(Dyadic.approx(lo, 60, "floor"), Dyadic.approx(hi, 60, "ceil"))


def _rho_probe(tau: float, convs: Sequence[tuple[int, int]], target: Fraction) -> int:
    """-1 if rho(f_tau) < target, +1 if above, 0 if undecided by the given convergents.

    For a lift F and p/q, F^q(0) < p forces rho <= p/q and F^q(0) > p forces
    rho >= p/q.  Convergents alternate around the target, so the first one on
    which the orbit lands on the wrong side decides the comparison.
    """
    m = CircleMap("blaschke", tau)
    x = 0.0
    done = 0
    for p, q in convs:
        while done < q:
            x = m.lift(x)
            done += 1
        slack = _LIFT_SLACK * done * (1 + abs(x))
        if Fraction(p, q) < target:
            if x < p - slack:
                return -1
        elif x > p + slack:
            return 1
    return 0


def tau_for_rotation(gamma, tol=2.0**-20, *, max_terms: int = 40) -> DyadicInterval:
    """Bracket of the Blaschke parameter tau with rotation number ``gamma``.

    Bisection on the monotone map tau -> rho(f_tau), deciding each probe with
    the convergents of ``gamma``.  Rational targets sit on mode-locking
    plateaus where tau is not unique and are rejected.
    """
    gamma = RotationAngle.coerce(gamma)
    tol = float(tol)
    if tol >= 1.0:
        return DyadicInterval(0, 1)
    if gamma.is_rational:
        raise BudgetExceeded("rational rotation target: mode-locking plateau, tau is not unique")
    convs = convergents(gamma.terms(max_terms))
    target = gamma.interval(128).mid.to_fraction()
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        s = _rho_probe(mid, convs, target)
        if s == 0:
            raise BudgetExceeded(
                f"rotation number at tau={mid!r} not separated from target by {max_terms} convergents"
            )
        if s < 0:
            lo = mid
        else:
            hi = mid
    return DyadicInterval(Dyadic.coerce(lo), Dyadic.coerce(hi))


@dataclass(frozen=True)
class Arc:
    start: float
    length: float
    index: int


def dynamical_partition(tau, gamma, level: int) -> list[Arc]:
    """Arcs cut out of the circle by {1, f(1), ..., f^{q_{n+1}-1}(1)}.

    Angles are in turns.  ``index`` is the orbit index of each arc's left endpoint.
    """
    gamma = RotationAngle.coerce(gamma)
    tau_f = float(tau.mid) if isinstance(tau, DyadicInterval) else float(tau)
    qs = denominators(gamma.terms(level + 1))
    count = qs[level]
    m = CircleMap("blaschke", tau_f)
    pts = [x % 1.0 for x in m.orbit(0.0, count - 1)]
    order = sorted(range(count), key=lambda i: pts[i])
    arcs = []
    for j, i in enumerate(order):
        nxt = pts[order[(j + 1) % count]]
        length = (nxt - pts[i]) % 1.0
        if count == 1:
            length = 1.0
        arcs.append(Arc(pts[i], length, i))
    return arcs


def max_adjacent_ratio(arcs: Sequence[Arc]) -> float:
    lengths = [a.length for a in arcs]
    n = len(lengths)
    return max(max(lengths[i] / lengths[(i + 1) % n], lengths[(i + 1) % n] / lengths[i]) for i in range(n))
