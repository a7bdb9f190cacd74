"""Finite unions of closed dyadic balls and their Hausdorff distances."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import DomainError, EmptySet
from .exactnum import Dyadic, DyadicInterval

# Relative slack added to float distance computations before they are turned
# into dyadic enclosures.  Each computed distance carries a few ulps of error.
_FLOAT_SLACK = 1e-12


@dataclass(frozen=True)
class Ball:
    x: Dyadic
    y: Dyadic
    r: Dyadic

    def __post_init__(self):
        for name in ("x", "y", "r"):
            object.__setattr__(self, name, Dyadic.coerce(getattr(self, name)))
        if self.r.sign() < 0:
            raise DomainError("ball radius must be non-negative")


@dataclass(frozen=True)
class BallUnion:
    balls: tuple[Ball, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "balls", tuple(self.balls))

    def __len__(self) -> int:
        return len(self.balls)

    def __iter__(self):
        return iter(self.balls)

    @property
    def is_empty(self) -> bool:
        return not self.balls

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Centers as a complex array and radii as a float array."""
        centers = np.array([complex(float(b.x), float(b.y)) for b in self.balls], dtype=complex)
        radii = np.array([float(b.r) for b in self.balls], dtype=float)
        return centers, radii

    @classmethod
    def from_arrays(cls, centers: Sequence[complex], radii, bits: int = 53) -> "BallUnion":
        """Build from floats, rounding centers to 2**-bits and radii upward."""
        radii = np.broadcast_to(np.asarray(radii, dtype=float), (len(centers),))
        balls = []
        for z, r in zip(centers, radii):
            # rounding the center moves it by <= 2**-bits per axis; the radius absorbs it
            cx = Dyadic.approx(float(np.real(z)), bits, "nearest")
            cy = Dyadic.approx(float(np.imag(z)), bits, "nearest")
            slack = Dyadic(1, bits) if r > 0 else Dyadic(0)
            balls.append(Ball(cx, cy, Dyadic.approx(float(r), bits, "ceil") + slack))
        return cls(tuple(balls))

    # text / json --------------------------------------------------------
    def to_text(self) -> str:
        return "".join(f"{b.x.to_string()} {b.y.to_string()} {b.r.to_string()}\n" for b in self.balls)

    @classmethod
    def from_text(cls, text: str) -> "BallUnion":
        balls = []
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            x, y, r = line.split()
            balls.append(Ball(Dyadic.parse(x), Dyadic.parse(y), Dyadic.parse(r)))
        return cls(tuple(balls))

    def to_json(self) -> list:
        return [[b.x.to_string(), b.y.to_string(), b.r.to_string()] for b in self.balls]

    @classmethod
    def from_json(cls, data: str | list) -> "BallUnion":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(tuple(Ball(Dyadic.parse(x), Dyadic.parse(y), Dyadic.parse(r)) for x, y, r in data))


def ball_union_from_points(pts: Iterable, r) -> BallUnion:
    """One closed ball of radius ``r`` around each point.

    Points may be ``(x, y)`` pairs of dyadic-coercible values or complex
    numbers (floats are converted exactly).
    """
    r = Dyadic.coerce(r)
    if r.sign() < 0:
        raise DomainError("radius must be non-negative")
    balls = []
    for p in pts:
        if isinstance(p, complex):
            x, y = p.real, p.imag
        else:
            x, y = p
        balls.append(Ball(Dyadic.coerce(x), Dyadic.coerce(y), r))
    return BallUnion(tuple(balls))


def _brute_dist(pts: np.ndarray, centers: np.ndarray, radii: np.ndarray) -> np.ndarray:
    out = np.empty(len(pts))
    step = max(1, 2_000_000 // max(1, len(centers)))
    for s in range(0, len(pts), step):
        d = np.abs(pts[s : s + step, None] - centers[None, :]) - radii[None, :]
        out[s : s + step] = d.min(axis=1)
    return out


class _UnionDistance:
    """Signed min_j (|x - c_j| - r_j), via a kd-tree over the centres.

    Negative inside the union; clamp at 0 for the distance to the union.

    With k nearest centres at hand, any farther centre is at least
    ``d_k - r_max`` away, so points whose best value is below that bound
    are exact; the rest fall back to a full scan.
    """

    _K = 16

    def __init__(self, centers: np.ndarray, radii: np.ndarray):
        self.centers, self.radii = centers, radii
        self.rmax = float(radii.max())
        self.uniform = float(radii.min()) == self.rmax
        self.tree = cKDTree(np.column_stack([centers.real, centers.imag])) if len(centers) > 64 else None

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        if self.tree is None or len(pts) == 0:
            return _brute_dist(pts, self.centers, self.radii)
        xy = np.column_stack([pts.real, pts.imag])
        if self.uniform:
            d, _ = self.tree.query(xy, k=1)
            return d - self.rmax
        k = min(self._K, len(self.centers))
        d, idx = self.tree.query(xy, k=k)
        best = (d - self.radii[idx]).min(axis=1)
        unsure = best > d[:, -1] - self.rmax
        if k < len(self.centers) and unsure.any():
            best[unsure] = _brute_dist(pts[unsure], self.centers, self.radii)
        return best


def _directed_sup(a_c, a_r, b_c, b_r, tol: float, max_depth: int = 60) -> tuple[float, float]:
    """Bounds on sup over x in A of dist(x, B) for ball unions A and B.

    dist(x, B) is 1-Lipschitz.  Each ball of A starts as one square cell;
    cells whose bound cannot beat the best value found by more than ``tol``
    are retired, the rest are split in four.
    """
    root2 = math.sqrt(2.0)
    dist = _UnionDistance(b_c, b_r)
    # sup over ball i of |x - c_j| - r_j is |c_i - c_j| + r_i - r_j; the min over j bounds the union
    ball_bound = np.maximum(dist(a_c) + a_r, 0.0)
    cells = a_c.copy()
    half = a_r.copy()
    owner = np.arange(len(a_c))
    lower = 0.0
    retired_upper = 0.0
    for _ in range(max_depth):
        oc, orad = a_c[owner], a_r[owner]
        off = cells - oc
        mag = np.abs(off)
        hit = mag - half * root2 <= orad
        cells, half, owner, off, mag, oc, orad = (
            v[hit] for v in (cells, half, owner, off, mag, oc, orad)
        )
        if len(cells) == 0:
            break
        # lower bound from the point of the owning ball nearest the cell centre;
        # upper bound from the centre value plus the half-diagonal
        scale = np.where(mag > orad, orad / np.where(mag > 0, mag, 1.0), 1.0)
        rep = oc + off * scale
        vals = np.maximum(dist(rep), 0.0)
        lower = max(lower, float(vals.max()))
        ub = np.minimum(np.maximum(dist(cells) + root2 * half, 0.0), ball_bound[owner])
        done = ub <= lower + tol
        if done.any():
            retired_upper = max(retired_upper, float(ub[done].max()))
        keep = ~done
        if not keep.any():
            return lower, max(lower, retired_upper)
        cells, half, owner = cells[keep], half[keep] / 2, owner[keep]
        shifts = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j])
        cells = (cells[:, None] + half[:, None] * shifts[None, :]).ravel()
        half = np.repeat(half, 4)
        owner = np.repeat(owner, 4)
    # depth exhausted: remaining cells bound the sup by value + diameter
    remaining = 0.0
    if len(cells):
        rep_vals = dist(cells)
        remaining = float(np.minimum(rep_vals + root2 * half, ball_bound[owner]).max())
    return lower, max(lower, retired_upper, remaining)


def hausdorff_distance(a: BallUnion, b: BallUnion, tol=2.0**-20) -> DyadicInterval:
    """Enclosure of the Hausdorff distance between two closed ball unions.

    The returned interval has width at most ``tol`` plus float slack; both
    directed distances are bracketed by a branch-and-bound over cells.
    """
    if a.is_empty or b.is_empty:
        raise EmptySet("Hausdorff distance needs two nonempty unions")
    tol = float(tol)
    ac, ar = a.arrays()
    bc, br = b.arrays()
    lo1, hi1 = _directed_sup(ac, ar, bc, br, tol)
    lo2, hi2 = _directed_sup(bc, br, ac, ar, tol)
    lo, hi = max(lo1, lo2), max(hi1, hi2)
    scale = 1.0 + max(np.abs(ac).max() + ar.max(), np.abs(bc).max() + br.max())
    slack = _FLOAT_SLACK * scale
    return DyadicInterval(
        Dyadic.approx(max(lo - slack, 0.0), 64, "floor"),
        Dyadic.approx(hi + slack, 64, "ceil"),
    )
