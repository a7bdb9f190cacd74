"""Conformal radius of planar domains carved out of a disk by closed balls.

The conformal radius r(U, 0) equals exp(h(0)) where h is harmonic on U with
boundary values log|zeta|: the Green function of U with pole at 0 is
-log|z| + h(z), and h(0) = log r(U, 0).  Two solvers estimate h(0):

* ``stochastic``: walk on spheres started at 0, absorbed in an eps-shell
  around the boundary and projected to the nearest boundary point.
* ``grid``: a Shortley-Weller finite-difference Dirichlet solve with
  Richardson error control between steps h and h/2.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from functools import cached_property
from statistics import NormalDist
from typing import Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.spatial import cKDTree

from .cfrac import CFracPrefix, _as_prefix, denominators, noble_value
from .errors import BudgetExceeded, DomainError, OriginCovered, PreconditionError
from .exactnum import Dyadic
from .quaddyn import OrbitSegment, critical_orbit
from .setapprox import BallUnion

__all__ = [
    "DomainSpec",
    "RadiusEstimate",
    "NobleRadiusRun",
    "carve_domain",
    "conformal_radius",
    "noble_radius",
    "perturbation_gap_check",
    "lens_conformal_radius",
    "orbit_gaps",
]

# Calibrated walk-on-spheres bias constant: |bias of log r| <= BIAS_CONSTANT * eps / l
# where l is the distance from the marked point to the boundary.  Measured on
# off-centre disks (see tests/test_confrad.py::test_bias_constant_calibration)
# with a safety factor of 4.
BIAS_CONSTANT = 0.5

# coarser shell used for the paired in-situ bias estimate
_BIAS_PROBE_FACTOR = 4.0
_WOS_BATCH = 4096
_MAX_WOS_STEPS = 10_000


def _dy(x: float, bits: int = 60, rounding: str = "nearest") -> Dyadic:
    return Dyadic.approx(float(x), bits, rounding)


# --------------------------------------------------------------------------
# Domains
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DomainSpec:
    """Component containing 0 of B(outer_center, outer_radius) minus closed obstacle balls."""

    outer_radius: float
    obstacles: BallUnion = field(default_factory=BallUnion)
    outer_center: complex = 0j
    connected: bool | None = None
    separated: bool | None = None

    def __post_init__(self):
        if self.outer_radius <= 0:
            raise DomainError("outer radius must be positive")
        if abs(self.outer_center) >= self.outer_radius:
            raise DomainError("origin must lie inside the outer disk")
        c, r = self.arrays
        if len(c) and np.any(np.abs(c) - r <= 0):
            raise OriginCovered("origin lies in an obstacle")

    @cached_property
    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return self.obstacles.arrays()

    @cached_property
    def _tree(self):
        c, _ = self.arrays
        if len(c) == 0:
            return None
        return cKDTree(np.column_stack([c.real, c.imag]))

    @classmethod
    def disk(cls, radius: float, center: complex = 0j) -> "DomainSpec":
        return cls(float(radius), BallUnion(), complex(center))

    @classmethod
    def from_arrays(cls, outer_radius, centers, radii, outer_center=0j, **kw) -> "DomainSpec":
        return cls(float(outer_radius), BallUnion.from_arrays(list(centers), radii), complex(outer_center), **kw)

    def with_obstacles(self, centers, radii) -> "DomainSpec":
        c, r = self.arrays
        cc = np.concatenate([c, np.asarray(centers, dtype=complex)])
        rr = np.concatenate([r, np.broadcast_to(np.asarray(radii, dtype=float), (len(centers),))])
        return DomainSpec.from_arrays(self.outer_radius, cc, rr, self.outer_center)

    def scaled(self, s: float) -> "DomainSpec":
        c, r = self.arrays
        return DomainSpec.from_arrays(self.outer_radius * s, c * s, r * s, self.outer_center * s)

    @property
    def inradius(self) -> float:
        """Distance from 0 to the boundary."""
        d, _ = self.boundary_distance(np.zeros(1, dtype=complex))
        return float(d[0])

    def boundary_distance(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Exact distance from each point to the boundary, and the nearest boundary point.

        Points inside an obstacle get a negative distance.
        """
        x = np.asarray(x, dtype=complex)
        oc, R = self.outer_center, self.outer_radius
        off = x - oc
        mag = np.abs(off)
        dist = R - mag
        safe = np.where(mag > 0, mag, 1.0)
        unit = np.where(mag > 0, off / safe, 1.0)
        proj = oc + unit * R
        c, r = self.arrays
        if len(c) == 0:
            return dist, proj
        k = min(len(c), 8)
        dd, ii = self._tree.query(np.column_stack([x.real, x.imag]), k=k)
        if k == 1:
            dd, ii = dd[:, None], ii[:, None]
        vals = dd - r[ii]
        j = vals.argmin(axis=1)
        rows = np.arange(len(x))
        best = vals[rows, j]
        idx = ii[rows, j]
        if k < len(c):
            # balls beyond the k nearest centers are at least dd[:, -1] - rmax away
            unsure = best > dd[:, -1] - r.max()
            for row in np.nonzero(unsure)[0]:
                allv = np.abs(x[row] - c) - r
                jj = int(allv.argmin())
                best[row], idx[row] = allv[jj], jj
        cb = c[idx]
        off_b = x - cb
        mag_b = np.abs(off_b)
        unit_b = np.where(mag_b > 0, off_b / np.where(mag_b > 0, mag_b, 1.0), 1.0)
        proj_b = cb + unit_b * r[idx]
        use = best < dist
        return np.where(use, best, dist), np.where(use, proj_b, proj)

    def contains(self, z: complex) -> bool:
        d, _ = self.boundary_distance(np.array([z], dtype=complex))
        return bool(d[0] > 0)

    def to_json(self) -> dict:
        return {
            "outer_center": [_dy(self.outer_center.real).to_string(), _dy(self.outer_center.imag).to_string()],
            "outer_radius": _dy(self.outer_radius).to_string(),
            "obstacles": len(self.obstacles),
            "connected": self.connected,
            "separated": self.separated,
        }


def _wrap(a: np.ndarray) -> np.ndarray:
    return (a + np.pi) % (2 * np.pi) - np.pi


def obstacle_topology(centers: np.ndarray, radii: np.ndarray) -> tuple[bool, bool]:
    """Whether the ball union is connected, and whether it winds around the origin.

    Union-find over the intersection graph, carrying the unwrapped angle of
    each ball center as seen from 0 relative to its root.  Segments between
    the centers of two intersecting balls stay inside their union, so a cycle
    whose angles do not sum to zero encircles the origin.
    """
    n = len(centers)
    if n == 0:
        return True, False
    parent = list(range(n))
    pot = [0.0] * n  # angle(node) - angle(parent), unwrapped along tree paths
    arg = np.angle(centers)

    def find(v: int) -> tuple[int, float]:
        acc = 0.0
        path = []
        while parent[v] != v:
            path.append(v)
            acc += pot[v]
            v = parent[v]
        root = v
        # path compression with accumulated potentials
        total = acc
        for u in path:
            old = pot[u]
            pot[u] = total
            parent[u] = root
            total -= old
        return root, acc

    tree = cKDTree(np.column_stack([centers.real, centers.imag]))
    pairs = tree.query_pairs(2 * float(radii.max()), output_type="ndarray")
    winds = False
    components = n
    if len(pairs):
        a, b = pairs[:, 0], pairs[:, 1]
        touch = np.abs(centers[a] - centers[b]) <= radii[a] + radii[b]
        a, b = a[touch], b[touch]
        delta = _wrap(arg[b] - arg[a])
        for u, v, d in zip(a.tolist(), b.tolist(), delta.tolist()):
            ru, pu = find(u)
            rv, pv = find(v)
            if ru == rv:
                if abs(pu + d - pv) > np.pi:
                    winds = True
            else:
                parent[rv] = ru
                pot[rv] = pu + d - pv
                components -= 1
    return components == 1, winds


def carve_domain(orbit, disk_radius, outer_radius=2) -> DomainSpec:
    """Remove a closed ball around every orbit point from B(0, outer_radius).

    Each ball has radius ``disk_radius`` plus the width of the orbit point's
    enclosure.  Raises :class:`OriginCovered` when a ball contains 0.
    """
    rho = float(disk_radius)
    if rho < 0:
        raise DomainError("disk radius must be non-negative")
    if isinstance(orbit, OrbitSegment):
        centers = orbit.centers()
        radii = rho + np.array([p.width() for p in orbit.points]) + 2.0**-52
    else:
        centers = np.asarray(list(orbit), dtype=complex)
        radii = np.full(len(centers), rho)
    if len(centers) == 0:
        return DomainSpec(float(outer_radius), BallUnion(), 0j, True, False)
    if np.any(np.abs(centers) <= radii):
        j = int(np.argmin(np.abs(centers) - radii))
        raise OriginCovered(
            f"obstacle {j} of radius {radii[j]:.6g} covers the origin (|center| = {abs(centers[j]):.6g})"
        )
    connected, separated = obstacle_topology(centers, radii)
    balls = BallUnion.from_arrays(centers, radii)
    return DomainSpec(float(outer_radius), balls, 0j, connected, separated)


# --------------------------------------------------------------------------
# Estimates
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RadiusEstimate:
    value: Dyadic
    error: Dyadic
    model: str
    confidence: float | None = None
    walkers: int | None = None
    seed: int | None = None
    grid_step: float | None = None
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def lo(self) -> float:
        return float(self.value) - float(self.error)

    @property
    def hi(self) -> float:
        return float(self.value) + float(self.error)

    def __float__(self) -> float:
        return float(self.value)

    def to_json(self) -> dict:
        out = {
            "value": self.value.to_string(),
            "value_decimal": repr(float(self.value)),
            "error": self.error.to_string(),
            "error_decimal": repr(float(self.error)),
            "model": self.model,
        }
        if self.model == "statistical":
            out.update(confidence=self.confidence, walkers=self.walkers, seed=self.seed)
        else:
            out.update(grid_step=self.grid_step, order_note="second order; error from step h vs h/2")
        out.update({k: v for k, v in sorted(self.meta.items())})
        return out

    @classmethod
    def from_json(cls, data: dict) -> "RadiusEstimate":
        known = {"value", "value_decimal", "error", "error_decimal", "model", "confidence", "walkers", "seed",
                 "grid_step", "order_note"}
        return cls(
            Dyadic.parse(data["value"]),
            Dyadic.parse(data["error"]),
            data["model"],
            data.get("confidence"),
            data.get("walkers"),
            data.get("seed"),
            data.get("grid_step"),
            {k: v for k, v in data.items() if k not in known},
        )


def _finish(log_value: float, log_err: float, **kw) -> RadiusEstimate:
    r = math.exp(log_value)
    err = r * math.expm1(log_err) + 1e-15 * r
    return RadiusEstimate(_dy(r), Dyadic.approx(err, 60, "ceil"), **kw)


# --------------------------------------------------------------------------
# Walk on spheres
# --------------------------------------------------------------------------


def _wos_batch(dom: DomainSpec, n: int, rng: np.random.Generator, eps: float) -> tuple[np.ndarray, np.ndarray]:
    """Boundary values log|zeta| at absorption in the eps-shell and in the coarser probe shell."""
    pos = np.zeros(n, dtype=complex)
    fine = np.full(n, np.nan)
    coarse = np.full(n, np.nan)
    active = np.arange(n)
    probe = _BIAS_PROBE_FACTOR * eps
    for _ in range(_MAX_WOS_STEPS):
        if active.size == 0:
            break
        x = pos[active]
        dist, proj = dom.boundary_distance(x)
        vals = np.log(np.abs(proj))
        first = (dist < probe) & np.isnan(coarse[active])
        coarse[active[first]] = vals[first]
        hit = dist < eps
        fine[active[hit]] = vals[hit]
        active = active[~hit]
        dist = dist[~hit]
        ang = rng.random(active.size) * (2 * np.pi)
        pos[active] = pos[active] + dist * np.exp(1j * ang)
    if active.size:
        raise BudgetExceeded(f"{active.size} walkers not absorbed after {_MAX_WOS_STEPS} steps")
    return fine, coarse


def _stochastic(
    dom: DomainSpec,
    target: float,
    seed: int,
    confidence: float,
    eps: float | None,
    max_walkers: int,
    min_walkers: int,
    deadline: float | None,
) -> RadiusEstimate:
    ell = dom.inradius
    z = NormalDist().inv_cdf(0.5 + confidence / 2)
    # target in log space, relative to a crude size guess (inradius <= r <= 4 * inradius)
    r_guess = 4 * ell
    log_target = math.log1p(target / r_guess)
    if eps is None:
        eps = min(2.0**-12 * dom.outer_radius, 0.25 * log_target * ell / BIAS_CONSTANT)
    floor_bias = BIAS_CONSTANT * eps / ell
    fine: list[np.ndarray] = []
    coarse: list[np.ndarray] = []
    n = 0
    batch = 0
    needed = max(min_walkers, _WOS_BATCH)
    while True:
        while n < needed and n < max_walkers:
            if deadline is not None and time.monotonic() > deadline:
                raise BudgetExceeded("walk-on-spheres wall-clock budget exhausted")
            rng = np.random.default_rng([seed, batch])
            f, c = _wos_batch(dom, _WOS_BATCH, rng, eps)
            fine.append(f)
            coarse.append(c)
            n += _WOS_BATCH
            batch += 1
        vals = np.concatenate(fine)
        diffs = np.concatenate(coarse) - vals
        mean = float(vals.mean())
        sd = float(vals.std(ddof=1))
        hw = z * sd / math.sqrt(n)
        # paired estimate of the bias at the probe shell; bias is linear in eps
        d_mean = float(diffs.mean())
        d_hw = z * float(diffs.std(ddof=1)) / math.sqrt(n)
        insitu = (abs(d_mean) + d_hw) / (_BIAS_PROBE_FACTOR - 1)
        bias = max(floor_bias, insitu)
        log_err = hw + bias
        r_hat = math.exp(mean)
        goal = math.log1p(target / r_hat)
        if log_err <= goal or n >= max_walkers:
            break
        if goal <= bias:
            # more walkers cannot help; the shell is too thick for the target
            break
        want = (z * sd / (goal - bias)) ** 2
        needed = min(max_walkers, int(math.ceil(want * 1.1 / _WOS_BATCH)) * _WOS_BATCH)
        if needed <= n:
            needed = n + _WOS_BATCH
    return _finish(
        mean,
        log_err,
        model="statistical",
        confidence=confidence,
        walkers=n,
        seed=seed,
        meta={
            "eps": repr(eps),
            "bias_bound": repr(bias),
            "log_half_width": repr(hw),
            "target_met": bool(log_err <= goal),
        },
    )


# --------------------------------------------------------------------------
# Finite differences
# --------------------------------------------------------------------------


def _ray_hit(dom: DomainSpec, z: np.ndarray, e: complex, h: float) -> np.ndarray:
    """Fraction t in (0, 1] of the first boundary crossing along z + t*h*e."""
    t_best = np.full(len(z), np.inf)

    def circle(center, radius, inside_start: bool, zz, out):
        # |zz + s e - center| = radius, s = t h
        w = zz - center
        b = (w * np.conj(e)).real
        cc = np.abs(w) ** 2 - radius**2
        disc = b * b - cc
        ok = disc >= 0
        sq = np.sqrt(np.where(ok, disc, 0.0))
        s = np.where(inside_start, -b + sq, -b - sq)
        good = ok & (s > 0) & (s <= h * (1 + 1e-12))
        np.minimum(out, np.where(good, s / h, np.inf), out=out)

    circle(dom.outer_center, dom.outer_radius, True, z, t_best)
    c, r = dom.arrays
    if len(c):
        tree = dom._tree
        cand = tree.query_ball_point(np.column_stack([z.real, z.imag]), h + float(r.max()))
        for row, js in enumerate(cand):
            if not js:
                continue
            js = np.asarray(js)
            sub = np.full(len(js), np.inf)
            circle(c[js], r[js], False, np.full(len(js), z[row]), sub)
            t_best[row] = min(t_best[row], float(sub.min()))
    return np.clip(t_best, 1e-12, 1.0)


def _grid_solve(dom: DomainSpec, h: float) -> float:
    oc, R = dom.outer_center, dom.outer_radius
    i0, i1 = math.floor((oc.real - R) / h), math.ceil((oc.real + R) / h)
    j0, j1 = math.floor((oc.imag - R) / h), math.ceil((oc.imag + R) / h)
    xs = np.arange(i0, i1 + 1) * h
    ys = np.arange(j0, j1 + 1) * h
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    Z = (X + 1j * Y).ravel()
    dist, _ = dom.boundary_distance(Z)
    inside = (dist > 0).reshape(X.shape)
    nx, ny = X.shape
    index = -np.ones(X.shape, dtype=np.int64)
    ii, jj = np.nonzero(inside)
    index[ii, jj] = np.arange(len(ii))
    n = len(ii)
    zc = xs[ii] + 1j * ys[jj]
    arms = []
    for di, dj, e in ((1, 0, 1 + 0j), (-1, 0, -1 + 0j), (0, 1, 1j), (0, -1, -1j)):
        ni, nj = ii + di, jj + dj
        inb = (ni >= 0) & (ni < nx) & (nj >= 0) & (nj < ny)
        nbr = np.full(n, -1, dtype=np.int64)
        nbr[inb] = index[ni[inb], nj[inb]]
        t = np.ones(n)
        cut = nbr < 0
        if cut.any():
            t[cut] = _ray_hit(dom, zc[cut], e, h)
        gval = np.zeros(n)
        gval[cut] = np.log(np.abs(zc[cut] + t[cut] * h * e))
        arms.append((nbr, t * h, gval, cut))
    rows, cols, data = [], [], []
    rhs = np.zeros(n)
    diag = np.zeros(n)
    for axis in (0, 1):
        (n1, d1, g1, c1), (n2, d2, g2, c2) = arms[2 * axis], arms[2 * axis + 1]
        for nb, d, g, c, other in ((n1, d1, g1, c1, d2), (n2, d2, g2, c2, d1)):
            coef = 2.0 / (d * (d + other))
            diag += coef
            rhs[c] += coef[c] * g[c]
            keep = ~c
            rows.append(np.nonzero(keep)[0])
            cols.append(nb[keep])
            data.append(-coef[keep])
    rows.append(np.arange(n))
    cols.append(np.arange(n))
    data.append(diag)
    A = sp.csr_matrix((np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    if n > 40_000:
        import pyamg

        ml = pyamg.ruge_stuben_solver(A)
        u = ml.solve(rhs, tol=1e-13, maxiter=200)
    else:
        u = spla.spsolve(A.tocsc(), rhs)
    k0 = index[-i0, -j0]
    if k0 < 0:
        raise DomainError("origin is not an interior grid node")
    return float(u[k0])


def _grid(dom: DomainSpec, target: float, grid_step: float | None, max_nodes: int, deadline) -> RadiusEstimate:
    h = grid_step if grid_step is not None else dom.outer_radius / 32
    ell = dom.inradius
    if h >= ell:
        h = ell / 2
    coarse = _grid_solve(dom, h)
    while True:
        nodes = (2 * dom.outer_radius / (h / 2)) ** 2
        if nodes > max_nodes:
            raise BudgetExceeded(f"grid step {h / 2:.3g} needs about {nodes:.3g} nodes")
        if deadline is not None and time.monotonic() > deadline:
            raise BudgetExceeded("grid wall-clock budget exhausted")
        fine = _grid_solve(dom, h / 2)
        diff = abs(fine - coarse)
        value = fine + (fine - coarse) / 3
        log_err = diff + 1e-12
        r = math.exp(value)
        if r * math.expm1(log_err) <= target or grid_step is not None:
            return _finish(value, log_err, model="deterministic", grid_step=h / 2)
        h /= 2
        coarse = fine


def conformal_radius(
    d: DomainSpec,
    target_error=2.0**-10,
    backend: str = "stochastic",
    *,
    seed: int = 0,
    confidence: float = 0.95,
    eps: float | None = None,
    max_walkers: int = 1 << 20,
    min_walkers: int = 0,
    grid_step: float | None = None,
    max_nodes: int = 6_000_000,
    budget_seconds: float | None = None,
) -> RadiusEstimate:
    """Estimate r(d, 0) with an error bar.

    ``stochastic`` errors are confidence half-widths plus a bias bound;
    ``grid`` errors are Richardson differences between steps h and h/2.
    The stochastic walker count adapts to ``target_error`` up to
    ``max_walkers``; the returned error is what was achieved.
    """
    target = float(target_error)
    if target <= 0:
        raise DomainError("target error must be positive")
    deadline = None if budget_seconds is None else time.monotonic() + budget_seconds
    if backend == "stochastic":
        est = _stochastic(d, target, seed, confidence, eps, max_walkers, min_walkers, deadline)
    elif backend == "grid":
        est = _grid(d, target, grid_step, max_nodes, deadline)
    else:
        raise DomainError(f"unknown backend {backend!r}")
    if d.separated is False and len(d.obstacles):
        est.meta["warning"] = "NotEnclosed: obstacles do not separate 0 from the outer circle"
    return est


# --------------------------------------------------------------------------
# Exact reference: a disk cut by a line
# --------------------------------------------------------------------------


def lens_conformal_radius(R: float, d: float) -> float:
    """Exact r(U, 0) for U = {|z| < R, Re z > -d}, 0 < d < R.

    The Moebius map m(z) = (z - w+)/(z - w-) sends the corners w+-, w- to 0 and
    infinity and U onto a wedge of opening alpha = pi/2 + arcsin(d/R) whose
    edge through m(-d) = -1 comes from the line.  The power p = pi/alpha
    opens the wedge to a half-plane, where r = 2 Im f(0) / |f'(0)|.
    """
    if not 0 < d < R:
        raise DomainError("need 0 < d < R")
    s = math.sqrt(R * R - d * d)
    a = math.asin(d / R)
    # corners w+- = -d +- i s = R e^{+-i(pi/2 + a)}: m(0) = w+/w- = -e^{2ia} sits at
    # angle 2a from -1, and |m'(0)| = |w+ - w-| / R^2 = 2s / R^2
    p = math.pi / (math.pi / 2 + a)
    return R * R * math.sin(2 * p * a) / (p * s)


# --------------------------------------------------------------------------
# Noble radii
# --------------------------------------------------------------------------


def orbit_gaps(points: np.ndarray, theta: float) -> np.ndarray:
    """Distances between orbit points adjacent in rotation order.

    P^i(c) sits at angle i*theta (plus a constant) under the linearizing
    conjugacy, so sorting i*theta mod 1 gives the circular order on the
    boundary of the Siegel disk.
    """
    n = len(points)
    order = np.argsort((np.arange(n) * theta) % 1.0, kind="stable")
    ring = points[order]
    return np.abs(np.roll(ring, -1) - ring)


@dataclass(frozen=True)
class NobleRadiusRun:
    prefix: CFracPrefix
    level: int
    orbit_len: int
    obstacle_radius: float
    estimate: RadiusEstimate
    mode: str
    approximation_bound: float
    min_orbit_abs: float
    connected: bool | None
    separated: bool | None
    schedule: dict = field(default_factory=dict)

    @property
    def koebe_ok(self) -> bool:
        return self.min_orbit_abs >= float(self.estimate.value) / 4 - float(self.estimate.error)

    @property
    def total_error(self) -> float:
        """Solver error plus the bound on |r(W_n) - r(Delta)|."""
        return float(self.estimate.error) + self.approximation_bound

    def to_json(self) -> dict:
        return {
            "prefix": self.prefix.to_string(noble=True),
            "level": self.level,
            "orbit_len": self.orbit_len,
            "obstacle_radius": repr(self.obstacle_radius),
            "mode": self.mode,
            "estimate": self.estimate.to_json(),
            "approximation_bound": repr(self.approximation_bound),
            "min_orbit_abs": repr(self.min_orbit_abs),
            "koebe_ok": self.koebe_ok,
            "connected": self.connected,
            "separated": self.separated,
            "schedule": self.schedule,
        }


def theoretical_obstacle_radius(prefix: CFracPrefix, level: int, B: float) -> float:
    """2 K tau^n with tau = sqrt(B/(B+1)), K = 2 K1, K1 = (2 max a_i)^(10 B^2)."""
    if B <= 1:
        raise DomainError("the real-bounds constant B must exceed 1")
    amax = max([1, *prefix.terms])
    log_k1 = 10 * B * B * math.log(2 * amax)
    log_r = math.log(4) + log_k1 + level * 0.5 * math.log(B / (B + 1))
    return math.exp(log_r) if log_r < 700 else math.inf


EMPIRICAL_GAP_FACTOR = 0.6


def noble_radius(
    prefix,
    level: int,
    mode: str = "empirical",
    *,
    B: float | None = None,
    backend: str = "stochastic",
    target_error=2.0**-10,
    seed: int = 0,
    outer_radius: float = 2.0,
    gap_factor: float = EMPIRICAL_GAP_FACTOR,
    orbit_len: int | None = None,
    **solver,
) -> NobleRadiusRun:
    """Estimate r(W_n, 0) for the noble angle [prefix, 1, 1, ...].

    W_n is the component of 0 after removing balls around the first
    q_{n+2} + 1 critical-orbit points.  ``paper`` mode uses the radius
    2 K tau^n; ``empirical`` mode uses ``gap_factor`` times the largest gap
    between orbit points adjacent in rotation order.  ``orbit_len`` overrides
    q_{n+2}.
    """
    prefix = _as_prefix(prefix)
    if level < 1:
        raise DomainError("level must be at least 1")
    nob = noble_value(prefix)
    q = orbit_len if orbit_len is not None else denominators(nob.terms(level + 2))[level + 1]
    orbit = critical_orbit(nob, q)
    pts = orbit.centers()
    schedule: dict = {"orbit_precision": orbit.precision}
    if mode == "paper":
        if B is None:
            raise DomainError("mode \"paper\" needs the constant B")
        rho = theoretical_obstacle_radius(prefix, level, float(B))
        schedule.update(B=B, formula="2*K*tau^n, K=2*K1, K1=(2*max a_i)^(10*B^2), tau=sqrt(B/(B+1))")
        if not rho < np.abs(pts).min():
            raise OriginCovered(f"theoretical obstacle radius {rho:.3g} swallows the origin")
    elif mode == "empirical":
        gaps = orbit_gaps(pts, float(nob))
        rho = gap_factor * float(gaps.max())
        schedule.update(gap_factor=gap_factor, max_gap=repr(float(gaps.max())), rule="gap_factor * max adjacent gap")
    else:
        raise DomainError(f"unknown mode {mode!r}")
    dom = carve_domain(orbit, rho, outer_radius)
    est = conformal_radius(dom, target_error, backend, seed=seed, **solver)
    # |r(Delta) - r(W_n)| <= 4 sqrt(r(Delta)) sqrt(eps_n) with r(Delta) < 2
    bound = 4 * math.sqrt(2.0) * math.sqrt(rho)
    return NobleRadiusRun(
        prefix, level, q, rho, est, mode, bound, float(np.abs(pts).min()), dom.connected, dom.separated, schedule
    )


# --------------------------------------------------------------------------
# Perturbation bound harness
# --------------------------------------------------------------------------


def _covered(ball_c: complex, ball_r: float, cs: np.ndarray, rs: np.ndarray) -> bool:
    return bool(np.any(np.abs(cs - ball_c) + ball_r <= rs + 1e-12))


def check_nested(outer: DomainSpec, inner: DomainSpec) -> None:
    """Raise :class:`PreconditionError` unless inner is visibly contained in outer."""
    if abs(inner.outer_center - outer.outer_center) + inner.outer_radius > outer.outer_radius + 1e-12:
        raise PreconditionError("inner outer disk is not inside the outer domain's disk")
    oc, orr = outer.arrays
    ic, ir = inner.arrays
    for c, r in zip(oc, orr):
        if abs(c - inner.outer_center) - r >= inner.outer_radius:
            continue
        if not _covered(c, r, ic, ir):
            raise PreconditionError("an obstacle of the outer domain is missing from the inner domain")


def perturbation_gap_check(outer: DomainSpec, inner: DomainSpec, eps, **solver) -> dict:
    """Check 0 < r(U) - r(V) <= 4 sqrt(r(U)) sqrt(eps) within solver error bars."""
    check_nested(outer, inner)
    eps = float(eps)
    ru = conformal_radius(outer, **solver)
    rv = conformal_radius(inner, **solver)
    gap = float(ru.value) - float(rv.value)
    slack = float(ru.error) + float(rv.error)
    bound = 4 * math.sqrt(ru.hi) * math.sqrt(eps)
    positive = gap + slack > 0
    within = gap - slack <= bound
    return {
        "r_outer": ru.to_json(),
        "r_inner": rv.to_json(),
        "gap": repr(gap),
        "gap_error": repr(slack),
        "bound": repr(bound),
        "eps": repr(eps),
        "positive": bool(positive),
        "within_bound": bool(within),
        "pass": bool(positive and within),
    }
