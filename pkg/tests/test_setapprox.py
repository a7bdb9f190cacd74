from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from siegelrad.errors import EmptySet
from siegelrad.exactnum import Dyadic
from siegelrad.setapprox import Ball, BallUnion, ball_union_from_points, hausdorff_distance


def _brute_directed(a: BallUnion, b: BallUnion, h: float) -> float:
    """max over a grid of spacing h covering a of the distance to b."""
    ac, ar = a.arrays()
    bc, br = b.arrays()
    best = 0.0
    for c, r in zip(ac, ar):
        xs = np.arange(-r, r + h, h)
        gx, gy = np.meshgrid(xs, xs)
        pts = (c + gx + 1j * gy).ravel()
        pts = pts[np.abs(pts - c) <= r]
        pts = np.concatenate([pts, c + r * np.exp(2j * np.pi * np.arange(720) / 720)])
        d = np.abs(pts[:, None] - bc[None, :]) - br[None, :]
        best = max(best, float(np.maximum(d.min(axis=1), 0).max()))
    return best


def _brute_hausdorff(a, b, h):
    return max(_brute_directed(a, b, h), _brute_directed(b, a, h))


def test_identical_unions():
    u = ball_union_from_points([(0, 0), (Fraction(1, 2), 1)], Fraction(1, 4))
    assert hausdorff_distance(u, u).contains(0)


def test_two_points():
    a = ball_union_from_points([(0, 0)], 0)
    b = ball_union_from_points([(3, 4)], 0)
    d = hausdorff_distance(a, b)
    assert d.contains(5)


def test_nested_disks():
    a = ball_union_from_points([(0, 0)], 1)
    b = ball_union_from_points([(0, 0)], 2)
    d = hausdorff_distance(a, b, tol=2.0**-30)
    assert d.contains(1)
    assert float(d.width) < 2.0**-20


def test_empty_union_rejected():
    with pytest.raises(EmptySet):
        hausdorff_distance(BallUnion(), ball_union_from_points([(0, 0)], 1))


def test_from_points():
    assert ball_union_from_points([], 1).is_empty
    u = ball_union_from_points([(0, 0)], 1)
    assert u.balls == (Ball(0, 0, 1),)
    pts = [complex(np.cos(k), np.sin(k)) for k in range(7)]
    r = Fraction(1, 8)
    u = ball_union_from_points(pts, r)
    centers = ball_union_from_points(pts, 0)
    assert len(u) == 7
    assert float(hausdorff_distance(u, centers).lo) <= float(r)


def test_text_and_json_round_trip():
    u = BallUnion.from_arrays([0.5 + 0.25j, -1.0], [0.125, 0.0])
    assert BallUnion.from_text(u.to_text()) == u
    assert BallUnion.from_json(u.to_json()) == u


def test_from_arrays_covers_float_balls():
    z, r = 0.1 + 0.7j, 0.3
    u = BallUnion.from_arrays([z], [r], bits=20)
    b = u.balls[0]
    shift = abs(complex(float(b.x), float(b.y)) - z)
    assert float(b.r) >= r + shift


balls = st.tuples(
    st.integers(-16, 16), st.integers(-16, 16), st.integers(0, 8)
).map(lambda t: (complex(t[0] / 8, t[1] / 8), t[2] / 16))


@settings(max_examples=25, deadline=None)
@given(st.lists(balls, min_size=1, max_size=4), st.lists(balls, min_size=1, max_size=4))
def test_against_dense_sampling(xs, ys):
    a = BallUnion.from_arrays([c for c, _ in xs], [r for _, r in xs])
    b = BallUnion.from_arrays([c for c, _ in ys], [r for _, r in ys])
    h = 1 / 64
    sampled = _brute_hausdorff(a, b, h)
    d = hausdorff_distance(a, b, tol=2.0**-16)
    # sampling gives a lower bound; a Lipschitz-1 function moves at most h/sqrt(2) between samples
    assert float(d.hi) >= sampled - 1e-9
    assert float(d.lo) <= sampled + h + 1e-9


def test_symmetry():
    a = BallUnion.from_arrays([0j, 1 + 1j], [0.5, 0.25])
    b = BallUnion.from_arrays([0.5j], [1.0])
    d1, d2 = hausdorff_distance(a, b), hausdorff_distance(b, a)
    assert d1.overlaps(d2)


def test_tree_distance_matches_full_scan():
    from siegelrad.setapprox import _brute_dist, _UnionDistance

    rng = np.random.default_rng(3)
    centers = rng.normal(size=300) + 1j * rng.normal(size=300)
    radii = rng.uniform(0, 0.3, size=300)
    pts = 3 * (rng.normal(size=2000) + 1j * rng.normal(size=2000))
    got = _UnionDistance(centers, radii)(pts)
    assert np.allclose(got, _brute_dist(pts, centers, radii), atol=1e-12)
    same = _UnionDistance(centers, np.full(300, 0.1))(pts)
    assert np.allclose(same, _brute_dist(pts, centers, np.full(300, 0.1)), atol=1e-12)
