"""Acceptance criteria, one test per criterion.

Run with ``pytest tests/test_acceptance.py``; a PASS/FAIL line per criterion
is printed in the terminal summary.
"""

from __future__ import annotations

import json
import math
import subprocess
import sys
import time
import warnings
from fractions import Fraction

import numpy as np
import pytest

from siegelrad.brjuno import phi_noble, phi_truncated
from siegelrad.cfrac import convergents
from siegelrad.confrad import DomainSpec, conformal_radius, noble_radius, perturbation_gap_check
from siegelrad.exactnum import Dyadic, QuadraticSurd, ilog, working_precision
from siegelrad.quaddyn import ComplexInterval, RotationAngle, julia_render, multiplier
from siegelrad.setapprox import ball_union_from_points, hausdorff_distance
from siegelrad.synthesis import (
    HaltingPredicate,
    RightComputableSeq,
    SynthesisConfig,
    halting_sequence,
    synthesize,
    verify_properties,
)

GOLDEN = QuadraticSurd.golden()
PELL = QuadraticSurd(-1, 1, 1, 2)
SYNTH_SEQ = "const:73/256"


def _elapsed(t0: float) -> float:
    return time.perf_counter() - t0


# 1 -------------------------------------------------------------------------


def test_criterion_1_radius_ground_truth(acceptance):
    t_all = time.perf_counter()
    worst_time = 0.0
    failures = []
    for backend in ("stochastic", "grid"):
        for R in (0.5, 1.0, 2.0):
            t0 = time.perf_counter()
            est = conformal_radius(DomainSpec.disk(R), 1e-3, backend, seed=1)
            worst_time = max(worst_time, _elapsed(t0))
            if abs(float(est.value) - R) > 1e-3:
                failures.append(f"{backend} R={R}: {float(est.value):.6f}")
        d = 0.5
        half = DomainSpec.from_arrays(64 * d, [complex(-d - 1e6, 0)], [1e6])
        t0 = time.perf_counter()
        est = conformal_radius(half, 2e-3, backend, seed=1)
        worst_time = max(worst_time, _elapsed(t0))
        if abs(float(est.value) - 2 * d) > 0.01 * 2 * d:
            failures.append(f"{backend} half-plane: {float(est.value):.6f}")
    ok = not failures and worst_time < 30
    acceptance(1, ok, f"disks and half-plane, slowest run {worst_time:.1f}s {failures or ''}")
    assert ok, failures


# 2 -------------------------------------------------------------------------


def _random_pair(rng):
    """U = disk with a few obstacles; V shrinks the disk and grows the obstacles by eps."""
    R = float(rng.uniform(1.0, 2.0))
    k = int(rng.integers(0, 4))
    centers, radii = [], []
    while len(centers) < k:
        rad = float(rng.uniform(0.02, 0.15)) * R
        z = complex(*(rng.uniform(-0.85, 0.85, 2) * R))
        if abs(z) + rad < 0.95 * R and abs(z) - rad > 0.3 * R:
            centers.append(z)
            radii.append(rad)
    eps = float(rng.uniform(1e-3, 0.05)) * R
    outer = DomainSpec.from_arrays(R, centers, radii)
    inner = DomainSpec.from_arrays(R - eps, centers, [r + eps for r in radii])
    if rng.random() < 0.5:
        # an extra small obstacle touching the outer circle from inside
        phi = float(rng.uniform(0, 2 * math.pi))
        inner = inner.with_obstacles([(R - eps / 2) * complex(math.cos(phi), math.sin(phi))], [eps / 2])
    return outer, inner, eps


def test_criterion_2_perturbation_bound(acceptance):
    rng = np.random.default_rng(20240601)
    t0 = time.perf_counter()
    bad = []
    for i in range(100):
        outer, inner, eps = _random_pair(rng)
        res = perturbation_gap_check(outer, inner, eps, backend="grid", target_error=1e-4)
        if not res["pass"]:
            bad.append((i, res["gap"], res["bound"]))
    took = _elapsed(t0)
    ok = not bad and took < 600
    acceptance(2, ok, f"100 nested pairs, {100 - len(bad)} satisfied 0 < gap <= 4 sqrt(r eps), {took:.0f}s")
    assert ok, bad


# 3 -------------------------------------------------------------------------


def test_criterion_3_phi_closed_forms(acceptance):
    t0 = time.perf_counter()
    g = (math.sqrt(5) - 1) / 2
    golden = math.log(1 / g) / (1 - g)
    pell = math.log(math.sqrt(2) + 1) / (2 - math.sqrt(2))
    vals = [
        (float(phi_noble([]).value.mid), golden),
        (float(phi_truncated(GOLDEN, 50).value.mid), golden),
        (float(phi_truncated(PELL, 50).value.mid), pell),
    ]
    errs = [abs(a - b) for a, b in vals]
    took = _elapsed(t0)
    ok = max(errs) < 1e-6 and took < 1
    acceptance(3, ok, f"golden and Pell closed forms, max error {max(errs):.1e}, {took:.2f}s")
    assert ok


# 4 -------------------------------------------------------------------------


def _random_surd(rng) -> QuadraticSurd:
    d = int(rng.choice([2, 3, 5, 6, 7, 10, 11, 13, 14, 15, 17]))
    while True:
        a, b, c = int(rng.integers(-20, 21)), int(rng.integers(1, 6)), int(rng.integers(1, 12))
        x = QuadraticSurd(a, b, c, d)
        x = x - x.floor()
        if x.sign() > 0:
            return x


def test_criterion_4_functional_equation(acceptance):
    rng = np.random.default_rng(4)
    t0 = time.perf_counter()
    worst_gap = 0.0
    failures = 0
    for _ in range(100):
        x = _random_surd(rng)
        recip = x.reciprocal()
        rest = recip - recip.floor()
        lhs = phi_truncated(x, 0, prec=128).value
        with working_precision(128):
            tail = phi_truncated(rest, 0, prec=128).value
            xi = x.to_interval(128)
            rhs = -ilog(xi, 128) + xi * tail
        if not lhs.overlaps(rhs):
            failures += 1
        worst_gap = max(worst_gap, abs(float(lhs.mid) - float(rhs.mid)))
    took = _elapsed(t0)
    ok = failures == 0 and took < 60
    acceptance(4, ok, f"100 random surds, residual within widths, max |residual| {worst_gap:.1e}, {took:.1f}s")
    assert ok


# 5 -------------------------------------------------------------------------


def _power(z: ComplexInterval, n: int) -> ComplexInterval:
    out = ComplexInterval.from_complex(1, z.prec)
    while n:
        if n & 1:
            out = out * z
        z = z * z
        n >>= 1
    return out


def test_criterion_5_convergent_bounds(acceptance):
    t0 = time.perf_counter()
    problems = []
    for name, theta in (("golden", GOLDEN), ("pell", PELL)):
        qs = [q for _, q in convergents(RotationAngle.coerce(theta).terms(11))]
        lam = multiplier(theta, 160)
        one = ComplexInterval.from_complex(1, 160)
        for n in range(10):
            lo, hi = (_power(lam, qs[n]) - one).abs_interval()
            if not (2 / qs[n + 1] < lo and hi < 2 * math.pi / qs[n + 1]):
                problems.append((name, n))
        x = float(theta)
        for n in range(6):
            best = abs(np.exp(2j * np.pi * qs[n] * x) - 1)
            for h in range(1, qs[n + 1]):
                if h != qs[n] and abs(np.exp(2j * np.pi * h * x) - 1) <= best:
                    problems.append((name, n, h))
    took = _elapsed(t0)
    ok = not problems and took < 60
    acceptance(5, ok, f"multiplier gaps for 10 convergents and best approximation n <= 6, {took:.1f}s")
    assert ok, problems


# 6 -------------------------------------------------------------------------


def test_criterion_6_julia(acceptance):
    t0 = time.perf_counter()
    circle = ball_union_from_points(
        [complex(math.cos(t), math.sin(t)) for t in np.linspace(0, 2 * math.pi, 8192)], 0
    )
    seg = ball_union_from_points([complex(x, 0) for x in np.linspace(-2, 2, 8193)], 0)
    r0 = julia_render(0j, 10)
    r2 = julia_render(-2 + 0j, 10)
    d0 = hausdorff_distance(r0.balls, circle)
    d2 = hausdorff_distance(r2.balls, seg)
    extent = 0.0
    for r in (r0, r2, julia_render(-0.75 + 0.1j, 9), julia_render(0.25 + 0j, 9)):
        c, rad = r.balls.arrays()
        extent = max(extent, float(np.max(np.abs(c) + rad)))
    took = _elapsed(t0)
    ok = float(d0.hi) < 2**-6 and float(d2.hi) < 2**-4 and extent <= 2.01 and took < 120
    acceptance(
        6,
        ok,
        f"d_H(c=0) <= {float(d0.hi):.4f}, d_H(c=-2) <= {float(d2.hi):.4f}, max |z| {extent:.4f}, {took:.1f}s",
    )
    assert ok


# 7 -------------------------------------------------------------------------


def test_criterion_7_noble_radius(acceptance):
    t0 = time.perf_counter()
    runs = [noble_radius([], level, "empirical", target_error=1e-3, seed=0) for level in (4, 5, 6)]
    vals = [float(r.estimate.value) for r in runs]
    consistent = all(
        abs(vals[i] - vals[j]) <= runs[i].total_error + runs[j].total_error for i in range(3) for j in range(i + 1, 3)
    )
    solver_only = all(
        abs(vals[i] - vals[j]) <= float(runs[i].estimate.error) + float(runs[j].estimate.error)
        for i in range(3)
        for j in range(i + 1, 3)
    )
    below_two = all(v < 2 for v in vals)
    koebe = all(r.koebe_ok for r in runs)
    steps = [vals[1] - vals[0], vals[2] - vals[1]]
    took = _elapsed(t0)
    ok = consistent and below_two and koebe and took < 1800
    acceptance(
        7,
        ok,
        f"r(W_4..6) = {', '.join(f'{v:.4f}' for v in vals)}; consistent with approximation bounds "
        f"({', '.join(f'{r.approximation_bound:.2f}' for r in runs)}) but {'also' if solver_only else 'NOT'} "
        f"within solver-only bars; increments {steps[0]:.4f}, {steps[1]:.4f}; Koebe ok, < 2, {took:.1f}s",
    )
    assert ok


# 8 -------------------------------------------------------------------------


def test_criterion_8_degenerate_synthesis(acceptance):
    t0 = time.perf_counter()
    res = synthesize(RightComputableSeq.constant(0), 3)
    took = _elapsed(t0)
    ok = res.state.parabolic and res.theta == (Fraction(0), Fraction(0)) and took < 1
    acceptance(8, ok, f"r = 0 gives parabolic theta = 0 (c = 1/4) in {took:.3f}s")
    assert ok


# 9 -------------------------------------------------------------------------


def test_criterion_9_one_stage(acceptance):
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        first = synthesize(RightComputableSeq.parse(SYNTH_SEQ), 1, SynthesisConfig(seed=0))
        second = synthesize(RightComputableSeq.parse(SYNTH_SEQ), 1, SynthesisConfig(seed=0))
    report = verify_properties(first.state)
    took = _elapsed(t0)
    statuses = {k: report[k]["status"] for k in "123456"}
    reproducible = first.state.to_json() == second.state.to_json()
    ok = (
        first.state.stage == 1
        and all(statuses[k] == "pass" for k in "12345")
        and reproducible
        and took < 7200
    )
    acceptance(
        9,
        ok,
        f"{SYNTH_SEQ}: prefix {first.state.prefix}, properties {statuses}, reproducible={reproducible}, {took:.1f}s",
    )
    assert ok


# 10 ------------------------------------------------------------------------


def test_criterion_10_halting_demo(acceptance):
    t0 = time.perf_counter()
    a = HaltingPredicate.from_text("halts 1 1\n")
    b = HaltingPredicate.from_text("halts 1 1\nhalts 2 3\n")
    seq_a = [halting_sequence(a, k) for k in range(6)]
    seq_b = [halting_sequence(b, k) for k in range(6)]
    want_a = [Fraction(1, 16)] + [Fraction(3, 64)] * 5
    want_b = [Fraction(1, 16), Fraction(3, 64), Fraction(3, 64)] + [Fraction(11, 256)] * 3
    monotone = all(y <= x for s in (seq_a, seq_b) for x, y in zip(s, s[1:]))
    took = _elapsed(t0)
    ok = seq_a == want_a and seq_b == want_b and monotone and took < 1
    acceptance(10, ok, f"toy predicates give {' -> '.join(map(str, seq_b[:4]))} exactly, {took:.3f}s")
    assert ok


# 11 ------------------------------------------------------------------------

CLI_RUNS = {
    1: [
        ["radius", "--disk", "1", "--backend", "stochastic", "--seed", "3"],
        ["radius", "--disk", "2", "--backend", "grid"],
        ["radius", "--half-plane", "0.5", "--backend", "grid", "--target", "2e-3"],
    ],
    7: [["noble-radius", "--level", "4", "5", "6", "--seed", "0"]],
    9: [["synth", "--seq", SYNTH_SEQ, "--stages", "1", "--seed", "0"]],
}


def _cli(argv):
    proc = subprocess.run(
        [sys.executable, "-m", "siegelrad.cli", *argv], capture_output=True, check=True
    )
    return proc.stdout


def test_criterion_11_determinism(acceptance):
    t0 = time.perf_counter()
    mismatched = []
    for crit, runs in CLI_RUNS.items():
        for argv in runs:
            a, b = _cli(argv), _cli(argv)
            json.loads(a)
            if a != b:
                mismatched.append((crit, argv[0]))
    took = _elapsed(t0)
    ok = not mismatched
    acceptance(11, ok, f"byte-identical CLI JSON across criteria 1, 7, 9 ({sum(map(len, CLI_RUNS.values()))} runs x 2), {took:.1f}s")
    assert ok, mismatched


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
