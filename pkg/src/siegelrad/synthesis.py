"""Building a rotation angle whose Siegel disk has a prescribed conformal radius.

Given a non-increasing dyadic sequence r_k with limit r, stage k extends a
continued-fraction prefix I_k so that the noble number gamma_k = [I_k, 1, 1, ...]
keeps six properties:

1. I_0 = [];
2. I_k has at least k terms;
3. I_{k+1} extends I_k;
4. r_k + s 2^-(k+1) < r(gamma_k) < r_k + s 2^-k (window scale s, see below);
5. Phi(gamma_k) > Phi(gamma_{k-1});
6. every extension beta of I_k has Phi(beta) > Phi(gamma_k) - 2^-k.

Radii are measured as r(W_L, 0), the carved domain built from a fixed
number L of critical-orbit points, with statistical error bars.  The
radius of the golden Siegel disk is about 0.32, so the unit-scale windows
(s = 1) can never hold at stage 0; the window scale s defaults to
(4/3)(r(gamma_0) - r_0), which centers the stage-0 window on the measured
radius.

The module also contains the halting-problem encoding
r_k = (1/16)(1 - sum_{x<=k} sum_{t<=k} 4^-x R(x, t)) with a toy register
machine standing in for Turing machines.
"""

from __future__ import annotations

import json
import math
import time
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterator

from .brjuno import PhiEstimate, phi_cylinder_lower_bound, phi_extensions_exceed, phi_noble
from .cfrac import CFracPrefix, NobleNumber, _as_prefix, noble_value, prefix_fraction
from .confrad import RadiusEstimate, noble_radius
from .errors import (
    BudgetExceeded,
    DomainError,
    InfeasibleDrop,
    PredicateViolation,
    SequenceViolation,
)
from .exactnum import Dyadic, DyadicInterval
from .quaddyn import theta_to_c

__all__ = [
    "RightComputableSeq",
    "HaltingPredicate",
    "RegisterMachine",
    "halting_sequence",
    "SmlchgrResult",
    "smlchgr_step",
    "SynthesisState",
    "SynthesisConfig",
    "synthesize",
    "verify_properties",
    "cylinder_interval",
]

DEFAULT_RANGE = (Fraction(0), Fraction(1, 10))


# --------------------------------------------------------------------------
# Right-computable sequences
# --------------------------------------------------------------------------


class RightComputableSeq:
    """A lazily evaluated non-increasing sequence r_0, r_1, ... of dyadic rationals.

    Monotonicity is checked as values are produced; a violation raises
    :class:`SequenceViolation`.  Values outside ``value_range`` only warn.
    """

    def __init__(self, fn: Callable[[int], object], label: str = "", value_range=DEFAULT_RANGE):
        self._fn = fn
        self.label = label
        self.value_range = value_range
        self._cache: list[Fraction] = []

    def __getitem__(self, k: int) -> Fraction:
        if k < 0:
            raise IndexError(k)
        while len(self._cache) <= k:
            i = len(self._cache)
            v = Dyadic.coerce(self._fn(i)).to_fraction()
            if self._cache and v > self._cache[-1]:
                raise SequenceViolation(f"r_{i} = {v} exceeds r_{i - 1} = {self._cache[-1]}")
            lo, hi = self.value_range
            if not lo <= v <= hi:
                warnings.warn(f"r_{i} = {float(v):.6g} lies outside [{float(lo)}, {float(hi)}]", stacklevel=2)
            self._cache.append(v)
        return self._cache[k]

    def prefix(self, n: int) -> list[Fraction]:
        return [self[k] for k in range(n)]

    @classmethod
    def constant(cls, value, **kw) -> "RightComputableSeq":
        v = Dyadic.coerce(value)
        return cls(lambda k: v, label=f"const:{v.to_string()}", **kw)

    @classmethod
    def from_values(cls, values, label: str = "list", **kw) -> "RightComputableSeq":
        vals = [Dyadic.coerce(v) if not isinstance(v, str) else Dyadic.parse(v) for v in values]
        if not vals:
            raise DomainError("empty sequence")

        def fn(k: int):
            return vals[min(k, len(vals) - 1)]

        return cls(fn, label=label, **kw)

    @classmethod
    def from_file(cls, path, **kw) -> "RightComputableSeq":
        """One dyadic per line; the last value repeats forever."""
        lines = [ln.strip() for ln in Path(path).read_text().splitlines()]
        vals = [ln for ln in lines if ln and not ln.startswith("#")]
        return cls.from_values(vals, label=f"file:{path}", **kw)

    @classmethod
    def halting(cls, predicate: "HaltingPredicate", **kw) -> "RightComputableSeq":
        return cls(lambda k: halting_sequence(predicate, k), label=f"halting:{predicate.label}", **kw)

    @classmethod
    def parse(cls, spec: str, **kw) -> "RightComputableSeq":
        """``const:<dyadic>``, ``file:<path>`` or ``halting:<predicate-file>``."""
        kind, _, arg = spec.partition(":")
        if kind == "const":
            return cls.constant(Dyadic.parse(arg), **kw)
        if kind == "file":
            return cls.from_file(arg, **kw)
        if kind == "halting":
            return cls.halting(HaltingPredicate.from_file(arg), **kw)
        raise DomainError(f"unknown sequence spec {spec!r}")


# --------------------------------------------------------------------------
# Halting encoding
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RegisterMachine:
    """A minimal register machine.

    Instructions: ``INC r``, ``DEC r j`` (decrement, or jump to j when
    register r is zero), ``JMP j`` and ``HALT``.  Each executed instruction
    is one step, including the final HALT.
    """

    program: tuple[tuple, ...]

    @classmethod
    def parse(cls, text: str) -> "RegisterMachine":
        prog = []
        for part in text.split(";"):
            words = part.split()
            if not words:
                continue
            op = words[0].upper()
            args = tuple(int(w) for w in words[1:])
            arity = {"INC": 1, "DEC": 2, "JMP": 1, "HALT": 0}
            if op not in arity or len(args) != arity[op]:
                raise DomainError(f"bad instruction {part.strip()!r}")
            prog.append((op, *args))
        return cls(tuple(prog))

    def halting_time(self, max_steps: int) -> int | None:
        """The step at which HALT executes, or None if it has not within ``max_steps``."""
        regs: dict[int, int] = {}
        pc = 0
        for step in range(1, max_steps + 1):
            if not 0 <= pc < len(self.program):
                return None  # fell off the program: never halts properly
            ins = self.program[pc]
            op = ins[0]
            if op == "HALT":
                return step
            if op == "INC":
                regs[ins[1]] = regs.get(ins[1], 0) + 1
                pc += 1
            elif op == "DEC":
                if regs.get(ins[1], 0) > 0:
                    regs[ins[1]] -= 1
                    pc += 1
                else:
                    pc = ins[2]
            else:
                pc = ins[1]
        return None


@dataclass(frozen=True)
class HaltingPredicate:
    """R(x, t): program x halts after exactly t steps.

    Built from explicit ``halts x t`` facts and ``machine x <program>``
    lines.  Facts are taken as given, so a table may (wrongly) fire twice
    for one x; :func:`halting_sequence` rejects that.
    """

    facts: tuple[tuple[int, int], ...] = ()
    machines: tuple[tuple[int, RegisterMachine], ...] = ()
    label: str = "inline"

    def evaluate(self, x: int, t: int) -> int:
        if (x, t) in self.facts:
            return 1
        for mx, machine in self.machines:
            if mx == x and machine.halting_time(t) == t:
                return 1
        return 0

    def firing(self, k: int) -> list[tuple[int, int]]:
        """All (x, t) with x, t <= k and R(x, t) = 1."""
        out = {(x, t) for x, t in self.facts if x <= k and t <= k}
        for x, machine in self.machines:
            if x <= k:
                h = machine.halting_time(k)
                if h is not None:
                    out.add((x, h))
        return sorted(out)

    @classmethod
    def from_text(cls, text: str, label: str = "inline") -> "HaltingPredicate":
        facts, machines = [], []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            kind, _, rest = line.partition(" ")
            if kind == "halts":
                x, t = (int(w) for w in rest.split())
                facts.append((x, t))
            elif kind == "machine":
                x, _, prog = rest.strip().partition(" ")
                machines.append((int(x), RegisterMachine.parse(prog)))
            else:
                raise DomainError(f"unknown predicate line {raw!r}")
            if (facts and min(facts[-1]) < 1) or (machines and machines[-1][0] < 1):
                raise DomainError("x and t start at 1")
        return cls(tuple(facts), tuple(machines), label)

    @classmethod
    def from_file(cls, path) -> "HaltingPredicate":
        return cls.from_text(Path(path).read_text(), label=str(path))


def halting_sequence(p: HaltingPredicate, k: int) -> Fraction:
    """r_k = (1/16)(1 - sum_{x=1}^{k} sum_{t=1}^{k} 4^-x R(x, t)), exactly."""
    if k < 0:
        raise DomainError("k must be non-negative")
    fired = p.firing(k)
    seen: dict[int, int] = {}
    total = Fraction(0)
    for x, t in fired:
        if x in seen:
            raise PredicateViolation(f"program {x} halts at both t={seen[x]} and t={t}")
        seen[x] = t
        total += Fraction(1, 4**x)
    return (1 - total) / 16


# --------------------------------------------------------------------------
# Candidate search
# --------------------------------------------------------------------------


def cylinder_interval(prefix) -> tuple[Fraction, Fraction]:
    """Closure of the set of reals in (0, 1) whose expansion starts with ``prefix``."""
    prefix = _as_prefix(prefix)
    if not prefix.terms:
        return Fraction(0), Fraction(1)
    a = prefix_fraction(prefix)
    b = prefix_fraction(prefix.extend([1]))
    return min(a, b), max(a, b)


def _diagonal(m0: int) -> Iterator[tuple[int, int]]:
    """(m, N) with m > m0 and N >= 2, ordered by m + ceil(log2 N), then m, then N."""
    s = m0 + 2
    while True:
        for m in range(m0 + 1, s):
            k = s - m  # ceil(log2 N) == k
            for N in range(max(2, (1 << (k - 1)) + 1), (1 << k) + 1):
                yield m, N
        s += 1


def _insert(prefix: CFracPrefix, m: int, N: int) -> CFracPrefix:
    return prefix.extend([1] * (m - 1) + [N])


@dataclass(frozen=True)
class SmlchgrResult:
    m: int
    N: int
    t: int
    beta: NobleNumber
    radius: RadiusEstimate
    phi: PhiEstimate
    candidates: int
    cursor: int

    @property
    def new_prefix(self) -> CFracPrefix:
        return self.beta.prefix.extend([1] * self.t)

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "N": self.N,
            "t": self.t,
            "beta": self.beta.to_string(),
            "radius": self.radius.to_json(),
            "phi": self.phi.to_json(),
            "candidates": self.candidates,
            "cursor": self.cursor,
        }


@dataclass
class RadiusOracle:
    """r(W_L, 0) of noble numbers at a fixed orbit length, cached per prefix and seed."""

    orbit_len: int = 2000
    target_error: float = 1e-3
    outer_radius: float = 2.0
    gap_factor: float = 0.6
    max_walkers: int = 1 << 18
    cache: dict = field(default_factory=dict)

    def __call__(self, prefix: CFracPrefix, seed: int) -> RadiusEstimate:
        key = (prefix.terms, seed)
        if key not in self.cache:
            run = noble_radius(
                prefix,
                1,
                orbit_len=self.orbit_len,
                target_error=self.target_error,
                seed=seed,
                outer_radius=self.outer_radius,
                gap_factor=self.gap_factor,
                max_walkers=self.max_walkers,
            )
            self.cache[key] = run.estimate
        return self.cache[key]

    def to_json(self) -> dict:
        return {
            "orbit_len": self.orbit_len,
            "target_error": self.target_error,
            "outer_radius": self.outer_radius,
            "gap_factor": self.gap_factor,
            "max_walkers": self.max_walkers,
        }


def guard_length(prefix: CFracPrefix, threshold: Fraction | float, *, max_t: int = 200) -> int:
    """Smallest t such that every extension of [prefix, 1^t] has Phi > threshold."""
    thr = Dyadic.approx(threshold, 80, "ceil") if not isinstance(threshold, Dyadic) else threshold
    for t in range(max_t + 1):
        lb = phi_cylinder_lower_bound(prefix.extend([1] * t))
        if lb.lo > thr:
            return t
    raise BudgetExceeded(f"no guard length up to {max_t} ones")


def smlchgr_step(
    prefix,
    eps,
    m0: int = 0,
    *,
    budget_candidates: int | None = 200,
    budget_seconds: float | None = None,
    radius: RadiusOracle | None = None,
    seed: int = 0,
    window: tuple[float, float] | None = None,
    omega_radius: RadiusEstimate | None = None,
    guard: Fraction | None = None,
    cursor: int = 0,
) -> SmlchgrResult:
    """Find m > m0 and N with r(omega) - 2 eps < r(beta) < r(omega) - eps and Phi(beta) > Phi(omega).

    ``beta`` is [prefix, 1, ..., 1, N, 1, 1, ...] with N at position
    len(prefix) + m.  A candidate is accepted only when its whole radius
    error bar lies inside the window (intersected with ``window`` when
    given) and the Phi enclosures are disjoint.  ``t`` is the number of
    ones after N that guarantees Phi > Phi(omega) - ``guard`` on every
    extension (``guard`` defaults to 2^-len(prefix)).  On exhaustion
    :class:`BudgetExceeded` carries the cursor for resuming.
    """
    prefix = _as_prefix(prefix)
    radius = radius or RadiusOracle()
    eps = float(eps)
    if eps <= 0:
        raise DomainError("eps must be positive")
    r_omega = omega_radius or radius(prefix, seed)
    if eps >= float(r_omega.value):
        raise InfeasibleDrop(f"eps={eps:.6g} is not below r(omega)={float(r_omega.value):.6g}")
    lo = float(r_omega.value) - 2 * eps
    hi = float(r_omega.value) - eps
    if window is not None:
        lo, hi = max(lo, window[0]), min(hi, window[1])
    if lo >= hi:
        raise InfeasibleDrop("empty acceptance window")
    phi_omega = phi_noble(prefix)
    deadline = None if budget_seconds is None else time.monotonic() + budget_seconds
    tried = 0
    for index, (m, N) in enumerate(_diagonal(m0)):
        if index < cursor:
            continue
        if budget_candidates is not None and tried >= budget_candidates:
            raise BudgetExceeded("candidate budget exhausted", cursor={"index": index, "m0": m0})
        if deadline is not None and time.monotonic() > deadline:
            raise BudgetExceeded("wall-clock budget exhausted", cursor={"index": index, "m0": m0})
        tried += 1
        cand = _insert(prefix, m, N)
        phi_b = phi_noble(cand)
        if not phi_b.value.lo > phi_omega.value.hi:
            continue
        est = radius(cand, seed + index + 1)
        if not (lo < est.lo and est.hi < hi):
            continue
        g = Fraction(1, 2 ** len(prefix)) if guard is None else Fraction(guard)
        t = guard_length(cand, phi_omega.value.lo.to_fraction() - g)
        return SmlchgrResult(m, N, t, noble_value(cand), est, phi_b, tried, index)
    raise AssertionError("unreachable")


# --------------------------------------------------------------------------
# Synthesis state
# --------------------------------------------------------------------------


@dataclass
class SynthesisConfig:
    seed: int = 0
    orbit_len: int = 2000
    target_error: float = 1e-3
    window_scale: float | None = None
    budget_candidates: int | None = 200
    budget_seconds: float | None = None
    max_substeps: int = 8

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "orbit_len": self.orbit_len,
            "target_error": self.target_error,
            "window_scale": self.window_scale,
            "budget_candidates": self.budget_candidates,
            "budget_seconds": self.budget_seconds,
            "max_substeps": self.max_substeps,
        }

    @classmethod
    def from_json(cls, data: dict) -> "SynthesisConfig":
        return cls(**data)


@dataclass
class SynthesisState:
    stage: int
    prefix: CFracPrefix
    phi: PhiEstimate | None
    radius: RadiusEstimate | None
    r_values: list[Fraction]
    window_scale: float | None
    certificates: list[dict]
    prefixes: list[CFracPrefix]
    config: SynthesisConfig
    parabolic: bool = False
    cursor: dict | None = None
    sequence: str = ""

    @property
    def gamma(self) -> NobleNumber:
        return noble_value(self.prefix)

    def window(self, k: int) -> tuple[float, float]:
        s = self.window_scale
        r = float(self.r_values[k])
        return r + s * 2.0 ** -(k + 1), r + s * 2.0**-k

    def theta_interval(self) -> tuple[Fraction, Fraction]:
        """Interval known to contain the limit angle."""
        if self.parabolic:
            return Fraction(0), Fraction(0)
        return cylinder_interval(self.prefix)

    def to_json(self) -> dict:
        lo, hi = self.theta_interval()
        return {
            "stage": self.stage,
            "prefix": self.prefix.to_string(),
            "gamma": self.gamma.to_string() if not self.parabolic else None,
            "parabolic": self.parabolic,
            "theta_interval": [str(lo), str(hi)],
            "phi": None if self.phi is None else self.phi.to_json(),
            "radius": None if self.radius is None else self.radius.to_json(),
            "r_values": [Dyadic.from_fraction(r).to_string() for r in self.r_values],
            "window_scale": None if self.window_scale is None else repr(self.window_scale),
            "prefixes": [p.to_string() for p in self.prefixes],
            "certificates": self.certificates,
            "cursor": self.cursor,
            "sequence": self.sequence,
            "config": self.config.to_json(),
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def from_json(cls, data: dict) -> "SynthesisState":
        from .cfrac import parse_prefix

        def phi_from(d):
            if d is None:
                return None
            v = DyadicInterval(Dyadic.parse(d["value_lo"]), Dyadic.parse(d["value_hi"]))
            tb = d.get("tail_bound")
            return PhiEstimate(v, v, d["terms_used"], None if tb is None else Dyadic.parse(tb), d["tail_certified"])

        return cls(
            stage=data["stage"],
            prefix=parse_prefix(data["prefix"])[0],
            phi=phi_from(data["phi"]),
            radius=None if data["radius"] is None else RadiusEstimate.from_json(data["radius"]),
            r_values=[Dyadic.parse(r).to_fraction() for r in data["r_values"]],
            window_scale=None if data["window_scale"] is None else float(data["window_scale"]),
            certificates=data["certificates"],
            prefixes=[parse_prefix(p)[0] for p in data["prefixes"]],
            config=SynthesisConfig.from_json(data["config"]),
            parabolic=data["parabolic"],
            cursor=data.get("cursor"),
            sequence=data.get("sequence", ""),
        )

    @classmethod
    def load(cls, path) -> "SynthesisState":
        return cls.from_json(json.loads(Path(path).read_text()))


@dataclass
class SynthesisResult:
    state: SynthesisState
    theta: tuple[Fraction, Fraction]
    c: dict | None

    def to_json(self) -> dict:
        return {
            "state": self.state.to_json(),
            "theta_lo": str(self.theta[0]),
            "theta_hi": str(self.theta[1]),
            "theta_width": float(self.theta[1] - self.theta[0]),
            "c": self.c,
        }


def _parabolic_state(seq: RightComputableSeq, config: SynthesisConfig) -> SynthesisState:
    return SynthesisState(
        stage=0,
        prefix=CFracPrefix(()),
        phi=None,
        radius=None,
        r_values=[seq[0]],
        window_scale=None,
        certificates=[{"stage": 0, "note": "r = 0: parabolic parameter theta = 0 (c = 1/4)"}],
        prefixes=[CFracPrefix(())],
        config=config,
        parabolic=True,
        sequence=seq.label,
    )


def _radius_oracle(config: SynthesisConfig) -> RadiusOracle:
    return RadiusOracle(orbit_len=config.orbit_len, target_error=config.target_error)


def _stage_zero(seq: RightComputableSeq, config: SynthesisConfig, radius: RadiusOracle) -> SynthesisState:
    r0 = seq[0]
    prefix = CFracPrefix(())
    est = radius(prefix, config.seed)
    phi = phi_noble(prefix)
    if est.lo <= float(r0):
        raise InfeasibleDrop(
            f"r_0 = {float(r0):.6g} is not below the golden radius {float(est.value):.6g} - error; "
            "radii can only be lowered"
        )
    s = config.window_scale
    if s is None:
        s = 4.0 / 3.0 * (float(est.value) - float(r0))
    state = SynthesisState(
        stage=0,
        prefix=prefix,
        phi=phi,
        radius=est,
        r_values=[r0],
        window_scale=s,
        certificates=[],
        prefixes=[prefix],
        config=config,
        sequence=seq.label,
    )
    lo, hi = state.window(0)
    state.certificates.append(
        {
            "stage": 0,
            "r_k": Dyadic.from_fraction(r0).to_string(),
            "window": [repr(lo), repr(hi)],
            "radius": est.to_json(),
            "phi": phi.to_json(),
            "seed": config.seed,
            "steps": [],
            "guard_t": 0,
        }
    )
    return state


def _advance(state: SynthesisState, seq: RightComputableSeq, radius: RadiusOracle, progress) -> None:
    """Run stage k + 1 in place."""
    cfg = state.config
    k = state.stage + 1
    r_next = seq[k]
    state.r_values.append(r_next)
    a, b = state.window(k)
    prefix = state.prefix
    r_omega = state.radius
    steps: list[dict] = []
    cursor = state.cursor or {}
    sub = cursor.get("substep", 0)
    start_index = cursor.get("index", 0)
    while True:
        if sub >= cfg.max_substeps:
            raise BudgetExceeded(f"stage {k} needs more than {cfg.max_substeps} drops")
        rw = float(r_omega.value)
        d_lo, d_hi = max(rw - b, 0.0), rw - a
        if d_hi <= 0:
            raise InfeasibleDrop(f"stage {k}: r(gamma) = {rw:.6g} is already below the window")
        final = d_lo <= d_hi / 2
        eps = max(d_lo, d_hi / 3) if final else d_lo / 2
        window = (a, b) if final else None
        try:
            res = smlchgr_step(
                prefix,
                eps,
                0,
                budget_candidates=cfg.budget_candidates,
                budget_seconds=cfg.budget_seconds,
                radius=radius,
                seed=cfg.seed + 1000 * k + 100 * sub,
                window=window,
                omega_radius=r_omega,
                cursor=start_index,
            )
        except BudgetExceeded as exc:
            state.r_values.pop()
            state.cursor = {"stage": k, "substep": sub, "prefix": prefix.to_string(), **(exc.cursor or {})}
            exc.cursor = state.cursor
            raise
        start_index = 0
        steps.append({"eps": repr(eps), "final": final, **res.to_json()})
        prefix = res.beta.prefix
        r_omega = res.radius
        sub += 1
        if final:
            break
    phi = phi_noble(prefix)
    # property 6: extensions of I_k keep Phi above Phi(gamma_k) - 2^-k
    t6 = guard_length(prefix, phi.value.lo.to_fraction() - Fraction(1, 2**k))
    t = max(t6, steps[-1]["t"])
    new_prefix = prefix.extend([1] * t)
    if len(new_prefix) < k:
        new_prefix = new_prefix.padded(k)
    state.stage = k
    state.prefix = new_prefix
    state.phi = phi
    state.radius = r_omega
    state.prefixes.append(new_prefix)
    state.cursor = None
    state.certificates.append(
        {
            "stage": k,
            "r_k": Dyadic.from_fraction(r_next).to_string(),
            "window": [repr(a), repr(b)],
            "radius": r_omega.to_json(),
            "phi": phi.to_json(),
            "steps": steps,
            "guard_t": t,
        }
    )
    if progress:
        progress(
            f"stage {k}: |I_k|={len(new_prefix)}, r_window=[{a:.6f},{b:.6f}], "
            f"phi=[{float(phi.value.lo):.9f},{float(phi.value.hi):.9f}]"
        )


def _parabolic_result(seq, config, checkpoint) -> SynthesisResult:
    st = _parabolic_state(seq, config)
    if checkpoint:
        st.save(checkpoint)
    return SynthesisResult(st, (Fraction(0), Fraction(0)), theta_to_c(Fraction(0)).to_json())


def synthesize(
    seq: RightComputableSeq,
    stages: int,
    config: SynthesisConfig | None = None,
    *,
    state: SynthesisState | None = None,
    checkpoint=None,
    progress: Callable[[str], None] | None = None,
) -> SynthesisResult:
    """Run stages 0..``stages`` (or continue ``state``) and return the final state.

    A zero term in the sequence forces r = 0, answered by the parabolic
    angle 0.  On :class:`BudgetExceeded` the state, including the search
    cursor, is written to ``checkpoint`` before re-raising.
    """
    config = config or (state.config if state is not None else SynthesisConfig())
    radius = _radius_oracle(config)
    if state is None:
        if seq[0] == 0:
            return _parabolic_result(seq, config, checkpoint)
        state = _stage_zero(seq, config, radius)
        if progress:
            lo, hi = state.window(0)
            progress(
                f"stage 0: |I_k|=0, r_window=[{lo:.6f},{hi:.6f}], "
                f"phi=[{float(state.phi.value.lo):.9f},{float(state.phi.value.hi):.9f}]"
            )
        if checkpoint:
            state.save(checkpoint)
    elif state.parabolic:
        return SynthesisResult(state, (Fraction(0), Fraction(0)), theta_to_c(Fraction(0)).to_json())
    while state.stage < stages:
        if seq[state.stage + 1] == 0:
            return _parabolic_result(seq, config, checkpoint)
        try:
            _advance(state, seq, radius, progress)
        except BudgetExceeded:
            if checkpoint:
                state.save(checkpoint)
            raise
        if checkpoint:
            state.save(checkpoint)
    return SynthesisResult(state, state.theta_interval(), None)


# --------------------------------------------------------------------------
# Verification
# --------------------------------------------------------------------------


def _status(ok: bool | None) -> str:
    return "indeterminate" if ok is None else ("pass" if ok else "fail")


def verify_properties(
    s: SynthesisState,
    *,
    seed: int = 7919,
    target_error: float | None = None,
    radius: RadiusOracle | None = None,
) -> dict:
    """Re-check the six properties on every recorded stage.

    Properties 1-3 are exact prefix checks.  Property 4 uses a fresh radius
    run (new seed, half the target error): pass when the whole error bar is
    inside the window, fail when it is outside, indeterminate otherwise.
    Properties 5 and 6 use certified Phi enclosures.
    """
    report: dict = {}
    pre = s.prefixes
    report["1"] = {"status": _status(len(pre) > 0 and pre[0].terms == ())}
    report["2"] = {"status": _status(all(len(p) >= k for k, p in enumerate(pre)))}
    report["3"] = {"status": _status(all(pre[k].is_prefix_of(pre[k + 1]) for k in range(len(pre) - 1)))}
    if s.parabolic:
        for key in ("4", "5", "6"):
            report[key] = {"status": "pass", "note": "parabolic: r = 0 needs no window"}
        return report
    te = target_error if target_error is not None else s.config.target_error / 2
    radius = radius or RadiusOracle(orbit_len=s.config.orbit_len, target_error=te)
    p4 = []
    for k, p in enumerate(pre):
        if k >= len(s.r_values) or s.window_scale is None:
            p4.append({"stage": k, "status": "fail", "note": "no target value recorded for this stage"})
            continue
        lo, hi = s.window(k)
        est = radius(p, seed + k)
        if lo < est.lo and est.hi < hi:
            ok = True
        elif est.hi <= lo or est.lo >= hi:
            ok = False
        else:
            ok = None
        p4.append(
            {
                "stage": k,
                "status": _status(ok),
                "window": [repr(lo), repr(hi)],
                "radius": [repr(est.lo), repr(est.hi)],
                "margin": repr(min(est.lo - lo, hi - est.hi)),
                "seed": seed + k,
            }
        )
    report["4"] = {"status": _merge(p["status"] for p in p4), "stages": p4}
    phis = [phi_noble(p) for p in pre]
    p5 = []
    for k in range(1, len(pre)):
        margin = phis[k].value.lo - phis[k - 1].value.hi
        p5.append({"stage": k, "status": _status(margin.sign() > 0), "margin": repr(float(margin))})
    report["5"] = {"status": _merge(p["status"] for p in p5), "stages": p5}
    p6 = []
    for k, p in enumerate(pre):
        thr = phis[k].value.hi - Dyadic(1, k)
        ok = phi_extensions_exceed(p, thr)
        margin = phi_cylinder_lower_bound(p).lo - thr
        p6.append({"stage": k, "status": _status(ok), "cylinder_margin": repr(float(margin))})
    report["6"] = {"status": _merge(p["status"] for p in p6), "stages": p6}
    return report


def _merge(statuses) -> str:
    statuses = list(statuses)
    if any(x == "fail" for x in statuses):
        return "fail"
    if any(x == "indeterminate" for x in statuses):
        return "indeterminate"
    return "pass"
