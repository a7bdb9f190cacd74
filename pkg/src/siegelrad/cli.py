"""Command-line entry point: ``siegelrad <subcommand> [options]``.

Every JSON output carries the run configuration, so the same argv and seed
reproduce it byte for byte.  Usage errors exit with status 2; errors raised
by the computation exit with status 1 and print an error JSON object.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import DomainError, SiegelError, Terminated


def _dyadic_arg(text: str):
    from .exactnum import Dyadic

    try:
        return Dyadic.parse(text)
    except DomainError:
        return Dyadic.approx(float(text), 80, "nearest")


def _complex_arg(text: str) -> complex:
    parts = text.split(",")
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'x,y', got {text!r}")
    return complex(float(parts[0]), float(parts[1]))


def _angle(args):
    """Rotation angle from --noble/--prefix or --theta (rational)."""
    from .cfrac import noble_value, parse_prefix

    if getattr(args, "theta", None) is not None:
        return Fraction(args.theta)
    text = getattr(args, "noble", None) or "[]"
    return noble_value(parse_prefix(text)[0])


def _emit(payload: dict, args) -> None:
    payload = {"config": _run_config(args), **payload}
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    out = getattr(args, "out", None)
    if out and not getattr(args, "_out_is_artifact", False):
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _run_config(args) -> dict:
    skip = {"func", "_out_is_artifact"}
    cfg = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        if isinstance(v, complex):
            v = [v.real, v.imag]
        elif isinstance(v, Fraction):
            v = str(v)
        elif not isinstance(v, (str, int, float, bool, type(None), list)):
            v = str(v)
        cfg[k] = v
    return cfg


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_cfrac(args) -> None:
    from .cfrac import cfrac_digits_of, convergents, eval_prefix, noble_value, parse_prefix
    from .exactnum import RealOracle

    if args.rational is not None:
        o = RealOracle.from_rational(Fraction(args.rational))
        try:
            terms, done = list(cfrac_digits_of(o, args.terms).terms), False
        except Terminated as exc:
            terms, done = list(exc.terms), True
        _emit({"terms": terms, "terminated": done}, args)
        return
    prefix, noble = parse_prefix(args.noble or "[]")
    out: dict = {"prefix": prefix.to_string(noble=noble)}
    if noble or not prefix.terms:
        nob = noble_value(prefix)
        terms = nob.terms(args.terms)
        iv = nob.value.to_interval(args.precision)
        out.update(value=nob.value.to_string(), value_lo=iv.lo.to_string(), value_hi=iv.hi.to_string())
    else:
        terms = list(prefix.terms)
        iv = eval_prefix(prefix, args.precision)
        out.update(value_lo=iv.lo.to_string(), value_hi=iv.hi.to_string())
    out["terms"] = terms
    out["convergents"] = [[p, q] for p, q in convergents(terms)]
    _emit(out, args)


def cmd_phi(args) -> None:
    from .brjuno import phi_noble, phi_truncated
    from .cfrac import noble_value, parse_prefix

    prefix, _ = parse_prefix(args.noble)
    if args.truncate is not None:
        est = phi_truncated(noble_value(prefix), args.truncate)
    else:
        est = phi_noble(prefix, _dyadic_arg(args.tol))
    _emit({"phi": est.to_json()}, args)


def _domain_from_args(args):
    from .confrad import DomainSpec
    from .setapprox import BallUnion

    balls = BallUnion()
    if args.obstacles:
        balls = BallUnion.from_text(Path(args.obstacles).read_text())
    if args.half_plane is not None:
        d = float(args.half_plane)
        big = 1e6
        c, r = balls.arrays()
        centers = list(c) + [complex(-d - big, 0.0)]
        radii = list(r) + [big]
        return DomainSpec.from_arrays(args.disk if args.disk else 64 * d, centers, radii)
    return DomainSpec(float(args.disk), balls, args.center)


def cmd_radius(args) -> None:
    from .confrad import conformal_radius

    dom = _domain_from_args(args)
    est = conformal_radius(
        dom,
        float(args.target),
        args.backend,
        seed=args.seed,
        grid_step=args.grid_step,
        budget_seconds=args.budget_seconds,
    )
    _emit({"domain": dom.to_json(), "estimate": est.to_json()}, args)


def cmd_noble_radius(args) -> None:
    from .cfrac import parse_prefix
    from .confrad import noble_radius

    prefix, _ = parse_prefix(args.noble)
    runs = []
    for level in args.level:
        run = noble_radius(
            prefix,
            level,
            args.mode,
            B=args.B,
            backend=args.backend,
            target_error=float(args.target),
            seed=args.seed,
            budget_seconds=args.budget_seconds,
        )
        runs.append(run.to_json())
    _emit({"runs": runs}, args)


def cmd_julia(args) -> None:
    from .quaddyn import julia_render, theta_to_c, write_pgm

    if args.c is not None:
        c = args.c
        param = c
    else:
        param = theta_to_c(_angle(args))
        c = param.c.center
    render = julia_render(param, args.resolution, max_iter=args.max_iter)
    image = np.where(render.mask, 0, 255).astype(np.uint8)
    out: dict = {"c": [c.real, c.imag], "balls": len(render.balls), "resolution": args.resolution}
    if args.out:
        args._out_is_artifact = True
        write_pgm(args.out, image)
        out["image"] = args.out
    if args.balls:
        Path(args.balls).write_text(render.balls.to_text())
        out["balls_file"] = args.balls
    _emit(out, args)


def cmd_tau(args) -> None:
    from .quaddyn import CircleMap, rotation_number_estimate, tau_for_rotation

    gamma = _angle(args)
    tau = tau_for_rotation(gamma, float(args.tol))
    rho = rotation_number_estimate(CircleMap("blaschke", float(tau.mid)), args.check_iterations)
    _emit(
        {
            "tau": tau.to_json(),
            "tau_decimal": [repr(float(tau.lo)), repr(float(tau.hi))],
            "rho_check": [repr(float(rho.lo)), repr(float(rho.hi))],
        },
        args,
    )


def cmd_synth(args) -> None:
    from .synthesis import RightComputableSeq, SynthesisConfig, SynthesisState, synthesize

    seq = RightComputableSeq.parse(args.seq)
    state = SynthesisState.load(args.resume) if args.resume else None
    config = None
    if state is None:
        config = SynthesisConfig(
            seed=args.seed,
            orbit_len=args.orbit_len,
            target_error=float(args.target),
            window_scale=args.window_scale,
            budget_candidates=args.budget_candidates,
            budget_seconds=args.budget_seconds,
        )
    checkpoint = args.checkpoint or args.resume

    def progress(line: str) -> None:
        print(line, file=sys.stderr)

    result = synthesize(seq, args.stages, config, state=state, checkpoint=checkpoint, progress=progress)
    _emit({"result": result.to_json()}, args)


def cmd_halting_demo(args) -> None:
    from .synthesis import HaltingPredicate, halting_sequence

    if args.predicate:
        pred = HaltingPredicate.from_file(args.predicate)
    else:
        pred = HaltingPredicate.from_text(TOY_PREDICATES[args.toy], label=f"toy-{args.toy}")
    values = [halting_sequence(pred, k) for k in range(args.k + 1)]
    monotone = all(values[i + 1] <= values[i] for i in range(len(values) - 1))
    _emit(
        {
            "predicate": pred.label,
            "firing": [list(p) for p in pred.firing(args.k)],
            "r": [str(v) for v in values],
            "non_increasing": monotone,
        },
        args,
    )


def cmd_verify(args) -> None:
    from .synthesis import SynthesisState, verify_properties

    state = SynthesisState.load(args.state)
    _emit({"report": verify_properties(state, seed=args.seed)}, args)


TOY_PREDICATES = {
    "A": "halts 1 1\n",
    "B": "halts 1 1\nhalts 2 3\n",
    "machines": "machine 1 HALT\nmachine 2 INC 0; INC 0; HALT\nmachine 3 JMP 0\n",
}


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--budget-seconds", type=float, default=None)
    common.add_argument("--budget-candidates", type=int, default=200)
    common.add_argument("--mode", choices=["paper", "empirical"], default="empirical")
    common.add_argument("--out", default=None, help="write JSON (or the image, for julia) here")
    common.add_argument("--resume", default=None, help="state file to resume from")

    parser = argparse.ArgumentParser(prog="siegelrad", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cfrac", parents=[common], help="continued-fraction terms and convergents")
    p.add_argument("--noble", default=None, help="prefix like '[1,2]' or '[1,2;1*]'")
    p.add_argument("--rational", default=None, help="a rational p/q to expand")
    p.add_argument("--terms", type=int, default=10)
    p.add_argument("--precision", type=int, default=64)
    p.set_defaults(func=cmd_cfrac)

    p = sub.add_parser("phi", parents=[common], help="Yoccoz's Brjuno function of a noble number")
    p.add_argument("--noble", default="[]")
    p.add_argument("--tol", default="1e-12")
    p.add_argument("--truncate", type=int, default=None, help="partial sum over this many terms")
    p.set_defaults(func=cmd_phi)

    p = sub.add_parser("radius", parents=[common], help="conformal radius of a carved disk")
    p.add_argument("--disk", type=float, default=None, help="outer disk radius")
    p.add_argument("--center", type=_complex_arg, default=0j, help="outer disk center 'x,y'")
    p.add_argument("--obstacles", default=None, help="ball-union text file")
    p.add_argument("--half-plane", type=float, default=None, help="emulate {Re z > -d}")
    p.add_argument("--backend", choices=["stochastic", "grid"], default="stochastic")
    p.add_argument("--target", default="1e-3")
    p.add_argument("--grid-step", type=float, default=None)
    p.set_defaults(func=cmd_radius)

    p = sub.add_parser("noble-radius", parents=[common], help="r(W_n, 0) for a noble angle")
    p.add_argument("--noble", default="[]")
    p.add_argument("--level", type=int, nargs="+", default=[4])
    p.add_argument("--B", type=float, default=None, help="real-bounds constant (paper mode)")
    p.add_argument("--backend", choices=["stochastic", "grid"], default="stochastic")
    p.add_argument("--target", default="1e-3")
    p.set_defaults(func=cmd_noble_radius)

    p = sub.add_parser("julia", parents=[common], help="render a Julia set to PGM")
    p.add_argument("--noble", default=None)
    p.add_argument("--theta", default=None, help="rational rotation angle")
    p.add_argument("--c", type=_complex_arg, default=None, help="parameter of z^2 + c as 'x,y'")
    p.add_argument("--resolution", type=int, default=9)
    p.add_argument("--max-iter", type=int, default=600)
    p.add_argument("--balls", default=None, help="also write the ball union here")
    p.set_defaults(func=cmd_julia)

    p = sub.add_parser("tau", parents=[common], help="Blaschke parameter with a given rotation number")
    p.add_argument("--noble", default="[]")
    p.add_argument("--theta", default=None)
    p.add_argument("--tol", default="9.5367431640625e-07")
    p.add_argument("--check-iterations", type=int, default=100000)
    p.set_defaults(func=cmd_tau)

    p = sub.add_parser("synth", parents=[common], help="synthesize an angle with a prescribed radius")
    p.add_argument("--seq", required=True, help="const:<dyadic>, file:<path> or halting:<predicate-file>")
    p.add_argument("--stages", type=int, default=1)
    p.add_argument("--orbit-len", type=int, default=2000)
    p.add_argument("--target", default="1e-3")
    p.add_argument("--window-scale", type=float, default=None)
    p.add_argument("--checkpoint", default=None, help="state file updated after every stage")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("halting-demo", parents=[common], help="halting-encoded radius sequence")
    p.add_argument("--predicate", default=None, help="predicate file")
    p.add_argument("--toy", choices=sorted(TOY_PREDICATES), default="B")
    p.add_argument("--k", type=int, default=4)
    p.set_defaults(func=cmd_halting_demo)

    p = sub.add_parser("verify", parents=[common], help="re-check a synthesis state")
    p.add_argument("--state", required=True)
    p.set_defaults(func=cmd_verify)
    return parser


def _show_warning(message, category, filename, lineno, file=None, line=None) -> None:
    print(f"warning: {message}", file=sys.stderr)


def main(argv=None) -> int:
    warnings.showwarning = _show_warning
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "radius" and args.disk is None and args.half_plane is None:
        parser.error("radius needs --disk or --half-plane")
    try:
        args.func(args)
    except SiegelError as exc:
        sys.stdout.write(json.dumps(exc.to_json(), sort_keys=True) + "\n")
        return 1
    except (ValueError, OSError) as exc:
        sys.stdout.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}, sort_keys=True) + "\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
