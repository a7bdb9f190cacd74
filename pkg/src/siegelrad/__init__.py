"""Conformal radii of quadratic Siegel disks: exact arithmetic, Brjuno sums,
critical orbits, conformal-radius solvers and the radius-synthesis construction."""

from __future__ import annotations

from .errors import SiegelError
from .exactnum import Dyadic, DyadicInterval, QuadraticSurd, RealOracle
from .cfrac import CFracPrefix, NobleNumber, noble_value, parse_prefix

__version__ = "0.1.0"

__all__ = [
    "SiegelError",
    "Dyadic",
    "DyadicInterval",
    "QuadraticSurd",
    "RealOracle",
    "CFracPrefix",
    "NobleNumber",
    "noble_value",
    "parse_prefix",
]
