"""Exact symbolic verification kernel for Lie algebroid structures."""

from .ring import PolyScalar, Rational, RingError, parse_poly
from .exterior import DUAL, PRIMAL, Frame, FrameError, GradedElement, contract, pair, wedge
from .algebroid import Algebroid, check_algebroid
from .report import CheckEntry, CheckReport, StructureError

__all__ = [
    "Algebroid",
    "CheckEntry",
    "CheckReport",
    "DUAL",
    "Frame",
    "FrameError",
    "GradedElement",
    "PRIMAL",
    "PolyScalar",
    "Rational",
    "RingError",
    "StructureError",
    "check_algebroid",
    "contract",
    "pair",
    "parse_poly",
    "wedge",
]
