"""Graded exterior algebra over framed free modules with polynomial coefficients.

A :class:`Frame` is a trivialized vector bundle with a fixed global basis; a
:class:`GradedElement` is an element of the exterior algebra of the bundle
(``variance='primal'``, multivector sections) or of its dual
(``variance='dual'``, forms).  The dual frame is implicit: a dual element is
indexed by the same basis positions and pairs against primal elements by
``<e_i, e_j*> = delta_ij``.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping

from .ring import PolyScalar, Scalar

PRIMAL = "primal"
DUAL = "dual"


class FrameError(ValueError):
    """Frame, variance or degree mismatch between graded elements."""


@dataclass(frozen=True)
class Frame:
    """A trivialized bundle: a name, a rank and the base coordinate names."""

    name: str
    rank: int
    base: tuple

    def __post_init__(self):
        if self.rank < 0:
            raise FrameError("rank must be nonnegative")
        object.__setattr__(self, "base", tuple(self.base))

    def zero_poly(self) -> PolyScalar:
        return PolyScalar.zero(self.base)

    def const(self, value: Scalar) -> PolyScalar:
        return PolyScalar.const(self.base, value)

    def basis_tuples(self, degree: int):
        return combinations(range(self.rank), degree)


def opposite(variance: str) -> str:
    return DUAL if variance == PRIMAL else PRIMAL


class GradedElement:
    """Element of the degree-``p`` exterior power of a framed bundle or its dual.

    Components are stored on strictly increasing index tuples; zero
    components are dropped, so structural equality is semantic equality.
    Degrees above the rank are allowed and are necessarily zero.
    """

    __slots__ = ("frame", "degree", "variance", "comps")

    def __init__(
        self,
        frame: Frame,
        degree: int,
        variance: str,
        comps: Mapping[tuple, PolyScalar] = (),
    ):
        if variance not in (PRIMAL, DUAL):
            raise FrameError(f"bad variance {variance!r}")
        if degree < 0:
            raise FrameError("degree must be nonnegative")
        self.frame = frame
        self.degree = degree
        self.variance = variance
        clean = {}
        for idx, coeff in dict(comps).items():
            idx = tuple(int(i) for i in idx)
            if len(idx) != degree:
                raise FrameError(f"index tuple {idx} has wrong length for degree {degree}")
            if any(not 0 <= i < frame.rank for i in idx):
                raise FrameError(f"index out of range in {idx} for rank {frame.rank}")
            if any(a >= b for a, b in zip(idx, idx[1:])):
                raise FrameError(f"index tuple {idx} not strictly increasing")
            if not isinstance(coeff, PolyScalar):
                coeff = PolyScalar.const(frame.base, coeff)
            if not coeff.is_zero:
                clean[idx] = coeff
        self.comps = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, frame: Frame, degree: int, variance: str) -> "GradedElement":
        return cls(frame, degree, variance, {})

    @classmethod
    def basis(cls, frame: Frame, index: int, variance: str = PRIMAL) -> "GradedElement":
        return cls(frame, 1, variance, {(index,): frame.const(1)})

    @classmethod
    def scalar(cls, frame: Frame, value: PolyScalar, variance: str = PRIMAL) -> "GradedElement":
        return cls(frame, 0, variance, {(): value})

    # -- structure ---------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.comps

    def component(self, idx: tuple) -> PolyScalar:
        return self.comps.get(tuple(idx), self.frame.zero_poly())

    def _require_like(self, other: "GradedElement"):
        if self.frame != other.frame:
            raise FrameError(f"frames differ: {self.frame.name} vs {other.frame.name}")
        if self.variance != other.variance:
            raise FrameError("variance mismatch")
        if self.degree != other.degree:
            raise FrameError(f"degrees differ: {self.degree} vs {other.degree}")

    def __add__(self, other: "GradedElement") -> "GradedElement":
        self._require_like(other)
        comps = dict(self.comps)
        for idx, coeff in other.comps.items():
            comps[idx] = coeff if idx not in comps else comps[idx] + coeff
        return GradedElement(self.frame, self.degree, self.variance, comps)

    def __neg__(self) -> "GradedElement":
        return GradedElement(
            self.frame, self.degree, self.variance,
            {i: -c for i, c in self.comps.items()},
        )

    def __sub__(self, other: "GradedElement") -> "GradedElement":
        return self + (-other)

    def scale(self, f) -> "GradedElement":
        return GradedElement(
            self.frame, self.degree, self.variance,
            {i: c * f for i, c in self.comps.items()},
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, GradedElement):
            return NotImplemented
        return (
            self.frame == other.frame
            and self.degree == other.degree
            and self.variance == other.variance
            and self.comps == other.comps
        )

    __hash__ = None

    def render(self) -> str:
        """Deterministic text form for reports, e.g. ``(x1)*e[1,2] + e[3]``."""
        if not self.comps:
            return "0"
        head = "e" if self.variance == PRIMAL else "e*"
        parts = []
        for idx in sorted(self.comps):
            body = ",".join(str(i + 1) for i in idx)
            parts.append(f"({self.comps[idx].render()})*{head}[{body}]")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"GradedElement({self.render()!r})"


def merge_sign(left: tuple, right: tuple):
    """Merge two strictly increasing tuples, returning (sign, merged) or None
    on a shared index (the wedge vanishes)."""
    sign = 1
    merged = []
    i = j = 0
    while i < len(left) and j < len(right):
        a, b = left[i], right[j]
        if a == b:
            return None
        if a < b:
            merged.append(a)
            i += 1
        else:
            # b jumps over the remaining len(left) - i entries of left
            merged.append(b)
            sign *= -1 if (len(left) - i) % 2 else 1
            j += 1
    merged.extend(left[i:])
    merged.extend(right[j:])
    return sign, tuple(merged)


def wedge(a: GradedElement, b: GradedElement) -> GradedElement:
    """Exterior product; graded commutative, same frame and variance."""
    if a.frame != b.frame:
        raise FrameError("wedge: frames differ")
    if a.variance != b.variance:
        raise FrameError("wedge: variance mismatch")
    comps: dict = {}
    for ia, ca in a.comps.items():
        for ib, cb in b.comps.items():
            merged = merge_sign(ia, ib)
            if merged is None:
                continue
            sign, idx = merged
            term = ca * cb * sign
            comps[idx] = term if idx not in comps else comps[idx] + term
    return GradedElement(a.frame, a.degree + b.degree, a.variance, comps)


def wedge_all(factors: Iterable[GradedElement], frame: Frame, variance: str) -> GradedElement:
    out = GradedElement.scalar(frame, frame.const(1), variance)
    for f in factors:
        out = wedge(out, f)
    return out


def contract(x: GradedElement, omega: GradedElement) -> GradedElement:
    """Interior product iota_x omega: (iota_x w)(y_1,..,y_n) = w(x, y_1,..,y_n).

    ``x`` has degree 1 and the opposite variance of ``omega``; the degree of
    ``omega`` drops by one.  A degree-0 target is an error.
    """
    if x.frame != omega.frame:
        raise FrameError("contract: frames differ")
    if x.degree != 1:
        raise FrameError("contract: first argument must have degree 1")
    if x.variance == omega.variance:
        raise FrameError("contract: arguments must have opposite variance")
    if omega.degree == 0:
        raise FrameError("contract: cannot contract a degree-0 element")
    comps: dict = {}
    for idx, coeff in omega.comps.items():
        for pos, i in enumerate(idx):
            xi = x.comps.get((i,))
            if xi is None:
                continue
            rest = idx[:pos] + idx[pos + 1:]
            term = xi * coeff * (-1 if pos % 2 else 1)
            comps[rest] = term if rest not in comps else comps[rest] + term
    return GradedElement(omega.frame, omega.degree - 1, omega.variance, comps)


def pair(a: GradedElement, b: GradedElement) -> PolyScalar:
    """Dual pairing of equal-degree elements of opposite variance.

    Degree 1 is the basic ``<e_i, e_j*> = delta_ij`` pairing; for higher
    degree it is the determinant pairing, which on normalized components is
    the sum of componentwise products.
    """
    if a.frame != b.frame:
        raise FrameError("pair: frames differ")
    if a.variance == b.variance:
        raise FrameError("pair: arguments must have opposite variance")
    if a.degree != b.degree:
        raise FrameError("pair: degrees differ")
    out = a.frame.zero_poly()
    small, large = (a, b) if len(a.comps) <= len(b.comps) else (b, a)
    for idx, coeff in small.comps.items():
        other = large.comps.get(idx)
        if other is not None:
            out = out + coeff * other
    return out


def evaluate(omega: GradedElement, sections) -> PolyScalar:
    """Evaluate a degree-p element on p degree-1 arguments of opposite variance:
    ``omega(s_1, .., s_p)``, multilinear and alternating."""
    sections = list(sections)
    if len(sections) != omega.degree:
        raise FrameError("evaluate: argument count must equal the degree")
    current = omega
    for s in sections:
        current = contract(s, current)
    return current.component(())
