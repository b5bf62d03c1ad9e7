"""Exact scalar arithmetic: rationals and multivariate polynomials over Q.

Polynomials model the smooth functions on the base at desk scale.  All
coefficients are `fractions.Fraction`, so every identity checked downstream
is exact; there are no tolerances anywhere in the kernel.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping, Union

# Exact rational scalar.  Fraction already maintains gcd-reduced form with a
# positive denominator, which is the canonical representation we rely on.
Rational = Fraction

Scalar = Union[int, Fraction]


class RingError(ValueError):
    """Structural misuse of polynomial arithmetic (variable mismatch, bad index)."""


class PolyScalar:
    """A multivariate polynomial over Q with a fixed, ordered variable list.

    Terms are stored sparsely as ``{exponent tuple: Fraction}``.  Zero
    coefficients are never stored, so structural equality is semantic
    equality for polynomials over the same variable list.
    """

    __slots__ = ("variables", "terms")

    def __init__(self, variables: Iterable[str], terms: Mapping[tuple, Scalar] = ()):
        self.variables = tuple(variables)
        clean = {}
        n = len(self.variables)
        for exps, coeff in dict(terms).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != n:
                raise RingError(
                    f"exponent vector {exps} has length {len(exps)}, expected {n}"
                )
            if any(e < 0 for e in exps):
                raise RingError(f"negative exponent in {exps}")
            coeff = Fraction(coeff)
            if coeff != 0:
                clean[exps] = coeff
        self.terms = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, variables: Iterable[str]) -> "PolyScalar":
        return cls(variables, {})

    @classmethod
    def const(cls, variables: Iterable[str], value: Scalar) -> "PolyScalar":
        variables = tuple(variables)
        return cls(variables, {(0,) * len(variables): Fraction(value)})

    @classmethod
    def var(cls, variables: Iterable[str], index: int) -> "PolyScalar":
        variables = tuple(variables)
        if not 0 <= index < len(variables):
            raise RingError(f"variable index {index} out of range")
        exps = tuple(1 if i == index else 0 for i in range(len(variables)))
        return cls(variables, {exps: Fraction(1)})

    # -- predicates --------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def constant_value(self):
        """Return the rational value if constant, else None."""
        if not self.terms:
            return Fraction(0)
        zero = (0,) * len(self.variables)
        if set(self.terms) == {zero}:
            return self.terms[zero]
        return None

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def _require_same(self, other: "PolyScalar"):
        if self.variables != other.variables:
            raise RingError(
                f"variable lists differ: {self.variables} vs {other.variables}"
            )

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other: "PolyScalar") -> "PolyScalar":
        self._require_same(other)
        terms = dict(self.terms)
        for exps, coeff in other.terms.items():
            terms[exps] = terms.get(exps, Fraction(0)) + coeff
        return PolyScalar(self.variables, terms)

    def __neg__(self) -> "PolyScalar":
        return PolyScalar(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "PolyScalar") -> "PolyScalar":
        return self + (-other)

    def __mul__(self, other) -> "PolyScalar":
        if isinstance(other, (int, Fraction)):
            return PolyScalar(
                self.variables, {e: c * other for e, c in self.terms.items()}
            )
        self._require_same(other)
        terms: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                key = tuple(a + b for a, b in zip(e1, e2))
                terms[key] = terms.get(key, Fraction(0)) + c1 * c2
        return PolyScalar(self.variables, terms)

    def __rmul__(self, other) -> "PolyScalar":
        return self.__mul__(other)

    def partial(self, var_index: int) -> "PolyScalar":
        """Formal partial derivative with respect to the var_index-th variable."""
        if not 0 <= var_index < len(self.variables):
            raise RingError(f"variable index {var_index} out of range")
        terms: dict = {}
        for exps, coeff in self.terms.items():
            k = exps[var_index]
            if k == 0:
                continue
            key = tuple(
                e - 1 if i == var_index else e for i, e in enumerate(exps)
            )
            terms[key] = terms.get(key, Fraction(0)) + coeff * k
        return PolyScalar(self.variables, terms)

    # -- comparison and rendering ------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyScalar):
            return NotImplemented
        return self.variables == other.variables and self.terms == other.terms

    __hash__ = None  # mutable-dict-backed; never used as a key

    def sorted_terms(self):
        """Terms in graded lexicographic order (highest degree first)."""
        return sorted(
            self.terms.items(),
            key=lambda item: (-sum(item[0]), tuple(-e for e in item[0])),
        )

    def render(self) -> str:
        """Canonical text form, parseable by :func:`parse_poly`."""
        if not self.terms:
            return "0"
        parts = []
        for exps, coeff in self.sorted_terms():
            factors = []
            for name, e in zip(self.variables, exps):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            mag = abs(coeff)
            if factors and mag == 1:
                body = "*".join(factors)
            elif factors:
                body = "*".join([_render_fraction(mag)] + factors)
            else:
                body = _render_fraction(mag)
            if not parts:
                parts.append(body if coeff > 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if coeff > 0 else f"- {body}")
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"PolyScalar({self.render()!r})"


def _render_fraction(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


# -- spec-level operation surface -------------------------------------------

def poly_add(a: PolyScalar, b: PolyScalar) -> PolyScalar:
    return a + b


def poly_mul(a: PolyScalar, b: PolyScalar) -> PolyScalar:
    return a * b


def poly_partial(p: PolyScalar, var_index: int) -> PolyScalar:
    return p.partial(var_index)


# -- polynomial literals -----------------------------------------------------
#
# Shared with the SDL parser.  Grammar (whitespace insignificant):
#   poly   := ['-'] term (('+'|'-') term)*
#   term   := factor ('*' factor)*
#   factor := rational | variable ['^' natural]
# A term may combine at most one leading rational with variable powers.

_TOKEN = re.compile(r"\s*([0-9]+(?:/[0-9]+)?|[A-Za-z_][A-Za-z_0-9]*|\^|\*|\+|-)")


class PolyParseError(RingError):
    def __init__(self, message: str, column: int):
        super().__init__(message)
        self.column = column


def tokenize_poly(text: str):
    pos, out = 0, []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            col = pos + (len(text[pos:]) - len(stripped))
            raise PolyParseError(f"unexpected character {stripped[0]!r}", col)
        out.append((m.group(1), m.start(1)))
        pos = m.end()
    return out


def parse_poly(text: str, variables: Iterable[str]) -> PolyScalar:
    """Parse a polynomial literal like ``3/2*x1^2*x2 - x1 + 1``."""
    variables = tuple(variables)
    tokens = tokenize_poly(text)
    if not tokens:
        raise PolyParseError("empty polynomial", 0)
    result = PolyScalar.zero(variables)
    i = 0
    sign = 1
    if tokens[0][0] in "+-":
        sign = -1 if tokens[0][0] == "-" else 1
        i = 1
    while True:
        term, i = _parse_term(tokens, i, variables)
        result = result + term * sign
        if i >= len(tokens):
            return result
        op, col = tokens[i]
        if op not in "+-":
            raise PolyParseError(f"expected '+' or '-', found {op!r}", col)
        sign = -1 if op == "-" else 1
        i += 1


def _parse_term(tokens, i, variables):
    coeff = Fraction(1)
    exps = [0] * len(variables)
    saw_factor = False
    while True:
        if i >= len(tokens):
            raise PolyParseError("unexpected end of polynomial", 0)
        tok, col = tokens[i]
        if re.fullmatch(r"[0-9]+(?:/[0-9]+)?", tok):
            coeff *= Fraction(tok)
            i += 1
        elif re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", tok):
            if tok not in variables:
                raise PolyParseError(f"unknown variable {tok!r}", col)
            idx = variables.index(tok)
            power = 1
            i += 1
            if i < len(tokens) and tokens[i][0] == "^":
                i += 1
                if i >= len(tokens) or not tokens[i][0].isdigit():
                    raise PolyParseError("expected exponent after '^'", col)
                power = int(tokens[i][0])
                i += 1
            exps[idx] += power
        else:
            raise PolyParseError(f"unexpected token {tok!r}", col)
        saw_factor = True
        if i < len(tokens) and tokens[i][0] == "*":
            i += 1
            continue
        break
    if not saw_factor:
        raise PolyParseError("empty term", 0)
    return PolyScalar(variables, {tuple(exps): coeff}), i
