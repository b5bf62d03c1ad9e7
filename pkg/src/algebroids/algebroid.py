"""Lie algebroids over a polynomial base, with Cartan calculus and the
Schouten bracket.

An :class:`Algebroid` fixes a frame and the variance of its own sections,
so a bundle and its dual share one frame: the dual algebroid of ``A`` (when
one exists) is an Algebroid over the same frame with the opposite variance,
and the canonical pairing between their sections is :func:`exterior.pair`.

Structure data is a table of structure functions ``[e_i, e_j] = sum_k
c_ij^k e_k`` plus an anchor matrix whose row ``i`` lists the coefficients of
``rho(e_i)`` on the coordinate vector fields.  Brackets of arbitrary
polynomial-coefficient sections extend the table by the Leibniz rule.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Optional, Sequence

from .exterior import (
    PRIMAL,
    Frame,
    FrameError,
    GradedElement,
    contract,
    evaluate,
    opposite,
    wedge,
)
from .report import CheckReport
from .ring import PolyScalar


def zero_anchor(frame: Frame):
    return tuple(
        tuple(frame.zero_poly() for _ in frame.base) for _ in range(frame.rank)
    )


@dataclass
class Algebroid:
    """Framed Lie algebroid: anchor matrix plus antisymmetric bracket table.

    ``table`` maps an ordered index pair to the degree-1 section
    ``[e_i, e_j]``; missing pairs default to zero and ``(j, i)`` entries are
    derived by antisymmetry.  Raw entries are kept as given so that the
    antisymmetry axiom itself stays checkable on corrupted inputs.
    """

    frame: Frame
    anchor: Sequence = None
    table: Mapping = None
    variance: str = PRIMAL

    def __post_init__(self):
        if self.anchor is None:
            self.anchor = zero_anchor(self.frame)
        self.anchor = tuple(tuple(row) for row in self.anchor)
        if len(self.anchor) != self.frame.rank or any(
            len(row) != len(self.frame.base) for row in self.anchor
        ):
            raise FrameError("anchor matrix shape must be rank x base-dimension")
        self.table = dict(self.table or {})
        for (i, j), entry in self.table.items():
            if not (0 <= i < self.frame.rank and 0 <= j < self.frame.rank):
                raise FrameError(f"bracket index ({i},{j}) out of range")
            self._require_section(entry)

    # -- section helpers ----------------------------------------------------

    @property
    def rank(self) -> int:
        return self.frame.rank

    def _require_section(self, x: GradedElement):
        if x.frame != self.frame or x.variance != self.variance or x.degree != 1:
            raise FrameError("expected a degree-1 section of this algebroid")

    def section_basis(self, i: int) -> GradedElement:
        return GradedElement.basis(self.frame, i, self.variance)

    def form_basis(self, i: int) -> GradedElement:
        return GradedElement.basis(self.frame, i, opposite(self.variance))

    def zero_section(self) -> GradedElement:
        return GradedElement.zero(self.frame, 1, self.variance)

    def structure(self, i: int, j: int) -> GradedElement:
        """Antisymmetrized table lookup for [e_i, e_j]."""
        if (i, j) in self.table:
            return self.table[(i, j)]
        if (j, i) in self.table:
            return -self.table[(j, i)]
        return self.zero_section()

    # -- core operations ------------------------------------------------------

    def anchor_apply(self, x: GradedElement, f: PolyScalar) -> PolyScalar:
        """rho(x) acting on a base function as a derivation."""
        self._require_section(x)
        out = self.frame.zero_poly()
        for (i,), coeff in x.comps.items():
            row = self.anchor[i]
            for j, a in enumerate(row):
                if a.is_zero:
                    continue
                out = out + coeff * a * f.partial(j)
        return out

    def bracket(self, x: GradedElement, y: GradedElement) -> GradedElement:
        """Leibniz extension of the structure table to polynomial sections."""
        self._require_section(x)
        self._require_section(y)
        out = self.zero_section()
        for (i,), xi in x.comps.items():
            for (j,), yj in y.comps.items():
                entry = self.structure(i, j)
                if not entry.is_zero:
                    out = out + entry.scale(xi * yj)
        for (j,), yj in y.comps.items():
            df = self.anchor_apply(x, yj)
            if not df.is_zero:
                out = out + self.section_basis(j).scale(df)
        for (i,), xi in x.comps.items():
            df = self.anchor_apply(y, xi)
            if not df.is_zero:
                out = out - self.section_basis(i).scale(df)
        return out

    def differential(self, omega: GradedElement) -> GradedElement:
        """Koszul differential on forms (elements of the opposite variance)."""
        if omega.frame != self.frame or omega.variance != opposite(self.variance):
            raise FrameError("differential expects a form over this algebroid")
        degree = omega.degree
        comps: dict = {}
        for tup in combinations(range(self.rank), degree + 1):
            basis = [self.section_basis(t) for t in tup]
            val = self.frame.zero_poly()
            for a in range(len(tup)):
                rest = basis[:a] + basis[a + 1:]
                inner = evaluate(omega, rest)
                if not inner.is_zero:
                    term = self.anchor_apply(basis[a], inner)
                    val = val + (term if a % 2 == 0 else -term)
            for a in range(len(tup)):
                for b in range(a + 1, len(tup)):
                    braket = self.structure(tup[a], tup[b])
                    if braket.is_zero:
                        continue
                    rest = [braket] + [
                        basis[t] for t in range(len(tup)) if t != a and t != b
                    ]
                    term = evaluate(omega, rest)
                    val = val + (term if (a + b) % 2 == 0 else -term)
            if not val.is_zero:
                comps[tup] = val
        return GradedElement(self.frame, degree + 1, omega.variance, comps)

    def lie_derivative(self, x: GradedElement, omega: GradedElement) -> GradedElement:
        """Cartan formula L_x = iota_x d + d iota_x on forms of any degree."""
        self._require_section(x)
        if omega.degree == 0:
            f = omega.component(())
            return GradedElement.scalar(self.frame, self.anchor_apply(x, f), omega.variance)
        term1 = contract(x, self.differential(omega))
        term2 = self.differential(contract(x, omega))
        return term1 + term2

    def coefficient_differential(self, f: PolyScalar) -> GradedElement:
        """d f as a degree-1 form: components <df, e_i> = rho(e_i) f."""
        comps = {}
        for i in range(self.rank):
            v = self.anchor_apply(self.section_basis(i), f)
            if not v.is_zero:
                comps[(i,)] = v
        return GradedElement(self.frame, 1, opposite(self.variance), comps)

    # -- Schouten (Gerstenhaber) bracket ------------------------------------
    #
    # Sign convention, fixed globally and asserted by the test suite:
    #   [P, Q] = -(-1)^{(p-1)(q-1)} [Q, P]
    #   [x, f] = rho(x) f           (so [f, x] = -rho(x) f)
    #   [P, Q ^ R] = [P, Q] ^ R + (-1)^{(p-1) q} Q ^ [P, R]
    # With this convention a dual differential is a degree-1 derivation of
    # the bracket, which is what the bialgebroid checker verifies.

    def schouten(self, p: GradedElement, q: GradedElement) -> GradedElement:
        if p.frame != self.frame or p.variance != self.variance:
            raise FrameError("schouten expects multivectors over this algebroid")
        if q.frame != self.frame or q.variance != self.variance:
            raise FrameError("schouten expects multivectors over this algebroid")
        dp, dq = p.degree, q.degree
        out = GradedElement.zero(self.frame, dp + dq - 1 if dp + dq else 0, self.variance)
        if dp + dq == 0:
            return out
        for idx_p, f in p.comps.items():
            for idx_q, g in q.comps.items():
                term = self._schouten_monomial(idx_p, f, idx_q, g)
                if not term.is_zero:
                    out = out + term
        return out

    def _monomial(self, idx: tuple) -> GradedElement:
        return GradedElement(
            self.frame, len(idx), self.variance, {idx: self.frame.const(1)}
        )

    def _schouten_monomial(self, idx_p, f, idx_q, g) -> GradedElement:
        p, q = len(idx_p), len(idx_q)
        result = GradedElement.zero(
            self.frame, p + q - 1 if p + q else 0, self.variance
        )
        # f*g*[e_I, e_J]: pairwise structure brackets with 1-based sign (-1)^{a+b}
        fg = f * g
        if not fg.is_zero:
            for a, ia in enumerate(idx_p):
                for b, jb in enumerate(idx_q):
                    entry = self.structure(ia, jb)
                    if entry.is_zero:
                        continue
                    rest_p = self._monomial(idx_p[:a] + idx_p[a + 1:])
                    rest_q = self._monomial(idx_q[:b] + idx_q[b + 1:])
                    sign = -1 if (a + b) % 2 else 1
                    term = wedge(wedge(entry, rest_p), rest_q).scale(fg * sign)
                    result = result + term
        # (-1)^{p+1} f (iota_{dg} e_I) ^ e_J
        cut = self._interior_by_differential(g, idx_p)
        if not cut.is_zero:
            sign = -1 if (p + 1) % 2 else 1
            result = result + wedge(cut, self._monomial(idx_q)).scale(f * sign)
        # (-1)^{(p-1)(q-1)+q} g (iota_{df} e_J) ^ e_I
        cut = self._interior_by_differential(f, idx_q)
        if not cut.is_zero:
            sign = -1 if ((p - 1) * (q - 1) + q) % 2 else 1
            result = result + wedge(cut, self._monomial(idx_p)).scale(g * sign)
        return result

    def _interior_by_differential(self, f: PolyScalar, idx: tuple) -> GradedElement:
        """iota_{df} e_I = sum_b (-1)^b (rho(e_{I_b}) f) e_{I minus b}."""
        out = GradedElement.zero(
            self.frame, len(idx) - 1 if idx else 0, self.variance
        )
        if not idx:
            return out
        for b, jb in enumerate(idx):
            df = self.anchor_apply(self.section_basis(jb), f)
            if df.is_zero:
                continue
            rest = self._monomial(idx[:b] + idx[b + 1:])
            out = out + rest.scale(df * (-1 if b % 2 else 1))
        return out


# -- spec-level operation surface --------------------------------------------

def bracket(a: Algebroid, x, y):
    return a.bracket(x, y)


def anchor_apply(a: Algebroid, x, f):
    return a.anchor_apply(x, f)


def differential(a: Algebroid, omega):
    return a.differential(omega)


def lie_derivative(a: Algebroid, x, omega):
    return a.lie_derivative(x, omega)


def schouten(a: Algebroid, p, q):
    return a.schouten(p, q)


# -- checkers -----------------------------------------------------------------

def check_algebroid(a: Algebroid, name: str = "") -> CheckReport:
    """Jacobi on basis triples, anchor morphism on coordinate functions, and
    antisymmetry of the raw structure table."""
    report = CheckReport(name or a.frame.name)
    zero = a.zero_section()
    # (c) antisymmetry of the raw table
    for i in range(a.rank):
        raw = a.table.get((i, i))
        if raw is not None:
            report.add(
                "antisymmetry", "[e_i, e_i] = 0", (i + 1, i + 1), raw
            )
    for i in range(a.rank):
        for j in range(i + 1, a.rank):
            if (i, j) in a.table and (j, i) in a.table:
                report.add(
                    "antisymmetry",
                    "[e_i, e_j] + [e_j, e_i] = 0",
                    (i + 1, j + 1),
                    a.table[(i, j)] + a.table[(j, i)],
                )
    # (a) Jacobi on basis triples
    for i, j, k in combinations(range(a.rank), 3):
        ei, ej, ek = (a.section_basis(t) for t in (i, j, k))
        residual = (
            a.bracket(ei, a.bracket(ej, ek))
            + a.bracket(ej, a.bracket(ek, ei))
            + a.bracket(ek, a.bracket(ei, ej))
        )
        report.add(
            "jacobi",
            "[e_i,[e_j,e_k]] + [e_j,[e_k,e_i]] + [e_k,[e_i,e_j]] = 0",
            (i + 1, j + 1, k + 1),
            residual,
        )
    # (b) anchor is a bracket morphism, on each coordinate function
    for i in range(a.rank):
        for j in range(i + 1, a.rank):
            ei, ej = a.section_basis(i), a.section_basis(j)
            bij = a.bracket(ei, ej)
            for k, var in enumerate(a.frame.base):
                f = PolyScalar.var(a.frame.base, k)
                residual = (
                    a.anchor_apply(bij, f)
                    - a.anchor_apply(ei, a.anchor_apply(ej, f))
                    + a.anchor_apply(ej, a.anchor_apply(ei, f))
                )
                report.add(
                    "anchor-morphism",
                    "rho([e_i,e_j])f = [rho(e_i), rho(e_j)]f",
                    (i + 1, j + 1, k + 1),
                    residual,
                )
    return report.finalize()


def restrict(a: Algebroid, indices: Sequence[int], name: Optional[str] = None) -> Algebroid:
    """Restriction of an algebroid to a sub-span of its frame.

    The span must be closed under the bracket; a leaked component raises
    with the offending pair.
    """
    from .report import StructureError

    indices = list(indices)
    pos = {orig: new for new, orig in enumerate(indices)}
    sub = Frame(name or f"{a.frame.name}|", len(indices), a.frame.base)
    anchor = tuple(a.anchor[i] for i in indices)
    table = {}
    for ii, i in enumerate(indices):
        for jj, j in enumerate(indices):
            if ii >= jj:
                continue
            entry = a.structure(i, j)
            comps = {}
            for (k,), c in entry.comps.items():
                if k not in pos:
                    raise StructureError(
                        f"span not closed under bracket: [e_{i+1}, e_{j+1}] "
                        f"has a component on e_{k+1}",
                        (i + 1, j + 1),
                    )
                comps[(pos[k],)] = c
            if comps:
                table[(ii, jj)] = GradedElement(sub, 1, a.variance, comps)
    return Algebroid(sub, anchor, table, a.variance)


def transport(a: Algebroid, frame: Frame, index_map: Sequence[int], variance: str) -> Algebroid:
    """Relabel an algebroid onto another frame: basis ``i`` of ``a`` becomes
    basis ``index_map[i]`` of ``frame``.  Pure bookkeeping."""
    if len(index_map) != a.rank or frame.rank != a.rank:
        raise FrameError("transport needs a bijection onto a frame of equal rank")
    anchor = [None] * a.rank
    for i in range(a.rank):
        anchor[index_map[i]] = a.anchor[i]
    table = {}
    for (i, j), entry in a.table.items():
        comps = {(index_map[k],): c for (k,), c in entry.comps.items()}
        table[(index_map[i], index_map[j])] = GradedElement(frame, 1, variance, comps)
    return Algebroid(frame, tuple(anchor), table, variance)
