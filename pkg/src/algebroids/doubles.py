"""Matched pairs and their double, Lie bialgebroids, and Courant doubles.

Duality bookkeeping: a bialgebroid is a pair of Algebroids over the *same*
frame with opposite variances, so sections of one are forms of the other
and the canonical pairing needs no conversion.  Direct-sum constructions
(:func:`build_double`, :func:`semidirect`) produce a fresh frame; the
constituents' components are transported verbatim into block positions.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Optional, Sequence, Tuple

from .algebroid import Algebroid, check_algebroid, restrict
from .crossmod import ActionTable
from .exterior import (
    PRIMAL,
    Frame,
    FrameError,
    GradedElement,
    contract,
    opposite,
)
from .report import CheckReport, StructureError
from .ring import PolyScalar


def multiplier_slots(base: tuple, nslots: int):
    """Multiplier tuples for identity checks over function coefficients:
    all-ones, then each coordinate in one slot at a time.  Exercises every
    Leibniz-extension direction once."""
    ones = tuple(PolyScalar.const(base, 1) for _ in range(nslots))
    yield ones
    for s in range(nslots):
        for k in range(len(base)):
            combo = list(ones)
            combo[s] = PolyScalar.var(base, k)
            yield tuple(combo)


def same_structure(a: Algebroid, b: Algebroid) -> bool:
    """Structural equality of anchors and brackets, ignoring frame names."""
    if a.rank != b.rank or a.frame.base != b.frame.base:
        return False
    for i in range(a.rank):
        for j in range(len(a.frame.base)):
            if a.anchor[i][j] != b.anchor[i][j]:
                return False
    for i in range(a.rank):
        for j in range(a.rank):
            if a.structure(i, j).comps != b.structure(i, j).comps:
                return False
    return True


# -- matched pairs ----------------------------------------------------------

@dataclass
class MatchedPair:
    """Two algebroids with mutual representations (P on Q and Q on P)."""

    P: Algebroid
    Q: Algebroid
    act_PQ: ActionTable   # P acting on Q
    act_QP: ActionTable   # Q acting on P

    def __post_init__(self):
        if self.P.frame.base != self.Q.frame.base:
            raise FrameError("matched pair requires a common base")
        if (
            self.act_PQ.target_frame != self.Q.frame
            or self.act_PQ.target_variance != self.Q.variance
        ):
            raise FrameError("act_PQ must target Q")
        if (
            self.act_QP.target_frame != self.P.frame
            or self.act_QP.target_variance != self.P.variance
        ):
            raise FrameError("act_QP must target P")


def check_matched_pair(mp: MatchedPair, name: str = "matched-pair") -> CheckReport:
    """The three compatibility identities between the mutual actions, on all
    basis tuples with coordinate multipliers in each slot."""
    report = CheckReport(name)
    P, Q = mp.P, mp.Q
    base = P.frame.base
    # anchors compose: [rho_P(X), rho_Q(Y)] = -rho_P(Y|>X) + rho_Q(X|>Y)
    for i in range(P.rank):
        for a in range(Q.rank):
            for m, (f1, f2) in enumerate(multiplier_slots(base, 2)):
                x = P.section_basis(i).scale(f1)
                y = Q.section_basis(a).scale(f2)
                for k in range(len(base)):
                    g = PolyScalar.var(base, k)
                    lhs = P.anchor_apply(x, Q.anchor_apply(y, g)) - Q.anchor_apply(
                        y, P.anchor_apply(x, g)
                    )
                    rhs = -P.anchor_apply(mp.act_QP.apply(y, x), g) + Q.anchor_apply(
                        mp.act_PQ.apply(x, y), g
                    )
                    report.add(
                        "anchor-compatibility",
                        "[rho_P(X), rho_Q(Y)] = -rho_P(Y|>X) + rho_Q(X|>Y)",
                        (i + 1, a + 1, m + 1, k + 1),
                        lhs - rhs,
                    )
    # P-action is a bracket derivation up to back-action corrections
    for i in range(P.rank):
        for a, b in combinations(range(Q.rank), 2):
            for m, (f1, f2, f3) in enumerate(multiplier_slots(base, 3)):
                x = P.section_basis(i).scale(f1)
                y1 = Q.section_basis(a).scale(f2)
                y2 = Q.section_basis(b).scale(f3)
                lhs = mp.act_PQ.apply(x, Q.bracket(y1, y2))
                rhs = (
                    Q.bracket(mp.act_PQ.apply(x, y1), y2)
                    + Q.bracket(y1, mp.act_PQ.apply(x, y2))
                    + mp.act_PQ.apply(mp.act_QP.apply(y2, x), y1)
                    - mp.act_PQ.apply(mp.act_QP.apply(y1, x), y2)
                )
                report.add(
                    "action-on-Q-bracket",
                    "X|>[Y1,Y2] = [X|>Y1,Y2] + [Y1,X|>Y2] + (Y2|>X)|>Y1 - (Y1|>X)|>Y2",
                    (i + 1, a + 1, b + 1, m + 1),
                    lhs - rhs,
                )
    # and symmetrically for the Q-action
    for a in range(Q.rank):
        for i, j in combinations(range(P.rank), 2):
            for m, (f1, f2, f3) in enumerate(multiplier_slots(base, 3)):
                y = Q.section_basis(a).scale(f1)
                x1 = P.section_basis(i).scale(f2)
                x2 = P.section_basis(j).scale(f3)
                lhs = mp.act_QP.apply(y, P.bracket(x1, x2))
                rhs = (
                    P.bracket(mp.act_QP.apply(y, x1), x2)
                    + P.bracket(x1, mp.act_QP.apply(y, x2))
                    + mp.act_QP.apply(mp.act_PQ.apply(x2, y), x1)
                    - mp.act_QP.apply(mp.act_PQ.apply(x1, y), x2)
                )
                report.add(
                    "action-on-P-bracket",
                    "Y|>[X1,X2] = [Y|>X1,X2] + [X1,Y|>X2] + (X2|>Y)|>X1 - (X1|>Y)|>X2",
                    (a + 1, i + 1, j + 1, m + 1),
                    lhs - rhs,
                )
    return report.finalize()


def build_double(mp: MatchedPair, name: Optional[str] = None) -> Algebroid:
    """The algebroid on P + Q with bracket
    [X1+Y1, X2+Y2] = ([X1,X2] + Y1|>X2 - Y2|>X1) + ([Y1,Y2] + X1|>Y2 - X2|>Y1)."""
    rp, rq = mp.P.rank, mp.Q.rank
    frame = Frame(name or f"{mp.P.frame.name}><{mp.Q.frame.name}", rp + rq, mp.P.frame.base)
    anchor = list(mp.P.anchor) + list(mp.Q.anchor)

    def embed(section, offset):
        return GradedElement(
            frame, 1, PRIMAL, {(offset + k,): c for (k,), c in section.comps.items()}
        )

    table = {}
    for i in range(rp):
        for j in range(i + 1, rp):
            entry = mp.P.structure(i, j)
            if not entry.is_zero:
                table[(i, j)] = embed(entry, 0)
    for a in range(rq):
        for b in range(a + 1, rq):
            entry = mp.Q.structure(a, b)
            if not entry.is_zero:
                table[(rp + a, rp + b)] = embed(entry, rp)
    for i in range(rp):
        for a in range(rq):
            x = mp.P.section_basis(i)
            y = mp.Q.section_basis(a)
            entry = embed(-mp.act_QP.apply(y, x), 0) + embed(mp.act_PQ.apply(x, y), rp)
            if not entry.is_zero:
                table[(i, rp + a)] = entry
    return Algebroid(frame, tuple(anchor), table, PRIMAL)


def decompose(
    L: Algebroid,
    p_indices: Sequence[int],
    q_indices: Sequence[int],
) -> MatchedPair:
    """Split an algebroid along a frame partition into a matched pair.

    Both halves must be subalgebroids (closure is checked); the actions are
    read off the mixed brackets via [X+0, 0+Y] = -Y|>X + X|>Y."""
    p_indices, q_indices = list(p_indices), list(q_indices)
    if sorted(p_indices + q_indices) != list(range(L.rank)):
        raise StructureError("partition must cover the frame exactly")
    P = restrict(L, p_indices, name=f"{L.frame.name}.P")
    Q = restrict(L, q_indices, name=f"{L.frame.name}.Q")
    p_pos = {orig: k for k, orig in enumerate(p_indices)}
    q_pos = {orig: k for k, orig in enumerate(q_indices)}
    t_pq: dict = {}
    t_qp: dict = {}
    for i in p_indices:
        for a in q_indices:
            mixed = L.structure(i, a)
            pq_comps: dict = {}
            qp_comps: dict = {}
            for (k,), c in mixed.comps.items():
                if k in q_pos:
                    pq_comps[(q_pos[k],)] = c
                else:
                    qp_comps[(p_pos[k],)] = -c
            if pq_comps:
                t_pq[(p_pos[i], q_pos[a])] = GradedElement(Q.frame, 1, Q.variance, pq_comps)
            if qp_comps:
                t_qp[(q_pos[a], p_pos[i])] = GradedElement(P.frame, 1, P.variance, qp_comps)
    act_pq = ActionTable(P, Q.frame, Q.variance, t_pq)
    act_qp = ActionTable(Q, P.frame, P.variance, t_qp)
    return MatchedPair(P, Q, act_pq, act_qp)


# -- Lie bialgebroids ---------------------------------------------------------

@dataclass
class Bialgebroid:
    """A pair of algebroid structures on a bundle and its dual.

    ``a`` and ``a_star`` share a frame with opposite variances; the dual
    differential then acts directly on multivector sections of ``a``.
    """

    a: Algebroid
    a_star: Algebroid

    def __post_init__(self):
        if self.a.frame != self.a_star.frame:
            raise FrameError("bialgebroid halves must share a frame")
        if self.a.variance == self.a_star.variance:
            raise FrameError("bialgebroid halves must have opposite variances")


def check_bialgebroid(b: Bialgebroid, name: str = "bialgebroid") -> CheckReport:
    """Both halves are algebroids and the dual differential is a degree-1
    derivation of the Schouten bracket of ``a``:
    d*[u,v] = [d*u, v] + (-1)^(k-1) [u, d*v]."""
    report = CheckReport(name)
    report.extend(check_algebroid(b.a, "a"), prefix="a:")
    report.extend(check_algebroid(b.a_star, "a*"), prefix="a*:")
    A, As = b.a, b.a_star
    base = A.frame.base
    # degree (1,1) pairs
    for i in range(A.rank):
        for j in range(A.rank):
            for m, (f1, f2) in enumerate(multiplier_slots(base, 2)):
                u = A.section_basis(i).scale(f1)
                v = A.section_basis(j).scale(f2)
                lhs = As.differential(A.bracket(u, v))
                rhs = A.schouten(As.differential(u), v) + A.schouten(u, As.differential(v))
                report.add(
                    "dual-derivation",
                    "d*[u,v] = [d*u,v] + [u,d*v] on sections",
                    (i + 1, j + 1, m + 1),
                    lhs - rhs,
                )
    # degree (1,0) pairs: v a coordinate function
    for i in range(A.rank):
        for k in range(len(base)):
            u = A.section_basis(i)
            f = PolyScalar.var(base, k)
            felt = GradedElement.scalar(A.frame, f, A.variance)
            lhs = As.differential(
                GradedElement.scalar(A.frame, A.anchor_apply(u, f), A.variance)
            )
            rhs = A.schouten(As.differential(u), felt) + A.schouten(u, As.differential(felt))
            report.add(
                "dual-derivation-scalar",
                "d*(rho(u)f) = [d*u, f] + [u, d*f]",
                (i + 1, k + 1),
                lhs - rhs,
            )
    return report.finalize()


def exact_dual_structure(a: Algebroid, lam: GradedElement) -> Algebroid:
    """The dual algebroid induced by a bivector with [[lam,lam],X] = 0:
    bracket [xi,eta] = L_{lam#xi} eta - iota_{lam#eta} d xi and anchor
    rho o lam#.  The precondition is the caller's to check."""
    if lam.frame != a.frame or lam.variance != a.variance or lam.degree != 2:
        raise FrameError("expected a bivector section of the algebroid")
    dual_var = opposite(a.variance)

    def sharp(xi):
        return contract(xi, lam)

    rank = a.rank
    table = {}
    for i in range(rank):
        for j in range(i + 1, rank):
            xi = GradedElement.basis(a.frame, i, dual_var)
            eta = GradedElement.basis(a.frame, j, dual_var)
            entry = a.lie_derivative(sharp(xi), eta) - contract(
                sharp(eta), a.differential(xi)
            )
            if not entry.is_zero:
                table[(i, j)] = entry
    anchor = []
    for i in range(rank):
        xi = GradedElement.basis(a.frame, i, dual_var)
        x = sharp(xi)
        row = []
        for k in range(len(a.frame.base)):
            row.append(a.anchor_apply(x, PolyScalar.var(a.frame.base, k)))
        anchor.append(tuple(row))
    return Algebroid(a.frame, tuple(anchor), table, dual_var)


def bivector_pairing(lam: GradedElement, xi: GradedElement, eta: GradedElement) -> PolyScalar:
    """lam(xi, eta) = <iota_xi lam, eta>."""
    from .exterior import pair

    return pair(contract(xi, lam), eta)


# -- Courant structures -------------------------------------------------------

@dataclass
class CourantStructure:
    """Bundle with pseudo-metric, anchor, and a full Dorfman bracket table.

    The table stores every ordered basis pair; the bracket on sections
    extends it by ``[x, fy] = (rho(x)f) y + f [x,y]`` together with the
    symmetric-part rule, giving
    ``[fx, y] = f[x,y] - (rho(y)f) x + <x,y> Df``.
    """

    frame: Frame
    metric: Sequence
    anchor: Sequence
    dorfman: Mapping
    _metric_inverse: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.metric = tuple(tuple(row) for row in self.metric)
        r = self.frame.rank
        if len(self.metric) != r or any(len(row) != r for row in self.metric):
            raise FrameError("metric must be rank x rank")
        for i in range(r):
            for j in range(r):
                if self.metric[i][j] != self.metric[j][i]:
                    raise StructureError(
                        f"metric not symmetric at ({i + 1},{j + 1})", (i + 1, j + 1)
                    )
        self.anchor = tuple(tuple(row) for row in self.anchor)
        self.dorfman = dict(self.dorfman or {})

    @property
    def rank(self) -> int:
        return self.frame.rank

    def section_basis(self, k: int) -> GradedElement:
        return GradedElement.basis(self.frame, k, PRIMAL)

    def zero_section(self) -> GradedElement:
        return GradedElement.zero(self.frame, 1, PRIMAL)

    def entry(self, k: int, l: int) -> GradedElement:
        return self.dorfman.get((k, l), self.zero_section())

    def anchor_apply(self, s: GradedElement, f: PolyScalar) -> PolyScalar:
        out = self.frame.zero_poly()
        for (k,), c in s.comps.items():
            for j, a in enumerate(self.anchor[k]):
                if not a.is_zero:
                    out = out + c * a * f.partial(j)
        return out

    def metric_pair(self, s: GradedElement, t: GradedElement) -> PolyScalar:
        out = self.frame.zero_poly()
        for (k,), c in s.comps.items():
            for (l,), d in t.comps.items():
                g = self.metric[k][l]
                if not g.is_zero:
                    out = out + c * d * g
        return out

    def metric_inverse(self) -> tuple:
        """Exact inverse of the metric; requires the determinant to be a
        nonzero rational constant so the inverse has polynomial entries."""
        if self._metric_inverse is not None:
            return self._metric_inverse
        det, adj = _det_adjugate(self.metric, self.frame.zero_poly())
        const = det.constant_value()
        if det.is_zero:
            raise StructureError("metric is degenerate (zero determinant)")
        if const is None:
            raise StructureError(
                "metric determinant is non-constant; no polynomial inverse"
            )
        inv = tuple(
            tuple(adj[i][j] * (1 / const) for j in range(self.rank))
            for i in range(self.rank)
        )
        self._metric_inverse = inv
        return inv

    def cdiff(self, f: PolyScalar) -> GradedElement:
        """D f, defined by <Df, x> = rho(x) f, computed against the metric."""
        inv = self.metric_inverse()
        cov = [
            self.anchor_apply(self.section_basis(k), f) for k in range(self.rank)
        ]
        comps = {}
        for l in range(self.rank):
            v = self.frame.zero_poly()
            for k in range(self.rank):
                if not cov[k].is_zero and not inv[l][k].is_zero:
                    v = v + inv[l][k] * cov[k]
            if not v.is_zero:
                comps[(l,)] = v
        return GradedElement(self.frame, 1, PRIMAL, comps)

    def dorfman_apply(self, s1: GradedElement, s2: GradedElement) -> GradedElement:
        out = self.zero_section()
        for (k,), c1 in s1.comps.items():
            for (l,), c2 in s2.comps.items():
                entry = self.entry(k, l)
                if not entry.is_zero:
                    out = out + entry.scale(c1 * c2)
        for (l,), c2 in s2.comps.items():
            df = self.anchor_apply(s1, c2)
            if not df.is_zero:
                out = out + self.section_basis(l).scale(df)
        for (k,), c1 in s1.comps.items():
            df = self.anchor_apply(s2, c1)
            if not df.is_zero:
                out = out - self.section_basis(k).scale(df)
        for (k,), c1 in s1.comps.items():
            pairing = self.frame.zero_poly()
            for (l,), c2 in s2.comps.items():
                g = self.metric[k][l]
                if not g.is_zero:
                    pairing = pairing + c2 * g
            if not pairing.is_zero:
                out = out + self.cdiff(c1).scale(pairing)
        return out


def _det_adjugate(matrix, zero: PolyScalar):
    """Determinant and adjugate of a polynomial matrix by memoized cofactor
    expansion; fine at desk-scale ranks."""
    n = len(matrix)
    if n == 0:
        return zero + PolyScalar.const(zero.variables, 1), ()
    memo: dict = {}

    def minor_det(rows: tuple, cols: tuple):
        if not rows:
            return PolyScalar.const(zero.variables, 1)
        key = (rows, cols)
        if key in memo:
            return memo[key]
        r = rows[0]
        total = zero
        for t, c in enumerate(cols):
            entry = matrix[r][c]
            if entry.is_zero:
                continue
            sub = minor_det(rows[1:], cols[:t] + cols[t + 1:])
            term = entry * sub
            total = total + (term if t % 2 == 0 else -term)
        memo[key] = total
        return total

    allidx = tuple(range(n))
    det = minor_det(allidx, allidx)
    adj = [[zero] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            rows = tuple(k for k in allidx if k != j)
            cols = tuple(k for k in allidx if k != i)
            cof = minor_det(rows, cols)
            adj[i][j] = cof if (i + j) % 2 == 0 else -cof
    return det, tuple(tuple(row) for row in adj)


def build_courant_double(b: Bialgebroid, name: Optional[str] = None) -> CourantStructure:
    """The Courant structure on A + A* with pairing
    <X1+xi1, X2+xi2> = xi1(X2) + xi2(X1) and the doubling Dorfman bracket
    [X1+xi1, X2+xi2] = ([X1,X2] + L_xi1 X2 - iota_xi2 d*X1)
                     + ([xi1,xi2] + L_X1 xi2 - iota_X2 d xi1)."""
    A, As = b.a, b.a_star
    m = A.rank
    frame = Frame(name or f"{A.frame.name}+dual", 2 * m, A.frame.base)
    zero = A.frame.zero_poly()
    one = A.frame.const(1)
    metric = [[zero] * (2 * m) for _ in range(2 * m)]
    for i in range(m):
        metric[i][m + i] = one
        metric[m + i][i] = one
    anchor = list(A.anchor) + list(As.anchor)

    def embed(section, offset):
        return GradedElement(
            frame, 1, PRIMAL, {(offset + k,): c for (k,), c in section.comps.items()}
        )

    sec_var, form_var = A.variance, As.variance
    table = {}
    for i in range(m):
        for j in range(m):
            entry = A.structure(i, j)
            if not entry.is_zero:
                table[(i, j)] = embed(entry, 0)
            entry = As.structure(i, j)
            if not entry.is_zero:
                table[(m + i, m + j)] = embed(entry, m)
            x = GradedElement.basis(A.frame, i, sec_var)
            xi = GradedElement.basis(A.frame, j, form_var)
            # [e_i, e*_j] = -iota_{e*_j} d* e_i  +  L^A_{e_i} e*_j
            a_part = -contract(xi, As.differential(x))
            s_part = A.lie_derivative(x, xi)
            entry = embed(a_part, 0) + embed(s_part, m)
            if not entry.is_zero:
                table[(i, m + j)] = entry
            # [e*_i, e_j] = L^{A*}_{e*_i} e_j  -  iota_{e_j} d e*_i
            xi = GradedElement.basis(A.frame, i, form_var)
            x = GradedElement.basis(A.frame, j, sec_var)
            a_part = As.lie_derivative(xi, x)
            s_part = -contract(x, A.differential(xi))
            entry = embed(a_part, 0) + embed(s_part, m)
            if not entry.is_zero:
                table[(m + i, j)] = entry
    return CourantStructure(frame, tuple(tuple(r) for r in metric), tuple(anchor), table)


COURANT_LAWS = {
    "dorfman-jacobi": "x o (y o z) = (x o y) o z + y o (x o z)",
    "anchor-bracket": "rho(x o y) = [rho(x), rho(y)]",
    "leibniz": "x o (f y) = (rho(x) f) y + f (x o y)",
    "symmetric-part": "x o y + y o x = D <x, y>",
    "coboundary-kernel": "(D f) o x = 0",
    "metric-invariance": "rho(x)<y,z> = <x o y, z> + <y, x o z>",
}


def check_courant(c: CourantStructure, name: str = "courant") -> CheckReport:
    """All six Dorfman-bracket axioms; functions range over the coordinates
    and coefficient multipliers exercise each slot.  A degenerate metric is
    a structural error, not a report entry."""
    c.metric_inverse()  # raises on a degenerate metric
    report = CheckReport(name)
    base = c.frame.base
    r = c.rank
    basis = [c.section_basis(k) for k in range(r)]
    # dorfman-jacobi on basis triples (coefficient extension follows from leibniz)
    for a in range(r):
        for b in range(r):
            for d in range(r):
                residual = (
                    c.dorfman_apply(basis[a], c.dorfman_apply(basis[b], basis[d]))
                    - c.dorfman_apply(c.dorfman_apply(basis[a], basis[b]), basis[d])
                    - c.dorfman_apply(basis[b], c.dorfman_apply(basis[a], basis[d]))
                )
                report.add(
                    "dorfman-jacobi",
                    COURANT_LAWS["dorfman-jacobi"],
                    (a + 1, b + 1, d + 1),
                    residual,
                )
    # anchor-bracket with multipliers
    for a in range(r):
        for b in range(r):
            for m, (f1, f2) in enumerate(multiplier_slots(base, 2)):
                x = basis[a].scale(f1)
                y = basis[b].scale(f2)
                xy = c.dorfman_apply(x, y)
                for k in range(len(base)):
                    g = PolyScalar.var(base, k)
                    residual = (
                        c.anchor_apply(xy, g)
                        - c.anchor_apply(x, c.anchor_apply(y, g))
                        + c.anchor_apply(y, c.anchor_apply(x, g))
                    )
                    report.add(
                        "anchor-bracket",
                        COURANT_LAWS["anchor-bracket"],
                        (a + 1, b + 1, m + 1, k + 1),
                        residual,
                    )
    # leibniz over coordinate functions
    for a in range(r):
        for b in range(r):
            for k in range(len(base)):
                f = PolyScalar.var(base, k)
                residual = (
                    c.dorfman_apply(basis[a], basis[b].scale(f))
                    - basis[b].scale(c.anchor_apply(basis[a], f))
                    - c.dorfman_apply(basis[a], basis[b]).scale(f)
                )
                report.add(
                    "leibniz", COURANT_LAWS["leibniz"], (a + 1, b + 1, k + 1), residual
                )
    # symmetric part equals D of the pairing
    for a in range(r):
        for b in range(r):
            for m, (f1, f2) in enumerate(multiplier_slots(base, 2)):
                x = basis[a].scale(f1)
                y = basis[b].scale(f2)
                residual = (
                    c.dorfman_apply(x, y)
                    + c.dorfman_apply(y, x)
                    - c.cdiff(c.metric_pair(x, y))
                )
                report.add(
                    "symmetric-part",
                    COURANT_LAWS["symmetric-part"],
                    (a + 1, b + 1, m + 1),
                    residual,
                )
    # D f in the kernel of the bracket's first slot
    for k in range(len(base)):
        f = PolyScalar.var(base, k)
        df = c.cdiff(f)
        for a in range(r):
            residual = c.dorfman_apply(df, basis[a])
            report.add(
                "coboundary-kernel",
                COURANT_LAWS["coboundary-kernel"],
                (k + 1, a + 1),
                residual,
            )
    # metric invariance
    for a in range(r):
        for b in range(r):
            for d in range(r):
                for m, (f1, f2, f3) in enumerate(multiplier_slots(base, 3)):
                    x = basis[a].scale(f1)
                    y = basis[b].scale(f2)
                    z = basis[d].scale(f3)
                    residual = (
                        c.anchor_apply(x, c.metric_pair(y, z))
                        - c.metric_pair(c.dorfman_apply(x, y), z)
                        - c.metric_pair(y, c.dorfman_apply(x, z))
                    )
                    report.add(
                        "metric-invariance",
                        COURANT_LAWS["metric-invariance"],
                        (a + 1, b + 1, d + 1, m + 1),
                        residual,
                    )
    return report.finalize()


def check_dirac(c: CourantStructure, span: Sequence[int], name: str = "dirac") -> CheckReport:
    """Maximal isotropy of the span and closure of the Dorfman table within it."""
    span = sorted(span)
    report = CheckReport(name)
    report.add_bool(
        "half-rank",
        "a Dirac structure has rank half the total",
        tuple(s + 1 for s in span),
        2 * len(span) == c.rank,
        f"span size {len(span)} vs rank {c.rank}",
    )
    for i in span:
        for j in span:
            if j < i:
                continue
            report.add(
                "isotropy",
                "<x, y> = 0 on the span",
                (i + 1, j + 1),
                c.metric[i][j],
            )
    outside = [k for k in range(c.rank) if k not in span]
    for i in span:
        for j in span:
            entry = c.entry(i, j)
            leak_comps = {
                (k,): v for (k,), v in entry.comps.items() if k in outside
            }
            leak = GradedElement(c.frame, 1, PRIMAL, leak_comps)
            report.add(
                "closure",
                "x o y stays in the span",
                (i + 1, j + 1),
                leak,
            )
    return report.finalize()


# -- vee operators and restricted brackets -----------------------------------

def vee_operators(mp: MatchedPair) -> Tuple[dict, dict]:
    """The two contraction operators a matched pair (g, theta*) induces:

    vee1[i, j] = e_i vee xi_j in sections of theta, via <x vee xi, alpha> =
    <xi, alpha |> x>; vee2[a, b] = alpha_a vee u_b in sections of g-dual,
    via <alpha vee u, x> = <u, x |> alpha>."""
    P, Q = mp.P, mp.Q
    theta_frame = Q.frame
    theta_variance = opposite(Q.variance)
    gdual_variance = opposite(P.variance)
    vee1 = {}
    for i in range(P.rank):
        for j in range(P.rank):
            comps = {}
            for a in range(Q.rank):
                coeff = mp.act_QP.entry(a, i).component((j,))
                if not coeff.is_zero:
                    comps[(a,)] = coeff
            vee1[(i, j)] = GradedElement(theta_frame, 1, theta_variance, comps)
    vee2 = {}
    for a in range(Q.rank):
        for b in range(Q.rank):
            comps = {}
            for i in range(P.rank):
                coeff = mp.act_PQ.entry(i, a).component((b,))
                if not coeff.is_zero:
                    comps[(i,)] = coeff
            vee2[(a, b)] = GradedElement(P.frame, 1, gdual_variance, comps)
    return vee1, vee2


def check_restricted_brackets(
    E: CourantStructure,
    cm,
    dual_cm,
    name: str = "restricted-brackets",
) -> CheckReport:
    """Closed forms for the Dorfman table of the double of a semidirect pair,
    block by block.

    With A = g + theta and A* = theta* + g* (dual blocks of the same frame),
    the table restricted to the four mixed blocks is:

      (1) on g + g*:          x o xi    = L_x xi - L_xi x + x vee xi
      (2) on theta + theta*:  alpha o u = L_alpha u - L_u alpha + alpha vee u
      (3) on g + theta*:      x o alpha = x |> alpha - alpha |> x
      (4) on g* + theta:      the bracket vanishes identically.
    """
    from .crossmod import dual_action

    report = CheckReport(name)
    g = cm.g
    theta = cm.theta
    g_star = dual_cm.theta
    theta_star = dual_cm.g
    rg, rt = g.rank, theta.rank
    m = rg + rt
    frame = E.frame

    def embed(section, offset):
        return GradedElement(
            frame, 1, PRIMAL, {(offset + k,): c for (k,), c in section.comps.items()}
        )

    act_g_on_ts = dual_action(cm.action)          # g acting on theta*
    act_ts_on_g = dual_action(dual_cm.action)     # theta* acting on g
    mp = MatchedPair(g, theta_star, act_g_on_ts, act_ts_on_g)
    vee1, vee2 = vee_operators(mp)

    # (1) g + g* block: positions i and m + j
    for i in range(rg):
        for j in range(rg):
            x = g.section_basis(i)
            xi = g.form_basis(j)
            expected = (
                embed(g.lie_derivative(x, xi), m)
                - embed(g_star.lie_derivative(xi, x), 0)
                + embed(vee1[(i, j)], rg)
            )
            report.add(
                "g-gdual",
                "x o xi = L_x xi - L_xi x + x vee xi",
                (i + 1, j + 1),
                E.entry(i, m + j) - expected,
            )
    # (2) theta + theta* block: positions rg + b and m + rg + a
    for a in range(rt):
        for b in range(rt):
            alpha = theta_star.section_basis(a)
            u = theta.section_basis(b)
            expected = (
                embed(theta_star.lie_derivative(alpha, u), rg)
                - embed(theta.lie_derivative(u, alpha), m + rg)
                + embed(vee2[(a, b)], m)
            )
            report.add(
                "theta-thetadual",
                "alpha o u = L_alpha u - L_u alpha + alpha vee u",
                (a + 1, b + 1),
                E.entry(m + rg + a, rg + b) - expected,
            )
    # (3) g + theta* block: positions i and m + rg + a
    for i in range(rg):
        for a in range(rt):
            expected = embed(act_g_on_ts.entry(i, a), m + rg) - embed(
                act_ts_on_g.entry(a, i), 0
            )
            report.add(
                "g-thetadual",
                "x o alpha = x |> alpha - alpha |> x",
                (i + 1, a + 1),
                E.entry(i, m + rg + a) - expected,
            )
    # (4) g* + theta block vanishes, in both orders
    for j in range(rg):
        for b in range(rt):
            report.add(
                "gdual-theta",
                "the Dorfman bracket vanishes on g* + theta",
                (j + 1, b + 1),
                E.entry(m + j, rg + b),
            )
            report.add(
                "gdual-theta",
                "the Dorfman bracket vanishes on g* + theta",
                (b + 1, j + 1),
                E.entry(rg + b, m + j),
            )
    return report.finalize()


def rational_nullspace(matrix):
    """Basis of the rational null space of a Fraction matrix (rows x cols),
    by exact Gauss-Jordan elimination."""
    from fractions import Fraction

    rows = [list(r) for r in matrix]
    ncols = len(rows[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        rows[r] = [v / rows[r][c] for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [v - f * w for v, w in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for c in free:
        vec = [Fraction(0)] * ncols
        vec[c] = Fraction(1)
        for i, p in enumerate(pivots):
            vec[p] = -rows[i][c]
        basis.append(tuple(vec))
    return basis


def check_coisotropic_kernel(
    action_p: Algebroid, action_q: Algebroid, name: str = "coisotropic-kernel"
) -> CheckReport:
    """Coisotropy of the kernel of a joint action: every pair of constant
    sections (x_i, xi_i) with rho_P(x_i) + rho_Q(xi_i) = 0 satisfies
    <x_1, xi_2> + <x_2, xi_1> = 0.

    The kernel is computed over the rationals by matching polynomial
    coefficients of the combined anchor; the frames are treated as a bundle
    and its dual, paired by position."""
    if action_p.rank != action_q.rank:
        raise FrameError("joint kernel needs equal ranks (a bundle and its dual)")
    base = action_p.frame.base
    monomials = sorted(
        {
            exp
            for alg in (action_p, action_q)
            for row in alg.anchor
            for p in row
            for exp in p.terms
        }
    )
    rows = []
    for j in range(len(base)):
        for exp in monomials:
            row = []
            for i in range(action_p.rank):
                row.append(action_p.anchor[i][j].terms.get(exp, 0))
            for i in range(action_q.rank):
                row.append(action_q.anchor[i][j].terms.get(exp, 0))
            rows.append(row)
    if not rows:
        rows = [[0] * (2 * action_p.rank)]
    kernel = rational_nullspace(rows)
    report = CheckReport(name)
    n = action_p.rank
    for s, w1 in enumerate(kernel):
        for t in range(s, len(kernel)):
            w2 = kernel[t]
            value = sum(w1[i] * w2[n + i] + w2[i] * w1[n + i] for i in range(n))
            report.add_bool(
                "coisotropy",
                "<x1, xi2> + <x2, xi1> = 0 on the joint kernel",
                (s + 1, t + 1),
                value == 0,
                str(value),
            )
    if not kernel:
        report.add_bool(
            "coisotropy",
            "<x1, xi2> + <x2, xi1> = 0 on the joint kernel",
            (),
            True,
        )
    return report.finalize()
