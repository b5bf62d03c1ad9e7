"""Crossed modules of Lie algebroids.

A crossed module is a quadruple: a Lie algebra bundle ``theta`` (zero
anchor), a Lie algebroid ``g``, a bundle map ``phi: theta -> g`` and an
action of ``g`` on ``theta`` by covariant differential operators, subject to

    CM1:  phi(u) |> v = [u, v]
    CM2:  phi(x |> u) = [x, phi(u)]

Actions are stored as tables over basis pairs and extended to sections by

    x |> (f u) = (rho(x) f) u + f (x |> u),      (f x) |> u = f (x |> u),

which reproduces the covariant-operator extension at this scale.  Bundle
maps are matrices ``phi[a][i]`` giving the ``e_i`` coefficient of
``phi(f_a)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Optional, Sequence

from .algebroid import Algebroid, zero_anchor
from .exterior import Frame, FrameError, GradedElement, opposite, wedge
from .report import CheckReport, StructureError
from .ring import PolyScalar


@dataclass
class ActionTable:
    """Representation table: (actor basis i, target basis a) -> target section."""

    actor: Algebroid
    target_frame: Frame
    target_variance: str
    table: Mapping = None

    def __post_init__(self):
        self.table = dict(self.table or {})
        for (i, a), entry in self.table.items():
            if not 0 <= i < self.actor.rank:
                raise FrameError(f"actor index {i} out of range")
            if not 0 <= a < self.target_frame.rank:
                raise FrameError(f"target index {a} out of range")
            if (
                entry.frame != self.target_frame
                or entry.variance != self.target_variance
                or entry.degree != 1
            ):
                raise FrameError("action entries must be degree-1 target sections")

    def entry(self, i: int, a: int) -> GradedElement:
        return self.table.get(
            (i, a), GradedElement.zero(self.target_frame, 1, self.target_variance)
        )

    def target_basis(self, a: int) -> GradedElement:
        return GradedElement.basis(self.target_frame, a, self.target_variance)

    def apply(self, x: GradedElement, u: GradedElement) -> GradedElement:
        """x |> u for arbitrary polynomial-coefficient sections."""
        self.actor._require_section(x)
        if (
            u.frame != self.target_frame
            or u.variance != self.target_variance
            or u.degree != 1
        ):
            raise FrameError("action target must be a degree-1 section")
        out = GradedElement.zero(self.target_frame, 1, self.target_variance)
        for (i,), xi in x.comps.items():
            for (a,), ua in u.comps.items():
                entry = self.entry(i, a)
                if not entry.is_zero:
                    out = out + entry.scale(xi * ua)
        for (a,), ua in u.comps.items():
            df = self.actor.anchor_apply(x, ua)
            if not df.is_zero:
                out = out + self.target_basis(a).scale(df)
        return out

    def apply_multivector(self, x: GradedElement, p: GradedElement) -> GradedElement:
        """Derivation extension of the action to the exterior algebra of the
        target: x |> (u ^ v) = (x |> u) ^ v + u ^ (x |> v)."""
        self.actor._require_section(x)
        if p.frame != self.target_frame or p.variance != self.target_variance:
            raise FrameError("expected a target multivector")
        out = GradedElement.zero(self.target_frame, p.degree, self.target_variance)
        for idx, coeff in p.comps.items():
            df = self.actor.anchor_apply(x, coeff)
            if not df.is_zero:
                out = out + GradedElement(
                    self.target_frame, p.degree, self.target_variance, {idx: df}
                )
            for t in range(len(idx)):
                left = GradedElement(
                    self.target_frame, t, self.target_variance,
                    {idx[:t]: self.target_frame.const(1)},
                )
                right = GradedElement(
                    self.target_frame, len(idx) - t - 1, self.target_variance,
                    {idx[t + 1:]: self.target_frame.const(1)},
                )
                acted = self.apply(x, self.target_basis(idx[t]).scale(coeff))
                out = out + wedge(wedge(left, acted), right)
        return out


def zero_action(actor: Algebroid, target_frame: Frame, target_variance: str) -> ActionTable:
    return ActionTable(actor, target_frame, target_variance, {})


@dataclass
class CrossedModule:
    """Quadruple (theta, phi, g, |>): see module docstring.

    ``phi`` is a rank(theta) x rank(g) matrix of polynomials; ``action`` is
    the g-action on theta.
    """

    theta: Algebroid
    g: Algebroid
    phi: Sequence
    action: ActionTable

    def __post_init__(self):
        self.phi = tuple(tuple(row) for row in self.phi)
        if len(self.phi) != self.theta.rank or any(
            len(row) != self.g.rank for row in self.phi
        ):
            raise FrameError("phi must be a rank(theta) x rank(g) matrix")
        if (
            self.action.actor is not self.g
            and self.action.actor != self.g
        ):
            raise FrameError("action actor must be g")
        if (
            self.action.target_frame != self.theta.frame
            or self.action.target_variance != self.theta.variance
        ):
            raise FrameError("action target must be theta")

    def phi_apply(self, u: GradedElement) -> GradedElement:
        """phi on sections; C-infinity linear."""
        self.theta._require_section(u)
        comps: dict = {}
        for (a,), ua in u.comps.items():
            for i, coeff in enumerate(self.phi[a]):
                if coeff.is_zero:
                    continue
                key = (i,)
                term = ua * coeff
                comps[key] = term if key not in comps else comps[key] + term
        return GradedElement(self.g.frame, 1, self.g.variance, comps)

    def phi_up_matrix(self) -> tuple:
        """The dual wiring -phi^T: maps sections of g-dual to theta-dual."""
        return tuple(
            tuple(-self.phi[a][i] for a in range(self.theta.rank))
            for i in range(self.g.rank)
        )


def dual_action(act: ActionTable) -> ActionTable:
    """Contragredient action on the dual of the target:
    <x |> F, G> = rho(x)<F, G> - <F, x |> G>.

    On basis elements the anchor term drops, giving
    (x_i |> beta_b)_a = -(x_i |> u_a)_b; with the same section-extension
    rules this is an involution.
    """
    rank = act.target_frame.rank
    variance = opposite(act.target_variance)
    table = {}
    for i in range(act.actor.rank):
        for b in range(rank):
            comps = {}
            for a in range(rank):
                c = act.entry(i, a).component((b,))
                if not c.is_zero:
                    comps[(a,)] = -c
            if comps:
                table[(i, b)] = GradedElement(act.target_frame, 1, variance, comps)
    return ActionTable(act.actor, act.target_frame, variance, table)


# -- checkers -------------------------------------------------------------

_MULT_LAW = "multiplier on the quantified section slots"


def coefficient_multipliers(base: tuple):
    """{1} plus each coordinate function: enough to exercise every Leibniz
    extension rule once per direction."""
    out = [PolyScalar.const(base, 1)]
    out.extend(PolyScalar.var(base, k) for k in range(len(base)))
    return out


def check_representation(act: ActionTable, name: str = "action") -> CheckReport:
    """Flatness [x,y] |> u = x |> (y |> u) - y |> (x |> u) on basis triples,
    plus anchor compatibility on coordinate-multiplied targets."""
    report = CheckReport(name)
    for i, j in combinations(range(act.actor.rank), 2):
        x = act.actor.section_basis(i)
        y = act.actor.section_basis(j)
        for a in range(act.target_frame.rank):
            u = act.target_basis(a)
            residual = (
                act.apply(act.actor.bracket(x, y), u)
                - act.apply(x, act.apply(y, u))
                + act.apply(y, act.apply(x, u))
            )
            report.add(
                "representation",
                "[x,y] |> u = x |> (y |> u) - y |> (x |> u)",
                (i + 1, j + 1, a + 1),
                residual,
            )
    base = act.actor.frame.base
    for i in range(act.actor.rank):
        x = act.actor.section_basis(i)
        for k in range(len(base)):
            f = PolyScalar.var(base, k)
            for a in range(act.target_frame.rank):
                u = act.target_basis(a)
                residual = (
                    act.apply(x, u.scale(f))
                    - u.scale(act.actor.anchor_apply(x, f))
                    - act.apply(x, u).scale(f)
                )
                report.add(
                    "anchor-compatibility",
                    "x |> (f u) = (rho(x) f) u + f (x |> u)",
                    (i + 1, k + 1, a + 1),
                    residual,
                )
    return report.finalize()


def check_crossed_module(cm: CrossedModule, name: str = "crossed-module") -> CheckReport:
    """CM1, CM2 on basis pairs, isotropy rho_g o phi = 0, vanishing theta
    anchor, and bracket preservation of phi (implied by CM1 + CM2 +
    isotropy; reported separately so the implication stays observable)."""
    report = CheckReport(name)
    base = cm.g.frame.base
    # theta is a Lie algebra bundle
    for a in range(cm.theta.rank):
        for j in range(len(base)):
            report.add(
                "theta-anchor",
                "anchor of theta vanishes",
                (a + 1, j + 1),
                cm.theta.anchor[a][j],
            )
    # isotropy: rho_g(phi(f_a)) = 0, entry-wise on the composed matrix
    for a in range(cm.theta.rank):
        img = cm.phi_apply(GradedElement.basis(cm.theta.frame, a, cm.theta.variance))
        for j in range(len(base)):
            acc = cm.g.frame.zero_poly()
            for (i,), c in img.comps.items():
                acc = acc + c * cm.g.anchor[i][j]
            report.add(
                "isotropy",
                "rho_g(phi(u)) = 0",
                (a + 1, j + 1),
                acc,
            )
    # CM1: phi(u) |> v = [u, v]
    for a in range(cm.theta.rank):
        for b in range(cm.theta.rank):
            u = cm.theta.section_basis(a)
            v = cm.theta.section_basis(b)
            residual = cm.action.apply(cm.phi_apply(u), v) - cm.theta.bracket(u, v)
            report.add(
                "cm1",
                "phi(u) |> v = [u, v]",
                (a + 1, b + 1),
                residual,
            )
    # CM2: phi(x |> u) = [x, phi(u)]
    for i in range(cm.g.rank):
        for a in range(cm.theta.rank):
            x = cm.g.section_basis(i)
            u = cm.theta.section_basis(a)
            residual = cm.phi_apply(cm.action.apply(x, u)) - cm.g.bracket(
                x, cm.phi_apply(u)
            )
            report.add(
                "cm2",
                "phi(x |> u) = [x, phi(u)]",
                (i + 1, a + 1),
                residual,
            )
    # phi preserves brackets (morphism property)
    for a in range(cm.theta.rank):
        for b in range(a + 1, cm.theta.rank):
            u = cm.theta.section_basis(a)
            v = cm.theta.section_basis(b)
            residual = cm.phi_apply(cm.theta.bracket(u, v)) - cm.g.bracket(
                cm.phi_apply(u), cm.phi_apply(v)
            )
            report.add(
                "phi-morphism",
                "phi([u, v]) = [phi(u), phi(v)]",
                (a + 1, b + 1),
                residual,
            )
    return report.finalize()


def induce_theta_bracket(
    theta_frame: Frame,
    g: Algebroid,
    phi: Sequence,
    action: ActionTable,
    theta_variance: Optional[str] = None,
) -> CrossedModule:
    """Build the unique crossed module whose theta bracket is
    [u, v] := phi(u) |> v.

    Preconditions (checked, violation raises with the failing basis pair):
    phi(x |> u) = [x, phi(u)] and phi(u) |> v = -phi(v) |> u.
    """
    variance = theta_variance or action.target_variance
    shell = Algebroid(theta_frame, anchor=None, table={}, variance=variance)
    probe = CrossedModule(shell, g, phi, action)
    for a in range(theta_frame.rank):
        for b in range(theta_frame.rank):
            u = shell.section_basis(a)
            v = shell.section_basis(b)
            lhs = action.apply(probe.phi_apply(u), v)
            rhs = action.apply(probe.phi_apply(v), u)
            if not (lhs + rhs).is_zero:
                raise StructureError(
                    "induced bracket would not be antisymmetric: "
                    f"phi(f_{a+1}) |> f_{b+1} != -phi(f_{b+1}) |> f_{a+1}",
                    (a + 1, b + 1),
                )
    for i in range(g.rank):
        for a in range(theta_frame.rank):
            x = g.section_basis(i)
            u = shell.section_basis(a)
            residual = probe.phi_apply(action.apply(x, u)) - g.bracket(
                x, probe.phi_apply(u)
            )
            if not residual.is_zero:
                raise StructureError(
                    f"phi(e_{i+1} |> f_{a+1}) != [e_{i+1}, phi(f_{a+1})]",
                    (i + 1, a + 1),
                )
    table = {}
    for a in range(theta_frame.rank):
        for b in range(a + 1, theta_frame.rank):
            entry = action.apply(
                probe.phi_apply(shell.section_basis(a)), shell.section_basis(b)
            )
            if not entry.is_zero:
                table[(a, b)] = entry
    theta = Algebroid(shell.frame, None, table, variance)
    return CrossedModule(theta, g, phi, ActionTable(g, theta.frame, variance, action.table))


def semidirect(cm: CrossedModule, name: Optional[str] = None) -> Algebroid:
    """The algebroid on g + theta: g and theta embed as subalgebroids and the
    mixed bracket is the action, [x, u] = x |> u.  The g block occupies the
    leading basis positions."""
    rg, rt = cm.g.rank, cm.theta.rank
    frame = Frame(name or f"{cm.g.frame.name}+{cm.theta.frame.name}", rg + rt, cm.g.frame.base)
    anchor = list(cm.g.anchor) + list(zero_anchor(cm.theta.frame))
    table = {}

    def embed_g(section):
        return GradedElement(
            frame, 1, "primal", {(i,): c for (i,), c in section.comps.items()}
        )

    def embed_t(section):
        return GradedElement(
            frame, 1, "primal", {(rg + a,): c for (a,), c in section.comps.items()}
        )

    for i in range(rg):
        for j in range(i + 1, rg):
            entry = cm.g.structure(i, j)
            if not entry.is_zero:
                table[(i, j)] = embed_g(entry)
    for a in range(rt):
        for b in range(a + 1, rt):
            entry = cm.theta.structure(a, b)
            if not entry.is_zero:
                table[(rg + a, rg + b)] = embed_t(entry)
    for i in range(rg):
        for a in range(rt):
            entry = cm.action.entry(i, a)
            if not entry.is_zero:
                table[(i, rg + a)] = embed_t(entry)
    return Algebroid(frame, tuple(anchor), table, "primal")


def dualize(
    cm: CrossedModule,
    theta_dual: Algebroid,
    g_dual_action: ActionTable,
) -> CrossedModule:
    """Assemble the candidate dual crossed module (g* --phi^ --> theta*) with
    phi^ = -phi^T; the bracket on g* is forced by CM1 to phi^(xi) |> eta.
    The caller is expected to run check_crossed_module on the result."""
    if theta_dual.frame != cm.theta.frame or theta_dual.variance != opposite(
        cm.theta.variance
    ):
        raise FrameError("theta_dual must live on the dual of theta's frame")
    if g_dual_action.actor != theta_dual or g_dual_action.target_frame != cm.g.frame:
        raise FrameError("g_dual_action must be theta* acting on g*")
    if g_dual_action.target_variance != opposite(cm.g.variance):
        raise FrameError("g_dual_action target must be the dual of g")
    phi_up = cm.phi_up_matrix()
    g_star_frame = cm.g.frame
    variance = opposite(cm.g.variance)
    shell = Algebroid(g_star_frame, None, {}, variance)
    helper = CrossedModule(shell, theta_dual, phi_up, g_dual_action)
    table = {}
    for i in range(g_star_frame.rank):
        for j in range(i + 1, g_star_frame.rank):
            entry = g_dual_action.apply(
                helper.phi_apply(shell.section_basis(i)), shell.section_basis(j)
            )
            if not entry.is_zero:
                table[(i, j)] = entry
    g_star = Algebroid(g_star_frame, None, table, variance)
    return CrossedModule(g_star, theta_dual, phi_up, g_dual_action)


def check_prop_duality_identities(
    cm: CrossedModule, dual: CrossedModule, name: str = "duality-identities"
) -> CheckReport:
    """The two section-level identities tying a crossed module to its dual
    wiring: phi^(L_x xi) = x |> phi^(xi) on g-duals, and
    phi(u) |> alpha = L_u alpha on theta-duals.

    ``dual`` supplies the phi^ matrix (a failed wiring phi^ != -phi^T makes
    the identities fail and is also reported directly)."""
    report = CheckReport(name)
    phi_up = dual.phi
    expected = cm.phi_up_matrix()
    wired = all(
        (phi_up[i][a] - expected[i][a]).is_zero
        for i in range(cm.g.rank)
        for a in range(cm.theta.rank)
    )
    report.add_bool(
        "wiring",
        "phi^ = -phi^T",
        (),
        wired,
        "phi^ differs from -phi^T",
    )
    theta_star_frame = cm.theta.frame
    act_on_theta_star = dual_action(cm.action)

    def phi_up_apply(xi):
        comps: dict = {}
        for (i,), c in xi.comps.items():
            for a, coeff in enumerate(phi_up[i]):
                if coeff.is_zero:
                    continue
                key = (a,)
                term = c * coeff
                comps[key] = term if key not in comps else comps[key] + term
        return GradedElement(theta_star_frame, 1, opposite(cm.theta.variance), comps)

    mults = coefficient_multipliers(cm.g.frame.base)
    for i in range(cm.g.rank):
        for j in range(cm.g.rank):
            for m, f in enumerate(mults):
                x = cm.g.section_basis(i)
                xi = cm.g.form_basis(j).scale(f)
                lhs = phi_up_apply(cm.g.lie_derivative(x, xi))
                rhs = act_on_theta_star.apply(x, phi_up_apply(xi))
                report.add(
                    "lift-equivariance",
                    "phi^(L_x xi) = x |> phi^(xi)",
                    (i + 1, j + 1, m + 1),
                    lhs - rhs,
                )
    for a in range(cm.theta.rank):
        for b in range(cm.theta.rank):
            for m, f in enumerate(mults):
                u = cm.theta.section_basis(a)
                alpha = cm.theta.form_basis(b).scale(f)
                lhs = act_on_theta_star.apply(cm.phi_apply(u), alpha)
                rhs = cm.theta.lie_derivative(u, alpha)
                report.add(
                    "inner-derivative",
                    "phi(u) |> alpha = L_u alpha",
                    (a + 1, b + 1, m + 1),
                    lhs - rhs,
                )
    return report.finalize()
