import pytest

from algebroids.algebroid import Algebroid
from algebroids.crossmod import ActionTable, CrossedModule, zero_action
from algebroids.exterior import DUAL, PRIMAL, Frame, GradedElement, wedge
from algebroids.ring import PolyScalar

PLANE = ("x1", "x2")
LINE = ("x1",)
POINT = ()


def poly(text, variables):
    from algebroids.ring import parse_poly

    return parse_poly(text, variables)


@pytest.fixture
def tangent_plane():
    """Tangent algebroid of the plane: identity anchor, zero brackets."""
    frame = Frame("tm", 2, PLANE)
    one = PolyScalar.const(PLANE, 1)
    zero = PolyScalar.zero(PLANE)
    return Algebroid(frame, ((one, zero), (zero, one)), {})


@pytest.fixture
def nonabelian_rank2():
    """[e1, e2] = e2 over a point."""
    frame = Frame("g2", 2, POINT)
    return Algebroid(frame, table={(0, 1): GradedElement.basis(frame, 1)})


def make_symplectic_cm():
    """Central-extension crossed module over the plane: g = TM + R with
    [e1,e2] = -e3, theta the included center, action table zero."""
    one = PolyScalar.const(PLANE, 1)
    zero = PolyScalar.zero(PLANE)
    fg = Frame("g", 3, PLANE)
    g = Algebroid(
        fg,
        ((one, zero), (zero, one), (zero, zero)),
        {(0, 1): -GradedElement.basis(fg, 2)},
    )
    ft = Frame("theta", 1, PLANE)
    theta = Algebroid(ft, None, {})
    phi = ((zero, zero, one),)
    return CrossedModule(theta, g, phi, zero_action(g, ft, PRIMAL))


def make_adjoint_cm():
    """Adjoint crossed module on the rank-2 nonabelian algebra, phi = id."""
    one = PolyScalar.const(POINT, 1)
    zero = PolyScalar.zero(POINT)
    fg = Frame("g", 2, POINT)
    ft = Frame("theta", 2, POINT)
    g = Algebroid(fg, table={(0, 1): GradedElement.basis(fg, 1)})
    theta = Algebroid(ft, table={(0, 1): GradedElement.basis(ft, 1)})
    phi = ((one, zero), (zero, one))
    action = ActionTable(
        g,
        ft,
        PRIMAL,
        {(0, 1): GradedElement.basis(ft, 1), (1, 0): -GradedElement.basis(ft, 1)},
    )
    return CrossedModule(theta, g, phi, action)


def make_rotation_rmatrix():
    """F4: the line rotating the abelian plane, phi = 0, r the area bivector."""
    from algebroids.bicrossed import CrossedModuleRMatrix

    zero = PolyScalar.zero(POINT)
    fg = Frame("g", 1, POINT)
    ft = Frame("theta", 2, POINT)
    g = Algebroid(fg, None, {})
    theta = Algebroid(ft, None, {})
    action = ActionTable(
        g,
        ft,
        PRIMAL,
        {(0, 0): GradedElement.basis(ft, 1), (0, 1): -GradedElement.basis(ft, 0)},
    )
    cm = CrossedModule(theta, g, ((zero,), (zero,)), action)
    r = wedge(GradedElement.basis(ft, 0), GradedElement.basis(ft, 1))
    return CrossedModuleRMatrix(cm, r)


def make_adjoint_rmatrix():
    """F5: the adjoint crossed module with r = f1 ^ f2."""
    from algebroids.bicrossed import CrossedModuleRMatrix

    cm = make_adjoint_cm()
    ft = cm.theta.frame
    r = wedge(GradedElement.basis(ft, 0), GradedElement.basis(ft, 1))
    return CrossedModuleRMatrix(cm, r)


def make_heisenberg_rmatrix():
    """Adjoint crossed module on the Heisenberg algebra with r = f1 ^ f2;
    the Schouten square [r,r] is a nonzero invariant 3-vector."""
    from algebroids.bicrossed import CrossedModuleRMatrix

    one = PolyScalar.const(POINT, 1)
    zero = PolyScalar.zero(POINT)
    fg = Frame("g", 3, POINT)
    ft = Frame("theta", 3, POINT)
    g = Algebroid(fg, table={(0, 1): GradedElement.basis(fg, 2)})
    theta = Algebroid(ft, table={(0, 1): GradedElement.basis(ft, 2)})
    phi = tuple(
        tuple(one if i == j else zero for j in range(3)) for i in range(3)
    )
    action = ActionTable(
        g,
        ft,
        PRIMAL,
        {(0, 1): GradedElement.basis(ft, 2), (1, 0): -GradedElement.basis(ft, 2)},
    )
    cm = CrossedModule(theta, g, phi, action)
    r = wedge(GradedElement.basis(ft, 0), GradedElement.basis(ft, 1))
    return CrossedModuleRMatrix(cm, r)


def trivial_dual_for(cm):
    """The trivial dual pair (abelian zero-anchor structures, zero action)
    wired by phi^ = -phi^T; valid whenever the dual constraints vanish."""
    from algebroids.bicrossed import BicrossedModule

    theta_star = Algebroid(cm.theta.frame, None, {}, DUAL)
    g_star = Algebroid(cm.g.frame, None, {}, DUAL)
    dual_cm = CrossedModule(
        g_star,
        theta_star,
        cm.phi_up_matrix(),
        zero_action(theta_star, cm.g.frame, DUAL),
    )
    return BicrossedModule(cm, dual_cm)


def all_valid_bicrossed():
    """The valid bicrossed corpus used by the theorem suites."""
    from algebroids.bicrossed import build_from_rmatrix

    out = {
        "symplectic": trivial_dual_for(make_symplectic_cm()),
        "adjoint-trivial": trivial_dual_for(make_adjoint_cm()),
        "rotation": build_from_rmatrix(make_rotation_rmatrix()),
        "adjoint-rmatrix": build_from_rmatrix(make_adjoint_rmatrix()),
        "heisenberg-rmatrix": build_from_rmatrix(make_heisenberg_rmatrix()),
    }
    return out


def mutated_bicrossed():
    """Mutations that keep both crossed modules valid but break the
    bialgebroid/matched-pair compatibility (used by the biconditional)."""
    from algebroids.bicrossed import BicrossedModule

    out = {}
    for label, bracket_target in (("dual-bracket-e1", 0), ("dual-bracket-e2", 1)):
        rm = make_rotation_rmatrix()
        cm = rm.cm
        ft, fg = cm.theta.frame, cm.g.frame
        theta_star = Algebroid(
            ft, None, {(0, 1): GradedElement.basis(ft, bracket_target, DUAL)}, DUAL
        )
        g_star = Algebroid(fg, None, {}, DUAL)
        dual_cm = CrossedModule(
            g_star, theta_star, cm.phi_up_matrix(), zero_action(theta_star, fg, DUAL)
        )
        out[label] = BicrossedModule(cm, dual_cm)
    return out
