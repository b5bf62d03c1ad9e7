import random
from itertools import combinations

from algebroids.algebroid import Algebroid, check_algebroid
from algebroids.exterior import DUAL, PRIMAL, Frame, GradedElement, evaluate, wedge
from algebroids.ring import PolyScalar, parse_poly

from conftest import PLANE, POINT


def poly(text, variables=PLANE):
    return parse_poly(text, variables)


# -- an independent oracle for brackets on the tangent algebroid --------------
# a vector field is its list of coefficient polynomials on d/dx_j

def vf_apply(coeffs, f):
    out = PolyScalar.zero(f.variables)
    for j, c in enumerate(coeffs):
        out = out + c * f.partial(j)
    return out


def vf_commutator(a, b):
    coeffs = []
    for j in range(len(a)):
        coeffs.append(vf_apply(a, b[j]) - vf_apply(b, a[j]))
    return coeffs


def section_to_vf(alg, x):
    out = [PolyScalar.zero(alg.frame.base) for _ in alg.frame.base]
    for (i,), c in x.comps.items():
        for j, a in enumerate(alg.anchor[i]):
            out[j] = out[j] + c * a
    return out


def test_tangent_bracket_matches_vector_field_commutator(tangent_plane):
    tm = tangent_plane
    dx, dy = tm.section_basis(0), tm.section_basis(1)
    assert tm.bracket(dx, dy).is_zero
    x = poly("x1")
    lhs = tm.bracket(dx, dy.scale(x))
    # oracle: commutator of d/dx1 and x1 d/dx2 as polynomial derivations
    oracle = vf_commutator([poly("1"), poly("0")], [poly("0"), x])
    assert section_to_vf(tm, lhs) == oracle
    assert lhs == dy


def test_structure_table_lookup(nonabelian_rank2):
    g2 = nonabelian_rank2
    e1, e2 = g2.section_basis(0), g2.section_basis(1)
    expanded = g2.bracket(e1, e2)
    # brute-force structure-constant expansion: only c_12^2 = 1
    assert expanded.comps == {(1,): PolyScalar.const(POINT, 1)}
    assert g2.bracket(e2, e1) == -expanded


def test_anchor_apply(tangent_plane):
    tm = tangent_plane
    dx, dy = tm.section_basis(0), tm.section_basis(1)
    assert tm.anchor_apply(dx, poly("x1*x2")) == poly("x2")
    assert tm.anchor_apply(dy.scale(poly("x1")), poly("x1^2*x2")) == poly("x1^3")


def test_anchor_over_point_vanishes(nonabelian_rank2):
    g2 = nonabelian_rank2
    f = PolyScalar.const(POINT, 5)
    assert g2.anchor_apply(g2.section_basis(0), f).is_zero


def koszul_oracle(alg, omega):
    """Literal Koszul formula evaluated on all increasing basis tuples,
    using only contraction/evaluation primitives."""
    comps = {}
    for tup in combinations(range(alg.rank), omega.degree + 1):
        sections = [alg.section_basis(t) for t in tup]
        val = PolyScalar.zero(alg.frame.base)
        for a in range(len(tup)):
            inner = evaluate(omega, sections[:a] + sections[a + 1:])
            term = alg.anchor_apply(sections[a], inner)
            val = val + (term if a % 2 == 0 else -term)
        for a in range(len(tup)):
            for b in range(a + 1, len(tup)):
                rest = [alg.bracket(sections[a], sections[b])] + [
                    sections[t] for t in range(len(tup)) if t not in (a, b)
                ]
                term = evaluate(omega, rest)
                val = val + (term if (a + b) % 2 == 0 else -term)
        if not val.is_zero:
            comps[tup] = val
    return GradedElement(alg.frame, omega.degree + 1, omega.variance, comps)


def test_differential_of_function(tangent_plane):
    tm = tangent_plane
    f = GradedElement.scalar(tm.frame, poly("x1*x2"), DUAL)
    expected = GradedElement(
        tm.frame, 1, DUAL, {(0,): poly("x2"), (1,): poly("x1")}
    )
    assert koszul_oracle(tm, f) == expected
    assert tm.differential(f) == expected


def test_differential_vanishes_for_zero_anchor_abelian():
    frame = Frame("ab", 3, PLANE)
    ab = Algebroid(frame, None, {})
    for degree in range(3):
        for tup in combinations(range(3), degree):
            comps = {tup: poly("x1")} if degree else {(): poly("x1")}
            omega = GradedElement(frame, degree, DUAL, comps)
            assert ab.differential(omega).is_zero


def test_differential_on_nonabelian_dual(nonabelian_rank2):
    g2 = nonabelian_rank2
    e2_star = g2.form_basis(1)
    expected = -wedge(g2.form_basis(0), g2.form_basis(1))
    assert koszul_oracle(g2, e2_star) == expected
    assert g2.differential(e2_star) == expected


def test_lie_derivative_cartan_values(tangent_plane, nonabelian_rank2):
    tm = tangent_plane
    dx = tm.section_basis(0)
    x_dx = GradedElement(tm.frame, 1, DUAL, {(0,): poly("x1")})
    # oracle: iota_dx d(x1 dx1) + d(iota_dx x1 dx1) = 0 + d(x1) = dx1
    assert tm.lie_derivative(dx, x_dx) == tm.form_basis(0)
    assert tm.lie_derivative(tm.zero_section(), x_dx).is_zero
    g2 = nonabelian_rank2
    # oracle: iota_e1 d e2* = iota_e1 (-e1*^e2*) = -e2*
    assert g2.lie_derivative(g2.section_basis(0), g2.form_basis(1)) == -g2.form_basis(1)


def test_schouten_base_cases(tangent_plane, nonabelian_rank2):
    tm = tangent_plane
    dx = tm.section_basis(0)
    f = GradedElement.scalar(tm.frame, poly("x1*x2"), PRIMAL)
    assert tm.schouten(dx, f) == GradedElement.scalar(tm.frame, poly("x2"), PRIMAL)
    assert tm.schouten(f, dx) == GradedElement.scalar(tm.frame, poly("-x2"), PRIMAL)
    g2 = nonabelian_rank2
    e1, e2 = g2.section_basis(0), g2.section_basis(1)
    e12 = wedge(e1, e2)
    # graded-Leibniz expansion by hand: [e1^e2, e1] = -[e2,e1]^e1... = -e1^e2
    assert g2.schouten(e12, e1) == -e12


def test_schouten_square_of_even_abelian_bivector():
    frame = Frame("ab", 4, POINT)
    ab = Algebroid(frame, None, {})
    p = wedge(ab.section_basis(0), ab.section_basis(1)) + wedge(
        ab.section_basis(2), ab.section_basis(3)
    )
    assert ab.schouten(p, p).is_zero


def test_check_algebroid_passes(tangent_plane, nonabelian_rank2):
    assert check_algebroid(tangent_plane).passed
    assert check_algebroid(nonabelian_rank2).passed


def test_check_algebroid_names_jacobi_witness():
    frame = Frame("bad", 3, POINT)
    one = PolyScalar.const(POINT, 1)
    bad = Algebroid(
        frame,
        None,
        {
            (0, 1): GradedElement(frame, 1, PRIMAL, {(0,): one, (1,): one}),
            (0, 2): GradedElement.basis(frame, 2),
            (1, 2): GradedElement.basis(frame, 2),
        },
    )
    report = check_algebroid(bad)
    assert not report.passed
    fails = [e for e in report.failures if e.check_id == "jacobi"]
    assert fails and fails[0].witness == (1, 2, 3)
    # oracle: explicit Jacobiator of the corrupted table is -2 e3
    assert fails[0].residual == "(-2)*e[3]"


def test_check_algebroid_antisymmetry_on_raw_table():
    frame = Frame("raw", 2, POINT)
    one = PolyScalar.const(POINT, 1)
    bad = Algebroid(frame, None, {(0, 0): GradedElement.basis(frame, 1)})
    report = check_algebroid(bad)
    assert any(e.check_id == "antisymmetry" and not e.passed for e in report.entries)


def test_anchor_morphism_failure_detected():
    frame = Frame("bad", 2, ("x1",))
    one = PolyScalar.const(("x1",), 1)
    zero = PolyScalar.zero(("x1",))
    # [e1,e2] = e1 with anchor rho(e1) = d/dx, rho(e2) = 0: rho([e1,e2]) != 0
    bad = Algebroid(
        frame, ((one,), (zero,)), {(0, 1): GradedElement.basis(frame, 0)}
    )
    report = check_algebroid(bad)
    assert any(e.check_id == "anchor-morphism" and not e.passed for e in report.entries)


# -- exactness and Cartan laws across fixtures ---------------------------------

def fixture_algebroids(tangent, g2):
    one = PolyScalar.const(("x1",), 1)
    x = parse_poly("x1", ("x1",))
    frame = Frame("b", 2, ("x1",))
    mixed = Algebroid(
        frame, ((one,), (x,)), {(0, 1): GradedElement.basis(frame, 0)}
    )
    assert check_algebroid(mixed).passed
    return [tangent, g2, mixed]


def test_differential_squares_to_zero(tangent_plane, nonabelian_rank2):
    for alg in fixture_algebroids(tangent_plane, nonabelian_rank2):
        for degree in range(alg.rank):
            for tup in combinations(range(alg.rank), degree):
                comps = {tup: PolyScalar.const(alg.frame.base, 1)}
                omega = GradedElement(alg.frame, degree, DUAL, comps)
                assert alg.differential(alg.differential(omega)).is_zero


def test_lie_derivative_represents_brackets(tangent_plane, nonabelian_rank2):
    for alg in fixture_algebroids(tangent_plane, nonabelian_rank2):
        for i in range(alg.rank):
            for j in range(alg.rank):
                x, y = alg.section_basis(i), alg.section_basis(j)
                for degree in (0, 1, 2):
                    for tup in combinations(range(alg.rank), degree):
                        omega = GradedElement(
                            alg.frame, degree, DUAL,
                            {tup: PolyScalar.const(alg.frame.base, 1)},
                        )
                        lhs = alg.lie_derivative(alg.bracket(x, y), omega)
                        rhs = alg.lie_derivative(
                            x, alg.lie_derivative(y, omega)
                        ) - alg.lie_derivative(y, alg.lie_derivative(x, omega))
                        assert lhs == rhs


def test_bracket_leibniz_in_function_slot(tangent_plane, nonabelian_rank2):
    for alg in fixture_algebroids(tangent_plane, nonabelian_rank2):
        base = alg.frame.base
        fs = [PolyScalar.const(base, 1)]
        if base:
            fs.append(PolyScalar.var(base, 0))
            if len(base) > 1:
                fs.append(PolyScalar.var(base, 0) * PolyScalar.var(base, 1))
        for i in range(alg.rank):
            for j in range(alg.rank):
                x, y = alg.section_basis(i), alg.section_basis(j)
                for f in fs:
                    lhs = alg.bracket(x, y.scale(f))
                    rhs = y.scale(alg.anchor_apply(x, f)) + alg.bracket(x, y).scale(f)
                    assert lhs == rhs


def random_multivector(alg, degree, rng):
    comps = {}
    for tup in combinations(range(alg.rank), degree):
        c = rng.randint(-2, 2)
        if c:
            poly_c = PolyScalar.const(alg.frame.base, c)
            if alg.frame.base and rng.random() < 0.5:
                poly_c = poly_c * PolyScalar.var(alg.frame.base, 0)
            comps[tup] = poly_c
    return GradedElement(alg.frame, degree, alg.variance, comps)


def test_schouten_graded_antisymmetry_and_jacobi(tangent_plane, nonabelian_rank2):
    rng = random.Random(7)
    for alg in fixture_algebroids(tangent_plane, nonabelian_rank2):
        for _ in range(8):
            dp, dq, dr = rng.choice([(1, 1, 2), (1, 2, 2), (0, 1, 2), (2, 2, 2)])
            p = random_multivector(alg, dp, rng)
            q = random_multivector(alg, dq, rng)
            r = random_multivector(alg, dr, rng)
            sign = -1 if ((dp - 1) * (dq - 1)) % 2 else 1
            assert alg.schouten(p, q) == alg.schouten(q, p).scale(
                PolyScalar.const(alg.frame.base, -sign)
            )
            s1 = -1 if ((dp - 1) * (dr - 1)) % 2 else 1
            s2 = -1 if ((dq - 1) * (dp - 1)) % 2 else 1
            s3 = -1 if ((dr - 1) * (dq - 1)) % 2 else 1
            jac = (
                alg.schouten(p, alg.schouten(q, r)).scale(PolyScalar.const(alg.frame.base, s1))
                + alg.schouten(q, alg.schouten(r, p)).scale(PolyScalar.const(alg.frame.base, s2))
                + alg.schouten(r, alg.schouten(p, q)).scale(PolyScalar.const(alg.frame.base, s3))
            )
            assert jac.is_zero


def test_jacobi_extends_to_function_coefficients(tangent_plane, nonabelian_rank2):
    # cross-check that basis-level checks suffice: f-multiplied triples
    rng = random.Random(3)
    for alg in fixture_algebroids(tangent_plane, nonabelian_rank2):
        if not alg.frame.base:
            continue
        f = PolyScalar.var(alg.frame.base, 0)
        for _ in range(5):
            i, j, k = (rng.randrange(alg.rank) for _ in range(3))
            x = alg.section_basis(i).scale(f)
            y = alg.section_basis(j)
            z = alg.section_basis(k).scale(f + PolyScalar.const(alg.frame.base, 1))
            jac = (
                alg.bracket(x, alg.bracket(y, z))
                + alg.bracket(y, alg.bracket(z, x))
                + alg.bracket(z, alg.bracket(x, y))
            )
            assert jac.is_zero
