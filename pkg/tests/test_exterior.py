from itertools import combinations, permutations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from algebroids.exterior import (
    DUAL,
    PRIMAL,
    Frame,
    FrameError,
    GradedElement,
    contract,
    evaluate,
    pair,
    wedge,
)
from algebroids.ring import PolyScalar, parse_poly

VARS = ("x1", "x2")
F = Frame("v", 3, VARS)


def basis(i, variance=PRIMAL):
    return GradedElement.basis(F, i, variance)


def poly(text):
    return parse_poly(text, VARS)


def test_wedge_antisymmetry_on_basis():
    e12 = wedge(basis(0), basis(1))
    assert e12.comps == {(0, 1): poly("1")}
    assert wedge(basis(1), basis(0)) == -e12


def test_wedge_nilpotent():
    assert wedge(basis(0), basis(0)).is_zero


def test_wedge_scalar_bilinearity():
    left = basis(0).scale(poly("x1"))
    right = basis(1).scale(poly("x2"))
    assert wedge(left, right).comps == {(0, 1): poly("x1*x2")}


def test_contract_dual_pair():
    w = wedge(basis(0, DUAL), basis(1, DUAL))
    assert contract(basis(0), w) == basis(1, DUAL)


def test_contract_orthogonal():
    assert contract(basis(1), basis(0, DUAL)).is_zero


def brute_force_contract(x, omega):
    """Oracle: multilinear evaluation of (iota_x w)(b_1,..,b_{n-1}) on every
    increasing basis tuple, via full antisymmetric expansion of w."""
    deg = omega.degree - 1
    comps = {}
    for tup in combinations(range(F.rank), deg):
        total = F.zero_poly()
        # w(x, e_tup) = sum over components and permutations matching (x, tup)
        for idx, coeff in omega.comps.items():
            for perm in permutations(idx):
                if perm[1:] != tup:
                    continue
                sign = _perm_sign(idx, perm)
                xi = x.comps.get((perm[0],))
                if xi is not None:
                    total = total + coeff * xi * sign
        if not total.is_zero:
            comps[tup] = total
    return GradedElement(F, deg, omega.variance, comps)


def _perm_sign(base, perm):
    order = [base.index(p) for p in perm]
    sign = 1
    for i in range(len(order)):
        for j in range(i + 1, len(order)):
            if order[i] > order[j]:
                sign = -sign
    return sign


def test_contract_matches_brute_force_oracle():
    omega = wedge(
        wedge(basis(0, DUAL), basis(1, DUAL)), basis(2, DUAL)
    ).scale(poly("x1"))
    x = basis(0)
    expected = wedge(basis(1, DUAL), basis(2, DUAL)).scale(poly("x1"))
    assert brute_force_contract(x, omega) == expected
    assert contract(x, omega) == expected


def test_contract_rejects_degree_zero():
    with pytest.raises(FrameError):
        contract(basis(0), GradedElement.scalar(F, poly("1"), DUAL))


def test_pair_dual_basis():
    assert pair(basis(0), basis(0, DUAL)) == poly("1")
    assert pair(basis(0), basis(1, DUAL)).is_zero


def test_pair_bilinear():
    a = basis(0).scale(poly("x1")) + basis(1)
    b = basis(0, DUAL).scale(poly("x2"))
    assert pair(a, b) == poly("x1*x2")
    assert pair(b, a) == poly("x1*x2")


def test_pair_variance_mismatch():
    with pytest.raises(FrameError):
        pair(basis(0), basis(1))


coeffs = st.integers(-3, 3)


def element(degree, variance, seed):
    comps = {}
    tuples = list(combinations(range(F.rank), degree))
    for n, tup in enumerate(tuples):
        c = seed[n % len(seed)]
        if c:
            comps[tup] = PolyScalar.const(VARS, c)
    return GradedElement(F, degree, variance, comps)


@settings(max_examples=40, deadline=None)
@given(
    st.integers(0, 2),
    st.integers(0, 2),
    st.integers(0, 2),
    st.lists(coeffs, min_size=3, max_size=3),
    st.lists(coeffs, min_size=3, max_size=3),
    st.lists(coeffs, min_size=3, max_size=3),
)
def test_wedge_graded_commutative_and_associative(p, q, r, s1, s2, s3):
    a, b, c = element(p, PRIMAL, s1), element(q, PRIMAL, s2), element(r, PRIMAL, s3)
    sign = -1 if (p * q) % 2 else 1
    assert wedge(a, b) == wedge(b, a).scale(PolyScalar.const(VARS, sign))
    assert wedge(wedge(a, b), c) == wedge(a, wedge(b, c))


@settings(max_examples=40, deadline=None)
@given(
    st.integers(1, 2),
    st.integers(0, 2),
    st.lists(coeffs, min_size=3, max_size=3),
    st.lists(coeffs, min_size=3, max_size=3),
    st.lists(coeffs, min_size=3, max_size=3),
)
def test_contract_is_graded_derivation(p, q, sx, s1, s2):
    x = element(1, PRIMAL, sx)
    w = element(p, DUAL, s1)
    tau = element(q, DUAL, s2)
    lhs = contract(x, wedge(w, tau)) if p + q else None
    if p + q == 0:
        return
    sign = -1 if p % 2 else 1
    rhs = wedge(contract(x, w), tau)
    if q:
        rhs = rhs + wedge(w, contract(x, tau)).scale(PolyScalar.const(VARS, sign))
    assert lhs == rhs


def test_evaluate_alternating():
    w = wedge(basis(0, DUAL), basis(1, DUAL))
    assert evaluate(w, [basis(0), basis(1)]) == poly("1")
    assert evaluate(w, [basis(1), basis(0)]) == poly("-1")
    assert evaluate(w, [basis(0), basis(0)]).is_zero
