"""Acceptance gate: one test per criterion, each printing a pass/fail line.

All comparisons are exact (rational arithmetic end to end); the only
tolerances are the per-criterion wall-clock budgets, asserted directly.
Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines.
"""
import random
import time
from itertools import combinations
from pathlib import Path

import pytest

from algebroids.algebroid import Algebroid, check_algebroid
from algebroids.bicrossed import (
    bicrossed_equal,
    build_bialgebroid,
    check_bicrossed,
    check_exact_reproduction,
    check_invariance_equivalence,
    check_pairing_compatibility,
    check_rmatrix_invariance,
    manin3,
    manin3_reverse,
    manin_triples_equal,
    matched_pair_of,
)
from algebroids.cli import main as cli_main
from algebroids.crossmod import check_crossed_module, check_prop_duality_identities
from algebroids.doubles import (
    Bialgebroid,
    build_courant_double,
    check_courant,
    check_dirac,
    check_matched_pair,
    check_restricted_brackets,
    exact_dual_structure,
)
from algebroids.exterior import DUAL, PRIMAL, Frame, GradedElement, contract, wedge
from algebroids.ring import PolyScalar
from algebroids.sdl import Builder, SdlError, parse, print_document

from conftest import (
    POINT,
    all_valid_bicrossed,
    make_adjoint_cm,
    make_rotation_rmatrix,
    make_symplectic_cm,
    mutated_bicrossed,
    trivial_dual_for,
)

CORPUS = Path(__file__).resolve().parents[1] / "src" / "algebroids" / "corpus"

PASS_FILES = [
    "symplectic.sdl", "adjoint_g2.sdl", "rotation_r2.sdl", "rmatrix_adjoint.sdl",
    "abelian_poly.sdl", "action_matched_pair.sdl", "heisenberg_rmatrix.sdl",
    "invariant_h.sdl", "manin_adjoint.sdl",
]
FAIL_FILES = [
    "mutated_g2.sdl", "symplectic_broken.sdl", "rotation_dual_a.sdl",
    "rotation_dual_b.sdl", "adjoint_action_broken.sdl", "manin_nonisotropic.sdl",
]
MALFORMED_FILES = ["malformed_rank.sdl", "malformed_syntax.sdl", "malformed_reference.sdl"]


def announce(number, ok, label, elapsed=None):
    stamp = f" [{elapsed:.2f}s]" if elapsed is not None else ""
    print(f"ACCEPTANCE {number}: {'PASS' if ok else 'FAIL'} - {label}{stamp}")
    assert ok, label


def corpus_algebroids():
    """Every algebroid declared in the well-formed corpus files."""
    out = []
    for name in PASS_FILES:
        doc = parse((CORPUS / name).read_text())
        builder = Builder(doc)
        for sname, decl in doc.structures.items():
            if decl.kind == "algebroid":
                out.append((f"{name}:{sname}", builder.structure(sname)))
    return out


def test_criterion_1_kernel_laws():
    start = time.perf_counter()
    rng = random.Random(11)
    ok = True
    for label, alg in corpus_algebroids():
        if not check_algebroid(alg).passed:
            continue  # kernel laws are asserted for fixtures that are algebroids
        base = alg.frame.base
        form_var = DUAL if alg.variance == PRIMAL else PRIMAL
        # d o d = 0 on all basis forms of every degree
        for degree in range(alg.rank):
            for tup in combinations(range(alg.rank), degree):
                comps = {tup: PolyScalar.const(base, 1)}
                omega = GradedElement(alg.frame, degree, form_var, comps)
                ok = ok and alg.differential(alg.differential(omega)).is_zero
        # Cartan homotopy and the bracket representation L_[X,Y] = [L_X, L_Y]
        for i in range(alg.rank):
            x = alg.section_basis(i)
            for degree in (1, 2):
                for tup in combinations(range(alg.rank), degree):
                    omega = GradedElement(
                        alg.frame, degree, form_var,
                        {tup: PolyScalar.const(base, 1)},
                    )
                    lhs = alg.lie_derivative(x, omega)
                    rhs = contract(x, alg.differential(omega)) + alg.differential(
                        contract(x, omega)
                    )
                    ok = ok and lhs == rhs
        for i in range(alg.rank):
            for j in range(alg.rank):
                x, y = alg.section_basis(i), alg.section_basis(j)
                for tup in combinations(range(alg.rank), 1):
                    omega = GradedElement(
                        alg.frame, 1, form_var, {tup: PolyScalar.const(base, 1)}
                    )
                    lhs = alg.lie_derivative(alg.bracket(x, y), omega)
                    rhs = alg.lie_derivative(x, alg.lie_derivative(y, omega)) - \
                        alg.lie_derivative(y, alg.lie_derivative(x, omega))
                    ok = ok and lhs == rhs
        # bracket Leibniz over {1, x1, x1*x2}
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
                    ok = ok and lhs == rhs
        # graded Jacobi of the Schouten bracket on sampled triples
        def rand_mv(degree):
            comps = {}
            for tup in combinations(range(alg.rank), degree):
                c = rng.randint(-2, 2)
                if c:
                    comps[tup] = PolyScalar.const(base, c)
            return GradedElement(alg.frame, degree, alg.variance, comps)

        for _ in range(4):
            dp, dq, dr = rng.choice([(1, 1, 2), (1, 2, 2), (2, 2, 2), (0, 1, 2)])
            p, q, r = rand_mv(dp), rand_mv(dq), rand_mv(dr)
            s1 = -1 if ((dp - 1) * (dr - 1)) % 2 else 1
            s2 = -1 if ((dq - 1) * (dp - 1)) % 2 else 1
            s3 = -1 if ((dr - 1) * (dq - 1)) % 2 else 1
            jac = (
                alg.schouten(p, alg.schouten(q, r)).scale(PolyScalar.const(base, s1))
                + alg.schouten(q, alg.schouten(r, p)).scale(PolyScalar.const(base, s2))
                + alg.schouten(r, alg.schouten(p, q)).scale(PolyScalar.const(base, s3))
            )
            ok = ok and jac.is_zero
    elapsed = time.perf_counter() - start
    announce(1, ok and elapsed < 10.0, "kernel laws exact on all fixtures, under 10 s", elapsed)


def test_criterion_2_symplectic_fixture():
    start = time.perf_counter()
    cm = make_symplectic_cm()
    b = trivial_dual_for(cm)
    ok = (
        check_algebroid(cm.g).passed
        and check_crossed_module(cm).passed
        and check_prop_duality_identities(cm, b.dual_cm).passed
    )
    elapsed = time.perf_counter() - start
    announce(2, ok and elapsed < 1.0, "symplectic fixture checks exact, under 1 s", elapsed)


def test_criterion_3_biconditional():
    start = time.perf_counter()
    corpus = dict(all_valid_bicrossed())
    corpus.update(mutated_bicrossed())
    ok = len(corpus) >= 6
    for name, b in corpus.items():
        bic = check_bicrossed(b).passed
        mp = check_matched_pair(matched_pair_of(b)).passed
        ok = ok and (bic == mp)
    elapsed = time.perf_counter() - start
    announce(
        3, ok and elapsed < 30.0,
        f"bicrossed and matched-pair verdicts agree on {len(corpus)} fixtures, under 30 s",
        elapsed,
    )


def test_criterion_4_courant_doubles():
    start = time.perf_counter()
    bialgebroids = [build_bialgebroid(b) for b in all_valid_bicrossed().values()]
    frame = Frame("g2", 2, POINT)
    g2 = Algebroid(frame, table={(0, 1): GradedElement.basis(frame, 1)})
    lam = wedge(g2.section_basis(0), g2.section_basis(1))
    bialgebroids.append(Bialgebroid(g2, exact_dual_structure(g2, lam)))
    bialgebroids.append(Bialgebroid(g2, Algebroid(frame, None, {}, DUAL)))
    ok = True
    for bial in bialgebroids:
        E = build_courant_double(bial)
        m = E.rank // 2
        ok = ok and check_courant(E).passed
        ok = ok and check_dirac(E, range(m)).passed
        ok = ok and check_dirac(E, range(m, E.rank)).passed
    elapsed = time.perf_counter() - start
    announce(
        4, ok and elapsed < 30.0,
        f"all {len(bialgebroids)} fixture doubles satisfy the Courant axioms "
        "with Dirac halves, under 30 s",
        elapsed,
    )


def test_criterion_5_restricted_brackets():
    ok = True
    for name, b in all_valid_bicrossed().items():
        E = build_courant_double(build_bialgebroid(b))
        ok = ok and check_restricted_brackets(E, b.cm, b.dual_cm).passed
    announce(5, ok, "restricted Dorfman formulas match the tables exactly on all fixtures")


def test_criterion_6_manin_round_trip():
    ok = True
    for name, b in all_valid_bicrossed().items():
        mt = manin3_reverse(b)
        ok = ok and bicrossed_equal(manin3(mt), b)
        ok = ok and manin_triples_equal(manin3_reverse(manin3(mt)), mt)
    announce(6, ok, "both Manin-triple round trips are table-level identities")


def test_criterion_7_rmatrix_pipeline():
    from algebroids.bicrossed import build_from_rmatrix

    rm = make_rotation_rmatrix()
    ok = check_rmatrix_invariance(rm).passed
    b = build_from_rmatrix(rm)
    ok = ok and check_bicrossed(b).passed
    ok = ok and check_exact_reproduction(rm, b).passed
    announce(7, ok, "rotation-fixture r-matrix pipeline passes and the dual is exact")


def test_criterion_8_invariance_equivalences():
    one = PolyScalar.const(POINT, 1)
    zero = PolyScalar.zero(POINT)
    cm = make_adjoint_cm()
    candidates = [cm.phi, ((one, one), (zero, one)), ((zero, one), (one, zero))]
    ok = True
    for phi in candidates:
        rep = check_invariance_equivalence(cm.g, phi, cm.action)
        ok = ok and all(
            e.passed for e in rep.entries if e.check_id.startswith("agreement")
        )
    from algebroids.bicrossed import build_from_rmatrix
    from conftest import make_adjoint_rmatrix

    b = build_from_rmatrix(make_adjoint_rmatrix())
    mp = matched_pair_of(b)
    good = tuple(
        tuple(b.cm.phi[a][i] for a in range(b.cm.theta.rank))
        for i in range(b.cm.g.rank)
    )
    bad = ((one, one), (one, one))
    for B, expect in ((good, True), (bad, False)):
        rep = check_pairing_compatibility(mp, B)
        ok = ok and all(
            e.passed for e in rep.entries if e.check_id.startswith("agreement")
        )
        ok = ok and (rep.passed == expect)
    announce(8, ok, "pairing-condition verdicts agree with axiom verdicts, valid and mutated")


def test_criterion_9_sdl_contract(capsys):
    import sys

    sys.path.insert(0, str(Path(__file__).parent))
    from test_sdl import random_document

    ok = True
    for name in PASS_FILES + FAIL_FILES:
        doc = parse((CORPUS / name).read_text())
        printed = print_document(doc)
        ok = ok and parse(printed) == doc and print_document(parse(printed)) == printed
    rng = random.Random(99)
    for _ in range(100):
        doc = parse(random_document(rng))
        printed = print_document(doc)
        ok = ok and parse(printed) == doc
    for name, expected in (
        [(n, 0) for n in PASS_FILES]
        + [(n, 1) for n in FAIL_FILES]
        + [(n, 2) for n in MALFORMED_FILES]
    ):
        code = cli_main(["check", str(CORPUS / name)])
        ok = ok and code == expected
    for name in MALFORMED_FILES:
        try:
            parse((CORPUS / name).read_text())
            ok = False
        except SdlError as err:
            ok = ok and all(d.line > 0 and d.column > 0 for d in err.diagnostics)
    with capsys.disabled():
        announce(
            9, ok,
            "parse/print idempotence, exit-code contract and positioned diagnostics",
        )
