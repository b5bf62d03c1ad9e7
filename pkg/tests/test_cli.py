import json
from pathlib import Path

import pytest

from algebroids.cli import main

CORPUS = Path(__file__).resolve().parents[1] / "src" / "algebroids" / "corpus"

PASSING = [
    "symplectic.sdl",
    "adjoint_g2.sdl",
    "rotation_r2.sdl",
    "rmatrix_adjoint.sdl",
    "abelian_poly.sdl",
    "action_matched_pair.sdl",
    "heisenberg_rmatrix.sdl",
    "invariant_h.sdl",
    "manin_adjoint.sdl",
]

FAILING = [
    "mutated_g2.sdl",
    "symplectic_broken.sdl",
    "rotation_dual_a.sdl",
    "rotation_dual_b.sdl",
    "adjoint_action_broken.sdl",
    "manin_nonisotropic.sdl",
]

MALFORMED = [
    "malformed_rank.sdl",
    "malformed_syntax.sdl",
    "malformed_reference.sdl",
]


def run(*argv):
    return main(list(argv))


@pytest.mark.parametrize("name", PASSING)
def test_exit_zero_on_passing_corpus(name, capsys):
    assert run("check", str(CORPUS / name)) == 0


@pytest.mark.parametrize("name", FAILING)
def test_exit_one_on_mutation_corpus(name, capsys):
    assert run("check", str(CORPUS / name)) == 1


@pytest.mark.parametrize("name", MALFORMED)
def test_exit_two_on_malformed_corpus(name, capsys):
    assert run("check", str(CORPUS / name)) == 2
    err = capsys.readouterr().err
    # every diagnostic is positioned line:column
    assert err.strip()
    for line in err.strip().splitlines():
        head = line.split(":")[:2]
        assert head[0].isdigit() and head[1].isdigit()


def test_check_symplectic_reports_axioms(capsys):
    assert run("check", str(CORPUS / "symplectic.sdl"), "--structure", "CM") == 0
    out = capsys.readouterr().out
    for key in ("cm1", "cm2", "isotropy"):
        assert f"{key}: pass" in out


def test_check_mutant_names_jacobi_witness(capsys):
    assert run("check", str(CORPUS / "mutated_g2.sdl")) == 1
    out = capsys.readouterr().out
    assert "jacobi: FAIL at (1,2,3)" in out
    assert "(-2)*e[3]" in out


def test_structured_report_schema(capsys):
    assert run(
        "check", str(CORPUS / "adjoint_g2.sdl"), "--report", "structured"
    ) == 0
    payload = json.loads(capsys.readouterr().out)
    assert set(payload) == {"structures"}
    for struct in payload["structures"]:
        assert set(struct) == {"name", "kind", "verdict", "checks"}
        for check in struct["checks"]:
            assert set(check) == {"check_id", "law", "status", "witness", "residual"}
            assert (check["status"] == "pass") == (check["residual"] == "0")


def test_verify_theorem_equivalence(capsys):
    assert run(
        "verify-theorem", str(CORPUS / "rmatrix_adjoint.sdl"), "--theorem", "3.2"
    ) == 0
    out = capsys.readouterr().out
    assert "agreement: pass" in out
    # the biconditional also holds on the mutated fixtures: both sides fail
    assert run(
        "verify-theorem", str(CORPUS / "rotation_dual_a.sdl"), "--theorem", "3.2"
    ) == 0
    out = capsys.readouterr().out
    assert "agreement: pass" in out
    assert "FAIL" in out  # the failing predicates stay visible


def test_verify_theorem_roundtrip(capsys):
    for name in ("rmatrix_adjoint.sdl", "manin_adjoint.sdl", "abelian_poly.sdl"):
        assert run(
            "verify-theorem", str(CORPUS / name), "--theorem", "3.7"
        ) == 0, name
        assert "roundtrip: pass" in capsys.readouterr().out


def test_verify_theorem_descriptive_aliases(capsys):
    assert run(
        "verify-theorem",
        str(CORPUS / "adjoint_g2.sdl"),
        "--theorem",
        "bicrossed-matched-pair",
    ) == 0
    capsys.readouterr()
    assert run(
        "verify-theorem",
        str(CORPUS / "adjoint_g2.sdl"),
        "--theorem",
        "manin-roundtrip",
    ) == 0


def test_fmt_is_canonical_and_idempotent(capsys, tmp_path):
    assert run("fmt", str(CORPUS / "rmatrix_adjoint.sdl")) == 0
    first = capsys.readouterr().out
    f = tmp_path / "canon.sdl"
    f.write_text(first)
    assert run("fmt", str(f)) == 0
    assert capsys.readouterr().out == first


@pytest.mark.parametrize(
    "source,op,structure",
    [
        ("symplectic.sdl", "semidirect", "CM"),
        ("action_matched_pair.sdl", "double", None),
        ("rmatrix_adjoint.sdl", "courant-double", "BC"),
        ("manin_adjoint.sdl", "manin3", None),
        ("rmatrix_adjoint.sdl", "manin3-reverse", "BC"),
        ("rmatrix_adjoint.sdl", "from-rmatrix", None),
        ("heisenberg_rmatrix.sdl", "from-rmatrix", None),
        ("invariant_h.sdl", "from-invariant-h", None),
    ],
)
def test_construct_output_rechecks(source, op, structure, tmp_path, capsys):
    out = tmp_path / "out.sdl"
    argv = ["construct", str(CORPUS / source), "--op", op, "--out", str(out), "--name", "c"]
    if structure:
        argv += ["--structure", structure]
    assert run(*argv) == 0
    assert out.exists()
    capsys.readouterr()
    assert run("check", str(out)) == 0


def test_construct_refuses_overwrite(tmp_path, capsys):
    out = tmp_path / "out.sdl"
    argv = [
        "construct", str(CORPUS / "invariant_h.sdl"),
        "--op", "from-invariant-h", "--out", str(out), "--name", "c",
    ]
    assert run(*argv) == 0
    capsys.readouterr()
    assert run(*argv) == 2
    assert "exists" in capsys.readouterr().err
    assert run(*argv, "--force") == 0


def test_construct_ambiguity_needs_structure_flag(capsys):
    # rmatrix_adjoint has two crossed_module structures
    assert run(
        "construct", str(CORPUS / "rmatrix_adjoint.sdl"),
        "--op", "semidirect", "--out", "/tmp/never-written.sdl",
    ) == 2
    assert "ambiguous" in capsys.readouterr().err


def test_construct_error_for_wrong_kind(capsys, tmp_path):
    assert run(
        "construct", str(CORPUS / "mutated_g2.sdl"),
        "--op", "semidirect", "--out", str(tmp_path / "x.sdl"),
    ) == 2


def test_roundtrip_through_construct_files(tmp_path, capsys):
    # manin3-reverse then manin3 through files reproduces a valid bicrossed
    mt_file = tmp_path / "mt.sdl"
    bc_file = tmp_path / "bc.sdl"
    assert run(
        "construct", str(CORPUS / "rmatrix_adjoint.sdl"), "--op", "manin3-reverse",
        "--structure", "BC", "--out", str(mt_file), "--name", "m",
    ) == 0
    assert run(
        "construct", str(mt_file), "--op", "manin3", "--out", str(bc_file), "--name", "b"
    ) == 0
    capsys.readouterr()
    assert run("check", str(bc_file)) == 0
    assert run("verify-theorem", str(bc_file), "--theorem", "3.2") == 0
