"""Command-line front end: check fixture files, construct derived
structures, verify the correspondence theorems, and format documents.

Exit codes: 0 all checks pass, 1 a mathematical check failed, 2 input
error (parse diagnostics, unresolved references, ill-formed structures).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bicrossed as bx
from . import crossmod as cx
from . import doubles as db
from .algebroid import check_algebroid
from .emit import (
    emit_algebroid,
    emit_bicrossed,
    emit_courant,
    emit_manin_triple,
)
from .report import CheckReport, StructureError
from .sdl import Builder, SdlDocument, SdlError, parse, print_document

THEOREM_TAGS = {
    "3.2": "equivalence",
    "bicrossed-matched-pair": "equivalence",
    "3.7": "roundtrip",
    "manin-roundtrip": "roundtrip",
}


class InputError(Exception):
    pass


def load(path: str) -> SdlDocument:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc}") from exc
    return parse(text)


# -- checking -------------------------------------------------------------------

def reports_for(kind: str, name: str, obj, builder: Builder):
    """All applicable checkers for one built structure."""
    if kind == "algebroid":
        return [check_algebroid(obj, name)]
    if kind == "crossed_module":
        return [
            cx.check_representation(obj.action, name),
            cx.check_crossed_module(obj, name),
        ]
    if kind == "matched_pair":
        return [db.check_matched_pair(obj, name)]
    if kind == "bialgebroid":
        return [db.check_bialgebroid(obj, name)]
    if kind == "bicrossed":
        return [
            bx.check_bicrossed(obj, name),
            cx.check_prop_duality_identities(obj.cm, obj.dual_cm, name),
        ]
    if kind == "coquadratic":
        return [
            check_algebroid(obj.K, name),
            bx.check_coquadratic(obj, name),
        ]
    if kind == "manin_triple":
        return [bx.check_manin_triple(obj, name)]
    if kind == "rmatrix":
        return [
            cx.check_crossed_module(obj.cm, name),
            bx.check_rmatrix_invariance(obj, name),
        ]
    if kind == "invariant_h":
        mp, h = obj
        return [
            db.check_matched_pair(mp, name),
            bx.check_tensor_invariance(mp, h, name),
        ]
    if kind == "courant":
        return [db.check_courant(obj, name)]
    if kind == "dirac":
        cs, span = obj
        return [db.check_dirac(cs, span, name)]
    raise InputError(f"no checker for structure kind {kind!r}")


def render_text(results, out):
    for name, kind, reports in results:
        verdict = all(r.passed for r in reports)
        print(f"== {name} ({kind}): {'pass' if verdict else 'FAIL'}", file=out)
        for rep in reports:
            by_id: dict = {}
            for e in rep.entries:
                by_id.setdefault(e.check_id, []).append(e)
            for cid in sorted(by_id):
                entries = by_id[cid]
                fails = [e for e in entries if not e.passed]
                if fails:
                    for e in fails:
                        wit = ",".join(str(w) for w in e.witness)
                        print(
                            f"  {cid}: FAIL at ({wit}): residual {e.residual}",
                            file=out,
                        )
                else:
                    print(f"  {cid}: pass ({len(entries)} checks)", file=out)


def render_structured(results, out):
    payload = {"structures": []}
    for name, kind, reports in results:
        checks = []
        for rep in reports:
            checks.extend(
                {
                    "check_id": e.check_id,
                    "law": e.law,
                    "status": e.status,
                    "witness": list(e.witness),
                    "residual": e.residual,
                }
                for e in rep.entries
            )
        payload["structures"].append(
            {
                "name": name,
                "kind": kind,
                "verdict": "pass" if all(r.passed for r in reports) else "fail",
                "checks": checks,
            }
        )
    json.dump(payload, out, indent=2)
    out.write("\n")


def cmd_check(args) -> int:
    doc = load(args.file)
    builder = Builder(doc)
    names = [args.structure] if args.structure else list(doc.structures)
    if args.structure and args.structure not in doc.structures:
        raise InputError(f"no structure named {args.structure!r} in {args.file}")
    results = []
    for name in names:
        decl = doc.structures[name]
        obj = builder.structure(name)
        results.append((name, decl.kind, reports_for(decl.kind, name, obj, builder)))
    emitter = render_structured if args.report == "structured" else render_text
    emitter(results, sys.stdout)
    ok = all(r.passed for _, _, reports in results for r in reports)
    return 0 if ok else 1


# -- theorem suites ---------------------------------------------------------------

def cmd_verify_theorem(args) -> int:
    mode = THEOREM_TAGS[args.theorem]
    doc = load(args.file)
    builder = Builder(doc)
    results = []
    ok = True
    if mode == "equivalence":
        targets = [
            n for n, d in doc.structures.items() if d.kind == "bicrossed"
        ]
        if not targets:
            raise InputError(f"{args.file} declares no bicrossed structure")
        for name in targets:
            rep = bx.check_theorem_equivalence(builder.structure(name), name)
            agreements = [e for e in rep.entries if e.check_id == "agreement"]
            ok = ok and all(e.passed for e in agreements)
            results.append((name, "bicrossed", [rep]))
    else:
        targets = [
            (n, d.kind)
            for n, d in doc.structures.items()
            if d.kind in ("bicrossed", "manin_triple")
        ]
        if not targets:
            raise InputError(
                f"{args.file} declares no bicrossed or manin_triple structure"
            )
        for name, kind in targets:
            rep = CheckReport(name)
            obj = builder.structure(name)
            if kind == "bicrossed":
                rep.extend(bx.check_bicrossed(obj), prefix="validity:")
                mt = bx.manin3_reverse(obj)
                rep.extend(bx.check_manin_triple(mt), prefix="triple:")
                back = bx.manin3(mt)
                rep.add_bool(
                    "roundtrip",
                    "manin3(manin3_reverse(b)) reproduces b's tables",
                    (),
                    bx.bicrossed_equal(back, obj),
                    "tables differ",
                )
            else:
                rep.extend(bx.check_manin_triple(obj), prefix="validity:")
                b = bx.manin3(obj)
                rep.extend(bx.check_bicrossed(b), prefix="bicrossed:")
                back = bx.manin3_reverse(b)
                rep.add_bool(
                    "roundtrip",
                    "manin3_reverse(manin3(mt)) reproduces mt's data",
                    (),
                    bx.manin_triples_equal(back, obj),
                    "tables differ",
                )
            rep.finalize()
            ok = ok and rep.passed
            results.append((name, kind, [rep]))
    emitter = render_structured if args.report == "structured" else render_text
    emitter(results, sys.stdout)
    return 0 if ok else 1


# -- construction ------------------------------------------------------------------

CONSTRUCT_INPUT_KINDS = {
    "semidirect": ("crossed_module",),
    "double": ("matched_pair",),
    "courant-double": ("bialgebroid", "bicrossed"),
    "manin3": ("manin_triple",),
    "manin3-reverse": ("bicrossed",),
    "from-rmatrix": ("rmatrix",),
    "from-invariant-h": ("invariant_h",),
}


def cmd_construct(args) -> int:
    doc = load(args.file)
    builder = Builder(doc)
    kinds = CONSTRUCT_INPUT_KINDS[args.op]
    candidates = [n for n, d in doc.structures.items() if d.kind in kinds]
    if args.structure:
        if args.structure not in doc.structures:
            raise InputError(f"no structure named {args.structure!r}")
        if doc.structures[args.structure].kind not in kinds:
            raise InputError(
                f"op {args.op} needs a {'/'.join(kinds)} structure, "
                f"{args.structure!r} is {doc.structures[args.structure].kind}"
            )
        source = args.structure
    elif len(candidates) == 1:
        source = candidates[0]
    elif not candidates:
        raise InputError(f"{args.file} has no {'/'.join(kinds)} structure")
    else:
        raise InputError(
            f"ambiguous input, use --structure: candidates {', '.join(candidates)}"
        )
    obj = builder.structure(source)
    stem = args.name or f"{args.op.replace('-', '_')}_{source}"
    base = doc.base
    if args.op == "semidirect":
        out_doc = emit_algebroid(cx.semidirect(obj), stem, base)
    elif args.op == "double":
        out_doc = emit_algebroid(db.build_double(obj), stem, base)
    elif args.op == "courant-double":
        bial = obj if doc.structures[source].kind == "bialgebroid" else bx.build_bialgebroid(obj)
        out_doc = emit_courant(db.build_courant_double(bial), stem)
    elif args.op == "manin3":
        out_doc = emit_bicrossed(bx.manin3(obj), stem)
    elif args.op == "manin3-reverse":
        out_doc = emit_manin_triple(bx.manin3_reverse(obj), stem)
    elif args.op == "from-rmatrix":
        out_doc = emit_bicrossed(bx.build_from_rmatrix(obj), stem)
    else:  # from-invariant-h
        mp, h = obj
        out_doc = emit_bicrossed(bx.build_from_invariant_h(mp, h), stem)
    text = print_document(out_doc)
    parse(text)  # the emitted document must round-trip before it is written
    target = Path(args.out)
    if target.exists() and not args.force:
        raise InputError(f"{args.out} exists; pass --force to overwrite")
    target.write_text(text)
    print(f"wrote {args.out} ({doc.structures[source].kind} {source} -> {args.op})")
    return 0


def cmd_fmt(args) -> int:
    doc = load(args.file)
    sys.stdout.write(print_document(doc))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="algebroids",
        description="exact verification kernel for Lie algebroid structures",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="run all applicable checkers on a file")
    p.add_argument("file")
    p.add_argument("--structure", help="check a single named structure")
    p.add_argument("--report", choices=("text", "structured"), default="text")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("construct", help="build a derived structure and emit it")
    p.add_argument("file")
    p.add_argument("--op", required=True, choices=sorted(CONSTRUCT_INPUT_KINDS))
    p.add_argument("--structure", help="input structure when the file has several")
    p.add_argument("--out", required=True)
    p.add_argument("--name", help="stem for generated bundle/structure names")
    p.add_argument("--force", action="store_true", help="overwrite --out")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("verify-theorem", help="run a correspondence-theorem suite")
    p.add_argument("file")
    p.add_argument("--theorem", required=True, choices=sorted(THEOREM_TAGS))
    p.add_argument("--report", choices=("text", "structured"), default="text")
    p.set_defaults(func=cmd_verify_theorem)

    p = sub.add_parser("fmt", help="print the canonical form of a file")
    p.add_argument("file")
    p.set_defaults(func=cmd_fmt)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SdlError as exc:
        for d in exc.diagnostics:
            print(d, file=sys.stderr)
        return 2
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except StructureError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
