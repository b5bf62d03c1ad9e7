"""Emit kernel objects back out as SDL documents.

Constructed structures get fresh bundle names derived from a caller-chosen
stem, so `construct --out` products re-parse and re-check on their own.
"""
from __future__ import annotations

import re

from .algebroid import Algebroid
from .bicrossed import BicrossedModule, ManinTriple
from .crossmod import ActionTable
from .doubles import CourantStructure
from .sdl import Block, SdlDocument, StructureDecl


def sanitize(name: str) -> str:
    out = re.sub(r"[^A-Za-z0-9_]", "_", name)
    if not out or not re.match(r"[A-Za-z_]", out[0]):
        out = "b_" + out
    return out


def _combo(section) -> dict:
    return {k: c for (k,), c in section.comps.items()}


def _put_block(doc: SdlDocument, kind: str, name: str, refs: tuple, entries: dict, meta=()):
    doc.blocks[(kind, name)] = Block(kind, name, tuple(refs), tuple(meta), dict(entries))


def add_bundle(doc: SdlDocument, name: str, rank: int) -> str:
    name = sanitize(name)
    if name in doc.bundles:
        if doc.bundles[name] != rank:
            raise ValueError(f"bundle {name!r} already present with another rank")
        return name
    doc.bundles[name] = rank
    return name


def add_algebroid(doc: SdlDocument, alg: Algebroid, bundle: str, struct: str) -> str:
    """Add bundle (unless starred and already present), anchor/bracket blocks
    and an algebroid structure; returns the structure name."""
    ref = bundle
    base_name = bundle.rstrip("*")
    add_bundle(doc, base_name, alg.rank)
    anchor_entries = {}
    for i, row in enumerate(alg.anchor):
        combo = {j: p for j, p in enumerate(row) if not p.is_zero}
        if combo:
            anchor_entries[(i,)] = combo
    if anchor_entries:
        _put_block(doc, "anchor", ref, (ref,), anchor_entries)
    bracket_entries = {}
    for (i, j), entry in alg.table.items():
        combo = _combo(entry)
        if combo:
            bracket_entries[(i, j)] = combo
    if bracket_entries:
        _put_block(doc, "bracket", ref, (ref,), bracket_entries)
    doc.structures[struct] = StructureDecl("algebroid", struct, {"bundle": (ref,)})
    return struct


def add_action(doc: SdlDocument, act: ActionTable, name: str, actor_ref: str, target_ref: str):
    entries = {}
    for key, entry in act.table.items():
        combo = _combo(entry)
        if combo:
            entries[key] = combo
    _put_block(doc, "action", name, (actor_ref, target_ref), entries)


def add_map(doc: SdlDocument, matrix, name: str, dom_ref: str, cod_ref: str):
    entries = {}
    for a, row in enumerate(matrix):
        combo = {i: p for i, p in enumerate(row) if not p.is_zero}
        if combo:
            entries[(a,)] = combo
    _put_block(doc, "map", name, (dom_ref, cod_ref), entries)


def add_form(doc: SdlDocument, matrix, name: str, ref: str):
    entries = {}
    for i, row in enumerate(matrix):
        for j, p in enumerate(row):
            if j >= i and not p.is_zero:
                entries[(i, j)] = p
    _put_block(doc, "form", name, (ref,), entries)


def emit_algebroid(alg: Algebroid, stem: str, base: tuple) -> SdlDocument:
    doc = SdlDocument(base=base)
    add_algebroid(doc, alg, sanitize(stem), sanitize(stem).upper())
    return doc


def emit_bicrossed(b: BicrossedModule, stem: str) -> SdlDocument:
    """Bundles g and theta, all four algebroids, both maps and actions, both
    crossed modules and the bicrossed structure."""
    doc = SdlDocument(base=b.cm.g.frame.base)
    stem = sanitize(stem)
    g_ref = add_bundle(doc, f"{stem}_g", b.cm.g.rank)
    t_ref = add_bundle(doc, f"{stem}_theta", b.cm.theta.rank)
    names = {}
    names["g"] = add_algebroid(doc, b.cm.g, g_ref, f"{stem}_G")
    names["theta"] = add_algebroid(doc, b.cm.theta, t_ref, f"{stem}_TH")
    names["theta_star"] = add_algebroid(doc, b.dual_cm.g, t_ref + "*", f"{stem}_TS")
    names["g_star"] = add_algebroid(doc, b.dual_cm.theta, g_ref + "*", f"{stem}_GS")
    add_map(doc, b.cm.phi, f"{stem}_phi", t_ref, g_ref)
    add_map(doc, b.dual_cm.phi, f"{stem}_phiup", g_ref + "*", t_ref + "*")
    add_action(doc, b.cm.action, f"{stem}_act", g_ref, t_ref)
    add_action(doc, b.dual_cm.action, f"{stem}_dualact", t_ref + "*", g_ref + "*")
    doc.structures[f"{stem}_CM"] = StructureDecl(
        "crossed_module",
        f"{stem}_CM",
        {
            "theta": (names["theta"],),
            "g": (names["g"],),
            "map": (f"{stem}_phi",),
            "action": (f"{stem}_act",),
        },
    )
    doc.structures[f"{stem}_DCM"] = StructureDecl(
        "crossed_module",
        f"{stem}_DCM",
        {
            "theta": (names["g_star"],),
            "g": (names["theta_star"],),
            "map": (f"{stem}_phiup",),
            "action": (f"{stem}_dualact",),
        },
    )
    doc.structures[f"{stem}_BC"] = StructureDecl(
        "bicrossed",
        f"{stem}_BC",
        {"cm": (f"{stem}_CM",), "dual": (f"{stem}_DCM",)},
    )
    return doc


def emit_courant(cs: CourantStructure, stem: str) -> SdlDocument:
    doc = SdlDocument(base=cs.frame.base)
    stem = sanitize(stem)
    ref = add_bundle(doc, f"{stem}_e", cs.rank)
    anchor_entries = {}
    for i, row in enumerate(cs.anchor):
        combo = {j: p for j, p in enumerate(row) if not p.is_zero}
        if combo:
            anchor_entries[(i,)] = combo
    if anchor_entries:
        _put_block(doc, "anchor", ref, (ref,), anchor_entries)
    add_form(doc, cs.metric, f"{stem}_metric", ref)
    entries = {}
    for key, entry in cs.dorfman.items():
        combo = _combo(entry)
        if combo:
            entries[key] = combo
    _put_block(doc, "dorfman", f"{stem}_dorfman", (ref,), entries)
    doc.structures[f"{stem}_E"] = StructureDecl(
        "courant",
        f"{stem}_E",
        {
            "bundle": (ref,),
            "metric": (f"{stem}_metric",),
            "dorfman": (f"{stem}_dorfman",),
        },
    )
    return doc


def emit_manin_triple(mt: ManinTriple, stem: str) -> SdlDocument:
    doc = SdlDocument(base=mt.K.K.frame.base)
    stem = sanitize(stem)
    ref = add_bundle(doc, f"{stem}_k", mt.K.K.rank)
    kalg = add_algebroid(doc, mt.K.K, ref, f"{stem}_K")
    add_form(doc, mt.K.C, f"{stem}_C", ref)
    doc.structures[f"{stem}_CQ"] = StructureDecl(
        "coquadratic", f"{stem}_CQ", {"k": (kalg,), "form": (f"{stem}_C",)}
    )
    doc.structures[f"{stem}_MT"] = StructureDecl(
        "manin_triple",
        f"{stem}_MT",
        {
            "k": (f"{stem}_CQ",),
            "p": tuple(str(i + 1) for i in mt.P),
            "q": tuple(str(i + 1) for i in mt.Q),
        },
    )
    return doc
