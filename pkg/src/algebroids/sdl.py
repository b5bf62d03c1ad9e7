"""Structure-definition language: a line-oriented text format for declaring
fixture data, with positioned diagnostics and a canonical printer.

A document is a sequence of ``;``-terminated statements; ``#`` starts a
comment.  Declarations must precede use.

    base x1, x2;
    bundle g 3;
    anchor g: e1 = d/dx1;
    bracket g: [1,2] = -e3;               # entries are sections: p*e<k> terms
    action act g theta;                   # actor, target (refs may be starred)
    action act: [1,1] = f(x)*e1 + e2;
    map phi theta g;                      # domain, codomain
    map phi: 1 = e3;
    form C K;                             # symmetric matrix over a bundle
    form C: [1,2] = x1;
    multivector r theta 2;
    multivector r: [1,2] = 1;
    tensor h P Q;                         # element of P (x) Q
    dorfman D E;                          # full (non-antisymmetric) table
    structure algebroid G: bundle g;
    structure crossed_module CM: theta TH, g G, map phi, action act;

A starred reference ``g*`` denotes the dual bundle: structures declared on
it live on g's frame with dual variance.  Polynomial literals follow the
shared grammar ``3/2*x1^2*x2 - x1 + 1``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .algebroid import Algebroid
from .bicrossed import (
    BicrossedModule,
    CoquadraticAlgebroid,
    CrossedModuleRMatrix,
    ManinTriple,
)
from .crossmod import ActionTable, CrossedModule
from .doubles import Bialgebroid, CourantStructure, MatchedPair
from .exterior import DUAL, PRIMAL, Frame, GradedElement
from .ring import PolyScalar

STRUCTURE_KINDS = (
    "algebroid",
    "crossed_module",
    "matched_pair",
    "bialgebroid",
    "bicrossed",
    "coquadratic",
    "manin_triple",
    "rmatrix",
    "invariant_h",
    "courant",
    "dirac",
)

BLOCK_KEYWORDS = (
    "anchor",
    "bracket",
    "action",
    "map",
    "form",
    "multivector",
    "tensor",
    "dorfman",
)


@dataclass(frozen=True)
class Diagnostic:
    category: str      # "syntax" | "reference" | "dimension" | "duplicate"
    message: str
    line: int
    column: int

    def __str__(self):
        return f"{self.line}:{self.column}: {self.category}: {self.message}"


class SdlError(Exception):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


# -- tokenizer -----------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r]+)"
    r"|(?P<comment>#[^\n]*)"
    r"|(?P<nl>\n)"
    r"|(?P<ddx>d/dx[0-9]+)"
    r"|(?P<number>[0-9]+(?:/[0-9]+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<punct>[\[\],:;=^*+\-])"
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str):
    tokens = []
    line, col = 1, 1
    pos = 0
    diagnostics = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            diagnostics.append(
                Diagnostic("syntax", f"unexpected character {text[pos]!r}", line, col)
            )
            pos += 1
            col += 1
            continue
        kind = m.lastgroup
        value = m.group()
        if kind == "nl":
            line += 1
            col = 1
        elif kind in ("ws", "comment"):
            col += len(value)
        else:
            tokens.append(Token(kind, value, line, col))
            col += len(value)
        pos = m.end()
    if diagnostics:
        raise SdlError(diagnostics)
    return tokens


# -- document model -------------------------------------------------------------

@dataclass
class Block:
    kind: str
    name: str
    refs: tuple            # referenced bundles (kind-specific arity)
    meta: tuple = ()       # e.g. multivector degree
    entries: dict = field(default_factory=dict)
    positions: dict = field(default_factory=dict)

    def __eq__(self, other):
        if not isinstance(other, Block):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.name == other.name
            and self.refs == other.refs
            and self.meta == other.meta
            and self.entries == other.entries
        )


@dataclass
class StructureDecl:
    kind: str
    name: str
    fields: dict
    position: tuple = (0, 0)

    def __eq__(self, other):
        if not isinstance(other, StructureDecl):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.name == other.name
            and self.fields == other.fields
        )


@dataclass
class SdlDocument:
    base: tuple = ()
    bundles: dict = field(default_factory=dict)     # name -> rank
    blocks: dict = field(default_factory=dict)      # (kind, name) -> Block
    structures: dict = field(default_factory=dict)  # name -> StructureDecl

    def __eq__(self, other):
        if not isinstance(other, SdlDocument):
            return NotImplemented
        return (
            self.base == other.base
            and self.bundles == other.bundles
            and self.blocks == other.blocks
            and self.structures == other.structures
        )

    def bundle_rank(self, ref: str) -> int:
        return self.bundles[ref.rstrip("*")]

    def frame(self, ref: str) -> Frame:
        name = ref.rstrip("*")
        return Frame(name, self.bundles[name], self.base)

    def variance(self, ref: str) -> str:
        return DUAL if ref.endswith("*") else PRIMAL


# -- parser ---------------------------------------------------------------------

class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0
        self.doc = SdlDocument()
        self.diagnostics = []
        self.saw_base = False
        self.pending_structures = []

    # token helpers

    def peek(self) -> Optional[Token]:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else Token("punct", "", 1, 1)
            raise self._fail("unexpected end of input", last)
        self.i += 1
        return tok

    def _fail(self, message, tok, category="syntax"):
        self.diagnostics.append(Diagnostic(category, message, tok.line, tok.column))
        return SdlError(self.diagnostics)

    def expect(self, text: str) -> Token:
        tok = self.next()
        if tok.text != text:
            raise self._fail(f"expected {text!r}, found {tok.text!r}", tok)
        return tok

    def expect_ident(self) -> Token:
        tok = self.next()
        if tok.kind != "ident":
            raise self._fail(f"expected an identifier, found {tok.text!r}", tok)
        return tok

    def expect_nat(self) -> int:
        tok = self.next()
        if tok.kind != "number" or "/" in tok.text:
            raise self._fail(f"expected a natural number, found {tok.text!r}", tok)
        return int(tok.text)

    def parse_ref(self) -> str:
        tok = self.expect_ident()
        ref = tok.text
        nxt = self.peek()
        if (
            nxt is not None
            and nxt.text == "*"
            and nxt.line == tok.line
            and nxt.column == tok.column + len(tok.text)
        ):
            self.next()
            ref += "*"
        if ref.rstrip("*") not in self.doc.bundles:
            raise self._fail(f"unknown bundle {ref.rstrip('*')!r}", tok, "reference")
        return ref

    # entry values

    def parse_sum(self, basis_prefixes, basis_rank, basis_required, close=";"):
        """Sum of terms; each term multiplies a rational, variable powers and
        at most one basis symbol.  Returns {basis index or (): PolyScalar}."""
        out: dict = {}
        zero_tok = self.peek()
        if zero_tok is not None and zero_tok.text == "0":
            nxt = self.tokens[self.i + 1] if self.i + 1 < len(self.tokens) else None
            if nxt is not None and nxt.text == close:
                self.next()
                return out
        sign = 1
        tok = self.peek()
        if tok is not None and tok.text in "+-":
            sign = -1 if tok.text == "-" else 1
            self.next()
        while True:
            coeff, exps, basis = self._parse_term(basis_prefixes, basis_rank)
            if basis_required and basis is None:
                raise self._fail("term needs a basis symbol", self.tokens[self.i - 1])
            if not basis_required and basis is not None:
                raise self._fail(
                    "polynomial entry cannot contain basis symbols",
                    self.tokens[self.i - 1],
                )
            key = basis if basis is not None else ()
            poly = PolyScalar(self.doc.base, {tuple(exps): coeff * sign})
            out[key] = poly if key not in out else out[key] + poly
            tok = self.peek()
            if tok is None:
                raise self._fail("unexpected end of input", self.tokens[-1])
            if tok.text == close:
                return {k: v for k, v in out.items() if not v.is_zero}
            if tok.text not in "+-":
                raise self._fail(f"expected '+', '-' or {close!r}", tok)
            sign = -1 if tok.text == "-" else 1
            self.next()

    def _parse_term(self, basis_prefixes, basis_rank):
        coeff = Fraction(1)
        exps = [0] * len(self.doc.base)
        basis = None
        while True:
            tok = self.next()
            if tok.kind == "number":
                coeff *= Fraction(tok.text)
            elif tok.kind == "ddx" and "d/dx" in basis_prefixes:
                idx = int(tok.text[4:]) - 1
                if not 0 <= idx < len(self.doc.base):
                    raise self._fail(
                        f"coordinate index out of range in {tok.text!r}",
                        tok,
                        "dimension",
                    )
                if basis is not None:
                    raise self._fail("term has two basis symbols", tok)
                basis = idx
            elif tok.kind == "ident":
                m = re.fullmatch(r"e([0-9]+)", tok.text)
                if m and "e" in basis_prefixes:
                    idx = int(m.group(1)) - 1
                    if not 0 <= idx < basis_rank:
                        raise self._fail(
                            f"basis index out of range in {tok.text!r}",
                            tok,
                            "dimension",
                        )
                    if basis is not None:
                        raise self._fail("term has two basis symbols", tok)
                    basis = idx
                elif tok.text in self.doc.base:
                    power = 1
                    if self.peek() is not None and self.peek().text == "^":
                        self.next()
                        power = self.expect_nat()
                    exps[self.doc.base.index(tok.text)] += power
                else:
                    raise self._fail(
                        f"unknown symbol {tok.text!r}", tok, "reference"
                    )
            else:
                raise self._fail(f"unexpected token {tok.text!r}", tok)
            nxt = self.peek()
            if nxt is not None and nxt.text == "*":
                self.next()
                continue
            return coeff, exps, basis

    def parse_index_list(self, count, rank):
        self.expect("[")
        out = []
        for k in range(count):
            if k:
                self.expect(",")
            tok = self.peek()
            n = self.expect_nat()
            if not 1 <= n <= rank:
                raise self._fail(
                    f"index {n} out of range for rank {rank}", tok, "dimension"
                )
            out.append(n - 1)
        self.expect("]")
        return tuple(out)

    # statements

    def parse(self) -> SdlDocument:
        while self.peek() is not None:
            self.statement()
        # structures may reference later declarations; validate once all are in
        for decl, tok in self.pending_structures:
            try:
                self._validate_structure(decl, tok)
            except SdlError:
                pass  # diagnostic already recorded; keep validating the rest
        if self.diagnostics:
            raise SdlError(self.diagnostics)
        return self.doc

    def statement(self):
        tok = self.expect_ident()
        word = tok.text
        if word == "base":
            self.stmt_base(tok)
        elif word == "bundle":
            self.stmt_bundle()
        elif word in BLOCK_KEYWORDS:
            self.stmt_block(word, tok)
        elif word == "structure":
            self.stmt_structure(tok)
        else:
            raise self._fail(f"unknown keyword {word!r}", tok)

    def stmt_base(self, tok):
        if self.saw_base or self.doc.bundles:
            raise self._fail("base must be declared once, before bundles", tok)
        names = []
        while self.peek() is not None and self.peek().text != ";":
            if self.peek().text == ",":
                self.next()
                continue
            name = self.expect_ident().text
            if re.fullmatch(r"e[0-9]+", name) or name == "d":
                raise self._fail(
                    f"variable name {name!r} collides with basis syntax", tok
                )
            if name in names:
                raise self._fail(f"duplicate variable {name!r}", tok, "duplicate")
            names.append(name)
        self.expect(";")
        self.doc.base = tuple(names)
        self.saw_base = True

    def stmt_bundle(self):
        tok = self.expect_ident()
        if tok.text in self.doc.bundles:
            raise self._fail(f"duplicate bundle {tok.text!r}", tok, "duplicate")
        rank = self.expect_nat()
        self.expect(";")
        self.doc.bundles[tok.text] = rank

    def _block(self, kind, name, refs, meta=()):
        key = (kind, name)
        if key not in self.doc.blocks:
            self.doc.blocks[key] = Block(kind, name, tuple(refs), tuple(meta))
        return self.doc.blocks[key]

    def stmt_block(self, kind, kw_tok):
        if kind in ("anchor", "bracket"):
            ref = self.parse_ref()
            block = self._block(kind, ref, (ref,))
            self.expect(":")
            self.block_entry(kind, block, kw_tok)
            return
        name_tok = self.expect_ident()
        name = name_tok.text
        nxt = self.peek()
        if nxt is not None and nxt.text == ":":
            key = (kind, name)
            if key not in self.doc.blocks:
                raise self._fail(
                    f"{kind} block {name!r} used before declaration",
                    name_tok,
                    "reference",
                )
            self.next()
            self.block_entry(kind, self.doc.blocks[key], kw_tok)
            return
        # declaration form
        if (kind, name) in self.doc.blocks:
            raise self._fail(f"duplicate {kind} block {name!r}", name_tok, "duplicate")
        if kind in ("action", "map", "tensor"):
            r1 = self.parse_ref()
            r2 = self.parse_ref()
            self.expect(";")
            self._block(kind, name, (r1, r2))
        elif kind in ("form", "dorfman"):
            r1 = self.parse_ref()
            self.expect(";")
            self._block(kind, name, (r1,))
        elif kind == "multivector":
            r1 = self.parse_ref()
            degree = self.expect_nat()
            self.expect(";")
            self._block(kind, name, (r1,), (degree,))
        else:
            raise self._fail(f"{kind} blocks have no declaration form", name_tok)

    def block_entry(self, kind, block, kw_tok):
        doc = self.doc
        if kind == "anchor":
            tok = self.expect_ident()
            m = re.fullmatch(r"e([0-9]+)", tok.text)
            if not m:
                raise self._fail(f"expected a basis symbol, found {tok.text!r}", tok)
            idx = int(m.group(1)) - 1
            rank = doc.bundle_rank(block.refs[0])
            if not 0 <= idx < rank:
                raise self._fail(
                    f"basis index out of range in {tok.text!r}", tok, "dimension"
                )
            self.expect("=")
            value = self.parse_sum({"d/dx"}, 0, True)
            key = (idx,)
        elif kind == "bracket":
            rank = doc.bundle_rank(block.refs[0])
            key = self.parse_index_list(2, rank)
            self.expect("=")
            value = self.parse_sum({"e"}, rank, True)
        elif kind == "action":
            actor_rank = doc.bundle_rank(block.refs[0])
            target_rank = doc.bundle_rank(block.refs[1])
            self.expect("[")
            tok = self.peek()
            i = self.expect_nat()
            if not 1 <= i <= actor_rank:
                raise self._fail(
                    f"actor index {i} out of range", tok, "dimension"
                )
            self.expect(",")
            tok = self.peek()
            a = self.expect_nat()
            if not 1 <= a <= target_rank:
                raise self._fail(
                    f"target index {a} out of range", tok, "dimension"
                )
            self.expect("]")
            self.expect("=")
            value = self.parse_sum({"e"}, target_rank, True)
            key = (i - 1, a - 1)
        elif kind == "map":
            dom_rank = doc.bundle_rank(block.refs[0])
            cod_rank = doc.bundle_rank(block.refs[1])
            tok = self.peek()
            a = self.expect_nat()
            if not 1 <= a <= dom_rank:
                raise self._fail(f"domain index {a} out of range", tok, "dimension")
            self.expect("=")
            value = self.parse_sum({"e"}, cod_rank, True)
            key = (a - 1,)
        elif kind in ("form", "tensor", "dorfman"):
            if kind == "tensor":
                r1 = doc.bundle_rank(block.refs[0])
                r2 = doc.bundle_rank(block.refs[1])
                self.expect("[")
                tok = self.peek()
                i = self.expect_nat()
                if not 1 <= i <= r1:
                    raise self._fail(f"index {i} out of range", tok, "dimension")
                self.expect(",")
                tok = self.peek()
                a = self.expect_nat()
                if not 1 <= a <= r2:
                    raise self._fail(f"index {a} out of range", tok, "dimension")
                self.expect("]")
                key = (i - 1, a - 1)
            else:
                rank = doc.bundle_rank(block.refs[0])
                key = self.parse_index_list(2, rank)
            self.expect("=")
            if kind == "dorfman":
                value = self.parse_sum({"e"}, doc.bundle_rank(block.refs[0]), True)
            else:
                value = self.parse_sum((), 0, False)
        elif kind == "multivector":
            rank = doc.bundle_rank(block.refs[0])
            degree = block.meta[0]
            key = self.parse_index_list(degree, rank)
            if any(a >= b for a, b in zip(key, key[1:])):
                raise self._fail(
                    "multivector indices must be strictly increasing",
                    kw_tok,
                    "dimension",
                )
            self.expect("=")
            value = self.parse_sum((), 0, False)
        else:  # pragma: no cover
            raise self._fail(f"no entries for {kind}", kw_tok)
        self.expect(";")
        if key in block.entries:
            raise self._fail(
                f"duplicate entry {tuple(k + 1 for k in key)} in {kind} {block.name!r}",
                kw_tok,
                "duplicate",
            )
        if kind in ("form", "tensor", "multivector"):
            value = value.get((), PolyScalar.zero(doc.base))
        if getattr(value, "is_zero", False) or value == {}:
            return  # canonical form stores no zero entries
        block.entries[key] = value
        block.positions[key] = (kw_tok.line, kw_tok.column)

    def stmt_structure(self, kw_tok):
        kind_tok = self.expect_ident()
        kind = kind_tok.text
        if kind not in STRUCTURE_KINDS:
            raise self._fail(f"unknown structure kind {kind!r}", kind_tok, "reference")
        name_tok = self.expect_ident()
        name = name_tok.text
        if name in self.doc.structures:
            raise self._fail(f"duplicate structure {name!r}", name_tok, "duplicate")
        fields = {}
        if self.peek() is not None and self.peek().text == ":":
            self.next()
            while True:
                field_tok = self.expect_ident()
                values = []
                while self.peek() is not None and self.peek().text not in (",", ";"):
                    tok = self.next()
                    text = tok.text
                    if tok.kind == "ident":
                        nxt = self.peek()
                        if (
                            nxt is not None
                            and nxt.text == "*"
                            and nxt.line == tok.line
                            and nxt.column == tok.column + len(tok.text)
                        ):
                            self.next()
                            text += "*"
                    values.append(text)
                if not values:
                    raise self._fail(
                        f"field {field_tok.text!r} needs a value", field_tok
                    )
                if field_tok.text in fields:
                    raise self._fail(
                        f"duplicate field {field_tok.text!r}", field_tok, "duplicate"
                    )
                fields[field_tok.text] = tuple(values)
                if self.peek() is not None and self.peek().text == ",":
                    self.next()
                    continue
                break
        self.expect(";")
        decl = StructureDecl(kind, name, fields, (kw_tok.line, kw_tok.column))
        self.doc.structures[name] = decl
        self.pending_structures.append((decl, name_tok))

    def _validate_structure(self, decl, tok):
        doc = self.doc

        def need(fieldname, count=1):
            if fieldname not in decl.fields:
                raise self._fail(
                    f"structure {decl.name!r} needs field {fieldname!r}",
                    tok,
                    "reference",
                )
            return decl.fields[fieldname]

        def need_block(kind, name):
            if (kind, name) not in doc.blocks:
                raise self._fail(
                    f"unknown {kind} block {name!r}", tok, "reference"
                )
            return doc.blocks[(kind, name)]

        def need_structure(name, *kinds):
            if name not in doc.structures:
                raise self._fail(f"unknown structure {name!r}", tok, "reference")
            ref = doc.structures[name]
            if kinds and ref.kind not in kinds:
                raise self._fail(
                    f"structure {name!r} has kind {ref.kind}, expected {'/'.join(kinds)}",
                    tok,
                    "reference",
                )
            return ref

        def need_bundle_ref(ref):
            if ref.rstrip("*") not in doc.bundles:
                raise self._fail(f"unknown bundle {ref!r}", tok, "reference")
            return ref

        kind = decl.kind
        if kind == "algebroid":
            (ref,) = need("bundle")
            need_bundle_ref(ref)
        elif kind == "crossed_module":
            th = need_structure(need("theta")[0], "algebroid")
            gg = need_structure(need("g")[0], "algebroid")
            mp = need_block("map", need("map")[0])
            act = need_block("action", need("action")[0])
            th_ref = th.fields["bundle"][0]
            g_ref = gg.fields["bundle"][0]
            if mp.refs != (th_ref, g_ref):
                raise self._fail(
                    f"map {mp.name!r} must go from {th_ref} to {g_ref}",
                    tok,
                    "dimension",
                )
            if act.refs != (g_ref, th_ref):
                raise self._fail(
                    f"action {act.name!r} must have actor {g_ref} and target {th_ref}",
                    tok,
                    "dimension",
                )
        elif kind == "matched_pair":
            p = need_structure(need("p")[0], "algebroid")
            q = need_structure(need("q")[0], "algebroid")
            pq = need_block("action", need("pq")[0])
            qp = need_block("action", need("qp")[0])
            if pq.refs != (p.fields["bundle"][0], q.fields["bundle"][0]):
                raise self._fail(
                    f"action {pq.name!r} must be p acting on q", tok, "dimension"
                )
            if qp.refs != (q.fields["bundle"][0], p.fields["bundle"][0]):
                raise self._fail(
                    f"action {qp.name!r} must be q acting on p", tok, "dimension"
                )
        elif kind == "bialgebroid":
            a = need_structure(need("a")[0], "algebroid")
            d = need_structure(need("dual")[0], "algebroid")
            r1 = a.fields["bundle"][0]
            r2 = d.fields["bundle"][0]
            if r1.rstrip("*") != r2.rstrip("*") or r1 == r2:
                raise self._fail(
                    "bialgebroid halves must live on dual bundles", tok, "dimension"
                )
        elif kind == "bicrossed":
            need_structure(need("cm")[0], "crossed_module")
            need_structure(need("dual")[0], "crossed_module")
        elif kind == "coquadratic":
            k = need_structure(need("k")[0], "algebroid")
            c = need_block("form", need("form")[0])
            if c.refs[0].rstrip("*") != k.fields["bundle"][0].rstrip("*"):
                raise self._fail(
                    f"form {c.name!r} must live on the algebroid's bundle",
                    tok,
                    "dimension",
                )
        elif kind == "manin_triple":
            kq = need_structure(need("k")[0], "coquadratic")
            kalg = need_structure(kq.fields["k"][0], "algebroid")
            rank = doc.bundle_rank(kalg.fields["bundle"][0])
            p = [int(v) for v in need("p")]
            q = [int(v) for v in need("q")]
            if sorted(p + q) != list(range(1, rank + 1)):
                raise self._fail(
                    "p and q must partition the basis indices", tok, "dimension"
                )
        elif kind == "rmatrix":
            cm = need_structure(need("cm")[0], "crossed_module")
            r = need_block("multivector", need("r")[0])
            th = need_structure(cm.fields["theta"][0], "algebroid")
            if r.refs[0] != th.fields["bundle"][0] or r.meta[0] != 2:
                raise self._fail(
                    f"multivector {r.name!r} must be a bivector on theta's bundle",
                    tok,
                    "dimension",
                )
        elif kind == "invariant_h":
            mp = need_structure(need("mp")[0], "matched_pair")
            h = need_block("tensor", need("h")[0])
            p = need_structure(mp.fields["p"][0], "algebroid")
            q = need_structure(mp.fields["q"][0], "algebroid")
            if h.refs != (p.fields["bundle"][0], q.fields["bundle"][0]):
                raise self._fail(
                    f"tensor {h.name!r} must live on p (x) q", tok, "dimension"
                )
        elif kind == "courant":
            (ref,) = need("bundle")
            need_bundle_ref(ref)
            metric = need_block("form", need("metric")[0])
            dorf = need_block("dorfman", need("dorfman")[0])
            if metric.refs[0] != ref or dorf.refs[0] != ref:
                raise self._fail(
                    "metric and dorfman blocks must live on the courant bundle",
                    tok,
                    "dimension",
                )
        elif kind == "dirac":
            cs = need_structure(need("courant")[0], "courant")
            rank = doc.bundle_rank(cs.fields["bundle"][0])
            span = [int(v) for v in need("span")]
            if any(not 1 <= s <= rank for s in span) or len(set(span)) != len(span):
                raise self._fail("span indices out of range", tok, "dimension")


def parse(text: str) -> SdlDocument:
    """Parse SDL text into a validated document; raises SdlError carrying
    positioned diagnostics on any lexical, syntactic, referential,
    dimensional or duplicate problem."""
    return _Parser(tokenize(text)).parse()


# -- canonical printer ----------------------------------------------------------

def _render_sum(entries: dict, head: str) -> str:
    if not entries:
        return "0"
    parts = []
    for idx in sorted(entries):
        poly = entries[idx]
        body = poly.render()
        sym = f"{head}{idx + 1}"
        if body == "1":
            term = sym
        elif body == "-1":
            term = f"-{sym}"
        elif ("+" in body[1:]) or ("- " in body):
            # re-expand a multi-term coefficient into separate literal terms
            term = None
        else:
            term = f"{body}*{sym}"
        if term is None:
            for exps, coeff in poly.sorted_terms():
                mono = PolyScalar(poly.variables, {exps: coeff}).render()
                parts.append(f"{mono}*{sym}" if mono not in ("1", "-1") else
                             (sym if mono == "1" else f"-{sym}"))
        else:
            parts.append(term)
    out = parts[0]
    for p in parts[1:]:
        out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
    return out


def _render_key(key: tuple) -> str:
    return "[" + ",".join(str(k + 1) for k in key) + "]"


def print_document(doc: SdlDocument) -> str:
    """Canonical form: sorted blocks, graded-lex polynomial rendering;
    parse(print(doc)) is structurally equal to doc."""
    lines = []
    if doc.base:
        lines.append("base " + ", ".join(doc.base) + ";")
    for name in sorted(doc.bundles):
        lines.append(f"bundle {name} {doc.bundles[name]};")
    order = {k: n for n, k in enumerate(BLOCK_KEYWORDS)}
    for (kind, name) in sorted(doc.blocks, key=lambda k: (order[k[0]], k[1])):
        block = doc.blocks[(kind, name)]
        if kind not in ("anchor", "bracket"):
            decl = f"{kind} {name} " + " ".join(block.refs)
            if block.meta:
                decl += " " + " ".join(str(m) for m in block.meta)
            lines.append(decl + ";")
        for key in sorted(block.entries):
            value = block.entries[key]
            if kind == "anchor":
                rhs = _render_sum(value, "d/dx")
                lines.append(f"anchor {name}: e{key[0] + 1} = {rhs};")
            elif kind in ("bracket", "dorfman", "action"):
                rhs = _render_sum(value, "e")
                lines.append(f"{kind} {name}: {_render_key(key)} = {rhs};")
            elif kind == "map":
                rhs = _render_sum(value, "e")
                lines.append(f"map {name}: {key[0] + 1} = {rhs};")
            else:
                lines.append(f"{kind} {name}: {_render_key(key)} = {value.render()};")
    field_order = {
        "algebroid": ("bundle",),
        "crossed_module": ("theta", "g", "map", "action"),
        "matched_pair": ("p", "q", "pq", "qp"),
        "bialgebroid": ("a", "dual"),
        "bicrossed": ("cm", "dual"),
        "coquadratic": ("k", "form"),
        "manin_triple": ("k", "p", "q"),
        "rmatrix": ("cm", "r"),
        "invariant_h": ("mp", "h"),
        "courant": ("bundle", "metric", "dorfman"),
        "dirac": ("courant", "span"),
    }
    for name in sorted(doc.structures):
        decl = doc.structures[name]
        parts = []
        for f in field_order[decl.kind]:
            if f in decl.fields:
                parts.append(f"{f} " + " ".join(decl.fields[f]))
        lines.append(f"structure {decl.kind} {name}: " + ", ".join(parts) + ";")
    return "\n".join(lines) + "\n"


# -- semantic builder -----------------------------------------------------------

def _section(doc, ref, combo: dict) -> GradedElement:
    frame = doc.frame(ref)
    return GradedElement(
        frame, 1, doc.variance(ref), {(k,): v for k, v in combo.items()}
    )


def build_algebroid(doc: SdlDocument, ref: str) -> Algebroid:
    frame = doc.frame(ref)
    variance = doc.variance(ref)
    n = len(doc.base)
    anchor_block = doc.blocks.get(("anchor", ref))
    anchor = [[PolyScalar.zero(doc.base)] * n for _ in range(frame.rank)]
    if anchor_block is not None:
        for (i,), combo in anchor_block.entries.items():
            for j, poly in combo.items():
                anchor[i][j] = poly
    table = {}
    bracket_block = doc.blocks.get(("bracket", ref))
    if bracket_block is not None:
        for key, combo in bracket_block.entries.items():
            table[key] = _section(doc, ref, combo)
    return Algebroid(frame, tuple(tuple(r) for r in anchor), table, variance)


def build_action(doc: SdlDocument, name: str, actor: Algebroid) -> ActionTable:
    block = doc.blocks[("action", name)]
    target_ref = block.refs[1]
    table = {
        key: _section(doc, target_ref, combo)
        for key, combo in block.entries.items()
    }
    return ActionTable(
        actor, doc.frame(target_ref), doc.variance(target_ref), table
    )


def build_matrix(doc: SdlDocument, kind: str, name: str, shape: tuple):
    block = doc.blocks[(kind, name)]
    rows, cols = shape
    zero = PolyScalar.zero(doc.base)
    out = [[zero] * cols for _ in range(rows)]
    if kind == "map":
        for (a,), combo in block.entries.items():
            for i, poly in combo.items():
                out[a][i] = poly
    else:
        for (i, j), poly in block.entries.items():
            out[i][j] = poly
            if kind == "form" and (j, i) not in block.entries:
                out[j][i] = poly
    return tuple(tuple(r) for r in out)


class Builder:
    """Resolves structure declarations into kernel objects, memoized so
    shared sub-structures are one object."""

    def __init__(self, doc: SdlDocument):
        self.doc = doc
        self.cache: dict = {}

    def structure(self, name: str):
        if name in self.cache:
            return self.cache[name]
        decl = self.doc.structures[name]
        builder = getattr(self, f"_build_{decl.kind}")
        obj = builder(decl)
        self.cache[name] = obj
        return obj

    def _build_algebroid(self, decl) -> Algebroid:
        return build_algebroid(self.doc, decl.fields["bundle"][0])

    def _build_crossed_module(self, decl) -> CrossedModule:
        theta = self.structure(decl.fields["theta"][0])
        g = self.structure(decl.fields["g"][0])
        phi = build_matrix(
            self.doc, "map", decl.fields["map"][0], (theta.rank, g.rank)
        )
        action = build_action(self.doc, decl.fields["action"][0], g)
        return CrossedModule(theta, g, phi, action)

    def _build_matched_pair(self, decl) -> MatchedPair:
        p = self.structure(decl.fields["p"][0])
        q = self.structure(decl.fields["q"][0])
        act_pq = build_action(self.doc, decl.fields["pq"][0], p)
        act_qp = build_action(self.doc, decl.fields["qp"][0], q)
        return MatchedPair(p, q, act_pq, act_qp)

    def _build_bialgebroid(self, decl) -> Bialgebroid:
        return Bialgebroid(
            self.structure(decl.fields["a"][0]),
            self.structure(decl.fields["dual"][0]),
        )

    def _build_bicrossed(self, decl) -> BicrossedModule:
        return BicrossedModule(
            self.structure(decl.fields["cm"][0]),
            self.structure(decl.fields["dual"][0]),
        )

    def _build_coquadratic(self, decl) -> CoquadraticAlgebroid:
        K = self.structure(decl.fields["k"][0])
        C = build_matrix(self.doc, "form", decl.fields["form"][0], (K.rank, K.rank))
        return CoquadraticAlgebroid(K, C)

    def _build_manin_triple(self, decl) -> ManinTriple:
        K = self.structure(decl.fields["k"][0])
        p = tuple(int(v) - 1 for v in decl.fields["p"])
        q = tuple(int(v) - 1 for v in decl.fields["q"])
        return ManinTriple(K, p, q)

    def _build_rmatrix(self, decl) -> CrossedModuleRMatrix:
        cm = self.structure(decl.fields["cm"][0])
        block = self.doc.blocks[("multivector", decl.fields["r"][0])]
        r = GradedElement(
            cm.theta.frame, 2, cm.theta.variance, dict(block.entries)
        )
        return CrossedModuleRMatrix(cm, r)

    def _build_invariant_h(self, decl):
        mp = self.structure(decl.fields["mp"][0])
        block = self.doc.blocks[("tensor", decl.fields["h"][0])]
        zero = PolyScalar.zero(self.doc.base)
        h = [[zero] * mp.Q.rank for _ in range(mp.P.rank)]
        for (i, a), poly in block.entries.items():
            h[i][a] = poly
        return mp, tuple(tuple(r) for r in h)

    def _build_courant(self, decl) -> CourantStructure:
        ref = decl.fields["bundle"][0]
        frame = self.doc.frame(ref)
        rank = frame.rank
        metric = build_matrix(
            self.doc, "form", decl.fields["metric"][0], (rank, rank)
        )
        alg = build_algebroid(self.doc, ref)
        dorf_block = self.doc.blocks[("dorfman", decl.fields["dorfman"][0])]
        table = {
            key: _section(self.doc, ref, combo)
            for key, combo in dorf_block.entries.items()
        }
        return CourantStructure(frame, metric, alg.anchor, table)

    def _build_dirac(self, decl):
        cs = self.structure(decl.fields["courant"][0])
        span = tuple(int(v) - 1 for v in decl.fields["span"])
        return cs, span
