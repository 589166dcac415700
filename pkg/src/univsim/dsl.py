"""The instance description language: parsing, resolution, serialization.

A document is a sequence of brace-delimited blocks, one name per kind,
with ``#`` line comments::

    set T { t1 t2 }
    rel f : T * C -> B { (t1, c1) -> b1 }
    preorder le : B { b1 >= b2 }
    tcc M { targets T contexts C behaviors B order le eval f }
    simulator s : M { programs P compile cm reduce rm }
    processing w : M { knobs K compile qt reduce qc }
    functor F : M -> N { object T -> T2 { t1 -> s1 } }
    spin sys { complex G q 2 vertices a b
               term { a } { 0 -> 0 1 -> 1 } delta 2 }
    tcc S { spin sys }
    check c { run universal s expect universal }

Labels are bare words (letters, digits, ``_ . - @ / + =``) or double
quoted strings; elements of product sets are written as tuples.  Names
refer to earlier blocks only.  Parsing never raises: the result carries
a list of diagnostics, each with a stable code and a source span.

Codes: E-LEX bad lexeme, E-SYN bad syntax, E-REF unresolved name,
E-DUP name collision, E-ELEM unknown or repeated element, E-TYPE
domain/codomain mismatch, E-VAL everything the engine itself rejects.

Serialization is canonical: parsing its own output reproduces the same
document, so serialize-then-parse is a fixed point on valid input.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import TypeMismatchError, UnknownElementError, UnivsimError, ValidationError
from .finrel import FinRel, FinSet, UNIT, product
from .order import Preorder, closure
from .simcat import Processing, make_processing
from .simulator import Simulator, make_simulator
from .tcc import BehaviorStructure, TccInstance
from .tcfunctor import ObjectAssignment, TcFunctor
from .instances.spin import SimplicialComplex, SpinSystem, SpinTcc, build_spin_tcc

WORD_CHARS = set(
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.-@/+="
)
BARE_LABEL = re.compile(r"[A-Za-z0-9_.@/+=-]+\Z")
BLOCK_KINDS = (
    "set",
    "rel",
    "preorder",
    "tcc",
    "simulator",
    "processing",
    "functor",
    "spin",
    "check",
)


@dataclass(frozen=True)
class Token:
    kind: str  # word | string | punct | eof
    text: str
    line: int
    col: int
    width: int


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    line: int
    col: int
    end_col: int

    def __str__(self):
        return f"{self.line}:{self.col}-{self.end_col} {self.code} {self.message}"


class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1
        self.diagnostics: list[Diagnostic] = []

    def _advance(self, n: int = 1):
        for _ in range(n):
            if self.pos < len(self.text) and self.text[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def tokens(self) -> list[Token]:
        out = []
        while True:
            tok = self._next()
            out.append(tok)
            if tok.kind == "eof":
                return out

    def _next(self) -> Token:
        text = self.text
        while self.pos < len(text):
            ch = text[self.pos]
            if ch == "#":
                while self.pos < len(text) and text[self.pos] != "\n":
                    self._advance()
            elif ch.isspace():
                self._advance()
            else:
                break
        if self.pos >= len(text):
            return Token("eof", "", self.line, self.col, 0)
        line, col = self.line, self.col
        ch = text[self.pos]
        if ch == '"':
            return self._string(line, col)
        if text.startswith("->", self.pos):
            self._advance(2)
            return Token("punct", "->", line, col, 2)
        if text.startswith(">=", self.pos):
            self._advance(2)
            return Token("punct", ">=", line, col, 2)
        if ch in "{}():,*":
            self._advance()
            return Token("punct", ch, line, col, 1)
        if ch in WORD_CHARS:
            start = self.pos
            while self.pos < len(text) and text[self.pos] in WORD_CHARS:
                if text.startswith("->", self.pos):
                    break
                self._advance()
            word = text[start : self.pos]
            return Token("word", word, line, col, len(word))
        self.diagnostics.append(
            Diagnostic("E-LEX", f"unexpected character {ch!r}", line, col, col + 1)
        )
        self._advance()
        return self._next()

    def _string(self, line: int, col: int) -> Token:
        self._advance()  # opening quote
        out = []
        text = self.text
        while self.pos < len(text):
            ch = text[self.pos]
            if ch == "\n":
                break
            if ch == '"':
                self._advance()
                return Token("string", "".join(out), line, col, self.col - col)
            if ch == "\\" and self.pos + 1 < len(text) and text[self.pos + 1] in '"\\':
                self._advance()
                ch = text[self.pos]
            out.append(ch)
            self._advance()
        self.diagnostics.append(
            Diagnostic("E-LEX", "unterminated string", line, col, self.col)
        )
        return Token("string", "".join(out), line, col, self.col - col)


@dataclass
class CheckSpec:
    """A command baked into the document, with an optional expected verdict."""

    command: tuple[str, ...]
    expect: str | None


@dataclass
class Block:
    kind: str
    name: str
    line: int
    col: int
    value: object
    # names of referenced blocks, keyed by role, for canonical output
    refs: dict = field(default_factory=dict)


@dataclass
class SpecDocument:
    blocks: list[Block] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)
    spin_backing: dict = field(default_factory=dict)  # tcc name -> SpinTcc

    @property
    def ok(self) -> bool:
        return not self.diagnostics

    def _kind(self, kind: str) -> dict:
        return {b.name: b.value for b in self.blocks if b.kind == kind}

    @property
    def sets(self) -> dict:
        out = self._kind("set")
        out["I"] = UNIT
        return out

    @property
    def rels(self) -> dict:
        return self._kind("rel")

    @property
    def preorders(self) -> dict:
        return self._kind("preorder")

    @property
    def instances(self) -> dict:
        return self._kind("tcc")

    @property
    def simulators(self) -> dict:
        return self._kind("simulator")

    @property
    def processings(self) -> dict:
        return self._kind("processing")

    @property
    def functors(self) -> dict:
        return self._kind("functor")

    @property
    def spins(self) -> dict:
        return self._kind("spin")

    @property
    def checks(self) -> dict:
        return self._kind("check")


class _Parser:
    def __init__(self, text: str):
        lexer = _Lexer(text)
        self.toks = lexer.tokens()
        self.i = 0
        self.doc = SpecDocument()
        self.doc.diagnostics.extend(lexer.diagnostics)

    # ---- token plumbing ------------------------------------------------

    def peek(self) -> Token:
        return self.toks[self.i]

    def take(self) -> Token:
        tok = self.toks[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def diag(self, code: str, message: str, tok: Token):
        self.doc.diagnostics.append(
            Diagnostic(code, message, tok.line, tok.col, tok.col + max(tok.width, 1))
        )

    def expect_punct(self, text: str) -> Token | None:
        tok = self.peek()
        if tok.kind == "punct" and tok.text == text:
            return self.take()
        self.diag("E-SYN", f"expected {text!r}", tok)
        return None

    def expect_word(self, what: str) -> Token | None:
        tok = self.peek()
        if tok.kind == "word":
            return self.take()
        self.diag("E-SYN", f"expected {what}", tok)
        return None

    def at_punct(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind == "punct" and tok.text == text

    def skip_block(self):
        """Recover from a syntax error: drop tokens to the end of the block."""
        depth = 0
        while True:
            tok = self.peek()
            if tok.kind == "eof":
                return
            if tok.kind == "punct" and tok.text == "{":
                depth += 1
            if tok.kind == "punct" and tok.text == "}":
                if depth <= 1:
                    self.take()
                    return
                depth -= 1
            elif depth == 0 and tok.kind == "word" and tok.text in BLOCK_KINDS:
                return
            self.take()

    # ---- names and elements -------------------------------------------

    def declare(self, kind: str, name_tok: Token, value, refs=None) -> bool:
        if kind == "set" and name_tok.text == "I":
            self.diag("E-DUP", "the name 'I' is reserved for the unit set", name_tok)
            return False
        existing = [b for b in self.doc.blocks if b.kind == kind and b.name == name_tok.text]
        if existing:
            self.diag("E-DUP", f"{kind} {name_tok.text!r} is already defined", name_tok)
            return False
        self.doc.blocks.append(
            Block(kind, name_tok.text, name_tok.line, name_tok.col, value, refs or {})
        )
        return True

    def lookup(self, kind: str, name_tok: Token):
        table = {"set": self.doc.sets}.get(kind) or self.doc._kind(kind)
        if kind == "set":
            table = self.doc.sets
        if name_tok.text in table:
            return table[name_tok.text]
        self.diag("E-REF", f"unknown {kind} {name_tok.text!r}", name_tok)
        return None

    def label(self) -> tuple[str, Token] | None:
        tok = self.peek()
        if tok.kind in ("word", "string"):
            self.take()
            return tok.text, tok
        self.diag("E-SYN", "expected an element label", tok)
        return None

    def element(self, a: FinSet) -> tuple[str, Token] | None:
        """One element of a, either a plain label or a tuple for products."""
        if self.at_punct("("):
            open_tok = self.take()
            parts = []
            while True:
                got = self.label()
                if got is None:
                    return None
                parts.append(got)
                if self.at_punct(","):
                    self.take()
                    continue
                if self.expect_punct(")") is None:
                    return None
                break
            factors = a.factors if a.is_product else (a,)
            if len(parts) != len(factors):
                self.diag(
                    "E-TYPE",
                    f"{a.id} elements have {len(factors)} components, got {len(parts)}",
                    open_tok,
                )
                return None
            index = 0
            for (text, tok), f in zip(parts, factors):
                if text not in f.elements:
                    self.diag("E-ELEM", f"{text!r} is not in set {f.id!r}", tok)
                    return None
                index = index * f.size + f.index(text)
            return a.elements[index], open_tok
        got = self.label()
        if got is None:
            return None
        text, tok = got
        if text not in a.elements:
            self.diag("E-ELEM", f"{text!r} is not in set {a.id!r}", tok)
            return None
        return text, tok

    def type_expr(self) -> tuple[FinSet, list[str]] | None:
        """A set name or a product of set names."""
        names = []
        factors = []
        while True:
            tok = self.expect_word("a set name")
            if tok is None:
                return None
            got = self.lookup("set", tok)
            if got is None:
                return None
            names.append(tok.text)
            factors.append(got)
            if self.at_punct("*"):
                self.take()
                continue
            return product(*factors), names

    # ---- blocks --------------------------------------------------------

    def parse(self) -> SpecDocument:
        while True:
            tok = self.peek()
            if tok.kind == "eof":
                return self.doc
            if tok.kind != "word" or tok.text not in BLOCK_KINDS:
                self.diag("E-SYN", "expected a block keyword", tok)
                self.take()
                continue
            self.take()
            getattr(self, f"block_{tok.text}")()

    def block_set(self):
        name = self.expect_word("a set name")
        if name is None or self.expect_punct("{") is None:
            return self.skip_block()
        labels: list[tuple[str, Token]] = []
        seen = set()
        while not self.at_punct("}"):
            got = self.label()
            if got is None:
                return self.skip_block()
            text, tok = got
            if text in seen:
                self.diag("E-ELEM", f"element {text!r} repeats", tok)
            seen.add(text)
            labels.append(got)
        self.take()
        try:
            value = FinSet(name.text, tuple(t for t, _ in labels))
        except ValidationError as e:
            return self.diag("E-VAL", str(e), name)
        self.declare("set", name, value)

    def block_rel(self):
        name = self.expect_word("a relation name")
        if name is None or self.expect_punct(":") is None:
            return self.skip_block()
        dom_got = self.type_expr()
        if dom_got is None or self.expect_punct("->") is None:
            return self.skip_block()
        cod_got = self.type_expr()
        if cod_got is None or self.expect_punct("{") is None:
            return self.skip_block()
        dom, dom_names = dom_got
        cod, cod_names = cod_got
        pairs = []
        while not self.at_punct("}"):
            a = self.element(dom)
            if a is None or self.expect_punct("->") is None:
                return self.skip_block()
            b = self.element(cod)
            if b is None:
                return self.skip_block()
            pairs.append((a[0], b[0]))
        self.take()
        value = FinRel.from_pairs(dom, cod, pairs)
        self.declare("rel", name, value, {"dom": dom_names, "cod": cod_names})

    def block_preorder(self):
        name = self.expect_word("a preorder name")
        if name is None or self.expect_punct(":") is None:
            return self.skip_block()
        carrier_tok = self.expect_word("a set name")
        if carrier_tok is None:
            return self.skip_block()
        carrier = self.lookup("set", carrier_tok)
        if carrier is None or self.expect_punct("{") is None:
            return self.skip_block()
        edges = []
        while not self.at_punct("}"):
            hi = self.element(carrier)
            if hi is None or self.expect_punct(">=") is None:
                return self.skip_block()
            lo = self.element(carrier)
            if lo is None:
                return self.skip_block()
            edges.append((hi[0], lo[0]))
        self.take()
        value = closure(carrier, edges)
        self.declare("preorder", name, value, {"carrier": carrier_tok.text})

    def block_tcc(self):
        name = self.expect_word("an instance name")
        if name is None or self.expect_punct("{") is None:
            return self.skip_block()
        if self.peek().kind == "word" and self.peek().text == "spin":
            self.take()
            return self._tcc_from_spin(name)
        fields = {}
        refs = {}
        intrinsic = False
        while not self.at_punct("}"):
            key = self.expect_word("an instance field")
            if key is None:
                return self.skip_block()
            if key.text == "intrinsic":
                intrinsic = True
                continue
            if key.text not in ("targets", "contexts", "behaviors", "order", "eval"):
                self.diag("E-SYN", f"unknown instance field {key.text!r}", key)
                return self.skip_block()
            ref = self.expect_word("a name")
            if ref is None:
                return self.skip_block()
            kind = {"order": "preorder", "eval": "rel"}.get(key.text, "set")
            got = self.lookup(kind, ref)
            if got is None:
                return self.skip_block()
            fields[key.text] = got
            refs[key.text] = ref.text
        close = self.take()
        missing = [
            k
            for k in ("targets", "contexts", "behaviors", "order", "eval")
            if k not in fields
        ]
        if missing:
            return self.diag("E-SYN", f"instance is missing {', '.join(missing)}", close)
        try:
            behavior = BehaviorStructure(
                fields["behaviors"], fields["order"], fields["eval"]
            )
            value = TccInstance(
                name.text, fields["targets"], fields["contexts"], behavior, intrinsic
            )
        except (ValidationError, TypeMismatchError) as e:
            return self.diag(
                "E-TYPE" if isinstance(e, TypeMismatchError) else "E-VAL", str(e), name
            )
        self.declare("tcc", name, value, refs)

    def _tcc_from_spin(self, name: Token):
        systems = []
        names = []
        while not self.at_punct("}"):
            ref = self.expect_word("a spin system name")
            if ref is None:
                return self.skip_block()
            got = self.lookup("spin", ref)
            if got is None:
                return self.skip_block()
            systems.append(got)
            names.append(ref.text)
        self.take()
        try:
            st = build_spin_tcc(systems, name.text)
        except (ValidationError, TypeMismatchError, UnivsimError) as e:
            return self.diag("E-VAL", str(e), name)
        if self.declare("tcc", name, st.inst, {"spin": names}):
            self.doc.spin_backing[name.text] = st

    def _sim_like(self, what: str):
        name = self.expect_word(f"a {what} name")
        if name is None or self.expect_punct(":") is None:
            return None
        inst_tok = self.expect_word("an instance name")
        if inst_tok is None:
            return None
        inst = self.lookup("tcc", inst_tok)
        if inst is None or self.expect_punct("{") is None:
            return None
        keyword = "programs" if what == "simulator" else "knobs"
        fields = {}
        refs = {"instance": inst_tok.text}
        while not self.at_punct("}"):
            key = self.expect_word("a field")
            if key is None:
                return None
            if key.text not in (keyword, "compile", "reduce"):
                self.diag("E-SYN", f"unknown {what} field {key.text!r}", key)
                return None
            ref = self.expect_word("a name")
            if ref is None:
                return None
            got = self.lookup("set" if key.text == keyword else "rel", ref)
            if got is None:
                return None
            fields[key.text] = got
            refs[key.text] = ref.text
        close = self.take()
        missing = [k for k in (keyword, "compile", "reduce") if k not in fields]
        if missing:
            self.diag("E-SYN", f"{what} is missing {', '.join(missing)}", close)
            return None
        return name, inst, fields, refs, keyword

    def block_simulator(self):
        got = self._sim_like("simulator")
        if got is None:
            return self.skip_block()
        name, inst, fields, refs, _ = got
        if fields["compile"].dom != fields["programs"]:
            return self.diag(
                "E-TYPE", "compile must start from the declared programs", name
            )
        try:
            value = make_simulator(inst, fields["compile"], fields["reduce"])
        except (ValidationError, TypeMismatchError) as e:
            return self.diag(
                "E-TYPE" if isinstance(e, TypeMismatchError) else "E-VAL", str(e), name
            )
        self.declare("simulator", name, value, refs)

    def block_processing(self):
        got = self._sim_like("processing")
        if got is None:
            return self.skip_block()
        name, inst, fields, refs, _ = got
        try:
            value = make_processing(
                inst, fields["knobs"], fields["compile"], fields["reduce"]
            )
        except (ValidationError, TypeMismatchError) as e:
            return self.diag(
                "E-TYPE" if isinstance(e, TypeMismatchError) else "E-VAL", str(e), name
            )
        self.declare("processing", name, value, refs)

    def block_functor(self):
        name = self.expect_word("a functor name")
        if name is None or self.expect_punct(":") is None:
            return self.skip_block()
        src_tok = self.expect_word("an instance name")
        if src_tok is None or self.expect_punct("->") is None:
            return self.skip_block()
        dst_tok = self.expect_word("an instance name")
        if dst_tok is None:
            return self.skip_block()
        src = self.lookup("tcc", src_tok)
        dst = self.lookup("tcc", dst_tok)
        if src is None or dst is None or self.expect_punct("{") is None:
            return self.skip_block()
        assignments = []
        names = []
        while not self.at_punct("}"):
            key = self.expect_word("'object'")
            if key is None or key.text != "object":
                if key is not None:
                    self.diag("E-SYN", "functor bodies contain object clauses", key)
                return self.skip_block()
            a_tok = self.expect_word("a set name")
            if a_tok is None or self.expect_punct("->") is None:
                return self.skip_block()
            b_tok = self.expect_word("a set name")
            if b_tok is None:
                return self.skip_block()
            a = self.lookup("set", a_tok)
            b = self.lookup("set", b_tok)
            if a is None or b is None or self.expect_punct("{") is None:
                return self.skip_block()
            images = {}
            while not self.at_punct("}"):
                e = self.element(a)
                if e is None or self.expect_punct("->") is None:
                    return self.skip_block()
                img = self.element(b)
                if img is None:
                    return self.skip_block()
                if e[0] in images:
                    self.diag("E-ELEM", f"element {e[0]!r} is mapped twice", e[1])
                images[e[0]] = img[0]
            self.take()
            unmapped = [x for x in a.elements if x not in images]
            if unmapped:
                self.diag(
                    "E-ELEM",
                    f"no image for {', '.join(repr(x) for x in unmapped)}",
                    a_tok,
                )
                return self.skip_block()
            try:
                assignments.append(
                    ObjectAssignment(a, b, tuple(images[x] for x in a.elements))
                )
            except ValidationError as e:
                self.diag("E-VAL", str(e), a_tok)
                return self.skip_block()
            names.append((a_tok.text, b_tok.text))
        self.take()
        try:
            value = TcFunctor(src, dst, tuple(assignments))
        except ValidationError as e:
            return self.diag("E-VAL", str(e), name)
        refs = {"source": src_tok.text, "target": dst_tok.text, "objects": names}
        self.declare("functor", name, value, refs)

    def block_spin(self):
        name = self.expect_word("a spin system name")
        if name is None or self.expect_punct("{") is None:
            return self.skip_block()
        complex_name = None
        q = None
        vertices: list[str] = []
        terms = []
        delta = None
        while not self.at_punct("}"):
            key = self.expect_word("a spin field")
            if key is None:
                return self.skip_block()
            if key.text == "complex":
                got = self.expect_word("a complex name")
                if got is None:
                    return self.skip_block()
                complex_name = got.text
            elif key.text == "q":
                got = self.expect_word("a state count")
                if got is None:
                    return self.skip_block()
                try:
                    q = int(got.text)
                except ValueError:
                    return self.diag("E-VAL", f"bad state count {got.text!r}", got)
            elif key.text == "vertices":
                while self.peek().kind in ("word", "string"):
                    nxt = self.peek()
                    if nxt.kind == "word" and nxt.text in (
                        "complex",
                        "q",
                        "vertices",
                        "term",
                        "delta",
                    ):
                        break
                    vertices.append(self.take().text)
            elif key.text == "term":
                got = self._spin_term(vertices, q, key)
                if got is None:
                    return self.skip_block()
                terms.append(got)
            elif key.text == "delta":
                got = self.label()
                if got is None:
                    return self.skip_block()
                try:
                    delta = Fraction(got[0])
                except (ValueError, ZeroDivisionError):
                    return self.diag("E-VAL", f"bad threshold {got[0]!r}", got[1])
            else:
                self.diag("E-SYN", f"unknown spin field {key.text!r}", key)
                return self.skip_block()
        self.take()
        if complex_name is None or q is None or delta is None:
            return self.diag(
                "E-SYN", "spin blocks need complex, q and delta", name
            )
        try:
            cx = SimplicialComplex(
                complex_name, tuple(vertices), tuple(f for f, _ in terms)
            )
            value = SpinSystem(name.text, cx, q, {f: t for f, t in terms}, delta)
        except (ValidationError, TypeMismatchError) as e:
            return self.diag("E-VAL", str(e), name)
        self.declare("spin", name, value)

    def _spin_term(self, vertices: list[str], q: int | None, key: Token):
        if self.expect_punct("{") is None:
            return None
        facet = []
        while not self.at_punct("}"):
            got = self.label()
            if got is None:
                return None
            if got[0] not in vertices:
                self.diag("E-ELEM", f"{got[0]!r} is not a declared vertex", got[1])
                return None
            facet.append(got[0])
        self.take()
        if self.expect_punct("{") is None:
            return None
        table = {}
        while not self.at_punct("}"):
            values = []
            for _ in facet:
                got = self.expect_word("a spin value")
                if got is None:
                    return None
                try:
                    v = int(got.text)
                except ValueError:
                    self.diag("E-VAL", f"bad spin value {got.text!r}", got)
                    return None
                if q is not None and not 0 <= v < q:
                    self.diag("E-VAL", f"spin value {v} is outside 0..{q - 1}", got)
                    return None
                values.append(v)
            if self.expect_punct("->") is None:
                return None
            got = self.label()
            if got is None:
                return None
            try:
                energy = Fraction(got[0])
            except (ValueError, ZeroDivisionError):
                self.diag("E-VAL", f"bad energy {got[0]!r}", got[1])
                return None
            table[tuple(values)] = energy
        self.take()
        return tuple(facet), table

    def block_check(self):
        name = self.expect_word("a check name")
        if name is None or self.expect_punct("{") is None:
            return self.skip_block()
        command: list[str] = []
        expect = None
        key = self.expect_word("'run'")
        if key is None or key.text != "run":
            if key is not None:
                self.diag("E-SYN", "check blocks start with a run line", key)
            return self.skip_block()
        while self.peek().kind in ("word", "string"):
            tok = self.peek()
            if tok.kind == "word" and tok.text == "expect":
                break
            command.append(self.take().text)
        if self.peek().kind == "word" and self.peek().text == "expect":
            self.take()
            got = self.label()
            if got is None:
                return self.skip_block()
            expect = got[0]
        if self.expect_punct("}") is None:
            return self.skip_block()
        if not command:
            return self.diag("E-SYN", "empty run line", name)
        self.declare("check", name, CheckSpec(tuple(command), expect))


def parse(text: str) -> SpecDocument:
    return _Parser(text).parse()


# ---- canonical output ---------------------------------------------------


def quote_label(label: str) -> str:
    if BARE_LABEL.fullmatch(label):
        return label
    escaped = label.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def _element_text(a: FinSet, label: str) -> str:
    if not a.is_product:
        return quote_label(label)
    index = a.index(label)
    parts = []
    for f in reversed(a.factors):
        index, here = divmod(index, f.size)
        parts.append(quote_label(f.elements[here]))
    return "(" + ", ".join(reversed(parts)) + ")"


def _type_text(names: list[str]) -> str:
    return " * ".join(names)


def _serialize_block(block: Block, doc: SpecDocument) -> str:
    v = block.value
    refs = block.refs
    if block.kind == "set":
        body = " ".join(quote_label(e) for e in v.elements)
        return f"set {block.name} {{ {body} }}".replace("{  }", "{ }")
    if block.kind == "rel":
        pair_text = " ".join(
            f"{_element_text(v.dom, a)} -> {_element_text(v.cod, b)}"
            for a, b in v.pairs()
        )
        head = f"rel {block.name} : {_type_text(refs['dom'])} -> {_type_text(refs['cod'])}"
        return f"{head} {{ {pair_text} }}".replace("{  }", "{ }")
    if block.kind == "preorder":
        carrier = v.carrier
        edge_text = " ".join(
            f"{_element_text(carrier, carrier.elements[i])} >= "
            f"{_element_text(carrier, carrier.elements[j])}"
            for i in range(carrier.size)
            for j in range(carrier.size)
            if i != j and v.mat[i, j]
        )
        head = f"preorder {block.name} : {refs['carrier']}"
        return f"{head} {{ {edge_text} }}".replace("{  }", "{ }")
    if block.kind == "tcc":
        if "spin" in refs:
            systems = " ".join(refs["spin"])
            return f"tcc {block.name} {{ spin {systems} }}"
        lines = [f"tcc {block.name} {{"]
        for key in ("targets", "contexts", "behaviors", "order", "eval"):
            lines.append(f"  {key} {refs[key]}")
        if v.intrinsic:
            lines.append("  intrinsic")
        lines.append("}")
        return "\n".join(lines)
    if block.kind in ("simulator", "processing"):
        keyword = "programs" if block.kind == "simulator" else "knobs"
        lines = [f"{block.kind} {block.name} : {refs['instance']} {{"]
        for key in (keyword, "compile", "reduce"):
            lines.append(f"  {key} {refs[key]}")
        lines.append("}")
        return "\n".join(lines)
    if block.kind == "functor":
        lines = [f"functor {block.name} : {refs['source']} -> {refs['target']} {{"]
        for (a_name, b_name), asgn in zip(refs["objects"], v.assignments):
            images = " ".join(
                f"{quote_label(e)} -> {quote_label(img)}"
                for e, img in zip(asgn.src.elements, asgn.relabel)
            )
            lines.append(f"  object {a_name} -> {b_name} {{ {images} }}")
        lines.append("}")
        return "\n".join(lines)
    if block.kind == "spin":
        lines = [f"spin {block.name} {{"]
        lines.append(f"  complex {v.complex.name}")
        lines.append(f"  q {v.q}")
        lines.append("  vertices " + " ".join(quote_label(x) for x in v.complex.vertices))
        for facet in v.complex.facets:
            table = v.terms[facet]
            cells = " ".join(
                " ".join(str(x) for x in values) + f" -> {table[values]}"
                for values in sorted(table)
            )
            facet_text = " ".join(quote_label(x) for x in facet)
            lines.append(f"  term {{ {facet_text} }} {{ {cells} }}")
        lines.append(f"  delta {v.delta}")
        lines.append("}")
        return "\n".join(lines)
    if block.kind == "check":
        lines = [f"check {block.name} {{"]
        run = " ".join(quote_label(x) for x in v.command)
        lines.append(f"  run {run}" + (f" expect {quote_label(v.expect)}" if v.expect else ""))
        lines.append("}")
        return "\n".join(lines)
    raise UnivsimError(f"cannot serialize block kind {block.kind!r}")


def serialize(doc: SpecDocument) -> str:
    if doc.diagnostics:
        raise ValidationError("cannot serialize a document with errors")
    return "\n".join(_serialize_block(b, doc) for b in doc.blocks) + "\n"
