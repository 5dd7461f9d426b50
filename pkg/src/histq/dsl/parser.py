"""Tokenizer and recursive-descent parser for ``.hqs`` scenario files.

Statements end with ``;`` or with a newline outside brackets.  The complete
grammar is in ``docs/grammar.md``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import ast as A
from .errors import ParseError

KEYWORDS = {
    "space", "dim", "ket", "in", "operator", "on", "from", "to", "isometry", "model",
    "family", "query", "projective", "kraus", "luders", "preparation", "pointers",
    "pointer_states", "pointer", "linked", "mix", "evolve", "at", "keep", "target",
    "given", "state", "groups", "probes", "weight",
}
CONSTANTS = {"i", "pi", "omega"}
FUNCTIONS = {"sqrt", "conj", "dag", "I", "proj"}
RESERVED = KEYWORDS | CONSTANTS | FUNCTIONS
STATEMENTS = ("space", "ket", "operator", "isometry", "model", "family", "query")
QUERY_KINDS = ("consistency", "probabilities", "conditional", "povm", "inference", "noncontextuality")
MODEL_KINDS = ("projective", "isometry", "kraus", "luders", "preparation")

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.]*")
NUMBER_RE = re.compile(r"(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?")
SYMBOLS = ("(x)", "(.)", "->", ";", ",", "(", ")", "[", "]", "{", "}", "=", ":", "+", "-", "*", "/", "^", "|", "<", ">", "&")
UNICODE = {"⊗": "(x)", "⊙": "(.)"}
OPEN, CLOSE = "([{", ")]}"


@dataclass(frozen=True)
class Token:
    kind: str  # NAME NUMBER STRING SYM END EOF
    text: str
    line: int
    col: int

    @property
    def pos(self) -> A.Pos:
        return A.Pos(self.line, self.col)

    def describe(self) -> str:
        if self.kind == "EOF":
            return "end of input"
        if self.kind == "END":
            return "end of statement" if self.text == ";" else "end of line"
        return repr(self.text)


def tokenize(text: str, origin: str = "<inline>") -> list[Token]:
    tokens: list[Token] = []
    line, col, i, depth = 1, 1, 0, 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            if depth == 0:
                tokens.append(Token("END", "\n", line, col))
            i += 1
            line, col = line + 1, 1
            continue
        if ch in " \t\r\f\v":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
                col += 1
            continue
        if ch in UNICODE:
            tokens.append(Token("SYM", UNICODE[ch], line, col))
            i += 1
            col += 1
            continue
        if ch == '"':
            j = i + 1
            buf = []
            while j < n and text[j] != '"':
                if text[j] == "\n":
                    raise ParseError("unterminated string", line, col, origin=origin)
                if text[j] == "\\" and j + 1 < n and text[j + 1] in '"\\':
                    j += 1
                buf.append(text[j])
                j += 1
            if j >= n:
                raise ParseError("unterminated string", line, col, origin=origin)
            tokens.append(Token("STRING", "".join(buf), line, col))
            col += j + 1 - i
            i = j + 1
            continue
        m = NUMBER_RE.match(text, i)
        if m and (ch.isdigit() or ch == "."):
            tokens.append(Token("NUMBER", m.group(), line, col))
            col += m.end() - i
            i = m.end()
            continue
        m = NAME_RE.match(text, i)
        if m:
            tokens.append(Token("NAME", m.group(), line, col))
            col += m.end() - i
            i = m.end()
            continue
        for sym in SYMBOLS:
            if text.startswith(sym, i):
                if sym in OPEN:
                    depth += 1
                elif sym in CLOSE:
                    depth = max(0, depth - 1)
                elif sym == ";":
                    depth = 0
                kind = "END" if sym == ";" else "SYM"
                tokens.append(Token(kind, sym, line, col))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col, origin=origin)
    tokens.append(Token("EOF", "", line, col))
    return tokens


class Parser:
    def __init__(self, text: str, origin: str = "<inline>"):
        self.origin = origin
        self.tokens = tokenize(text, origin)
        self.i = 0

    # --- token helpers ------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def error(self, message: str, expected=(), tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(f"{message}, found {tok.describe()}", tok.line, tok.col, expected, self.origin)

    def advance(self) -> Token:
        tok = self.tok
        if tok.kind != "EOF":
            self.i += 1
        return tok

    def at(self, text: str, kind: str | None = None) -> bool:
        tok = self.tok
        if kind is not None and tok.kind != kind:
            return False
        return tok.text == text and tok.kind in ("SYM", "NAME", "END")

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error("unexpected token", [text])
        return self.advance()

    def expect_name(self, what: str = "name") -> Token:
        tok = self.tok
        if tok.kind != "NAME" or tok.text in RESERVED:
            raise self.error(f"expected a {what}", [what])
        return self.advance()

    def expect_keyword(self, *words: str) -> Token:
        if self.tok.kind == "NAME" and self.tok.text in words:
            return self.advance()
        raise self.error("unexpected token", words)

    def expect_int(self) -> int:
        tok = self.tok
        if tok.kind != "NUMBER" or not tok.text.isdigit():
            raise self.error("expected a positive integer", ["integer"])
        self.advance()
        return int(tok.text)

    def label(self) -> str:
        tok = self.tok
        if tok.kind in ("STRING", "NUMBER") or (tok.kind == "NAME" and tok.text not in RESERVED):
            self.advance()
            return tok.text
        raise self.error("expected a label", ["label"])

    def is_label_start(self) -> bool:
        tok = self.tok
        return tok.kind in ("STRING", "NUMBER") or (tok.kind == "NAME" and tok.text not in RESERVED)

    def comma_list(self, close: str, item):
        out = [item()]
        while self.at(","):
            self.advance()
            out.append(item())
        self.expect(close)
        return tuple(out)

    # --- program ------------------------------------------------------------

    def parse_program(self) -> A.Program:
        statements = []
        while True:
            while self.tok.kind == "END":
                self.advance()
            if self.tok.kind == "EOF":
                break
            statements.append(self.statement())
            if self.tok.kind not in ("END", "EOF"):
                raise self.error("expected end of statement", [";", "newline"])
        return A.Program(tuple(statements))

    def statement(self):
        tok = self.tok
        if tok.kind != "NAME" or tok.text not in STATEMENTS:
            raise self.error("expected a statement", STATEMENTS)
        return getattr(self, f"stmt_{tok.text}")()

    def stmt_space(self):
        start = self.advance()
        name = self.expect_name("space name").text
        if self.at("dim", "NAME"):
            self.advance()
            return A.SpaceDecl(name, dim=self.expect_int(), pos=start.pos)
        if self.at("="):
            self.advance()
            factors = [self.expect_name("space name").text]
            while self.at("(x)"):
                self.advance()
                factors.append(self.expect_name("space name").text)
            if len(factors) < 2:
                raise self.error("a product space needs at least two factors", ["(x)"])
            return A.SpaceDecl(name, factors=tuple(factors), pos=start.pos)
        raise self.error("unexpected token", ["dim", "="])

    def stmt_ket(self):
        start = self.advance()
        name = self.expect_name("ket name").text
        self.expect_keyword("in")
        space = self.expect_name("space name").text
        self.expect("=")
        return A.KetDecl(name, space, self.expr(), pos=start.pos)

    def _map_decl(self, kind: str):
        start = self.advance()
        name = self.expect_name(f"{kind} name").text
        if kind == "operator" and self.at("on", "NAME"):
            self.advance()
            space = self.expect_name("space name").text
            self.expect("=")
            return A.OperatorDecl(kind, name, space, space, self.expr(), square=True, pos=start.pos)
        self.expect_keyword("from")
        source = self.expect_name("space name").text
        self.expect_keyword("to")
        target = self.expect_name("space name").text
        self.expect("=")
        return A.OperatorDecl(kind, name, source, target, self.expr(), square=False, pos=start.pos)

    def stmt_operator(self):
        return self._map_decl("operator")

    def stmt_isometry(self):
        return self._map_decl("isometry")

    def stmt_model(self):
        start = self.advance()
        name = self.expect_name("model name").text
        self.expect("=")
        kind_tok = self.expect_keyword(*MODEL_KINDS)
        kind = kind_tok.text
        if kind == "isometry":
            J = self.expr()
            self.expect_keyword("pointers")
            self.expect("{")
            entries = self.comma_list("}", lambda: self.model_entry(1))
            return A.ModelDecl(name, kind, entries, isometry=J, pos=start.pos)
        self.expect("{")
        if kind == "projective":
            entries = self.comma_list("}", self.projective_entry)
        elif kind == "preparation":
            entries = self.comma_list("}", self.preparation_entry)
        else:
            entries = self.comma_list("}", lambda: self.model_entry(1))
        states: tuple = ()
        if kind in ("kraus", "luders", "preparation") and self.at("pointer_states", "NAME"):
            self.advance()
            self.expect("{")
            states = self.comma_list("}", self.expr)
        return A.ModelDecl(name, kind, entries, pointer_states=states, pos=start.pos)

    def model_entry(self, _n: int):
        tok = self.tok
        label = self.label()
        self.expect(":")
        return A.ModelEntry(label, (self.expr(),), pos=tok.pos)

    def projective_entry(self):
        tok = self.tok
        label = self.label()
        self.expect(":")
        s = self.expr()
        self.expect("->")
        phi = self.expr()
        exprs = (s, phi)
        if self.at("pointer", "NAME"):
            self.advance()
            exprs = (s, phi, self.expr())
        return A.ModelEntry(label, exprs, pos=tok.pos)

    def preparation_entry(self):
        tok = self.tok
        label = self.label()
        self.expect(":")
        ket = self.expr()
        self.expect_keyword("weight")
        return A.ModelEntry(label, (ket, self.expr()), pos=tok.pos)

    def initial(self) -> A.Initial:
        tok = self.tok
        if self.at("["):
            self.advance()
            name = self.expect_name("ket name").text
            self.expect("]")
            return A.Initial(state=name, pos=tok.pos)
        if self.at("mix", "NAME"):
            self.advance()
            self.expect("{")

            def member():
                w = self.expr()
                self.expect(":")
                return (w, self.expect_name("ket name").text)

            return A.Initial(mixture=self.comma_list("}", member), pos=tok.pos)
        raise self.error("expected an initial state", ["[", "mix"])

    def item(self) -> A.Item:
        tok = self.tok
        if self.is_label_start() and self.peek().text == ":" and self.peek().kind == "SYM":
            label = self.label()
            self.advance()
            return A.Item(label, self.expr(), pos=tok.pos)
        return A.Item(None, self.expr(), pos=tok.pos)

    def set_body(self) -> tuple[A.Item, ...]:
        self.expect("{")
        return self.comma_list("}", self.item)

    def slot(self):
        tok = self.tok
        if self.at("pointer", "NAME"):
            self.advance()
            return A.PointerSlot(pos=tok.pos)
        if self.at("linked", "NAME"):
            self.advance()
            self.expect("{")

            def binding():
                label = self.label()
                self.expect(":")
                return (label, self.set_body())

            return A.LinkedSlotNode(self.comma_list("}", binding), pos=tok.pos)
        if self.at("{"):
            factors = [self.set_body()]
            while self.at("(x)"):
                self.advance()
                factors.append(self.set_body())
            return A.SetSlot(tuple(factors), pos=tok.pos)
        raise self.error("expected a slot", ["{", "linked", "pointer"])

    def stmt_family(self):
        start = self.advance()
        name = self.expect_name("family name").text
        model = space = None
        if self.at("on", "NAME"):
            self.advance()
            model = self.expect_name("model name").text
        elif self.at("in", "NAME"):
            self.advance()
            space = self.expect_name("space name").text
        elif not self.at("="):
            raise self.error("unexpected token", ["on", "in", "="])
        self.expect("=")
        initial = self.initial()
        slots = []
        if not self.at("(.)"):
            raise self.error("a family needs at least one slot after the initial state", ["(.)"])
        while self.at("(.)"):
            self.advance()
            slots.append(self.slot())
        evolve: tuple = ()
        times: tuple = ()
        if self.at("evolve", "NAME"):
            self.advance()
            self.expect("(")
            evolve = self.comma_list(")", self.expr)
        if self.at("at", "NAME"):
            self.advance()
            self.expect("(")
            times = self.comma_list(")", self.label)
        return A.FamilyDecl(name, model, space, initial, tuple(slots), evolve, times, pos=start.pos)

    # --- queries ------------------------------------------------------------

    def matcher_atom(self) -> A.Matcher:
        tok = self.tok
        if self.at("*"):
            self.advance()
            return A.Matcher("any", pos=tok.pos)
        if self.at("{"):
            self.advance()
            labels = self.comma_list("}", self.label)
            return A.Matcher("set", parts=tuple(A.Matcher("label", lab) for lab in labels), pos=tok.pos)
        return A.Matcher("label", self.label(), pos=tok.pos)

    def matcher(self) -> A.Matcher:
        tok = self.tok
        parts = [self.matcher_atom()]
        while self.at("&"):
            self.advance()
            parts.append(self.matcher_atom())
        if len(parts) == 1:
            return parts[0]
        return A.Matcher("tuple", parts=tuple(parts), pos=tok.pos)

    def pattern(self):
        self.expect("(")

        def entry():
            time = self.label()
            self.expect(":")
            return (time, self.matcher())

        return self.comma_list(")", entry)

    def stmt_query(self):
        start = self.advance()
        qid = None
        if self.tok.kind == "NAME" and self.peek().text == ":" and self.peek().kind == "SYM":
            qid = self.expect_name("query id").text
            self.advance()
        kind = self.expect_keyword(*QUERY_KINDS).text
        target = self.expect_name("family or model name").text
        q = dict(kind=kind, qid=qid, target=target, pos=start.pos)
        if kind == "probabilities" and self.at("keep", "NAME"):
            self.advance()
            self.expect("(")
            q["keep"] = self.comma_list(")", self.label)
        elif kind == "conditional":
            self.expect_keyword("target")
            q["target_pattern"] = self.pattern()
            self.expect_keyword("given")
            q["given_pattern"] = self.pattern()
        elif kind == "inference":
            self.expect_keyword("state")
            q["initial"] = self.initial()
        elif kind == "noncontextuality":
            self.expect(",")
            q["second"] = self.expect_name("model name").text
            self.expect_keyword("groups")
            self.expect("{")

            def group():
                label = self.label()
                self.expect(":")
                self.expect("{")
                return (label, self.comma_list("}", self.label))

            q["groups"] = self.comma_list("}", group)
            self.expect_keyword("probes")
            self.expect("{")
            q["probes"] = self.comma_list("}", lambda: self.expect_name("ket name").text)
        return A.QueryDecl(**q)

    # --- expressions --------------------------------------------------------

    def expr(self):
        left = self.mult()
        while self.at("+") or self.at("-"):
            op = self.advance()
            left = A.Binary(op.text, left, self.mult(), pos=op.pos)
        return left

    def mult(self):
        left = self.unary()
        while self.at("*") or self.at("/") or self.at("(x)"):
            op = self.advance()
            left = A.Binary(op.text, left, self.unary(), pos=op.pos)
        return left

    def unary(self):
        if self.at("-") or self.at("+"):
            op = self.advance()
            return A.Unary(op.text, self.unary(), pos=op.pos)
        return self.power()

    def power(self):
        base = self.primary()
        if self.at("^"):
            op = self.advance()
            return A.Binary("^", base, self.unary(), pos=op.pos)
        return base

    def primary(self):
        tok = self.tok
        if tok.kind == "NUMBER":
            self.advance()
            return A.Num(tok.text, pos=tok.pos)
        if tok.kind == "NAME":
            if tok.text in CONSTANTS:
                self.advance()
                return A.Const(tok.text, pos=tok.pos)
            if tok.text in FUNCTIONS:
                self.advance()
                self.expect("(")
                args = self.comma_list(")", self.expr)
                return A.Call(tok.text, args, pos=tok.pos)
            if tok.text in KEYWORDS:
                raise self.error("expected an expression", ["expression"])
            self.advance()
            return A.Ref(tok.text, pos=tok.pos)
        if self.at("("):
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        if self.at("["):
            nxt, after = self.peek(), self.peek(2)
            if nxt.kind == "NAME" and nxt.text not in RESERVED and after.text == "]" and after.kind == "SYM":
                self.advance()
                self.advance()
                self.advance()
                return A.Proj(nxt.text, pos=tok.pos)
            self.advance()
            return A.ListLit(self.comma_list("]", self.expr), pos=tok.pos)
        if self.at("|"):
            self.advance()
            ket = self.expect_name("ket name").text
            self.expect(">")
            self.expect("<")
            bra = self.expect_name("ket name").text
            self.expect("|")
            return A.Dyad(ket, bra, pos=tok.pos)
        raise self.error("expected an expression", ["number", "name", "(", "[", "|"])


def parse_program(text: str, origin: str = "<inline>") -> A.Program:
    return Parser(text, origin).parse_program()
