"""Lexer and recursive-descent parser for ``.lf`` source files.

Layout is handled with two rules.  A token in column 1 that starts a line
always ends the current declaration.  Inside a ``let`` block, a token that
starts a line at or left of the block column and looks like the start of a
binding (``name args* =``) ends the current binding.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .. import logic as L
from . import syntax as S


class ParseError(Exception):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {msg}")
        self.msg = msg
        self.line = line
        self.col = col


@dataclass
class Tok:
    kind: str  # int, ident, con, op, punct, kw, eof
    text: str
    line: int
    col: int
    first: bool = False


KEYWORDS = {"let", "in", "if", "then", "else", "data", "primitive", "uninterp",
            "type", "qualif", "forall", "True", "False", "true", "false"}

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>--[^\n]*)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<punct>[()\[\]{},\\@])
  | (?P<op>[+\-*/<>=&|.:!]+)
  | (?P<bad>.)
""", re.VERBOSE)


def tokenize(text: str) -> list[Tok]:
    toks: list[Tok] = []
    line, line_start = 1, 0
    at_line_start = True
    for m in _TOKEN_RE.finditer(text):
        kind = m.lastgroup
        col = m.start() - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
            at_line_start = True
            continue
        if kind in ("ws", "comment"):
            continue
        s = m.group()
        if kind == "bad":
            if s == "$":
                raise ParseError("'$' is reserved for generated names", line, col)
            raise ParseError(f"unexpected character {s!r}", line, col)
        if kind == "ident":
            if s in KEYWORDS:
                kind = "kw"
            elif s[0].isupper():
                kind = "con"
        toks.append(Tok(kind, s, line, col, at_line_start))
        at_line_start = False
    toks.append(Tok("eof", "", line + 1, 1, True))
    return toks


# Binary operators: symbol -> (precedence, associativity, prelude name)
BINOPS = {
    "||": (2, "right", "||"),
    "&&": (3, "right", "&&"),
    "==": (4, "none", "=="),
    "/=": (4, "none", "/="),
    "<": (4, "none", "<"),
    "<=": (4, "none", "<="),
    ">": (4, "none", ">"),
    ">=": (4, "none", ">="),
    ":": (5, "right", "cons"),
    "+": (6, "left", "+"),
    "-": (6, "left", "-"),
    "*": (7, "left", "*"),
    "/": (7, "left", "/"),
    ".": (9, "right", "compose"),
}

# operator sections usable as names, e.g. (+) or (.)
SECTION_NAMES = {op: name for op, (_, _, name) in BINOPS.items()}

REL_OPS = {"=": "=", "==": "=", "!=": "!=", "/=": "!=", "<": "<", "<=": "<=", ">": ">", ">=": ">="}


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.layout: list[int] = [1]
        self.decl_layout = True  # a token in column 1 starts a new declaration

    # -- token helpers -----------------------------------------------------

    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def advance(self) -> Tok:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def error(self, msg: str, tok: Tok | None = None) -> ParseError:
        t = tok or self.tok
        return ParseError(msg, t.line, t.col)

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.tok
        return t.kind == kind and (text is None or t.text == text)

    def at_punct(self, text: str) -> bool:
        return self.at("punct", text)

    def expect(self, kind: str, text: str | None = None) -> Tok:
        if not self.at(kind, text):
            want = text or kind
            got = self.tok.text or "end of input"
            raise self.error(f"expected {want!r}, found {got!r}")
        return self.advance()

    def binding_starts_at(self, j: int) -> bool:
        """Does ``name args* =`` start at token index j?"""
        t = self.toks[j]
        if t.kind == "ident":
            j += 1
        elif t.kind == "punct" and t.text == "(" and self.toks[j + 1].kind == "op" \
                and self.toks[j + 2].text == ")":
            j += 3
        else:
            return False
        while self.toks[j].kind == "ident":
            j += 1
        return self.toks[j].kind == "op" and self.toks[j].text == "="

    def is_stop(self) -> bool:
        t = self.tok
        if t.kind == "eof":
            return True
        if not t.first:
            return False
        if t.col == 1 and self.decl_layout:
            return True
        return t.col <= self.layout[-1] and self.binding_starts_at(self.i)

    def pos(self, t: Tok | None = None) -> tuple[int, int]:
        t = t or self.tok
        return (t.line, t.col)

    # -- program -----------------------------------------------------------

    def program(self) -> S.Program:
        decls = []
        while not self.at("eof"):
            if self.tok.col != 1:
                raise self.error("declarations must start in column 1")
            decls.append(self.decl())
            if not self.at("eof") and not (self.tok.first and self.tok.col == 1):
                raise self.error(f"unexpected {self.tok.text!r}")
        return S.Program(decls)

    def decl(self):
        t = self.tok
        p = self.pos()
        if self.at("kw", "data"):
            self.advance()
            name = self.expect("con").text
            if self.at("int"):
                arity = int(self.advance().text)
            else:
                arity = 0
                while self.at("ident"):
                    self.advance()
                    arity += 1
            return S.DataDecl(name, arity, p)
        if self.at("kw", "primitive"):
            self.advance()
            name = self.var_name()
            self.expect("op", "::")
            return S.PrimDecl(name, self.type_(), p)
        if self.at("kw", "uninterp"):
            self.advance()
            name = self.expect("ident").text
            self.expect("op", "::")
            sorts = [self.sort_name()]
            while self.at("op", "->"):
                self.advance()
                sorts.append(self.sort_name())
            return S.UninterpDecl(name, L.FunSig(tuple(sorts[:-1]), sorts[-1]), p)
        if self.at("kw", "type"):
            self.advance()
            name = self.expect("con").text
            self.expect("op", "=")
            return S.AliasDecl(name, self.type_(), p)
        if self.at("kw", "qualif"):
            return self.qualifier()
        if t.kind in ("ident", "punct"):
            name = self.var_name()
            if self.at("op", "::"):
                self.advance()
                return S.SigDecl(name, self.type_(), p)
            params = []
            while self.at("ident"):
                params.append(self.advance())
            self.expect("op", "=")
            body = self.expr()
            for pt in reversed(params):
                body = S.Lam(pt.text, None, body, (pt.line, pt.col))
            return S.DefDecl(name, body, p)
        raise self.error(f"unexpected {t.text!r} at start of declaration")

    def var_name(self) -> str:
        if self.at("ident"):
            return self.advance().text
        if self.at_punct("("):
            self.advance()
            if self.at("op"):
                op = self.advance().text
                self.expect("punct", ")")
                return op
        raise self.error("expected a name")

    def sort_name(self) -> L.Sort:
        t = self.expect("con")
        return L.BASE_SORTS.get(t.text) or L.Sort(t.text)

    def qualifier(self) -> S.QualDecl:
        p = self.pos()
        self.expect("kw", "qualif")
        name = self.expect("con").text if self.at("con") else self.expect("ident").text
        self.expect("punct", "(")
        params = []
        while not self.at_punct(")"):
            x = self.expect("ident").text
            self.expect("op", ":")
            st = self.advance()
            if st.kind == "con":
                sort = L.BASE_SORTS.get(st.text) or L.Sort(st.text)
            elif st.kind == "ident":
                sort = None  # wildcard
            else:
                raise self.error("expected a sort", st)
            params.append((x, sort))
            if self.at_punct(","):
                self.advance()
        self.expect("punct", ")")
        self.expect("op", ":")
        body = self.pred()
        return S.QualDecl(name, tuple(params), body, p)

    # -- types -------------------------------------------------------------

    def type_(self):
        if self.at("kw", "forall"):
            self.advance()
            tvs = []
            while self.at("ident"):
                tvs.append(self.advance().text)
            self.expect("op", ".")
            body = self.type_()
            for a in reversed(tvs):
                body = S.RAll(a, body)
            return body
        x = "_"
        if self.at("ident") and self.peek().kind == "op" and self.peek().text == ":":
            x = self.advance().text
            self.advance()
        arg = self.btype()
        if self.at("op", "->"):
            self.advance()
            return S.RFun(x, arg, self.type_())
        if x != "_":
            raise self.error("a binder must be followed by '->'")
        return arg

    def btype(self):
        if self.at("con"):
            name = self.advance().text
            args = []
            while (self.at("con") or self.at("ident") or self.at_punct("(")
                   or self.at_punct("{")) and not self.is_stop():
                if self.at("ident") and self.peek().kind == "op" and self.peek().text == ":":
                    break
                args.append(self.atype())
            return S.RCon(name, tuple(args))
        return self.atype()

    def atype(self):
        if self.at("con"):
            return S.RCon(self.advance().text, ())
        if self.at("ident"):
            return S.RVar(self.advance().text)
        if self.at_punct("("):
            self.advance()
            t = self.type_()
            self.expect("punct", ")")
            return t
        if self.at_punct("{"):
            self.advance()
            v = self.expect("ident").text
            self.expect("op", ":")
            base = self.expect("con")
            sort = L.BASE_SORTS.get(base.text)
            if sort is None:
                raise self.error(f"refinements apply to Int, Bool or Unit, not {base.text}", base)
            self.expect("op", "|")
            if self.at("ident", "_"):
                self.advance()
                pred = S.HOLE
            else:
                pred = self.pred()
            self.expect("punct", "}")
            return S.RBase(v, sort, pred)
        raise self.error("expected a type")

    # -- refinement predicates ---------------------------------------------

    def pred(self) -> L.Term:
        left = self.pred_imp()
        if self.at("op", "<=>"):
            self.advance()
            return L.Iff(left, self.pred_imp())
        return left

    def pred_imp(self) -> L.Term:
        left = self.pred_or()
        if self.at("op", "=>"):
            self.advance()
            return L.Op("=>", (left, self.pred_imp()))
        return left

    def pred_or(self) -> L.Term:
        parts = [self.pred_and()]
        while self.at("op", "||"):
            self.advance()
            parts.append(self.pred_and())
        return parts[0] if len(parts) == 1 else L.Op("or", parts)

    def pred_and(self) -> L.Term:
        parts = [self.pred_not()]
        while self.at("op", "&&"):
            self.advance()
            parts.append(self.pred_not())
        return parts[0] if len(parts) == 1 else L.Op("and", parts)

    def pred_not(self) -> L.Term:
        if self.at("op", "!") or self.at("ident", "not"):
            self.advance()
            return L.Op("not", (self.pred_not(),))
        return self.pred_cmp()

    def pred_cmp(self) -> L.Term:
        left = self.pred_arith()
        if self.at("op") and self.tok.text in REL_OPS:
            op = REL_OPS[self.advance().text]
            return L.Op(op, (left, self.pred_arith()))
        return left

    def pred_arith(self) -> L.Term:
        left = self.pred_term()
        while self.at("op", "+") or self.at("op", "-"):
            op = self.advance().text
            left = L.Op(op, (left, self.pred_term()))
        return left

    def pred_term(self) -> L.Term:
        left = self.pred_unary()
        while self.at("op", "*"):
            self.advance()
            left = L.Op("*", (left, self.pred_unary()))
        return left

    def pred_unary(self) -> L.Term:
        if self.at("op", "-"):
            self.advance()
            if self.at("int"):
                return L.IntConst(-int(self.advance().text))
            return L.Op("neg", (self.pred_unary(),))
        return self.pred_atom()

    def pred_atom(self) -> L.Term:
        t = self.tok
        if t.kind == "int":
            self.advance()
            return L.IntConst(int(t.text))
        if t.kind == "kw" and t.text in ("true", "True"):
            self.advance()
            return L.TRUE
        if t.kind == "kw" and t.text in ("false", "False"):
            self.advance()
            return L.FALSE
        if t.kind == "ident":
            self.advance()
            if self.at_punct("(") and self.tok.line == t.line and self.tok.col == t.col + len(t.text):
                self.advance()
                args = []
                while not self.at_punct(")"):
                    args.append(self.pred_arith())
                    if self.at_punct(","):
                        self.advance()
                self.expect("punct", ")")
                return L.UApp(t.text, args)
            return L.Var(t.text)
        if self.at_punct("("):
            self.advance()
            p = self.pred()
            self.expect("punct", ")")
            return p
        raise self.error("expected a predicate")

    # -- expressions -------------------------------------------------------

    def expr(self):
        t = self.tok
        if self.is_stop():
            raise self.error("expected an expression")
        if self.at_punct("\\"):
            self.advance()
            params = []
            while not self.at("op", "->"):
                pt = self.tok
                if self.at("ident"):
                    params.append((self.advance().text, None, pt))
                elif self.at_punct("("):
                    self.advance()
                    x = self.expect("ident").text
                    self.expect("op", ":")
                    ann = self.type_()
                    self.expect("punct", ")")
                    params.append((x, ann, pt))
                else:
                    raise self.error("expected a lambda parameter")
            if not params:
                raise self.error("lambda without parameters")
            self.expect("op", "->")
            body = self.expr()
            for x, ann, pt in reversed(params):
                body = S.Lam(x, ann, body, self.pos(pt))
            return body
        if self.at("kw", "let"):
            return self.let_block()
        if self.at("kw", "if"):
            self.advance()
            c = self.expr()
            self.expect("kw", "then")
            a = self.expr()
            self.expect("kw", "else")
            b = self.expr()
            return S.If(c, a, b, self.pos(t))
        return self.opexpr(0)

    def let_block(self):
        let_tok = self.expect("kw", "let")
        if not self.binding_starts_at(self.i):
            raise self.error("expected a binding after 'let'")
        block_col = self.tok.col
        bindings = []
        self.layout.append(block_col)
        try:
            while True:
                bt = self.tok
                name = self.var_name()
                params = []
                while self.at("ident"):
                    params.append(self.advance())
                self.expect("op", "=")
                bound = self.expr()
                for pt in reversed(params):
                    bound = S.Lam(pt.text, None, bound, self.pos(pt))
                bindings.append((name, bound, self.pos(bt)))
                if self.tok.first and self.tok.col == block_col and self.binding_starts_at(self.i):
                    continue
                if self.at_punct(",") or self.at("op", ";"):
                    self.advance()
                    continue
                break
        finally:
            self.layout.pop()
        self.expect("kw", "in")
        body = self.expr()
        for name, bound, p in reversed(bindings):
            body = S.Let(name, bound, body, p)
        return body

    def opexpr(self, min_prec: int):
        left = self.app()
        while self.at("op") and self.tok.text in BINOPS and not self.is_stop():
            op = self.tok
            prec, assoc, name = BINOPS[op.text]
            if prec < min_prec:
                break
            self.advance()
            nxt = prec + 1 if assoc in ("left", "none") else prec
            if self.at_punct("\\") or self.at("kw", "let") or self.at("kw", "if"):
                right = self.expr()
            else:
                right = self.opexpr(nxt)
            p = (op.line, op.col)
            left = S.App(S.App(S.Var(name, p), left, p), right, p)
            if assoc == "none" and self.at("op") and self.tok.text in BINOPS \
                    and BINOPS[self.tok.text][0] == prec:
                raise self.error(f"operator {self.tok.text} is non-associative")
        return left

    def starts_atom(self) -> bool:
        t = self.tok
        if self.is_stop():
            return False
        if t.kind in ("int", "ident", "con"):
            return True
        if t.kind == "kw" and t.text in ("True", "False"):
            return True
        return t.kind == "punct" and t.text in ("(", "[")

    def app(self):
        head = self.aexpr()
        while True:
            if self.at_punct("@") and not self.is_stop():
                at = self.advance()
                head = S.TyApp(head, self.atype(), self.pos(at))
            elif self.starts_atom():
                arg = self.aexpr()
                head = S.App(head, arg, S.pos_of(head))
            else:
                return head

    def aexpr(self):
        t = self.tok
        p = self.pos()
        if t.kind == "int":
            self.advance()
            return S.Const(int(t.text), p)
        if t.kind == "kw" and t.text in ("True", "False"):
            self.advance()
            return S.Const(t.text == "True", p)
        if t.kind == "ident":
            self.advance()
            return S.Var(t.text, p)
        if t.kind == "con":
            raise self.error(f"constructor {t.text} used as a value (use the prelude functions)")
        if self.at_punct("["):
            self.advance()
            items = []
            while not self.at_punct("]"):
                items.append(self.expr())
                if self.at_punct(","):
                    self.advance()
                elif not self.at_punct("]"):
                    raise self.error("expected ',' or ']'")
            self.expect("punct", "]")
            out = S.Var("nil", p)
            for item in reversed(items):
                ip = S.pos_of(item)
                out = S.App(S.App(S.Var("cons", ip), item, ip), out, ip)
            return out
        if self.at_punct("("):
            self.advance()
            if self.at_punct(")"):
                self.advance()
                return S.Const((), p)
            if self.at("op") and self.peek().kind == "punct" and self.peek().text == ")":
                op = self.advance().text
                self.advance()
                return S.Var(SECTION_NAMES.get(op, op), p)
            if self.at("op", "-") and self.peek().kind == "int" and self.peek(2).text == ")":
                self.advance()
                n = int(self.advance().text)
                self.advance()
                return S.Const(-n, p)
            e = self.expr()
            self.expect("punct", ")")
            return e
        raise self.error(f"unexpected {t.text or 'end of input'!r}")


def parse_program(text: str) -> S.Program:
    return Parser(text).program()


def parse_expr(text: str):
    p = Parser(text)
    p.layout = [0]
    p.decl_layout = False
    e = p.expr()
    if not p.at("eof"):
        raise p.error(f"unexpected {p.tok.text!r}")
    return e


def parse_type(text: str):
    p = Parser(text)
    t = p.type_()
    if not p.at("eof"):
        raise p.error(f"unexpected {p.tok.text!r}")
    return t


def parse_pred(text: str) -> L.Term:
    p = Parser(text)
    t = p.pred()
    if not p.at("eof"):
        raise p.error(f"unexpected {p.tok.text!r}")
    return t


def parse_qualifiers(text: str) -> list[S.QualDecl]:
    """Parse a qualifier file: one ``qualif Name(x:Int, v:Int): (pred)`` per line."""
    prog = parse_program(text)
    out = []
    for d in prog.decls:
        if not isinstance(d, S.QualDecl):
            raise ParseError("only qualifier declarations are allowed here", *(d.pos or (1, 1)))
        out.append(d)
    return out
