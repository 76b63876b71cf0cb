"""Abstract syntax: unrefined types, refined types, expressions, programs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .. import logic as L
from ..logic import Sort, Term

Pos = Optional[tuple]  # (line, col)


# ---------------------------------------------------------------------------
# Unrefined types


@dataclass(frozen=True)
class UVar:
    name: str


@dataclass(frozen=True)
class UBase:
    sort: Sort


@dataclass(frozen=True)
class UCon:
    name: str
    args: tuple


@dataclass(frozen=True)
class UFun:
    x: str
    arg: "UType"
    res: "UType"


@dataclass(frozen=True)
class UAll:
    tvar: str
    body: "UType"


@dataclass(frozen=True)
class UMeta:
    """Unification variable; never survives elaboration."""

    id: int


UType = Union[UVar, UBase, UCon, UFun, UAll, UMeta]


def show_utype(t: UType, ctx: int = 0) -> str:
    if isinstance(t, UVar):
        return t.name
    if isinstance(t, UBase):
        return str(t.sort)
    if isinstance(t, UMeta):
        return f"?{t.id}"
    if isinstance(t, UCon):
        if not t.args:
            return t.name
        s = " ".join([t.name, *(show_utype(a, 2) for a in t.args)])
        return f"({s})" if ctx >= 2 else s
    if isinstance(t, UFun):
        s = f"{show_utype(t.arg, 1)} -> {show_utype(t.res, 0)}"
        return f"({s})" if ctx >= 1 else s
    if isinstance(t, UAll):
        s = f"forall {t.tvar}. {show_utype(t.body, 0)}"
        return f"({s})" if ctx >= 1 else s
    raise TypeError(t)


def utype_eq(a: UType, b: UType) -> bool:
    """Structural equality that ignores function binder names."""
    if isinstance(a, UFun) and isinstance(b, UFun):
        return utype_eq(a.arg, b.arg) and utype_eq(a.res, b.res)
    if isinstance(a, UCon) and isinstance(b, UCon):
        return a.name == b.name and len(a.args) == len(b.args) and all(
            utype_eq(x, y) for x, y in zip(a.args, b.args))
    if isinstance(a, UAll) and isinstance(b, UAll):
        return utype_eq(a.body, usubst_tvar(b.body, b.tvar, UVar(a.tvar)))
    return a == b


def usubst_tvar(t: UType, a: str, s: UType) -> UType:
    if isinstance(t, UVar):
        return s if t.name == a else t
    if isinstance(t, UCon):
        return UCon(t.name, tuple(usubst_tvar(x, a, s) for x in t.args))
    if isinstance(t, UFun):
        return UFun(t.x, usubst_tvar(t.arg, a, s), usubst_tvar(t.res, a, s))
    if isinstance(t, UAll):
        return t if t.tvar == a else UAll(t.tvar, usubst_tvar(t.body, a, s))
    return t


# ---------------------------------------------------------------------------
# Refined types


class Hole:
    """The ``_`` refinement in a signature: an unknown to be synthesized."""

    def __repr__(self) -> str:
        return "HOLE"


HOLE = Hole()


@dataclass(frozen=True)
class RVar:
    name: str


@dataclass(frozen=True)
class RBase:
    v: str
    sort: Sort
    pred: object  # Term, or HOLE in surface signatures


@dataclass(frozen=True)
class RCon:
    name: str
    args: tuple


@dataclass(frozen=True)
class RFun:
    x: str
    arg: "RType"
    res: "RType"


@dataclass(frozen=True)
class RAll:
    tvar: str
    body: "RType"


RType = Union[RVar, RBase, RCon, RFun, RAll]


def shape(t: RType) -> UType:
    if isinstance(t, RVar):
        return UVar(t.name)
    if isinstance(t, RBase):
        return UBase(t.sort)
    if isinstance(t, RCon):
        return UCon(t.name, tuple(shape(a) for a in t.args))
    if isinstance(t, RFun):
        return UFun(t.x, shape(t.arg), shape(t.res))
    if isinstance(t, RAll):
        return UAll(t.tvar, shape(t.body))
    raise TypeError(t)


def trivial(u: UType) -> RType:
    """The refinement-free RType of a given shape."""
    if isinstance(u, UVar):
        return RVar(u.name)
    if isinstance(u, UBase):
        return RBase("v", u.sort, L.TRUE)
    if isinstance(u, UCon):
        return RCon(u.name, tuple(trivial(a) for a in u.args))
    if isinstance(u, UFun):
        return RFun(u.x, trivial(u.arg), trivial(u.res))
    if isinstance(u, UAll):
        return RAll(u.tvar, trivial(u.body))
    raise TypeError(u)


def rtype_free_vars(t: RType) -> frozenset[str]:
    if isinstance(t, RBase):
        if isinstance(t.pred, Hole):
            return frozenset()
        return L.free_vars(t.pred) - {t.v}
    if isinstance(t, RCon):
        return frozenset().union(*(rtype_free_vars(a) for a in t.args))
    if isinstance(t, RFun):
        return rtype_free_vars(t.arg) | (rtype_free_vars(t.res) - {t.x})
    if isinstance(t, RAll):
        return rtype_free_vars(t.body)
    return frozenset()


def rtype_kvars(t: RType) -> frozenset:
    if isinstance(t, RBase):
        return frozenset() if isinstance(t.pred, Hole) else L.kvars(t.pred)
    if isinstance(t, RCon):
        return frozenset().union(*(rtype_kvars(a) for a in t.args))
    if isinstance(t, RFun):
        return rtype_kvars(t.arg) | rtype_kvars(t.res)
    if isinstance(t, RAll):
        return rtype_kvars(t.body)
    return frozenset()


_RSUPPLY = L.NameSupply()


def rsubst(t: RType, mapping: dict[str, str]) -> RType:
    """Capture-avoiding renaming of free term variables inside refinements."""
    mapping = {a: b for a, b in mapping.items() if a != b}
    if not mapping:
        return t
    if isinstance(t, RBase):
        if isinstance(t.pred, Hole):
            return t
        m = {a: b for a, b in mapping.items() if a != t.v}
        v, pred = t.v, t.pred
        if v in m.values():
            new = _RSUPPLY.fresh(v)
            pred, v = L.subst(pred, {v: new}), new
        return RBase(v, t.sort, L.subst(pred, m))
    if isinstance(t, RCon):
        return RCon(t.name, tuple(rsubst(a, mapping) for a in t.args))
    if isinstance(t, RFun):
        arg = rsubst(t.arg, mapping)
        m = {a: b for a, b in mapping.items() if a != t.x}
        x, res = t.x, t.res
        if x in m.values():
            new = _RSUPPLY.fresh(x)
            res, x = rsubst(res, {x: new}), new
        return RFun(x, arg, rsubst(res, m))
    if isinstance(t, RAll):
        return RAll(t.tvar, rsubst(t.body, mapping))
    return t


def rsubst_tvar(t: RType, a: str, s: RType) -> RType:
    """Replace type variable ``a`` by ``s`` (templates are closed, so no capture)."""
    if isinstance(t, RVar):
        return s if t.name == a else t
    if isinstance(t, RCon):
        return RCon(t.name, tuple(rsubst_tvar(x, a, s) for x in t.args))
    if isinstance(t, RFun):
        return RFun(t.x, rsubst_tvar(t.arg, a, s), rsubst_tvar(t.res, a, s))
    if isinstance(t, RAll):
        return t if t.tvar == a else RAll(t.tvar, rsubst_tvar(t.body, a, s))
    return t


def show_rtype(t: RType, ctx: int = 0) -> str:
    if isinstance(t, RVar):
        return t.name
    if isinstance(t, RBase):
        if isinstance(t.pred, Hole):
            return f"{{{t.v}:{t.sort} | _}}"
        if t.pred is L.TRUE:
            return str(t.sort)
        return f"{{{t.v}:{t.sort} | {L.show(t.pred)}}}"
    if isinstance(t, RCon):
        if not t.args:
            return t.name
        s = " ".join([t.name, *(show_rtype(a, 2) for a in t.args)])
        return f"({s})" if ctx >= 2 else s
    if isinstance(t, RFun):
        left = show_rtype(t.arg, 1)
        if not t.x.startswith("_") and "$" not in t.x:
            left = f"{t.x}:{left}"
        s = f"{left} -> {show_rtype(t.res, 0)}"
        return f"({s})" if ctx >= 1 else s
    if isinstance(t, RAll):
        s = f"forall {t.tvar}. {show_rtype(t.body, 0)}"
        return f"({s})" if ctx >= 1 else s
    raise TypeError(t)


# ---------------------------------------------------------------------------
# Expressions


@dataclass(frozen=True)
class Const:
    value: object  # int, bool or ()
    pos: Pos = field(default=None, compare=False)


@dataclass(frozen=True)
class Var:
    name: str
    pos: Pos = field(default=None, compare=False)


@dataclass(frozen=True)
class Lam:
    x: str
    ann: Optional[object]  # UType after elaboration; surface RType or None before
    body: "Expr"
    pos: Pos = field(default=None, compare=False)


@dataclass(frozen=True)
class Let:
    x: str
    bound: "Expr"
    body: "Expr"
    pos: Pos = field(default=None, compare=False)


@dataclass(frozen=True)
class App:
    fn: "Expr"
    arg: "Expr"  # a Var after ANF
    pos: Pos = field(default=None, compare=False)


@dataclass(frozen=True)
class TyLam:
    tvar: str
    body: "Expr"
    pos: Pos = field(default=None, compare=False)


@dataclass(frozen=True)
class TyApp:
    expr: "Expr"
    ann: object  # UType
    pos: Pos = field(default=None, compare=False)


@dataclass(frozen=True)
class If:
    cond: "Expr"  # a Var after ANF
    then: "Expr"
    els: "Expr"
    pos: Pos = field(default=None, compare=False)


Expr = Union[Const, Var, Lam, Let, App, TyLam, TyApp, If]


def show_const(c: object) -> str:
    if c is True:
        return "True"
    if c is False:
        return "False"
    if c == ():
        return "()"
    return str(c) if c >= 0 else f"({c})"


OPERATOR_CHARS = set("+-*/<>=&|.:!")


def show_name(x: str) -> str:
    return f"({x})" if x and x[0] in OPERATOR_CHARS else x


def show_expr(e: Expr, ctx: int = 0) -> str:
    """Pretty-print in the surface syntax; the output re-parses to ``e``."""
    if isinstance(e, Const):
        return show_const(e.value)
    if isinstance(e, Var):
        return show_name(e.name)
    if isinstance(e, Lam):
        binder = e.x if e.ann is None else f"({e.x} : {_show_ann(e.ann)})"
        s = f"\\{binder} -> {show_expr(e.body, 0)}"
        return f"({s})" if ctx > 0 else s
    if isinstance(e, Let):
        s = f"let {show_name(e.x)} = {show_expr(e.bound, 0)} in {show_expr(e.body, 0)}"
        return f"({s})" if ctx > 0 else s
    if isinstance(e, If):
        s = f"if {show_expr(e.cond, 0)} then {show_expr(e.then, 0)} else {show_expr(e.els, 0)}"
        return f"({s})" if ctx > 0 else s
    if isinstance(e, App):
        s = f"{show_expr(e.fn, 1)} {show_expr(e.arg, 2)}"
        return f"({s})" if ctx > 1 else s
    if isinstance(e, TyApp):
        s = f"{show_expr(e.expr, 1)} @{_show_ann(e.ann, 2)}"
        return f"({s})" if ctx > 1 else s
    if isinstance(e, TyLam):
        s = f"/\\{e.tvar} -> {show_expr(e.body, 0)}"
        return f"({s})" if ctx > 0 else s
    raise TypeError(e)


def _show_ann(t, ctx: int = 1) -> str:
    if isinstance(t, (UVar, UBase, UCon, UFun, UAll, UMeta)):
        return show_utype(t, ctx)
    return show_rtype(t, ctx)


def expr_free_vars(e: Expr) -> frozenset[str]:
    if isinstance(e, Var):
        return frozenset((e.name,))
    if isinstance(e, Const):
        return frozenset()
    if isinstance(e, Lam):
        return expr_free_vars(e.body) - {e.x}
    if isinstance(e, Let):
        return expr_free_vars(e.bound) | (expr_free_vars(e.body) - {e.x})
    if isinstance(e, App):
        return expr_free_vars(e.fn) | expr_free_vars(e.arg)
    if isinstance(e, If):
        return expr_free_vars(e.cond) | expr_free_vars(e.then) | expr_free_vars(e.els)
    if isinstance(e, (TyLam,)):
        return expr_free_vars(e.body)
    if isinstance(e, TyApp):
        return expr_free_vars(e.expr)
    raise TypeError(e)


def pos_of(e: Expr) -> Pos:
    return getattr(e, "pos", None)


# ---------------------------------------------------------------------------
# Programs


@dataclass(frozen=True)
class DataDecl:
    name: str
    arity: int
    pos: Pos = field(default=None, compare=False)


@dataclass(frozen=True)
class PrimDecl:
    name: str
    type: RType
    pos: Pos = field(default=None, compare=False)


@dataclass(frozen=True)
class UninterpDecl:
    name: str
    sig: L.FunSig
    pos: Pos = field(default=None, compare=False)


@dataclass(frozen=True)
class AliasDecl:
    name: str
    type: RType
    pos: Pos = field(default=None, compare=False)


@dataclass(frozen=True)
class SigDecl:
    name: str
    type: RType
    pos: Pos = field(default=None, compare=False)


@dataclass(frozen=True)
class DefDecl:
    name: str
    body: Expr
    pos: Pos = field(default=None, compare=False)


@dataclass(frozen=True)
class QualDecl:
    name: str
    params: tuple  # ((name, sort-or-None), ...); None is a wildcard sort
    body: Term
    pos: Pos = field(default=None, compare=False)


Decl = Union[DataDecl, PrimDecl, UninterpDecl, AliasDecl, SigDecl, DefDecl, QualDecl]


@dataclass
class Program:
    decls: list

    def of(self, cls) -> list:
        return [d for d in self.decls if isinstance(d, cls)]


def show_qualifier(q: QualDecl) -> str:
    params = ", ".join(f"{x}:{s.name if s else 'a'}" for x, s in q.params)
    return f"qualif {q.name}({params}): ({L.show(q.body)})"


def show_decl(d: Decl) -> str:
    if isinstance(d, DataDecl):
        return f"data {d.name} {d.arity}"
    if isinstance(d, PrimDecl):
        return f"primitive {show_name(d.name)} :: {show_rtype(d.type)}"
    if isinstance(d, UninterpDecl):
        return f"uninterp {d.name} :: {d.sig}"
    if isinstance(d, AliasDecl):
        return f"type {d.name} = {show_rtype(d.type)}"
    if isinstance(d, SigDecl):
        return f"{show_name(d.name)} :: {show_rtype(d.type)}"
    if isinstance(d, DefDecl):
        return f"{show_name(d.name)} = {show_expr(d.body)}"
    if isinstance(d, QualDecl):
        return show_qualifier(d)
    raise TypeError(d)


def show_program(p: Program) -> str:
    return "\n".join(show_decl(d) for d in p.decls) + "\n"
