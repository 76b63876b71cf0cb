"""Name and type resolution.

Resolves type aliases and declared constructors in signatures, sort-checks
every refinement, and elaborates definitions into the explicitly typed core:
lambdas get their parameter shape and every use of a polymorphic name gets
explicit type instantiations, found by first-order unification.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .. import logic as L
from . import syntax as S


class ElabError(Exception):
    def __init__(self, msg: str, pos=None):
        where = f"{pos[0]}:{pos[1]}: " if pos else ""
        super().__init__(where + msg)
        self.msg = msg
        self.pos = pos


@dataclass
class Module:
    """A resolved and elaborated program, prelude included."""

    datas: dict = field(default_factory=dict)          # name -> arity
    uninterps: dict = field(default_factory=dict)      # name -> FunSig
    aliases: dict = field(default_factory=dict)        # name -> RType
    prims: dict = field(default_factory=dict)          # name -> closed RType scheme
    sigs: dict = field(default_factory=dict)           # name -> RType (holes allowed)
    sig_pos: dict = field(default_factory=dict)
    defs: list = field(default_factory=list)           # [(name, core Expr, pos)]
    quals: list = field(default_factory=list)          # [QualDecl]

    def logic_env(self) -> dict:
        return dict(self.uninterps)


class Resolver:
    def __init__(self, mod: Module, supply: L.NameSupply):
        self.mod = mod
        self.supply = supply

    def rtype(self, t, pos=None, allow_holes=False, scope=None):
        """Resolve a surface type.  ``scope`` maps in-scope binders to sorts."""
        scope = dict(self.mod.uninterps) if scope is None else scope
        return self._go(t, pos, allow_holes, scope)

    def _go(self, t, pos, allow_holes, scope):
        if isinstance(t, S.RVar):
            return t
        if isinstance(t, S.RBase):
            if isinstance(t.pred, S.Hole):
                if not allow_holes:
                    raise ElabError("'_' refinements are only allowed in top-level signatures", pos)
                return t
            inner = {**scope, t.v: t.sort}
            msg = L.sort_diagnostic(inner, t.pred)
            if msg:
                raise ElabError(f"ill-sorted refinement {{{t.v}:{t.sort} | {L.show(t.pred)}}}: {msg}", pos)
            return t
        if isinstance(t, S.RCon):
            if t.name in L.BASE_SORTS:
                if t.args:
                    raise ElabError(f"{t.name} takes no arguments", pos)
                return S.RBase("v", L.BASE_SORTS[t.name], L.TRUE)
            if t.name in self.mod.aliases:
                if t.args:
                    raise ElabError(f"type alias {t.name} takes no arguments", pos)
                return self._go(self.mod.aliases[t.name], pos, allow_holes, scope)
            if t.name in self.mod.datas:
                arity = self.mod.datas[t.name]
                if len(t.args) != arity:
                    raise ElabError(f"{t.name} expects {arity} argument(s), given {len(t.args)}", pos)
                return S.RCon(t.name, tuple(self._go(a, pos, allow_holes, scope) for a in t.args))
            raise ElabError(f"unknown type {t.name}", pos)
        if isinstance(t, S.RFun):
            x = t.x
            res = t.res
            if x == "_":
                x = self.supply.fresh("a")
            arg = self._go(t.arg, pos, allow_holes, scope)
            inner = dict(scope)
            if isinstance(arg, S.RBase):
                inner[x] = arg.sort
            elif isinstance(arg, S.RFun):
                inner[x] = L.FunSig((), L.UNIT)
            else:
                inner.pop(x, None)
            return S.RFun(x, arg, self._go(res, pos, allow_holes, inner))
        if isinstance(t, S.RAll):
            return S.RAll(t.tvar, self._go(t.body, pos, allow_holes, scope))
        raise ElabError(f"bad type {t!r}", pos)


def quantify(t):
    """Close a type over its free type variables, in order of first appearance."""
    bound: list[str] = []
    seen: list[str] = []

    def walk(u, under):
        if isinstance(u, S.RVar):
            if u.name not in under and u.name not in seen:
                seen.append(u.name)
        elif isinstance(u, S.RCon):
            for a in u.args:
                walk(a, under)
        elif isinstance(u, S.RFun):
            walk(u.arg, under)
            walk(u.res, under)
        elif isinstance(u, S.RAll):
            walk(u.body, under | {u.tvar})

    walk(t, frozenset(bound))
    for a in reversed(seen):
        t = S.RAll(a, t)
    return t


def strip_foralls(t):
    tvs = []
    while isinstance(t, (S.RAll, S.UAll)):
        tvs.append(t.tvar)
        t = t.body
    return tvs, t


# ---------------------------------------------------------------------------
# Unification


class Unifier:
    def __init__(self):
        self.sol: dict[int, S.UType] = {}
        self.ids = itertools.count()

    def meta(self) -> S.UMeta:
        return S.UMeta(next(self.ids))

    def resolve(self, t):
        while isinstance(t, S.UMeta) and t.id in self.sol:
            t = self.sol[t.id]
        return t

    def zonk(self, t):
        t = self.resolve(t)
        if isinstance(t, S.UCon):
            return S.UCon(t.name, tuple(self.zonk(a) for a in t.args))
        if isinstance(t, S.UFun):
            return S.UFun(t.x, self.zonk(t.arg), self.zonk(t.res))
        if isinstance(t, S.UAll):
            return S.UAll(t.tvar, self.zonk(t.body))
        return t

    def occurs(self, m: S.UMeta, t) -> bool:
        t = self.resolve(t)
        if t == m:
            return True
        if isinstance(t, S.UCon):
            return any(self.occurs(m, a) for a in t.args)
        if isinstance(t, S.UFun):
            return self.occurs(m, t.arg) or self.occurs(m, t.res)
        if isinstance(t, S.UAll):
            return self.occurs(m, t.body)
        return False

    def unify(self, a, b, pos=None) -> None:
        a, b = self.resolve(a), self.resolve(b)
        if a == b:
            return
        if isinstance(a, S.UMeta):
            if self.occurs(a, b):
                raise ElabError(f"infinite type {S.show_utype(self.zonk(b))}", pos)
            self.sol[a.id] = b
            return
        if isinstance(b, S.UMeta):
            self.unify(b, a, pos)
            return
        if isinstance(a, S.UFun) and isinstance(b, S.UFun):
            self.unify(a.arg, b.arg, pos)
            self.unify(a.res, b.res, pos)
            return
        if isinstance(a, S.UCon) and isinstance(b, S.UCon) and a.name == b.name \
                and len(a.args) == len(b.args):
            for x, y in zip(a.args, b.args):
                self.unify(x, y, pos)
            return
        raise ElabError(
            f"type mismatch: {S.show_utype(self.zonk(a))} vs {S.show_utype(self.zonk(b))}", pos)


def has_meta(t) -> bool:
    if isinstance(t, S.UMeta):
        return True
    if isinstance(t, S.UCon):
        return any(has_meta(a) for a in t.args)
    if isinstance(t, S.UFun):
        return has_meta(t.arg) or has_meta(t.res)
    if isinstance(t, S.UAll):
        return has_meta(t.body)
    return False


# ---------------------------------------------------------------------------
# Expressions


class ExprElaborator:
    def __init__(self, mod: Module, resolver: Resolver):
        self.mod = mod
        self.resolver = resolver
        self.u = Unifier()

    def scheme(self, name: str):
        if name in self.mod.sigs:
            return S.shape(self.mod.sigs[name])
        if name in self.mod.prims:
            return S.shape(self.mod.prims[name])
        return None

    def surface_utype(self, t, pos, tvars):
        r = self.resolver.rtype(t, pos)
        u = S.shape(r)
        self._check_tvars(u, tvars, pos)
        return u

    def _check_tvars(self, u, tvars, pos):
        if isinstance(u, S.UVar) and u.name not in tvars:
            raise ElabError(f"unbound type variable {u.name}", pos)
        if isinstance(u, S.UCon):
            for a in u.args:
                self._check_tvars(a, tvars, pos)
        if isinstance(u, S.UFun):
            self._check_tvars(u.arg, tvars, pos)
            self._check_tvars(u.res, tvars, pos)

    def infer(self, e, env: dict, tvars: frozenset):
        if isinstance(e, S.Const):
            v = e.value
            if isinstance(v, bool):
                return e, S.UBase(L.BOOL)
            if v == ():
                return e, S.UBase(L.UNIT)
            return e, S.UBase(L.INT)
        if isinstance(e, (S.Var, S.TyApp)):
            return self.instantiate(e, env, tvars)
        if isinstance(e, S.Lam):
            if e.ann is None:
                a = self.u.meta()
            else:
                a = self.surface_utype(e.ann, e.pos, tvars)
            body, b = self.infer(e.body, {**env, e.x: a}, tvars)
            return S.Lam(e.x, a, body, e.pos), S.UFun(e.x, a, b)
        if isinstance(e, S.Let):
            bound, t1 = self.infer(e.bound, env, tvars)
            body, t2 = self.infer(e.body, {**env, e.x: t1}, tvars)
            return S.Let(e.x, bound, body, e.pos), t2
        if isinstance(e, S.App):
            fn, tf = self.infer(e.fn, env, tvars)
            arg, ta = self.infer(e.arg, env, tvars)
            tf = self.u.resolve(tf)
            if isinstance(tf, S.UFun):
                self.u.unify(tf.arg, ta, S.pos_of(e.arg) or e.pos)
                return S.App(fn, arg, e.pos), tf.res
            if isinstance(tf, S.UMeta):
                r = self.u.meta()
                self.u.unify(tf, S.UFun("_", ta, r), e.pos)
                return S.App(fn, arg, e.pos), r
            raise ElabError(f"applying a non-function of type {S.show_utype(self.u.zonk(tf))}", e.pos)
        if isinstance(e, S.If):
            c, tc = self.infer(e.cond, env, tvars)
            self.u.unify(tc, S.UBase(L.BOOL), e.pos)
            a, ta = self.infer(e.then, env, tvars)
            b, tb = self.infer(e.els, env, tvars)
            self.u.unify(ta, tb, e.pos)
            return S.If(c, a, b, e.pos), ta
        raise ElabError(f"cannot elaborate {e!r}", S.pos_of(e))

    def instantiate(self, e, env, tvars):
        explicit = []
        head = e
        while isinstance(head, S.TyApp):
            explicit.append(head)
            head = head.expr
        explicit.reverse()
        if not isinstance(head, S.Var):
            raise ElabError("explicit type application is only allowed on names", e.pos)
        if head.name in env:
            if explicit:
                raise ElabError(f"{head.name} is monomorphic and cannot be instantiated", e.pos)
            return head, env[head.name]
        scheme = self.scheme(head.name)
        if scheme is None:
            raise ElabError(f"unbound variable {head.name}", head.pos)
        qs, body = strip_foralls(scheme)
        if len(explicit) > len(qs):
            raise ElabError(f"{head.name} has only {len(qs)} type parameter(s)", e.pos)
        out = head
        for i, a in enumerate(qs):
            if i < len(explicit):
                t = self.surface_utype(explicit[i].ann, explicit[i].pos, tvars)
                p = explicit[i].pos
            else:
                t = self.u.meta()
                p = head.pos
            body = S.usubst_tvar(body, a, t)
            out = S.TyApp(out, t, p)
        return out, body

    def finish(self, e):
        """Replace metas by their solutions; unresolved ones are errors."""
        z = self.u.zonk
        if isinstance(e, (S.Const, S.Var)):
            return e
        if isinstance(e, S.Lam):
            ann = z(e.ann)
            if has_meta(ann):
                raise ElabError(f"cannot determine the type of lambda parameter {e.x}; "
                                "add an annotation", e.pos)
            return S.Lam(e.x, ann, self.finish(e.body), e.pos)
        if isinstance(e, S.Let):
            return S.Let(e.x, self.finish(e.bound), self.finish(e.body), e.pos)
        if isinstance(e, S.App):
            return S.App(self.finish(e.fn), self.finish(e.arg), e.pos)
        if isinstance(e, S.If):
            return S.If(self.finish(e.cond), self.finish(e.then), self.finish(e.els), e.pos)
        if isinstance(e, S.TyApp):
            ann = z(e.ann)
            if has_meta(ann):
                raise ElabError("unannotated polymorphic instantiation: cannot determine the "
                                "type argument; add an explicit '@T'", e.pos)
            return S.TyApp(self.finish(e.expr), ann, e.pos)
        if isinstance(e, S.TyLam):
            return S.TyLam(e.tvar, self.finish(e.body), e.pos)
        raise TypeError(e)

    def definition(self, name: str, body, pos):
        sig = self.mod.sigs[name]
        tvs, mono = strip_foralls(sig)
        core, t = self.infer(body, {}, frozenset(tvs))
        self.u.unify(t, S.shape(mono), pos)
        core = self.finish(core)
        for a in reversed(tvs):
            core = S.TyLam(a, core, pos)
        return core


def build_module(*programs: S.Program, supply: L.NameSupply | None = None) -> Module:
    """Resolve declarations from ``programs`` in order (prelude first)."""
    supply = supply or L.NameSupply()
    mod = Module()
    res = Resolver(mod, supply)
    pending = []
    for prog in programs:
        for d in prog.decls:
            if isinstance(d, S.DataDecl):
                mod.datas[d.name] = d.arity
            elif isinstance(d, S.UninterpDecl):
                mod.uninterps[d.name] = d.sig
            elif isinstance(d, S.AliasDecl):
                mod.aliases[d.name] = d.type
    for prog in programs:
        for d in prog.decls:
            if isinstance(d, S.PrimDecl):
                mod.prims[d.name] = quantify(res.rtype(d.type, d.pos))
            elif isinstance(d, S.SigDecl):
                if d.name in mod.sigs:
                    raise ElabError(f"duplicate signature for {d.name}", d.pos)
                mod.sigs[d.name] = quantify(res.rtype(d.type, d.pos, allow_holes=True))
                mod.sig_pos[d.name] = d.pos
            elif isinstance(d, S.DefDecl):
                pending.append(d)
            elif isinstance(d, S.QualDecl):
                mod.quals.append(d)
    seen = set()
    for d in pending:
        if d.name not in mod.sigs:
            raise ElabError(f"definition of {d.name} needs a type signature", d.pos)
        if d.name in seen:
            raise ElabError(f"duplicate definition of {d.name}", d.pos)
        seen.add(d.name)
        el = ExprElaborator(mod, res)
        mod.defs.append((d.name, el.definition(d.name, d.body, d.pos), d.pos))
    return mod
