"""Constraint generation: templates, subtyping and the syntax-directed traversal.

Terms are expected elaborated and in ANF.  Two departures from a literal
reading of the generation rules keep every constraint well scoped: a lambda's
body constraint sits under the parameter's hypothesis, and a let's hiding
subtyping obligation sits under the let binder's hypothesis.  Definitions
with signatures are checked against them directly (lambdas bind the
signature's inputs, lets and branches pass the expected type inward), which
is what yields the compact constraints shown for the worked examples.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from . import constraints as C
from . import logic as L
from .constraints import Tag
from .lang import syntax as S
from .lang.elaborate import Module
from .lang.env import TypeEnv
from .lang.prelude import const_type


class CongenError(Exception):
    pass


VALUE = "v"


def param_name(i: int) -> str:
    return f"z${i}"


VALUE_PARAM = "z$v"


@dataclass
class Generated:
    constraint: C.Constraint
    kvars: list = field(default_factory=list)        # every kvar created, in order
    toplevel: set = field(default_factory=set)       # kvars from signature holes
    sigs: dict = field(default_factory=dict)         # name -> RType template


class Generator:
    def __init__(self, uninterps: dict | None = None):
        self.uninterps = dict(uninterps or {})
        self.counter = itertools.count()
        self.names = L.NameSupply()
        self.kvars: list[L.KVar] = []

    # -- templates ---------------------------------------------------------

    def new_kvar(self, params) -> L.KVar:
        k = L.KVar(f"k{next(self.counter)}", tuple(params))
        self.kvars.append(k)
        return k

    def fresh(self, env: TypeEnv, u) -> S.RType:
        """A template of shape ``u`` whose unknowns may mention env's base binders."""
        return self._fresh(list(env.base_binders()), u)

    def _fresh(self, scope, u):
        if isinstance(u, S.UBase):
            names = [x for x, _ in scope]
            vv = VALUE if VALUE not in names else self.names.fresh(VALUE)
            params = [(param_name(i + 1), s) for i, (_, s) in enumerate(scope)]
            k = self.new_kvar([*params, (VALUE_PARAM, u.sort)])
            return S.RBase(vv, u.sort, L.KApp(k, (*names, vv)))
        if isinstance(u, S.UVar):
            return S.RVar(u.name)
        if isinstance(u, S.UCon):
            return S.RCon(u.name, tuple(self._fresh(scope, a) for a in u.args))
        if isinstance(u, S.UFun):
            x = u.x if u.x not in ("_", "") else self.names.fresh("a")
            arg = self._fresh(scope, u.arg)
            inner = [(y, s) for y, s in scope if y != x]
            if isinstance(u.arg, S.UBase):
                inner.append((x, u.arg.sort))
            return S.RFun(x, arg, self._fresh(inner, u.res))
        if isinstance(u, S.UAll):
            return S.RAll(u.tvar, self._fresh(scope, u.body))
        raise CongenError(f"cannot build a template for {u!r}")

    def fill_holes(self, t: S.RType, scope=()) -> S.RType:
        """Replace each '_' in a signature by a kvar over the earlier base binders."""
        scope = list(scope)
        if isinstance(t, S.RBase):
            if not isinstance(t.pred, S.Hole):
                return t
            params = [(param_name(i + 1), s) for i, (_, s) in enumerate(scope)]
            k = self.new_kvar([*params, (VALUE_PARAM, t.sort)])
            return S.RBase(t.v, t.sort, L.KApp(k, (*(x for x, _ in scope), t.v)))
        if isinstance(t, S.RCon):
            return S.RCon(t.name, tuple(self.fill_holes(a, scope) for a in t.args))
        if isinstance(t, S.RFun):
            arg = self.fill_holes(t.arg, scope)
            inner = [(y, s) for y, s in scope if y != t.x]
            if isinstance(t.arg, S.RBase):
                inner.append((t.x, t.arg.sort))
            return S.RFun(t.x, arg, self.fill_holes(t.res, inner))
        if isinstance(t, S.RAll):
            return S.RAll(t.tvar, self.fill_holes(t.body, scope))
        return t

    # -- subtyping ---------------------------------------------------------

    def sub(self, t1: S.RType, t2: S.RType, tag: Tag | None = None) -> C.Constraint:
        if isinstance(t1, S.RBase) and isinstance(t2, S.RBase):
            if t1.sort != t2.sort:
                raise CongenError(f"sort mismatch {t1.sort} vs {t2.sort}")
            x, p = t1.v, t1.pred
            q_free = L.free_vars(t2.pred) - {t2.v}
            if x in q_free:
                y = self.names.fresh(x)
                p, x = L.subst(p, {x: y}), y
            q = L.subst(t2.pred, {t2.v: x})
            return C.bind(x, t1.sort, p, C.head(q, tag))
        if isinstance(t1, S.RFun) and isinstance(t2, S.RFun):
            c_in = self.sub(t2.arg, t1.arg, tag)
            out1 = S.rsubst(t1.res, {t1.x: t2.x})
            c_out = self.guard(t2.x, t2.arg, self.sub(out1, t2.res, tag))
            return C.conj(c_in, c_out)
        if isinstance(t1, S.RVar) and isinstance(t2, S.RVar) and t1.name == t2.name:
            return C.CTRUE
        if isinstance(t1, S.RAll) and isinstance(t2, S.RAll):
            body2 = S.rsubst_tvar(t2.body, t2.tvar, S.RVar(t1.tvar))
            return self.sub(t1.body, body2, tag)
        if isinstance(t1, S.RCon) and isinstance(t2, S.RCon) and t1.name == t2.name \
                and len(t1.args) == len(t2.args):
            return C.conj(C.CTRUE, *(self.sub(a, b, tag) for a, b in zip(t1.args, t2.args)))
        raise CongenError(f"shape mismatch: {S.show_rtype(t1)} vs {S.show_rtype(t2)}")

    @staticmethod
    def guard(x: str, t: S.RType, c: C.Constraint) -> C.Constraint:
        if isinstance(t, S.RBase):
            return C.bind(x, t.sort, L.subst(t.pred, {t.v: x}), c)
        return c

    # -- generation --------------------------------------------------------

    @staticmethod
    def singty(env: TypeEnv, x: str) -> S.RType:
        e = env.entry(x)
        if e is None:
            raise CongenError(f"unbound variable {x}")
        t = e.type
        if isinstance(t, S.RBase):
            eq = L.Eq(L.v(VALUE), L.v(x))
            if e.guarded:
                # the binder's refinement is already a hypothesis in scope
                return S.RBase(VALUE, t.sort, eq)
            return S.RBase(VALUE, t.sort, L.And(L.subst(t.pred, {t.v: VALUE}), eq))
        return t

    def _binder(self, env: TypeEnv, x: str, e, avoid=frozenset()):
        """Rename a local binder that would shadow something in scope."""
        if x in env or x in avoid:
            new = self.names.fresh(x)
            return new, rename_expr(e, x, new)
        return x, e

    def synth(self, env: TypeEnv, e) -> tuple[C.Constraint, S.RType]:
        if isinstance(e, S.Const):
            return C.CTRUE, const_type(e.value)
        if isinstance(e, S.Var):
            return C.CTRUE, self.singty(env, e.name)
        if isinstance(e, S.Let):
            c1, t1 = self.synth(env, e.bound)
            x, body = self._binder(env, e.x, e.body)
            env2 = env.extend(x, t1)
            c2, t2 = self.synth(env2, body)
            if x not in S.rtype_free_vars(t2):
                return C.conj(c1, self.guard(x, t1, c2)), t2
            hat = self._fresh([], S.shape(t2))
            hide = self.sub(t2, hat, _tag(e, "let body"))
            return C.conj(c1, self.guard(x, t1, C.conj(c2, hide))), hat
        if isinstance(e, S.Lam):
            hat = self._fresh([], e.ann)
            x, body = self._binder(env, e.x, e.body)
            c, t = self.synth(env.extend(x, hat), body)
            return self.guard(x, hat, c), S.RFun(x, hat, t)
        if isinstance(e, S.App):
            if not isinstance(e.arg, S.Var):
                raise CongenError("application argument is not a variable (expected ANF)")
            c, tf = self.synth(env, e.fn)
            if not isinstance(tf, S.RFun):
                raise CongenError(f"applying a non-function {S.show_rtype(tf)}")
            y = e.arg.name
            cy = self.sub(self.singty(env, y), tf.arg, _tag(e.arg, f"argument {y}"))
            return C.conj(c, cy), S.rsubst(tf.res, {tf.x: y})
        if isinstance(e, S.TyLam):
            c, t = self.synth(env.with_tvar(e.tvar), e.body)
            return c, S.RAll(e.tvar, t)
        if isinstance(e, S.TyApp):
            c, t = self.synth(env, e.expr)
            if not isinstance(t, S.RAll):
                raise CongenError(f"instantiating a monomorphic type {S.show_rtype(t)}")
            hat = self._fresh([], e.ann)
            return c, S.rsubst_tvar(t.body, t.tvar, hat)
        if isinstance(e, S.If):
            y = self._cond(env, e)
            ct, tt = self.synth(env, e.then)
            ce, te = self.synth(env, e.els)
            hat = self._fresh([], S.shape(tt))
            return C.conj(
                self._branch(y, True, C.conj(ct, self.sub(tt, hat, _tag(e.then, "then branch")))),
                self._branch(y, False, C.conj(ce, self.sub(te, hat, _tag(e.els, "else branch")))),
            ), hat
        raise CongenError(f"cannot generate constraints for {e!r}")

    def _cond(self, env, e) -> str:
        if not isinstance(e.cond, S.Var):
            raise CongenError("branch condition is not a variable (expected ANF)")
        return e.cond.name

    def _branch(self, y: str, positive: bool, c: C.Constraint) -> C.Constraint:
        b = self.names.fresh("b")
        hyp = L.v(y) if positive else L.Not(L.v(y))
        return C.bind(b, L.UNIT, hyp, c)

    def check(self, env: TypeEnv, e, t: S.RType, what: str = "") -> C.Constraint:
        """Constraint under which ``e`` has type ``t``."""
        if isinstance(e, S.Lam) and isinstance(t, S.RFun):
            x, body = self._binder(env, e.x, e.body)
            res = S.rsubst(t.res, {t.x: x})
            c = self.check(env.extend(x, t.arg), body, res, what)
            return self.guard(x, t.arg, c)
        if isinstance(e, S.TyLam) and isinstance(t, S.RAll):
            body = S.rsubst_tvar(t.body, t.tvar, S.RVar(e.tvar))
            return self.check(env.with_tvar(e.tvar), e.body, body, what)
        if isinstance(e, S.Let):
            c1, t1 = self.synth(env, e.bound)
            x, body = self._binder(env, e.x, e.body, S.rtype_free_vars(t))
            return C.conj(c1, self.guard(x, t1, self.check(env.extend(x, t1), body, t, what)))
        if isinstance(e, S.If):
            y = self._cond(env, e)
            return C.conj(self._branch(y, True, self.check(env, e.then, t, what)),
                          self._branch(y, False, self.check(env, e.els, t, what)))
        c, s = self.synth(env, e)
        return C.conj(c, self.sub(s, t, _tag(e, what)))

    # -- programs ----------------------------------------------------------

    def program(self, mod: Module) -> Generated:
        out = Generated(C.CTRUE)
        env = TypeEnv()
        for name, t in mod.prims.items():
            env = env.extend(name, t, guarded=False)
        for name, sig in mod.sigs.items():
            before = len(self.kvars)
            tmpl = self.fill_holes(sig)
            out.toplevel.update(self.kvars[before:])
            out.sigs[name] = tmpl
            env = env.extend(name, tmpl, guarded=False)
        parts = []
        for name, body, pos in mod.defs:
            sig = out.sigs[name]
            what = f"{name} against {S.show_rtype(sig)}"
            c = self.check(env, body, sig, what)
            # other base-typed globals are known facts
            for g, gt in reversed(list(out.sigs.items())):
                if g != name and isinstance(gt, S.RBase) and g in C.free_vars_c(c):
                    c = self.guard(g, gt, c)
            parts.append(c)
        reserved = set(env.names())
        out.constraint = C.rename_binders(C.conj(C.CTRUE, *parts), reserved)
        out.kvars = list(self.kvars)
        return out


def _tag(e, what: str = "") -> Tag | None:
    p = S.pos_of(e)
    return Tag(p[0], p[1], what) if p else None


def rename_expr(e, old: str, new: str):
    """Rename free occurrences of a term variable in an expression."""
    if isinstance(e, S.Var):
        return S.Var(new, e.pos) if e.name == old else e
    if isinstance(e, S.Const):
        return e
    if isinstance(e, S.Lam):
        if e.x == old:
            return e
        return S.Lam(e.x, e.ann, rename_expr(e.body, old, new), e.pos)
    if isinstance(e, S.Let):
        bound = rename_expr(e.bound, old, new)
        body = e.body if e.x == old else rename_expr(e.body, old, new)
        return S.Let(e.x, bound, body, e.pos)
    if isinstance(e, S.App):
        return S.App(rename_expr(e.fn, old, new), rename_expr(e.arg, old, new), e.pos)
    if isinstance(e, S.TyLam):
        return S.TyLam(e.tvar, rename_expr(e.body, old, new), e.pos)
    if isinstance(e, S.TyApp):
        return S.TyApp(rename_expr(e.expr, old, new), e.ann, e.pos)
    if isinstance(e, S.If):
        return S.If(rename_expr(e.cond, old, new), rename_expr(e.then, old, new),
                    rename_expr(e.els, old, new), e.pos)
    raise TypeError(e)


# Module-level conveniences with a throwaway generator.

def fresh(env: TypeEnv, u, gen: Generator | None = None) -> S.RType:
    return (gen or Generator()).fresh(env, u)


def sub(t1: S.RType, t2: S.RType, gen: Generator | None = None) -> C.Constraint:
    return (gen or Generator()).sub(t1, t2)


def guard(x: str, t: S.RType, c: C.Constraint) -> C.Constraint:
    return Generator.guard(x, t, c)


def singty(env: TypeEnv, x: str) -> S.RType:
    return Generator.singty(env, x)


def cons(env: TypeEnv, e, gen: Generator | None = None):
    return (gen or Generator()).synth(env, e)


def generate(mod: Module, anf: bool = True) -> Generated:
    from .lang.anf import anf_normalize

    if anf:
        supply = L.NameSupply()
        mod.defs = [(n, anf_normalize(e, supply), p) for n, e, p in mod.defs]
    return Generator(mod.uninterps).program(mod)
