"""A-normalisation: every application argument and branch condition becomes a variable."""

from __future__ import annotations

from .. import logic as L
from . import syntax as S


def anf_normalize(e: S.Expr, supply: L.NameSupply | None = None) -> S.Expr:
    supply = supply or L.NameSupply()
    return _anf(e, supply)


def _anf(e, supply):
    if isinstance(e, (S.Const, S.Var)):
        return e
    if isinstance(e, S.Lam):
        return S.Lam(e.x, e.ann, _anf(e.body, supply), e.pos)
    if isinstance(e, S.Let):
        return S.Let(e.x, _anf(e.bound, supply), _anf(e.body, supply), e.pos)
    if isinstance(e, S.TyLam):
        return S.TyLam(e.tvar, _anf(e.body, supply), e.pos)
    if isinstance(e, S.If):
        then, els = _anf(e.then, supply), _anf(e.els, supply)
        if isinstance(e.cond, S.Var):
            return S.If(e.cond, then, els, e.pos)
        t = supply.fresh("t")
        return S.Let(t, _anf(e.cond, supply), S.If(S.Var(t, e.pos), then, els, e.pos), e.pos)
    if isinstance(e, (S.App, S.TyApp)):
        # unwind the spine, naming non-variable arguments left to right
        spine = []
        head = e
        while isinstance(head, (S.App, S.TyApp)):
            spine.append(head)
            head = head.fn if isinstance(head, S.App) else head.expr
        spine.reverse()
        out = _anf(head, supply)
        lets = []
        for node in spine:
            if isinstance(node, S.TyApp):
                out = S.TyApp(out, node.ann, node.pos)
                continue
            arg = node.arg
            if not isinstance(arg, S.Var):
                t = supply.fresh("t")
                lets.append((t, _anf(arg, supply), S.pos_of(arg) or node.pos))
                arg = S.Var(t, S.pos_of(arg) or node.pos)
            out = S.App(out, arg, node.pos)
        for t, bound, pos in reversed(lets):
            out = S.Let(t, bound, out, pos)
        return out
    raise TypeError(e)


def is_anf(e: S.Expr) -> bool:
    if isinstance(e, (S.Const, S.Var)):
        return True
    if isinstance(e, S.Lam):
        return is_anf(e.body)
    if isinstance(e, S.Let):
        return is_anf(e.bound) and is_anf(e.body)
    if isinstance(e, S.TyLam):
        return is_anf(e.body)
    if isinstance(e, S.TyApp):
        return is_anf(e.expr)
    if isinstance(e, S.App):
        return isinstance(e.arg, S.Var) and is_anf(e.fn)
    if isinstance(e, S.If):
        return isinstance(e.cond, S.Var) and is_anf(e.then) and is_anf(e.els)
    raise TypeError(e)
