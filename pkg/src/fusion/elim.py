"""Scoped elimination of acyclic refinement variables.

Each acyclic kvar is replaced by its strongest solution, computed only from
the part of the constraint that encloses all of its occurrences.  Hypotheses
above that part hold at every use anyway, so they are left out of the
solution; on let-chains this is what keeps the result linear.
"""

from __future__ import annotations

from typing import Iterable

from . import constraints as C
from . import logic as L
from .constraints import Bind, Conj, Constraint, Head
from .logic import KApp, KVar, Term

FUSE = 10**6


class CyclicError(Exception):
    pass


class FuseError(Exception):
    """The unscoped elimination grew past the atom budget."""

    def __init__(self, atoms: int, fuse: int):
        super().__init__(f"elimination exceeded {fuse} atoms ({atoms})")
        self.atoms = atoms
        self.fuse = fuse


def scope(k: KVar, c: Constraint) -> Constraint:
    """The smallest hypothesis-prefixed sub-constraint holding every occurrence of k."""
    if isinstance(c, Conj):
        hits = [p for p in c.parts if k in p.kvs]
        if len(hits) == 1:
            return scope(k, hits[0])
        return c
    if isinstance(c, Bind) and not L.has_kvar(c.hyp, k):
        return Bind(c.var, c.sort, c.hyp, scope(k, c.body))
    return c


def split_scope(k: KVar, c: Constraint):
    """Return (prefix binders, inner constraint) of scope(k, c)."""
    prefix = []
    s = scope(k, c)
    while isinstance(s, Bind) and not L.has_kvar(s.hyp, k) and k in s.body.kvs:
        prefix.append((s.var, s.sort, s.hyp))
        s = s.body
    return prefix, s


def sol(k: KVar, c: Constraint) -> Term:
    """Disjunction of the (existentially closed) bodies under which k is a goal."""
    memo: dict = {}
    return _sol(k, c, memo)


def _sol(k, c, memo):
    if k not in c.kvs:
        return L.FALSE
    hit = memo.get(id(c))
    if hit is not None:
        return hit[1]
    if isinstance(c, Conj):
        out = L.Or(*(_sol(k, p, memo) for p in c.parts))
    elif isinstance(c, Bind):
        out = L.Ex(c.var, c.sort, L.And(c.hyp, _sol(k, c.body, memo)))
    elif isinstance(c.pred, KApp) and c.pred.kvar == k:
        out = L.And(*(L.Eq(L.v(x), L.v(y)) for x, y in zip(k.param_names, c.pred.args)))
    else:
        out = L.FALSE
    memo[id(c)] = (c, out)
    return out


def strongest_scoped(k: KVar, c: Constraint, scoped: bool = True) -> dict:
    """The singleton assignment k |-> sol(k, c') where c' is the scope's core."""
    inner = split_scope(k, c)[1] if scoped else c
    return {k: sol(k, inner)}


def strongest(k: KVar, c: Constraint) -> dict:
    return {k: sol(k, c)}


def elim_sol(sigma: dict, c: Constraint, memo: dict | None = None) -> Constraint:
    """Substitute sigma into hypotheses; goals that are eliminated kvars become true."""
    memo = {} if memo is None else memo
    if not (c.kvs & sigma.keys()):
        return c
    if isinstance(c, Conj):
        return C.conj(C.CTRUE, *(elim_sol(sigma, p, memo) for p in c.parts))
    if isinstance(c, Bind):
        return C.bind(c.var, c.sort, C.apply_pred(sigma, c.hyp, memo), elim_sol(sigma, c.body, memo))
    if isinstance(c.pred, KApp) and c.pred.kvar in sigma:
        return C.CTRUE
    raise ValueError(f"goal {L.show(c.pred)} mentions an eliminated variable below a connective")


def elim_one(k: KVar, c: Constraint, scoped: bool = True, check: bool = True) -> Constraint:
    if check and not C.is_acyclic({k}, c):
        raise CyclicError(f"{k.name} depends on itself and cannot be eliminated")
    return elim_sol(strongest_scoped(k, c, scoped), c)


def elim(ks: Iterable[KVar], c: Constraint, scoped: bool = True,
         fuse: int | None = None, trace: list | None = None) -> Constraint:
    """Fold elim_one over ``ks`` in order."""
    for k in ks:
        sigma = strongest_scoped(k, c, scoped)
        if trace is not None:
            trace.append((k, sigma[k]))
        c = elim_sol(sigma, c)
        if fuse is not None:
            n = atom_count(c)
            if n > fuse:
                raise FuseError(n, fuse)
    return c


def elimination_order(c: Constraint, ks: Iterable[KVar]) -> list[KVar]:
    """Producers before consumers: a kvar is eliminated before any kvar it flows into."""
    return C.topo_order(C.deps(c), ks)


def atom_count(c: Constraint) -> int:
    """Atoms of the constraint counted as a tree (shared subterms counted per use)."""
    total = 0
    stack = [c]
    while stack:
        n = stack.pop()
        if isinstance(n, Head):
            total += L.atom_count(n.pred)
        elif isinstance(n, Conj):
            stack.extend(n.parts)
        else:
            total += L.atom_count(n.hyp)
            stack.append(n.body)
    return total


# ---------------------------------------------------------------------------
# Cheap pre-elimination of trivial variables


def _alias_target(k: KVar, p: Term):
    """If p is (exists w. k'(..w..) && z = w), return k'(..z..) else None."""
    if not isinstance(p, L.Exists):
        return None
    w, body = p.var, p.body
    if not (isinstance(body, L.Op) and body.op == "and" and len(body.args) == 2):
        return None
    a, b = body.args
    if not isinstance(a, KApp):
        a, b = b, a
    if not isinstance(a, KApp) or not (isinstance(b, L.Op) and b.op == "="):
        return None
    vals = {x.name for x in b.args if isinstance(x, L.Var)}
    z = k.param_names[-1]
    if vals != {w, z}:
        return None
    if a.args.count(w) != 1:
        return None
    if a.kvar.params[a.args.index(w)][1] != k.params[-1][1]:
        return None
    return KApp(a.kvar, tuple(z if y == w else y for y in a.args))


def simplify_kvars(c: Constraint, keep: Iterable[KVar] = ()) -> tuple[Constraint, list[KVar]]:
    """Eliminate kvars outside ``keep`` that are dead (never a goal) or mere
    aliases of another kvar.  Both are ordinary eliminations; this just runs
    them early so the generated constraint is as small as the source warrants."""
    keep = set(keep)
    removed = []
    changed = True
    while changed:
        changed = False
        for k in sorted(c.kvs - keep, key=C.kv_key):
            if not C.is_acyclic({k}, c):
                continue
            s = sol(k, split_scope(k, c)[1])
            if s is L.FALSE:
                c = elim_sol({k: L.FALSE}, c)
            else:
                target = _alias_target(k, s)
                if target is None:
                    continue
                c = elim_sol({k: target}, c)
            removed.append(k)
            changed = True
    return c, removed
