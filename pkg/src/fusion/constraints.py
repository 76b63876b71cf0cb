"""NNF Horn constraints.

A constraint is a tree: leaves are goals (``Head``), internal nodes either
conjoin sub-constraints (``Conj``) or bind a variable under a hypothesis
(``Bind``).  Every root-to-leaf path is one Horn clause.
"""

from __future__ import annotations

import heapq
import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Union

from . import logic as L
from .logic import KApp, KVar, Sort, Term


@dataclass(frozen=True)
class Tag:
    """Source provenance of a goal, for diagnostics."""

    line: int
    col: int
    what: str = ""

    def __str__(self) -> str:
        loc = f"{self.line}:{self.col}"
        return f"{loc} {self.what}" if self.what else loc


@dataclass(frozen=True)
class Head:
    pred: Term
    tag: Tag | None = field(default=None, compare=False)
    kvs: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kvs", L.kvars(self.pred))


@dataclass(frozen=True)
class Conj:
    parts: tuple
    kvs: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kvs", frozenset().union(*(p.kvs for p in self.parts)))


@dataclass(frozen=True)
class Bind:
    var: str
    sort: Sort
    hyp: Term
    body: "Constraint"
    kvs: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kvs", L.kvars(self.hyp) | self.body.kvs)


Constraint = Union[Head, Conj, Bind]

CTRUE = Conj(())


def head(pred: Term, tag: Tag | None = None) -> Constraint:
    parts = L.conjuncts(pred)
    if not parts:
        return CTRUE
    if len(parts) == 1:
        return Head(parts[0], tag)
    return Conj(tuple(Head(p, tag) for p in parts))


def conj(*cs: Constraint) -> Constraint:
    out: list[Constraint] = []
    for c in cs:
        if isinstance(c, Conj):
            out.extend(c.parts)
        else:
            out.append(c)
    if len(out) == 1:
        return out[0]
    return Conj(tuple(out))


def bind(var: str, sort: Sort, hyp: Term, body: Constraint) -> Constraint:
    if body == CTRUE or hyp is L.FALSE:
        return CTRUE
    return Bind(var, sort, hyp, body)


def is_true(c: Constraint) -> bool:
    return isinstance(c, Conj) and not c.parts


def kvars(c: Constraint) -> frozenset[KVar]:
    return c.kvs


def size(c: Constraint) -> int:
    """Number of nodes in the constraint tree."""
    if isinstance(c, Head):
        return 1
    if isinstance(c, Bind):
        return 1 + size(c.body)
    return 1 + sum(size(p) for p in c.parts)


# ---------------------------------------------------------------------------
# Flat clauses


@dataclass(frozen=True)
class FlatClause:
    binders: tuple[tuple[str, Sort, Term], ...]
    goal: Term
    tag: Tag | None = field(default=None, compare=False)

    @property
    def head(self) -> Term:
        return self.goal

    @property
    def bodies(self) -> list[Term]:
        return [p for _, _, p in self.binders]

    def to_constraint(self) -> Constraint:
        c: Constraint = Head(self.goal, self.tag)
        for x, s, p in reversed(self.binders):
            c = Bind(x, s, p, c)
        return c

    def __str__(self) -> str:
        parts = [f"forall {x}:{s}. {L.show(p)} =>" for x, s, p in self.binders]
        return " ".join([*parts, L.show(self.goal)])


def flatten(c: Constraint) -> list[FlatClause]:
    """One clause per root-to-leaf path; trivially true goals produce nothing."""
    out: list[FlatClause] = []
    path: list[tuple[str, Sort, Term]] = []

    def go(n: Constraint) -> None:
        if isinstance(n, Head):
            if n.pred is not L.TRUE:
                out.append(FlatClause(tuple(path), n.pred, n.tag))
        elif isinstance(n, Conj):
            for p in n.parts:
                go(p)
        else:
            path.append((n.var, n.sort, n.hyp))
            go(n.body)
            path.pop()

    go(c)
    return out


def unflatten(cs: Iterable[FlatClause]) -> Constraint:
    return conj(CTRUE, *(fc.to_constraint() for fc in cs))


def defns(c: Constraint | Iterable[FlatClause], k: KVar) -> list[FlatClause]:
    cs = flatten(c) if isinstance(c, (Head, Conj, Bind)) else list(c)
    return [fc for fc in cs if L.has_kvar(fc.goal, k)]


def uses(c: Constraint | Iterable[FlatClause], k: KVar) -> list[FlatClause]:
    cs = flatten(c) if isinstance(c, (Head, Conj, Bind)) else list(c)
    return [fc for fc in cs if not L.has_kvar(fc.goal, k)]


# ---------------------------------------------------------------------------
# Well-formedness


def wf(env: L.SortEnv, c: Constraint) -> tuple[bool, str | None]:
    """Check that every refinement sort-checks in its scope and no k remains."""
    stack: list[tuple[Constraint, Mapping]] = [(c, env)]
    while stack:
        n, e = stack.pop()
        if isinstance(n, Head):
            if n.kvs:
                return False, f"k-application in goal {L.show(n.pred)}"
            msg = L.sort_diagnostic(e, n.pred)
            if msg:
                where = f" at {n.tag}" if n.tag else ""
                return False, f"goal {L.show(n.pred)}{where}: {msg}"
        elif isinstance(n, Conj):
            stack.extend((p, e) for p in reversed(n.parts))
        else:
            inner = {**e, n.var: n.sort}
            if L.kvars(n.hyp):
                return False, f"k-application in hypothesis of {n.var}"
            msg = L.sort_diagnostic(inner, n.hyp)
            if msg:
                return False, f"hypothesis of {n.var}: {msg}"
            stack.append((n.body, inner))
    return True, None


def erase_kvars(c: Constraint) -> Constraint:
    """Replace every k-application by true (used to check generated scoping)."""
    sigma = {k: L.TRUE for k in c.kvs}
    return apply(sigma, c)


# ---------------------------------------------------------------------------
# Assignments

Assignment = dict  # KVar -> Term over kvar.param_names


def apply_pred(sigma: Mapping[KVar, Term], p: Term, memo: dict | None = None) -> Term:
    """Replace each k(y) with k in dom(sigma) by sigma(k)[params := y]."""
    if not sigma or not (L.kvars(p) & sigma.keys()):
        return p
    memo = {} if memo is None else memo
    return _apply(sigma, p, memo)


def _apply(sigma, t: Term, memo) -> Term:
    if not (L.kvars(t) & sigma.keys()):
        return t
    hit = memo.get(id(t))
    if hit is not None:
        return hit[1]
    if isinstance(t, KApp):
        body = sigma[t.kvar]
        out = L.subst(body, dict(zip(t.kvar.param_names, t.args)))
    elif isinstance(t, L.Op):
        out = L.Op(t.op, (_apply(sigma, a, memo) for a in t.args))
        if t.op == "and":
            out = L.And(*out.args)
        elif t.op == "or":
            out = L.Or(*out.args)
    elif isinstance(t, (L.Exists, L.Forall)):
        var, body = t.var, t.body
        free = _sigma_free(sigma)
        if var in free:
            # the binder would capture a name free in the assignment
            avoid = free | L.names_in(body)
            new = _HYGIENE.fresh(var)
            while new in avoid:
                new = _HYGIENE.fresh(var)
            body, var = L.subst(body, {var: new}), new
        body = _apply(sigma, body, memo)
        out = L.Ex(var, t.sort, body) if isinstance(t, L.Exists) else L.All(var, t.sort, body)
    else:
        out = t
    memo[id(t)] = (t, out)  # keep t alive so its id stays unique
    return out


_HYGIENE = L.NameSupply()


def _sigma_free(sigma) -> set[str]:
    out: set[str] = set()
    for k, body in sigma.items():
        out |= L.free_vars(body) - set(k.param_names)
    return out


def apply(sigma: Mapping[KVar, Term], c: Constraint, memo: dict | None = None) -> Constraint:
    memo = {} if memo is None else memo
    if not sigma or not (c.kvs & sigma.keys()):
        return c
    if isinstance(c, Head):
        return head(apply_pred(sigma, c.pred, memo), c.tag)
    if isinstance(c, Conj):
        return conj(CTRUE, *(apply(sigma, p, memo) for p in c.parts))
    return bind(c.var, c.sort, apply_pred(sigma, c.hyp, memo), apply(sigma, c.body, memo))


def apply_flat(sigma: Mapping[KVar, Term], fc: FlatClause) -> FlatClause:
    memo: dict = {}
    return FlatClause(
        tuple((x, s, apply_pred(sigma, p, memo)) for x, s, p in fc.binders),
        apply_pred(sigma, fc.goal, memo),
        fc.tag,
    )


def compose(s1: Mapping[KVar, Term], s2: Mapping[KVar, Term]) -> Assignment:
    """The assignment k |-> s1(s2(k)); kvars outside dom(s2) map through s1."""
    out: Assignment = {k: apply_pred(s1, p) for k, p in s2.items()}
    for k, p in s1.items():
        out.setdefault(k, p)
    return out


@dataclass
class SatContext:
    """An assignment together with the hypotheses accumulated on a path."""

    sigma: Assignment
    hyps: list[tuple[str, Sort, Term]] = field(default_factory=list)

    def extend(self, var: str, sort: Sort, hyp: Term) -> "SatContext":
        return SatContext(self.sigma, [*self.hyps, (var, sort, hyp)])

    def obligation(self, goal: Term) -> Term:
        """The closed formula forall hyps. goal, with the assignment applied."""
        memo: dict = {}
        f = apply_pred(self.sigma, goal, memo)
        for x, s, p in reversed(self.hyps):
            f = L.Forall(x, s, L.Implies(apply_pred(self.sigma, p, memo), f))
        return f


def clause_formula(fc: FlatClause) -> Term:
    """forall x1. p1 => ... => goal, as a single logic term."""
    return SatContext({}, list(fc.binders)).obligation(fc.goal)


# ---------------------------------------------------------------------------
# Binder hygiene


def rename_binders(c: Constraint, reserved: Iterable[str] = ()) -> Constraint:
    """Alpha-rename so no binder shadows another on any path or a reserved name."""
    supply = L.NameSupply()
    taken = set(reserved)

    def fresh(base: str, avoid: set[str]) -> str:
        while True:
            n = supply.fresh(base)
            if n not in avoid and n not in taken:
                return n

    def go(n: Constraint, scope: frozenset, ren: dict) -> Constraint:
        if isinstance(n, Head):
            return Head(L.subst(n.pred, ren), n.tag) if ren else n
        if isinstance(n, Conj):
            return Conj(tuple(go(p, scope, ren) for p in n.parts))
        var = n.var
        hyp_ren = dict(ren)
        if var in scope or var in taken:
            new = fresh(var, set(scope))
            hyp_ren[var] = new
            var = new
        else:
            hyp_ren.pop(var, None)
        hyp = L.subst(n.hyp, hyp_ren) if hyp_ren else n.hyp
        return Bind(var, n.sort, hyp, go(n.body, scope | {var}, hyp_ren))

    return go(c, frozenset(), {})


def binders_distinct(c: Constraint) -> bool:
    def go(n: Constraint, scope: frozenset) -> bool:
        if isinstance(n, Head):
            return True
        if isinstance(n, Conj):
            return all(go(p, scope) for p in n.parts)
        return n.var not in scope and go(n.body, scope | {n.var})

    return go(c, frozenset())


# ---------------------------------------------------------------------------
# Dependencies and cuts


def natural_key(name: str):
    return [int(t) if t.isdigit() else t for t in re.split(r"(\d+)", name)]


def kv_key(k: KVar):
    return natural_key(k.name)


@dataclass
class DepGraph:
    vertices: set[KVar]
    succ: dict[KVar, set[KVar]]

    def edges(self) -> set[tuple[KVar, KVar]]:
        return {(a, b) for a, bs in self.succ.items() for b in bs}

    def pred(self) -> dict[KVar, set[KVar]]:
        out: dict[KVar, set[KVar]] = {v: set() for v in self.vertices}
        for a, bs in self.succ.items():
            for b in bs:
                out[b].add(a)
        return out

    def restrict(self, keep: Iterable[KVar]) -> "DepGraph":
        keep = set(keep) & self.vertices
        return DepGraph(keep, {a: {b for b in self.succ.get(a, ()) if b in keep} for a in keep})

    def without(self, drop: Iterable[KVar]) -> "DepGraph":
        """Delete all edges incident to ``drop`` (the vertices stay)."""
        drop = set(drop)
        return DepGraph(set(self.vertices),
                        {a: (set() if a in drop else {b for b in bs if b not in drop})
                         for a, bs in self.succ.items()})


def deps(c: Constraint) -> DepGraph:
    """Edge (k, k') iff k occurs in a body and k' in the head of one flat clause."""
    verts = set(c.kvs)
    succ: dict[KVar, set[KVar]] = {k: set() for k in verts}

    def go(n: Constraint, body: frozenset) -> None:
        if isinstance(n, Head):
            for k in body:
                succ[k] |= n.kvs
        elif isinstance(n, Conj):
            for p in n.parts:
                go(p, body)
        elif n.body.kvs:
            go(n.body, body | L.kvars(n.hyp))

    go(c, frozenset())
    return DepGraph(verts, succ)


def deps_excluding(cut: Iterable[KVar], c: Constraint) -> DepGraph:
    return deps(c).without(cut)


def sccs(g: DepGraph) -> list[list[KVar]]:
    """Tarjan's algorithm, iterative; components come out in reverse topological order."""
    index: dict[KVar, int] = {}
    low: dict[KVar, int] = {}
    on_stack: set[KVar] = set()
    stack: list[KVar] = []
    out: list[list[KVar]] = []
    counter = itertools.count()

    for root in sorted(g.vertices, key=kv_key):
        if root in index:
            continue
        work = [(root, iter(sorted(g.succ.get(root, ()), key=kv_key)))]
        index[root] = low[root] = next(counter)
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = next(counter)
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(sorted(g.succ.get(w, ()), key=kv_key))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(sorted(comp, key=kv_key))
    return out


def _cyclic_components(g: DepGraph) -> list[list[KVar]]:
    return [comp for comp in sccs(g)
            if len(comp) > 1 or comp[0] in g.succ.get(comp[0], ())]


def graph_acyclic(g: DepGraph) -> bool:
    return not _cyclic_components(g)


def is_acyclic(ks: Iterable[KVar], c: Constraint) -> bool:
    """True iff the dependencies restricted to ``ks`` have no cycle (self-loops count)."""
    ks = set(ks)
    return graph_acyclic(deps(c).without(c.kvs - ks))


def cut_vars(c: Constraint | DepGraph, forced: Iterable[KVar] = ()) -> set[KVar]:
    """Greedy cut set: break every cycle by removing, per cyclic SCC, the vertex
    of largest in-degree x out-degree inside the SCC (ties: name order)."""
    g = c if isinstance(c, DepGraph) else deps(c)
    cut = set(forced) & g.vertices
    g = g.without(cut)
    while True:
        comps = _cyclic_components(g)
        if not comps:
            return cut
        chosen = []
        for comp in comps:
            members = set(comp)
            sub = g.restrict(members)
            preds = sub.pred()

            def score(k):
                return (-(len(preds[k]) * len(sub.succ[k])), kv_key(k))

            chosen.append(min(comp, key=score))
        cut |= set(chosen)
        g = g.without(chosen)


def topo_order(g: DepGraph, ks: Iterable[KVar]) -> list[KVar]:
    """Order ``ks`` so that each k comes before every k' it flows into.

    The graph restricted to ``ks`` must be acyclic.  Ties break by name.
    """
    sub = g.restrict(ks)
    preds = sub.pred()
    indeg = {k: len(preds[k]) for k in sub.vertices}

    ready = [(kv_key(k), k.name, k) for k, d in indeg.items() if d == 0]
    heapq.heapify(ready)
    out: list[KVar] = []
    while ready:
        _, _, k = heapq.heappop(ready)
        out.append(k)
        for w in sub.succ.get(k, ()):
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(ready, (kv_key(w), w.name, w))
    if len(out) != len(sub.vertices):
        raise ValueError("dependency cycle among variables to eliminate")
    return out


# ---------------------------------------------------------------------------
# Walking helpers


def goals(c: Constraint) -> Iterator[Head]:
    stack = [c]
    while stack:
        n = stack.pop()
        if isinstance(n, Head):
            yield n
        elif isinstance(n, Conj):
            stack.extend(reversed(n.parts))
        else:
            stack.append(n.body)


def subst_c(c: Constraint, mapping: Mapping[str, str]) -> Constraint:
    """Rename free variables of a constraint (binders must not clash with targets)."""
    if not mapping:
        return c
    if isinstance(c, Head):
        return Head(L.subst(c.pred, mapping), c.tag)
    if isinstance(c, Conj):
        return Conj(tuple(subst_c(p, mapping) for p in c.parts))
    if c.var in mapping.values():
        raise L.CaptureError(f"binder {c.var} captures a renamed variable")
    inner = {a: b for a, b in mapping.items() if a != c.var}
    return Bind(c.var, c.sort, L.subst(c.hyp, inner), subst_c(c.body, inner))


def free_vars_c(c: Constraint) -> set[str]:
    if isinstance(c, Head):
        return set(L.free_vars(c.pred))
    if isinstance(c, Conj):
        return set().union(*(free_vars_c(p) for p in c.parts))
    return (set(L.free_vars(c.hyp)) | free_vars_c(c.body)) - {c.var}


def show(c: Constraint, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(c, Head):
        return pad + L.show(c.pred)
    if isinstance(c, Conj):
        if not c.parts:
            return pad + "true"
        return "\n".join([pad + "and"] + [show(p, indent + 1) for p in c.parts])
    return f"{pad}forall {c.var}:{c.sort}. {L.show(c.hyp)} =>\n{show(c.body, indent + 1)}"
