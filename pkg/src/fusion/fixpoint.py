"""Predicate abstraction for the variables left after elimination.

Each residual kvar starts as the conjunction of every qualifier instance that
fits its parameters, and conjuncts are dropped until all clauses defining a
kvar hold (a greatest fixpoint, in the style of Houdini).
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

from . import constraints as C
from . import logic as L
from . import smtback as B
from .constraints import FlatClause
from .lang import syntax as S

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Qualifier:
    name: str
    params: tuple  # ((name, Sort | None), ...); None matches any sort
    body: L.Term

    @classmethod
    def of(cls, q: S.QualDecl) -> "Qualifier":
        return cls(q.name, tuple(q.params), q.body)

    def __str__(self) -> str:
        ps = ", ".join(f"{x}:{s if s else '_'}" for x, s in self.params)
        return f"qualif {self.name}({ps}): ({L.show(self.body)})"


def instantiate(quals, k: L.KVar, uninterps: dict | None = None) -> list[L.Term]:
    """Every sort-correct instance of the qualifiers over k's parameters."""
    out: list[L.Term] = []
    seen: set = set()
    for q in quals:
        q = q if isinstance(q, Qualifier) else Qualifier.of(q)
        choices = []
        for _, s in q.params:
            choices.append([z for z, zs in k.params if s is None or zs == s])
        for combo in itertools.product(*choices):
            env = dict(uninterps or {})
            env.update(k.params)
            p = L.subst(q.body, {x: z for (x, _), z in zip(q.params, combo)})
            if not L.well_sorted(env, p):
                continue
            if p not in seen:
                seen.add(p)
                out.append(p)
    return out


@dataclass
class FixResult:
    ok: bool
    sigma: dict
    failed: list = field(default_factory=list)      # [(FlatClause, Result)]
    unknown: list = field(default_factory=list)
    iterations: int = 0
    candidates: dict = field(default_factory=dict)  # kvar -> initial conjunct count


def _goal_kvar(fc: FlatClause):
    g = fc.goal
    return g if isinstance(g, L.KApp) else None


def solve(cs: list[FlatClause], quals, solver: B.Solver, uninterps: dict | None = None) -> FixResult:
    kvs = sorted(set().union(*(L.kvars(fc.goal) | set().union(*(L.kvars(p) for p in fc.bodies))
                               for fc in cs)) if cs else set(), key=C.kv_key)
    cand = {k: instantiate(quals, k, uninterps) for k in kvs}
    res = FixResult(False, {}, candidates={k: len(v) for k, v in cand.items()})

    def sigma():
        return {k: L.And(*ps) for k, ps in cand.items()}

    defining = [fc for fc in cs if _goal_kvar(fc) is not None]
    concrete = [fc for fc in cs if _goal_kvar(fc) is None]
    changed = True
    while changed:
        changed = False
        res.iterations += 1
        for fc in defining:
            app = fc.goal
            k = app.kvar
            if not cand[k]:
                continue
            sig = sigma()
            base = C.apply_flat(sig, FlatClause(fc.binders, L.TRUE, fc.tag))
            ren = dict(zip(k.param_names, app.args))
            goals = [L.subst(q, ren) for q in cand[k]]
            # one query for the whole conjunction before testing conjuncts one by one
            whole = solver.check_valid(C.clause_formula(FlatClause(base.binders, L.And(*goals))))
            if isinstance(whole, B.Valid):
                continue
            keep = []
            for q, g in zip(cand[k], goals):
                r = solver.check_valid(C.clause_formula(FlatClause(base.binders, g)))
                if isinstance(r, B.Valid):
                    keep.append(q)
                elif isinstance(r, B.Unknown):
                    log.warning("solver returned unknown (%s); dropping %s for %s",
                                r.reason, L.show(q), k.name)
            if len(keep) != len(cand[k]):
                cand[k] = keep
                changed = True
    res.sigma = sigma()
    for fc in concrete:
        r = solver.check_valid(C.clause_formula(C.apply_flat(res.sigma, fc)))
        if isinstance(r, B.Invalid):
            res.failed.append((fc, r))
        elif isinstance(r, B.Unknown):
            res.unknown.append((fc, r))
    res.ok = not res.failed and not res.unknown
    if res.ok:
        # the returned assignment must satisfy every clause
        for fc in defining:
            r = solver.check_valid(C.clause_formula(C.apply_flat(res.sigma, fc)))
            if isinstance(r, B.Invalid):
                raise AssertionError(f"fixpoint result violates {fc}")
    return res


def scrape_qualifiers(sigs: dict) -> list[Qualifier]:
    """Atomic predicates of the given signatures, with variables generalized."""
    out: list[Qualifier] = []
    seen: set = set()

    def atoms(p):
        if isinstance(p, L.Op) and p.op == "and":
            for a in p.args:
                yield from atoms(a)
        elif p is not L.TRUE and not L.kvars(p):
            yield p

    def walk(t, scope):
        if isinstance(t, S.RBase) and not isinstance(t.pred, S.Hole):
            env = {**scope, t.v: t.sort}
            for a in atoms(t.pred):
                fv = sorted(L.free_vars(a))
                if any(x not in env or not isinstance(env[x], L.Sort) for x in fv):
                    continue
                params = tuple((f"x{i}", env[x]) for i, x in enumerate(fv))
                body = L.subst(a, {x: f"x{i}" for i, x in enumerate(fv)})
                key = (params, body)
                if key not in seen:
                    seen.add(key)
                    out.append(Qualifier(f"Scraped{len(out)}", params, body))
        elif isinstance(t, S.RFun):
            walk(t.arg, scope)
            inner = dict(scope)
            if isinstance(t.arg, S.RBase):
                inner[t.x] = t.arg.sort
            walk(t.res, inner)
        elif isinstance(t, S.RCon):
            for a in t.args:
                walk(a, scope)
        elif isinstance(t, S.RAll):
            walk(t.body, scope)

    for t in sigs.values():
        walk(t, {})
    return out
