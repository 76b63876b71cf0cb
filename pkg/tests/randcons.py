"""Random boolean Horn constraints and brute-force oracles for them.

Every binder and kvar parameter has sort Bool, so satisfaction can be decided
by enumerating kvar interpretations and binder valuations.
"""

from __future__ import annotations

import itertools
import random

from fusion import constraints as C
from fusion import logic as L
from fusion.smtback import constraint_formula

B = L.BOOL


def make_kvars(rng: random.Random, n: int) -> list[L.KVar]:
    return [L.KVar(f"k{i}", (("z", B),) if rng.random() < 0.6 else ()) for i in range(n)]


def _atom(rng, scope):
    if not scope or rng.random() < 0.15:
        return rng.choice([L.TRUE, L.FALSE])
    x = L.v(rng.choice(scope))
    return x if rng.random() < 0.6 else L.Not(x)


def _kapp(rng, k, scope):
    if k.arity == 0:
        return L.KApp(k, ())
    if not scope:
        return None
    return L.KApp(k, (rng.choice(scope),))


def _goal(rng, kvs, scope):
    if kvs and rng.random() < 0.55:
        app = _kapp(rng, rng.choice(kvs), scope)
        if app is not None:
            return app
    if rng.random() < 0.4:
        return L.Or(_atom(rng, scope), _atom(rng, scope))
    return _atom(rng, scope)


def _hyp(rng, kvs, scope_with_x):
    r = rng.random()
    if kvs and r < 0.45:
        app = _kapp(rng, rng.choice(kvs), scope_with_x)
        if app is not None:
            return app if rng.random() < 0.5 else L.And(_atom(rng, scope_with_x), app)
    if r < 0.6:
        return L.TRUE
    return _atom(rng, scope_with_x)


def random_constraint(rng: random.Random, max_kvars: int = 3, max_binders: int = 6,
                      max_nodes: int = 10, acyclic: bool = True, tries: int = 200) -> C.Constraint:
    """A seeded random constraint; ``acyclic`` rejects samples with dependency cycles."""
    for _ in range(tries):
        kvs = make_kvars(rng, rng.randint(1, max_kvars))
        budget = {"nodes": max_nodes, "binders": max_binders, "names": 0}

        def build(scope):
            budget["nodes"] -= 1
            r = rng.random()
            if budget["nodes"] >= 2 and r < 0.3:
                n_left = rng.randint(1, budget["nodes"] - 1)
                saved = budget["nodes"]
                budget["nodes"] = n_left
                left = build(scope)
                budget["nodes"] = saved - n_left + budget["nodes"]
                right = build(scope)
                return C.Conj((left, right))
            if budget["nodes"] >= 1 and budget["binders"] > 0 and r < 0.8:
                budget["binders"] -= 1
                x = f"x{budget['names']}"
                budget["names"] += 1
                hyp = _hyp(rng, kvs, scope + [x])
                return C.Bind(x, B, hyp, build(scope + [x]))
            return C.Head(_goal(rng, kvs, scope))

        c = build([])
        if C.size(c) > max_nodes or not c.kvs:
            continue
        if acyclic and not C.is_acyclic(c.kvs, c):
            continue
        return c
    raise RuntimeError("could not sample a constraint")


def interpretations(k: L.KVar):
    """All boolean relations of k's arity, as (label, function) pairs."""
    if k.arity == 0:
        return [("T", lambda: True), ("F", lambda: False)]
    return [("F", lambda a: False), ("T", lambda a: True),
            ("id", lambda a: a), ("not", lambda a: not a)]


def all_assignments(kvs):
    kvs = sorted(kvs, key=C.kv_key)
    for combo in itertools.product(*(interpretations(k) for k in kvs)):
        yield {k: fn for k, (_, fn) in zip(kvs, combo)}


def holds(c, kinterp=None) -> bool:
    """Truth-table validity of a constraint (or flat clause list) under kinterp."""
    if isinstance(c, list):
        return all(L.evaluate(C.clause_formula(fc), {}, kinterp or {}) for fc in c)
    return bool(L.evaluate(constraint_formula(c), {}, kinterp or {}))


def brute_sat(c) -> bool:
    """Some interpretation of the kvars makes c valid."""
    kvs = c.kvs if not isinstance(c, list) else set().union(
        *(L.kvars(fc.goal) | set().union(*(L.kvars(p) for p in fc.bodies)) for fc in c))
    return any(holds(c, ki) for ki in all_assignments(kvs))


def _has_exists(t: L.Term) -> bool:
    return isinstance(t, L.Exists) or any(_has_exists(a) for a in L.children(t))


def random_vc(rng: random.Random, depth: int = 4, names=("a", "b", "c")) -> L.Term:
    """A closed boolean formula whose hypotheses contain existentials."""
    while True:
        f = _random_vc(rng, depth, names)
        if _has_exists(f):
            return f


def _random_vc(rng, depth, names):

    def prop(scope, d):
        if d == 0 or rng.random() < 0.3:
            return _atom(rng, scope)
        op = rng.choice(["and", "or", "not", "ex"])
        if op == "and":
            return L.And(prop(scope, d - 1), prop(scope, d - 1))
        if op == "or":
            return L.Or(prop(scope, d - 1), prop(scope, d - 1))
        if op == "not":
            return L.Not(_atom(rng, scope))
        y = rng.choice(names)
        return L.Ex(y, B, prop(scope + [y], d - 1))

    def qfree(scope, d):
        if d == 0 or rng.random() < 0.4:
            return _atom(rng, scope)
        return rng.choice([L.And, L.Or])(qfree(scope, d - 1), qfree(scope, d - 1))

    def goal(scope, d):
        if d > 0 and rng.random() < 0.5:
            x = rng.choice(names)
            return L.Forall(x, B, L.Implies(prop(scope + [x], d - 1), goal(scope + [x], d - 1)))
        if d > 0 and rng.random() < 0.3:
            return L.And(goal(scope, d - 1), goal(scope, d - 1))
        return qfree(scope, 2)

    return goal([], depth)
