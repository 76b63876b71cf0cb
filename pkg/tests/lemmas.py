"""Metatheory of elimination as checks over one seeded random constraint.

Each check raises AssertionError on disagreement with its oracle.
"""

import itertools
import random

from fusion import constraints as C
from fusion import elim as E
from fusion import logic as L
from fusion import smtback as B

import randcons as R


def pick_kvar(rng, c):
    return rng.choice(sorted(c.kvs, key=C.kv_key))


def check_flattening(seed, solver=None):
    rng = random.Random(seed)
    c = R.random_constraint(rng, acyclic=False)
    for ki in R.all_assignments(c.kvs):
        assert R.holds(c, ki) == R.holds(C.flatten(c), ki)


def check_partition(seed, solver=None):
    rng = random.Random(seed)
    c = R.random_constraint(rng)
    k = pick_kvar(rng, c)
    d, u = C.defns(c, k), C.uses(c, k)
    flat = C.flatten(c)
    assert len(d) + len(u) == len(flat)
    assert set(d) | set(u) == set(flat)
    assert all(L.has_kvar(fc.goal, k) for fc in d)
    assert not any(L.has_kvar(fc.goal, k) for fc in u)
    for ki in R.all_assignments(c.kvs):
        assert R.holds(c, ki) == (R.holds(d, ki) and R.holds(u, ki))


def check_scoped_definitions_and_uses(seed, solver=None):
    rng = random.Random(seed)
    c = R.random_constraint(rng)
    k = pick_kvar(rng, c)
    s = E.scope(k, c)
    assert C.defns(c, k) == C.defns(s, k)
    extra = [fc for fc in C.uses(c, k) if fc not in C.uses(s, k)]
    assert set(C.uses(s, k)) <= set(C.uses(c, k))
    assert not any(L.has_kvar(fc.goal, k) or any(L.has_kvar(p, k) for p in fc.bodies)
                   for fc in extra)
    for ki in R.all_assignments(c.kvs):
        assert R.holds(C.defns(c, k), ki) == R.holds(C.defns(s, k), ki)
        if R.holds(c, ki):
            assert R.holds(s, ki)


def check_elim_acyclic(seed, solver=None):
    """K' acyclic in c and k in K' imply K' acyclic after eliminating k."""
    rng = random.Random(seed)
    while True:
        c = R.random_constraint(rng, acyclic=False)
        ks = sorted(c.kvs, key=C.kv_key)
        acyclic = [k for k in ks if C.is_acyclic({k}, c)]
        if acyclic:
            break
    k = rng.choice(acyclic)
    sigma = E.strongest_scoped(k, c)
    dep_sigma = {(k2, k) for k2 in L.kvars(sigma[k])}
    assert dep_sigma <= C.deps(c).edges()
    out = E.elim_sol(sigma, c)
    others = [k2 for k2 in ks if k2 != k]
    for r in range(len(others) + 1):
        for rest in itertools.combinations(others, r):
            subset = {k, *rest}
            if C.is_acyclic(subset, c):
                assert C.is_acyclic(subset, out)


def check_elim_one_removes_variable(seed, solver=None):
    rng = random.Random(seed)
    c = R.random_constraint(rng)
    k = pick_kvar(rng, c)
    sigma = E.strongest_scoped(k, c)
    out = E.elim_one(k, c)
    assert k not in out.kvs
    expected = [C.apply_flat(sigma, fc) for fc in C.uses(c, k)]
    expected = [fc for fc in expected if fc.goal is not L.TRUE]
    got = C.flatten(out)
    for ki in R.all_assignments(c.kvs - {k}):
        assert R.holds(got, ki) == R.holds(expected, ki)
    # satisfiability is preserved by one elimination
    assert R.brute_sat(out) == R.brute_sat(c)


def check_strongest_scoped_satisfies_definitions(seed, solver):
    rng = random.Random(seed)
    c = R.random_constraint(rng)
    k = pick_kvar(rng, c)
    sigma = E.strongest_scoped(k, c)
    for fc in C.defns(c, k):
        f = C.clause_formula(C.apply_flat(sigma, fc))
        # route 1: the solver, other kvars uninterpreted
        r = solver.check_valid(f, kvars_uninterpreted=True, goal_quantifiers=True)
        assert isinstance(r, B.Valid), (C.show(c), str(fc), r)
        # route 2: every interpretation of the other kvars
        for ki in R.all_assignments(c.kvs - {k}):
            assert L.evaluate(f, {}, ki)
