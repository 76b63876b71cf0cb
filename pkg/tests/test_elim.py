import pytest

from fusion import constraints as C
from fusion import driver as D
from fusion import elim as E
from fusion import logic as L

import randcons as R

Bo, I = L.BOOL, L.INT
a, b = L.v("a"), L.v("b")
k = L.KVar("k", (("x", Bo),))


def nested():
    # forall a. a => forall b. !b => (k(a) && k(b))
    return C.Bind("a", Bo, a, C.Bind("b", Bo, L.Not(b), C.Conj((
        C.Head(L.KApp(k, ("a",))), C.Head(L.KApp(k, ("b",)))))))


def test_sol_is_disjunction_of_bodies():
    s = E.sol(k, nested())
    assert L.show(s) == "exists a:Bool. a && (exists b:Bool. (!b) && (x = a || x = b))"


def test_scoped_solution_omits_prefix():
    prefix, inner = E.split_scope(k, nested())
    assert [v for v, _, _ in prefix] == ["a", "b"]
    assert L.show(E.strongest_scoped(k, nested())[k]) == "x = a || x = b"


def test_scope_stops_at_branching():
    j = L.KVar("j", ())
    c = C.Conj((C.Bind("a", Bo, L.TRUE, C.Head(L.KApp(j, ()))),
                C.Bind("b", Bo, L.KApp(j, ()), C.Head(b))))
    assert E.scope(j, c) is c
    inner = C.Conj((c.parts[0], C.Head(a)))
    assert E.scope(j, inner) == c.parts[0]


def test_elim_sol_turns_goals_true_and_substitutes_hyps():
    j = L.KVar("j", ())
    c = C.Conj((C.Bind("a", Bo, a, C.Head(L.KApp(j, ()))),
                C.Bind("b", Bo, L.KApp(j, ()), C.Head(b))))
    out = E.elim_one(j, c)
    assert not out.kvs
    assert R.holds(out) is False  # j must be true, and then b is unconstrained


def test_elim_one_refuses_cycles():
    c = C.Bind("a", Bo, L.KApp(k, ("a",)), C.Head(L.KApp(k, ("a",))))
    with pytest.raises(E.CyclicError):
        E.elim_one(k, c)


def test_elimination_order_producers_first():
    j = L.KVar("j", ())
    c = C.Conj((C.Bind("a", Bo, L.KApp(k, ("a",)), C.Head(L.KApp(j, ()))),
                C.Bind("a", Bo, a, C.Head(L.KApp(k, ("a",))))))
    assert E.elimination_order(c, c.kvs) == [k, j]


def test_simplify_drops_dead_and_alias_variables():
    k1 = L.KVar("k1", (("z", I),))
    k2 = L.KVar("k2", (("z", I),))
    dead = L.KVar("k3", ())
    c = C.conj(
        C.bind("x", I, L.Op("<=", (L.lit(0), L.v("x"))), C.head(L.KApp(k1, ("x",)))),
        C.bind("w", I, L.KApp(k1, ("w",)), C.head(L.KApp(k2, ("w",)))),
        C.bind("u", I, L.KApp(k2, ("u",)), C.head(L.Op("<=", (L.lit(0), L.v("u"))))),
        C.bind("d", Bo, L.KApp(dead, ()), C.head(L.FALSE)))
    out, removed = E.simplify_kvars(c)
    assert dead in removed
    assert len(out.kvs) < len(c.kvs)
    assert not E.elim(E.elimination_order(out, out.kvs), out).kvs


def test_fuse_trips_on_unscoped_chain():
    prep = D.prepare(D.let_chain(16), D.Options())
    order = E.elimination_order(prep.constraint, prep.constraint.kvs)
    with pytest.raises(E.FuseError):
        E.elim(order, prep.constraint, scoped=False, fuse=10_000)


def test_atom_count_counts_per_use():
    c = C.bind("a", Bo, L.And(a, b), C.conj(C.head(a), C.head(L.Or(a, b))))
    assert E.atom_count(c) == 5
