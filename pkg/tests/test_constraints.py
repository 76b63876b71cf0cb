import random

from hypothesis import given, settings, strategies as st

from fusion import constraints as C
from fusion import logic as L

import randcons as R

I, Bo = L.INT, L.BOOL
x, y = L.v("x"), L.v("y")
k = L.KVar("k", (("z", I),))
j = L.KVar("j", (("z", I),))


def app(kv, *args):
    return L.KApp(kv, args)


def sample():
    # forall x. 0<=x => (k(x) && forall y. k(y) => j(y)) ; forall y. j(y) => 0 <= y
    return C.conj(
        C.bind("x", I, L.Op("<=", (L.lit(0), x)),
               C.conj(C.head(app(k, "x")),
                      C.bind("y", I, app(k, "y"), C.head(app(j, "y"))))),
        C.bind("y", I, app(j, "y"), C.head(L.Op("<=", (L.lit(0), y)))))


def test_flatten_one_clause_per_path():
    cs = C.flatten(sample())
    assert len(cs) == 3
    assert [len(fc.binders) for fc in cs] == [1, 2, 1]
    assert cs[1].goal == app(j, "y")


def test_flatten_drops_true_goals():
    assert C.flatten(C.bind("x", I, L.TRUE, C.head(L.TRUE))) == []


def test_defns_and_uses():
    c = sample()
    assert [fc.goal for fc in C.defns(c, k)] == [app(k, "x")]
    assert len(C.uses(c, k)) == 2


def test_dependencies():
    g = C.deps(sample())
    assert g.edges() == {(k, j)}
    assert C.is_acyclic({k, j}, sample())
    assert C.cut_vars(sample()) == set()
    assert C.topo_order(g, {k, j}) == [k, j]


def test_self_loop_is_cyclic_and_cut():
    c = C.bind("x", I, app(k, "x"), C.head(app(k, "x")))
    assert not C.is_acyclic({k}, c)
    assert C.cut_vars(c) == {k}
    assert C.cut_vars(sample(), forced={k}) == {k}


def test_rename_binders_removes_shadowing():
    c = C.bind("a", Bo, L.v("a"), C.bind("a", Bo, L.v("a"), C.head(L.v("a"))))
    r = C.rename_binders(c)
    assert C.binders_distinct(r)
    assert R.holds(r) == R.holds(c)


def test_wf_reports_sort_errors():
    ok, msg = C.wf({}, C.Bind("a", I, L.v("a"), C.Head(L.TRUE)))
    assert not ok and "expected Bool" in msg
    assert C.wf({}, C.bind("a", I, L.TRUE, C.head(L.Op("<=", (L.lit(0), L.v("a"))))))[0]


def test_apply_substitutes_parameters():
    sigma = {k: L.Op("<=", (L.lit(0), L.v("z")))}
    fc = C.apply_flat(sigma, C.flatten(sample())[0])
    assert L.show(fc.goal) == "0 <= x"


def test_tags_survive_flattening():
    t = C.Tag(3, 7, "here")
    fc, = C.flatten(C.bind("x", I, L.TRUE, C.head(L.FALSE, t)))
    assert fc.tag == t


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_cut_vars_break_all_cycles(seed):
    c = R.random_constraint(random.Random(seed), acyclic=False)
    cut = C.cut_vars(c)
    # oracle: depth-first search for a cycle among the remaining variables
    g = C.deps(c).without(cut)
    colour = {}

    def cyclic(v):
        colour[v] = 1
        for w in g.succ.get(v, ()):
            if colour.get(w) == 1 or (w not in colour and cyclic(w)):
                return True
        colour[v] = 2
        return False

    assert not any(cyclic(v) for v in g.vertices if v not in colour)
    assert C.is_acyclic(c.kvs - cut, c)
