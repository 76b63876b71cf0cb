import random

import pytest
from hypothesis import given, settings, strategies as st

from fusion import logic as L

import randcons as R

x, y, z = L.v("x"), L.v("y"), L.v("z")


def test_terms_are_interned():
    assert L.v("x") is L.v("x")
    assert L.Eq(x, L.lit(1)) is L.Eq(x, L.lit(1))


def test_smart_constructors_fold_constants():
    assert L.And() is L.TRUE
    assert L.Or() is L.FALSE
    assert L.And(x, L.FALSE) is L.FALSE
    assert L.Or(x, L.TRUE) is L.TRUE
    assert L.show(L.And(L.TRUE, x, L.And(y, L.TRUE))) == "x && y"
    assert L.Implies(L.TRUE, x) is x


def test_subst_avoids_capture():
    t = L.subst(L.Ex("y", L.INT, L.Eq(x, y)), {"x": "y"})
    assert isinstance(t, L.Exists) and t.var != "y"
    assert L.free_vars(t) == {"y"}


def test_free_vars_and_kvars():
    k = L.KVar("k", (("a", L.INT),))
    t = L.Forall("x", L.INT, L.And(L.KApp(k, ("x",)), L.Eq(x, y)))
    assert L.free_vars(t) == {"y"}
    assert L.kvars(t) == {k}


def test_sorting():
    env = {"x": L.INT, "b": L.BOOL}
    assert L.sort_of(env, L.Op("+", (x, L.lit(1)))) == L.INT
    assert L.well_sorted(env, L.Op("<=", (x, L.lit(0))))
    assert not L.well_sorted(env, L.Op("and", (x,)))
    assert "expected Bool" in L.sort_diagnostic(env, L.Op("and", (x,)))


def test_evaluate_arith_and_quantifiers():
    assert L.evaluate(L.Op("<=", (L.Op("+", (x, L.lit(2))), y)), {"x": 1, "y": 3})
    assert L.evaluate(L.Ex("b", L.BOOL, L.v("b")), {})
    assert not L.evaluate(L.Forall("b", L.BOOL, L.v("b")), {})


def test_name_supply_is_sequential():
    s = L.NameSupply()
    assert [s.fresh("a"), s.fresh("a")] == ["a$0", "a$1"]


def test_skolemize_moves_hypothesis_existentials():
    f = L.Forall("a", L.BOOL, L.Implies(L.Ex("b", L.BOOL, L.And(L.v("a"), L.v("b"))), L.v("a")))
    g = L.skolemize_hypotheses(f)
    assert "exists" not in L.show(g)
    assert L.evaluate(f, {}) == L.evaluate(g, {}) is True


def test_skolemize_rejects_goal_existential():
    with pytest.raises(L.SkolemError):
        L.skolemize_hypotheses(L.Ex("b", L.BOOL, L.v("b")))
    kept = L.skolemize_hypotheses(L.Ex("b", L.BOOL, L.v("b")), keep_goal_exists=True)
    assert isinstance(kept, L.Exists)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_skolemize_preserves_truth(seed):
    f = R.random_vc(random.Random(seed))
    assert L.evaluate(f, {}) == L.evaluate(L.skolemize_hypotheses(f), {})


def test_atom_count_counts_tree_leaves():
    assert L.atom_count(L.And(L.Eq(x, y), L.Or(x, y))) == 3
