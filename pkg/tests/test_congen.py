import pytest
from hypothesis import given, settings, strategies as st

from fusion import congen as G
from fusion import constraints as C
from fusion import driver as D
from fusion import logic as L
from fusion.lang import TypeEnv, build_module, parse_program, prelude_program, shape
from fusion.lang import syntax as S

from conftest import PROGRAMS, program


def generated(name, **kw):
    mod = build_module(prelude_program(), parse_program(program(name)))
    return G.generate(mod, **kw)


def test_ex1_two_clauses_share_x():
    c = D.prepare(program("ex1.lf"), D.Options()).constraint
    assert isinstance(c, C.Bind) and c.var == "x"
    assert isinstance(c.body, C.Conj) and len(c.body.parts) == 2
    cs = C.flatten(c)
    assert len(cs) == 2
    assert all(fc.binders[0][0] == "x" for fc in cs)
    assert len(c.kvs) == 1


def test_ex2_four_clauses():
    c = D.prepare(program("ex2.lf"), D.Options()).constraint
    assert len(C.flatten(c)) == 4


def kapps_well_scoped(c, env=None):
    """Every kvar argument is bound above its use with the parameter's sort."""
    env = dict(env or {})
    if isinstance(c, C.Head):
        preds = [c.pred]
        inner = env
    elif isinstance(c, C.Conj):
        return all(kapps_well_scoped(p, env) for p in c.parts)
    else:
        inner = {**env, c.var: c.sort}
        preds = [c.hyp]
    for p in preds:
        stack = [p]
        while stack:
            t = stack.pop()
            if isinstance(t, L.KApp):
                for a, (_, s) in zip(t.args, t.kvar.params):
                    if inner.get(a) != s:
                        return False
            stack.extend(L.children(t))
    return True if isinstance(c, C.Head) else kapps_well_scoped(c.body, inner)


@pytest.mark.parametrize("name", sorted(p.name for p in PROGRAMS.glob("*.lf")))
def test_generated_constraints_are_well_formed(name):
    gen = generated(name)
    c = gen.constraint
    assert C.binders_distinct(c)
    assert kapps_well_scoped(c)
    ok, msg = C.wf({}, C.erase_kvars(c))
    assert ok, msg


def test_signature_holes_become_toplevel_kvars():
    gen = generated("sum.lf")
    k, = gen.toplevel
    assert [s for _, s in k.params] == [L.INT, L.INT]


def test_holes_refuse_later_binders():
    mod = build_module(prelude_program(), parse_program(
        "f :: {v:Int | _} -> y:Int -> Int\nf a y = y\n"))
    gen = G.generate(mod)
    k, = gen.toplevel
    assert k.arity == 1


def test_singleton_for_guarded_base_binders():
    env = TypeEnv().extend("x", S.RBase("v", L.INT, L.TRUE), guarded=True)
    t = G.singty(env, "x")
    assert L.show(t.pred) == "v = x"


def test_sub_on_base_types_is_an_implication():
    t1 = S.RBase("v", L.INT, L.Op("<=", (L.lit(1), L.v("v"))))
    t2 = S.RBase("w", L.INT, L.Op("<=", (L.lit(0), L.v("w"))))
    fc, = C.flatten(G.sub(t1, t2))
    assert str(fc) == "forall v:Int. 1 <= v => 0 <= v"


def test_sub_is_contravariant_in_arguments():
    nat = S.RBase("v", L.INT, L.Op("<=", (L.lit(0), L.v("v"))))
    pos = S.RBase("v", L.INT, L.Op("<=", (L.lit(1), L.v("v"))))
    c = G.sub(S.RFun("x", nat, pos), S.RFun("y", pos, nat))
    goals = [L.show(fc.goal) for fc in C.flatten(c)]
    assert goals == ["0 <= v", "0 <= v"]


# random unrefined types
sorts = st.sampled_from([L.INT, L.BOOL])
utypes = st.recursive(
    st.one_of(sorts.map(S.UBase), st.sampled_from(["a", "b"]).map(S.UVar)),
    lambda sub: st.one_of(
        st.tuples(st.sampled_from(["x", "y", "_"]), sub, sub).map(lambda p: S.UFun(*p)),
        sub.map(lambda a: S.UCon("List", (a,)))),
    max_leaves=6)


def erase_names(u):
    if isinstance(u, S.UFun):
        return S.UFun("", erase_names(u.arg), erase_names(u.res))
    if isinstance(u, S.UCon):
        return S.UCon(u.name, tuple(erase_names(a) for a in u.args))
    return u


@settings(max_examples=200, deadline=None)
@given(utypes)
def test_fresh_template_has_requested_shape(u):
    env = TypeEnv().extend("n", S.RBase("v", L.INT, L.TRUE), guarded=True)
    t = G.Generator().fresh(env, u)
    assert erase_names(shape(t)) == erase_names(u)
