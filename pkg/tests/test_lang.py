import pytest
from hypothesis import given, settings, strategies as st

from fusion import logic as L
from fusion.lang import (ElabError, ParseError, anf_normalize, build_module, is_anf,
                         load_prelude, parse_expr, parse_program, parse_qualifiers,
                         parse_type, prelude_program, shape)
from fusion.lang import syntax as S

from conftest import PROGRAMS, program


def elaborate(text):
    return build_module(prelude_program(), parse_program(text))


# -- parsing ---------------------------------------------------------------

@pytest.mark.parametrize("path", sorted(p.name for p in PROGRAMS.glob("*.lf")))
def test_corpus_parses(path):
    assert parse_program(program(path)).decls


def test_signature_does_not_swallow_next_line():
    prog = parse_program("f :: Nat -> Nat\nf x = inc x\n")
    assert len(prog.decls) == 2


def test_parse_error_position():
    with pytest.raises(ParseError) as exc:
        parse_program("f :: Int -> Int\nf x = = 3\n")
    assert (exc.value.line, exc.value.col) == (2, 7)


def test_dollar_is_reserved():
    with pytest.raises(ParseError, match="reserved"):
        parse_expr("x$1")


def test_type_print_parse_fixed_point():
    t = parse_type("x:{v:Int | 0 <= v} -> List {v:Int | v = x} -> {v:Int | _}")
    assert parse_type(S.show_rtype(t)) == t
    assert S.show_rtype(t) == "x:{v:Int | 0 <= v} -> List {v:Int | v = x} -> {v:Int | _}"


def test_qualifier_file():
    q, = parse_qualifiers("qualif Pos(v:Int): 0 <= v\n")
    assert q.name == "Pos" and L.show(q.body) == "0 <= v"
    with pytest.raises(ParseError):
        parse_qualifiers("f :: Int\n")


# random surface expressions over a few names
names = st.sampled_from(["x", "y", "inc", "dec", "f"])


def exprs():
    leaf = st.one_of(names.map(S.Var), st.integers(0, 9).map(S.Const))
    return st.recursive(leaf, lambda sub: st.one_of(
        st.tuples(sub, sub).map(lambda p: S.App(*p)),
        st.tuples(names, sub, sub).map(lambda p: S.Let(p[0], p[1], p[2])),
        st.tuples(names, sub).map(lambda p: S.Lam(p[0], None, p[1])),
        st.tuples(sub, sub, sub).map(lambda p: S.If(*p)),
    ), max_leaves=12)


@settings(max_examples=200, deadline=None)
@given(exprs())
def test_expr_print_parse_fixed_point(e):
    text = S.show_expr(e)
    assert parse_expr(text) == e
    assert S.show_expr(parse_expr(text)) == text


@settings(max_examples=200, deadline=None)
@given(exprs())
def test_anf_is_idempotent(e):
    a = anf_normalize(e)
    assert is_anf(a)
    assert anf_normalize(a) == a


def test_anf_names_arguments():
    a = anf_normalize(parse_expr("inc (dec x)"))
    assert S.show_expr(a) == "let t$0 = dec x in inc t$0"


# -- elaboration -----------------------------------------------------------

def test_prelude_loads():
    env = load_prelude()
    assert "inc" in env.names()
    assert S.show_rtype(env.lookup("inc")) == "x:Int -> {v:Int | v = x + 1}"


def test_alias_expands():
    mod = elaborate("f :: Nat -> Nat\nf x = x\n")
    assert S.show_rtype(mod.sigs["f"]) == "{v:Int | 0 <= v} -> {v:Int | 0 <= v}"


def test_polymorphic_uses_get_type_applications():
    mod = elaborate(program("ex3.lf"))
    (_, core, _), = mod.defs
    assert S.show_expr(core).endswith("compose @Int @Int @Int fp fn")


def test_missing_signature_is_an_error():
    with pytest.raises(ElabError, match="signature"):
        elaborate("f x = x\n")


def test_unbound_variable():
    with pytest.raises(ElabError):
        elaborate("f :: Int -> Int\nf x = y\n")


def test_shape_mismatch():
    with pytest.raises(ElabError):
        elaborate("f :: Int -> Bool\nf x = inc x\n")


def test_holes_only_in_signatures():
    with pytest.raises(ElabError, match="only allowed in top-level signatures"):
        elaborate("f :: Int -> Int\nf x = let g = \\(a : {v:Int | _}) -> a in g x\n")


def test_refinement_sort_errors():
    with pytest.raises(ElabError):
        elaborate("f :: x:Int -> {v:Int | v && x}\nf x = x\n")


def test_refinements_cannot_mention_functions():
    with pytest.raises(ElabError, match="refinements are first-order"):
        elaborate("f :: g:(Int -> Int) -> {v:Int | v = g}\nf g = 0\n")


def test_shape_erases_refinements():
    t = parse_type("x:{v:Int | 0 <= v} -> List {v:Int | v = x}")
    mod = elaborate("f :: x:{v:Int | 0 <= v} -> List {v:Int | v = x}\nf x = cons x nil\n")
    u = shape(mod.sigs["f"])
    assert isinstance(u, S.UFun) and u.arg == S.UBase(L.INT)
    assert isinstance(t, S.RFun)
