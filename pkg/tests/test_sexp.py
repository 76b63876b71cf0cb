import random

import pytest
from hypothesis import given, settings, strategies as st

from fusion import driver as D
from fusion import sexp

import randcons as R
from conftest import PROGRAMS, program


@pytest.mark.parametrize("name", sorted(p.name for p in PROGRAMS.glob("*.lf")))
def test_dump_parse_round_trip(name):
    c = D.prepare(program(name), D.Options()).constraint
    assert sexp.parse_constraints(sexp.dump_constraint(c)) == c


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_round_trip_random(seed):
    c = R.random_constraint(random.Random(seed), acyclic=False)
    assert sexp.parse_constraints(sexp.dump_constraint(c)) == c


def test_reader_errors():
    with pytest.raises(sexp.SexpError):
        sexp.read_all("(a (b)")
    with pytest.raises(sexp.SexpError):
        sexp.read_all("a)")
    with pytest.raises(sexp.SexpError):
        sexp.parse_constraints("(kapp k x)")


def test_comments_are_skipped():
    assert sexp.read_all("; note\n(a b) ; tail\n") == [["a", "b"]]
