"""Metatheory of elimination, checked on random boolean constraints."""

from hypothesis import HealthCheck, given, settings, strategies as st

import lemmas

seeds = st.integers(0, 2**32 - 1)
many = settings(max_examples=120, deadline=None,
                suppress_health_check=[HealthCheck.function_scoped_fixture])


@many
@given(seed=seeds)
def test_flattening(seed):
    lemmas.check_flattening(seed)


@many
@given(seed=seeds)
def test_partition(seed):
    lemmas.check_partition(seed)


@many
@given(seed=seeds)
def test_scoped_definitions_and_uses(seed):
    lemmas.check_scoped_definitions_and_uses(seed)


@many
@given(seed=seeds)
def test_elim_acyclic(seed):
    lemmas.check_elim_acyclic(seed)


@many
@given(seed=seeds)
def test_elim_one_removes_variable(seed):
    lemmas.check_elim_one_removes_variable(seed)


@many
@given(seed=seeds)
def test_strongest_scoped_satisfies_definitions(solver, seed):
    lemmas.check_strongest_scoped_satisfies_definitions(seed, solver)
