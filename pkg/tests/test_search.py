"""Candidate enumeration and the search budget."""

import pytest

from univsim.errors import BudgetExceededError
from univsim.finrel import FinSet, UNIT, classify
from univsim.search import (
    SearchBudget,
    all_rel_count,
    functional_count,
    iter_all_rels,
    iter_all_states,
    iter_functional_rels,
    iter_functional_states,
    iter_total_functions,
    random_functional,
    total_functional_count,
)

A = FinSet("A", ("a0", "a1"))
B = FinSet("B", ("b0", "b1", "b2"))


def test_counts_match_enumeration_lengths():
    assert functional_count(A, B) == len(list(iter_functional_rels(A, B))) == 16
    assert total_functional_count(A, B) == len(list(iter_total_functions(A, B))) == 9
    assert all_rel_count(A, B) == len(list(iter_all_rels(A, B))) == 64


def test_enumerations_have_no_duplicates():
    seen = {f for f in iter_functional_rels(A, B)}
    assert len(seen) == 16
    for f in seen:
        assert classify(f).functional


def test_empty_candidate_comes_first():
    first = next(iter(iter_functional_rels(A, B)))
    assert first.mat.sum() == 0
    first_state = next(iter(iter_functional_states(B)))
    assert first_state.dom == UNIT and first_state.mat.sum() == 0
    assert len(list(iter_all_states(A))) == 4


def test_budget_charges_and_refuses():
    budget = SearchBudget(max_candidates=100)
    budget.charge(100, "fits")
    with pytest.raises(BudgetExceededError):
        budget.charge(101, "does not")


def test_budget_reads_environment(monkeypatch):
    monkeypatch.setenv("UNIVSIM_BUDGET", "12345")
    assert SearchBudget.from_env().max_candidates == 12345
    monkeypatch.delenv("UNIVSIM_BUDGET")
    assert SearchBudget.from_env().max_candidates == SearchBudget().max_candidates


def test_random_functional_is_functional(rnd):
    for _ in range(30):
        f = random_functional(rnd, A, B)
        assert classify(f).functional
    g = random_functional(rnd, A, B, total=True)
    assert classify(g).total
