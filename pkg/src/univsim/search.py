"""Candidate enumeration, budgets, and random generators for searches.

Every exhaustive search in the package walks one of the enumerations
defined here, in their fixed documented order, and returns the first hit.
That makes "lexicographically least witness" a stable contract even if an
implementation were to scan candidates in parallel.

Enumeration orders:

* functional relations: one symbol per domain element, drawn from
  (undefined, cod[0], cod[1], ...); candidates ordered like odometer
  readings with the leftmost domain element most significant;
* arbitrary relations: matrices read as integers, cell (i, j) contributing
  bit i * |cod| + j, enumerated in increasing value with low cells as low
  bits;
* functional states: the empty state first, then each singleton in
  carrier order.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from itertools import product as iproduct
from typing import Iterator

import numpy as np

from .errors import BudgetExceededError
from .finrel import FinRel, FinSet, UNIT

DEFAULT_BUDGET = 250_000
BUDGET_ENV_VAR = "UNIVSIM_BUDGET"


@dataclass(frozen=True)
class SearchBudget:
    max_candidates: int = DEFAULT_BUDGET

    @classmethod
    def from_env(cls) -> "SearchBudget":
        raw = os.environ.get(BUDGET_ENV_VAR)
        if raw is None:
            return cls()
        return cls(max_candidates=int(raw))

    def charge(self, required: int, what: str) -> None:
        if required > self.max_candidates:
            raise BudgetExceededError(
                f"{what} needs {required} candidates, budget is {self.max_candidates}",
                required=required,
                budget=self.max_candidates,
            )


def functional_count(dom: FinSet, cod: FinSet) -> int:
    return (cod.size + 1) ** dom.size


def iter_functional_rels(dom: FinSet, cod: FinSet) -> Iterator[FinRel]:
    """All partial-function relations dom -> cod, lexicographically."""
    n, m = dom.size, cod.size
    for row_values in iproduct(range(m + 1), repeat=n):
        mat = np.zeros((n, m), dtype=bool)
        for i, v in enumerate(row_values):
            if v > 0:
                mat[i, v - 1] = True
        yield FinRel(dom, cod, mat)


def total_functional_count(dom: FinSet, cod: FinSet) -> int:
    return cod.size ** dom.size


def iter_total_functions(dom: FinSet, cod: FinSet) -> Iterator[FinRel]:
    n, m = dom.size, cod.size
    for row_values in iproduct(range(m), repeat=n):
        mat = np.zeros((n, m), dtype=bool)
        for i, v in enumerate(row_values):
            mat[i, v] = True
        yield FinRel(dom, cod, mat)


def all_rel_count(dom: FinSet, cod: FinSet) -> int:
    return 2 ** (dom.size * cod.size)


def iter_all_rels(dom: FinSet, cod: FinSet) -> Iterator[FinRel]:
    """All relations dom -> cod by increasing matrix-as-integer value."""
    n, m = dom.size, cod.size
    cells = n * m
    for code in range(2**cells):
        mat = np.zeros((n, m), dtype=bool)
        for bit in range(cells):
            if code >> bit & 1:
                mat[bit // m, bit % m] = True
        yield FinRel(dom, cod, mat)


def iter_functional_states(a: FinSet) -> Iterator[FinRel]:
    """The empty state, then each element as a singleton state."""
    yield FinRel.empty(UNIT, a)
    for i in range(a.size):
        mat = np.zeros((1, a.size), dtype=bool)
        mat[0, i] = True
        yield FinRel(UNIT, a, mat)


def iter_all_states(a: FinSet) -> Iterator[FinRel]:
    yield from iter_all_rels(UNIT, a)


def random_rel(rng, dom: FinSet, cod: FinSet, density: float = 0.3) -> FinRel:
    mat = np.zeros((dom.size, cod.size), dtype=bool)
    for i in range(dom.size):
        for j in range(cod.size):
            if rng.random() < density:
                mat[i, j] = True
    return FinRel(dom, cod, mat)


def random_functional(rng, dom: FinSet, cod: FinSet, total: bool = False) -> FinRel:
    mat = np.zeros((dom.size, cod.size), dtype=bool)
    for i in range(dom.size):
        if cod.size and (total or rng.random() < 0.8):
            mat[i, rng.randrange(cod.size)] = True
    return FinRel(dom, cod, mat)


def random_finset(rng, name: str, max_size: int = 5, min_size: int = 0) -> FinSet:
    size = rng.randint(min_size, max_size)
    return FinSet(name, tuple(f"{name}{i}" for i in range(size)))
