"""Preorders and the imitation relation between behavior-valued maps."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from univsim.errors import ValidationError
from univsim.finrel import FinRel, FinSet
from univsim.order import (
    Preorder,
    chain_preorder,
    closure,
    equality_preorder,
    exists_map,
    imitates,
    imitation_witnesses,
)
from univsim.tcc import relabel_preorder

B3 = FinSet("B", ("b0", "b1", "b2"))
A2 = FinSet("A", ("x", "y"))


def imitates_naive(nu, mu, order):
    """Row-by-row restatement: on every row where mu is defined, each mu
    value lies below some nu value and each nu value lies above some mu
    value."""
    if nu.dom != mu.dom or nu.cod != mu.cod or nu.cod != order.carrier:
        return False
    up = order.mat  # up[i, j]: element i sits at or above element j
    for a in range(mu.dom.size):
        mus = np.nonzero(mu.mat[a])[0]
        if mus.size == 0:
            continue
        nus = np.nonzero(nu.mat[a])[0]
        if nus.size == 0:
            return False
        for u in mus:
            if not any(up[v, u] for v in nus):
                return False
        for v in nus:
            if not any(up[v, u] for u in mus):
                return False
    return True


@st.composite
def b3_rels(draw):
    bits = draw(st.integers(0, 2 ** (A2.size * B3.size) - 1))
    mat = np.array(
        [(bits >> k) & 1 for k in range(A2.size * B3.size)], dtype=bool
    ).reshape(A2.size, B3.size)
    return FinRel(A2, B3, mat)


@st.composite
def b3_orders(draw):
    edges = draw(
        st.lists(
            st.tuples(st.sampled_from(B3.elements), st.sampled_from(B3.elements)),
            max_size=5,
        )
    )
    return closure(B3, edges)


def test_closure_adds_reflexive_and_transitive_edges():
    p = closure(B3, [("b2", "b1"), ("b1", "b0")])
    assert p.dominates("b2", "b0")
    assert p.dominates("b1", "b1")
    assert not p.dominates("b0", "b2")


def test_preorder_constructor_rejects_broken_input():
    mat = np.eye(3, dtype=bool)
    mat[2, 1] = True
    mat[1, 0] = True  # missing 2 >= 0
    with pytest.raises(ValidationError):
        Preorder(B3, mat)
    with pytest.raises(ValidationError):
        Preorder(B3, np.zeros((3, 3), dtype=bool))


def test_chain_orientation_later_elements_dominate():
    p = chain_preorder(B3)
    assert p.dominates("b2", "b0")
    assert not p.dominates("b0", "b2")


def test_equality_preorder_is_discrete():
    p = equality_preorder(B3)
    assert p.mat.sum() == B3.size


@given(b3_rels(), b3_rels(), b3_orders())
def test_imitates_matches_naive_oracle(nu, mu, order):
    assert imitates(nu, mu, order) == imitates_naive(nu, mu, order)


@given(b3_rels(), b3_orders())
def test_imitation_is_reflexive(f, order):
    assert imitates(f, f, order)


@given(st.data())
def test_imitation_is_transitive(data):
    order = data.draw(b3_orders())
    f = data.draw(b3_rels())
    g = data.draw(b3_rels())
    h = data.draw(b3_rels())
    if imitates(f, g, order) and imitates(g, h, order):
        assert imitates(f, h, order)


def test_interval_blur_on_a_chain():
    # on b0 <= b1 <= b2 the sets {b0, b2} and {b0, b1, b2} imitate each
    # other without being equal; with the discrete order they do not
    chain = chain_preorder(B3)
    ends = FinRel.from_pairs(A2, B3, [("x", "b0"), ("x", "b2")])
    full = FinRel.from_pairs(A2, B3, [("x", "b0"), ("x", "b1"), ("x", "b2")])
    assert imitates(ends, full, chain)
    assert imitates(full, ends, chain)
    eq = equality_preorder(B3)
    assert not imitates(ends, full, eq)


@given(b3_rels(), b3_rels(), b3_orders())
def test_witnesses_exist_exactly_when_imitation_holds(nu, mu, order):
    w = imitation_witnesses(nu, mu, order)
    assert (w is not None) == imitates(nu, mu, order)
    if w is not None:
        for enh, deg in w.values():
            assert enh.validate(order)
            assert deg.validate(order)


def test_exists_map_finds_least_targets():
    chain = chain_preorder(B3)
    up = exists_map("enhancement", ("b0",), ("b1", "b2"), chain)
    assert up is not None and up.assignment == (("b0", "b1"),)
    down = exists_map("degradation", ("b0",), ("b1", "b2"), chain)
    assert down is None


def test_relabeling_preserves_dominance():
    p = closure(B3, [("b2", "b0")])
    fresh = FinSet("B2", ("u0", "u1", "u2"))
    q = relabel_preorder(p, fresh, {"b0": "u0", "b1": "u1", "b2": "u2"})
    assert q.dominates("u2", "u0")
    assert not q.dominates("u0", "u2")
