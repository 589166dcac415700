"""Laws of the relational ambient category on small carriers."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from univsim.errors import TypeMismatchError, UnknownElementError, ValidationError
from univsim.finrel import (
    FinRel,
    FinSet,
    UNIT,
    canonical_text,
    classify,
    compose,
    copy_rel,
    delete_rel,
    domain,
    empty_state,
    identity,
    pipeline,
    product,
    restricts_to,
    scalar,
    state,
    support,
    swap_rel,
    tensor,
)


@st.composite
def finsets(draw, max_size=4):
    name = draw(st.sampled_from("ABCD"))
    n = draw(st.integers(1, max_size))
    return FinSet(name, tuple(f"{name.lower()}{i}" for i in range(n)))


@st.composite
def rels(draw, dom=None, cod=None):
    if dom is None:
        dom = draw(finsets())
    if cod is None:
        cod = draw(finsets())
    bits = draw(st.integers(0, 2 ** (dom.size * cod.size) - 1))
    mat = np.zeros(dom.size * cod.size, dtype=bool)
    for k in range(mat.size):
        mat[k] = (bits >> k) & 1
    return FinRel(dom, cod, mat.reshape(dom.size, cod.size))


@st.composite
def chains(draw):
    """f then g then h, composable left to right."""
    a, b, c, d = (draw(finsets()) for _ in range(4))
    return (
        draw(rels(dom=a, cod=b)),
        draw(rels(dom=b, cod=c)),
        draw(rels(dom=c, cod=d)),
    )


# ---- sets ---------------------------------------------------------------


def test_finset_basics():
    a = FinSet("A", ("x", "y", "z"))
    assert a.size == 3
    assert a.index("y") == 1
    with pytest.raises(UnknownElementError):
        a.index("w")


def test_finset_rejects_bad_labels():
    with pytest.raises(ValidationError):
        FinSet("A", ("x", "x"))
    with pytest.raises(ValidationError):
        FinSet("A", ("a b",))
    with pytest.raises(ValidationError):
        FinSet("A", ("x*y",))
    with pytest.raises(ValidationError):
        FinSet("A", ("",))


def test_product_flattens_and_absorbs_unit():
    a = FinSet("A", ("a0", "a1"))
    b = FinSet("B", ("b0",))
    c = FinSet("C", ("c0", "c1"))
    assert product(a, UNIT, b) == product(a, b)
    assert product(product(a, b), c) == product(a, b, c)
    assert product(a) == a
    assert product() == UNIT
    p = product(a, c)
    assert p.size == 4
    assert p.factors == (a, c)


def test_product_order_is_row_major():
    a = FinSet("A", ("a0", "a1"))
    c = FinSet("C", ("c0", "c1"))
    p = product(a, c)
    # the second factor varies fastest
    assert p.index(p.elements[1]) == 1
    assert p.elements[1] == p.elements[0].replace("c0", "c1")


# ---- relations ----------------------------------------------------------


def test_from_pairs_and_pairs_round_trip():
    a = FinSet("A", ("a0", "a1"))
    b = FinSet("B", ("b0", "b1"))
    f = FinRel.from_pairs(a, b, [("a0", "b1"), ("a1", "b0"), ("a0", "b0")])
    assert set(f.pairs()) == {("a0", "b1"), ("a1", "b0"), ("a0", "b0")}
    with pytest.raises(UnknownElementError):
        FinRel.from_pairs(a, b, [("nope", "b0")])


def test_matrix_is_frozen():
    f = identity(FinSet("A", ("a0",)))
    with pytest.raises(ValueError):
        f.mat[0, 0] = False


@given(rels())
def test_identity_is_neutral(f):
    assert compose(f, identity(f.dom)) == f
    assert compose(identity(f.cod), f) == f


@given(chains())
def test_composition_associates(fgh):
    f, g, h = fgh
    assert compose(h, compose(g, f)) == compose(compose(h, g), f)


@given(chains())
def test_pipeline_is_left_to_right(fgh):
    f, g, h = fgh
    assert pipeline(f, g, h) == compose(h, compose(g, f))


def test_compose_requires_matching_middle():
    a = FinSet("A", ("a0",))
    b = FinSet("B", ("b0",))
    with pytest.raises(TypeMismatchError):
        compose(identity(a), identity(b))


@given(rels(), rels())
def test_tensor_components_stay_independent(f, g):
    t = tensor(f, g)
    assert t.dom == product(f.dom, g.dom)
    assert t.cod == product(f.cod, g.cod)
    for i in range(f.dom.size):
        for j in range(g.dom.size):
            for k in range(f.cod.size):
                for m in range(g.cod.size):
                    assert t.mat[i * g.dom.size + j, k * g.cod.size + m] == (
                        f.mat[i, k] and g.mat[j, m]
                    )


@given(st.data())
def test_tensor_interchange(data):
    f = data.draw(rels())
    g = data.draw(rels())
    f2 = data.draw(rels(dom=f.cod))
    g2 = data.draw(rels(dom=g.cod))
    lhs = compose(tensor(f2, g2), tensor(f, g))
    rhs = tensor(compose(f2, f), compose(g2, g))
    assert lhs == rhs


def test_swap_exchanges_components():
    a = FinSet("A", ("a0", "a1"))
    b = FinSet("B", ("b0", "b1", "b2"))
    sw = swap_rel(a, b)
    assert sw.dom == product(a, b)
    assert sw.cod == product(b, a)
    assert compose(swap_rel(b, a), sw) == identity(product(a, b))


@given(finsets())
def test_copy_then_discard_is_identity(a):
    left = pipeline(copy_rel(a), tensor(identity(a), delete_rel(a)))
    right = pipeline(copy_rel(a), tensor(delete_rel(a), identity(a)))
    assert left == identity(a)
    assert right == identity(a)


@given(finsets())
def test_copy_is_coassociative_and_symmetric(a):
    two_then_left = pipeline(copy_rel(a), tensor(copy_rel(a), identity(a)))
    two_then_right = pipeline(copy_rel(a), tensor(identity(a), copy_rel(a)))
    assert two_then_left == two_then_right
    assert pipeline(copy_rel(a), swap_rel(a, a)) == copy_rel(a)


def test_unit_structural_maps_collapse():
    assert delete_rel(UNIT) == identity(UNIT)
    assert scalar(True) == identity(UNIT)
    assert compose(scalar(False), scalar(True)) == scalar(False)


def test_states_over_the_unit():
    b = FinSet("B", ("b0", "b1"))
    pt = state(b, "b1")
    assert pt.dom == UNIT
    assert set(pt.pairs()) == {("•", "b1")}
    assert empty_state(b).mat.sum() == 0


# ---- derived structure --------------------------------------------------


@given(rels())
def test_domain_is_a_partial_identity(f):
    d = domain(f)
    assert d.dom == f.dom and d.cod == f.dom
    cls = classify(d)
    assert cls.functional
    rows = f.mat.any(axis=1)
    assert (np.diag(d.mat) == rows).all()
    assert d.mat.sum() == rows.sum()


@given(rels())
def test_composing_with_own_domain_changes_nothing(f):
    assert compose(f, domain(f)) == f


def test_classify_flags():
    a = FinSet("A", ("a0", "a1"))
    b = FinSet("B", ("b0", "b1"))
    empty = FinRel.from_pairs(a, b, [])
    assert classify(empty).functional
    assert not classify(empty).total
    full = FinRel(a, b, np.ones((2, 2), dtype=bool))
    assert classify(full).total
    assert not classify(full).functional
    ident = identity(a)
    cls = classify(ident)
    assert cls.functional and cls.total and cls.deterministic


@given(rels())
def test_restriction_is_reflexive_and_detects_extension(f):
    assert restricts_to(f, f)
    # discarding one defined row leaves something f restricts to
    rows = f.mat.any(axis=1)
    if rows.any():
        cut = f.mat.copy()
        cut[np.argmax(rows)] = False
        g = FinRel(f.dom, f.cod, cut)
        assert restricts_to(f, g)


def test_support_factors_through_probes(rnd):
    a = FinSet("A", ("a0", "a1"))
    b = FinSet("B", ("b0", "b1"))
    f = tensor(identity(a), delete_rel(b))
    hits = support(f, rnd)
    assert isinstance(hits, tuple)


def test_canonical_text_is_stable():
    a = FinSet("A", ("a0", "a1"))
    f = FinRel.from_pairs(a, a, [("a0", "a1")])
    g = FinRel.from_pairs(a, a, [("a0", "a1")])
    assert canonical_text(f) == canonical_text(g)
    assert f == g and hash(f) == hash(g)
