"""Evaluation instances and the ambient behavior comparison."""

import random

import pytest

from univsim.errors import TypeMismatchError, ValidationError
from univsim.finrel import FinRel, FinSet, UNIT, compose, identity, product, tensor
from univsim.instances.catalog import load_preset
from univsim.order import chain_preorder, closure, imitates
from univsim.search import random_rel
from univsim.tcc import (
    BehaviorStructure,
    TccInstance,
    ambient_imitates,
    ambient_witnesses,
    behavior_of,
    both_scalars,
    check_instance_axioms,
    extend_randomly,
    intrinsify,
    rng_matrix,
    scalar_dominance_check,
    with_enlarged_brel,
)


def tiny_instance():
    t = FinSet("T", ("t0", "t1"))
    c = FinSet("C", ("c0", "c1"))
    b = FinSet("B", ("lo", "hi"))
    ev = FinRel.from_pairs(
        product(t, c),
        b,
        [
            (product(t, c).elements[0], "lo"),
            (product(t, c).elements[1], "hi"),
            (product(t, c).elements[2], "hi"),
        ],
    )
    order = closure(b, [("hi", "lo")])
    return TccInstance("tiny", t, c, BehaviorStructure(b, order, ev))


def test_behavior_of_composes_with_eval():
    inst = tiny_instance()
    f = identity(inst.tc)
    assert behavior_of(f, inst) == inst.eval
    point = FinRel.from_pairs(UNIT, inst.tc, [("•", inst.tc.elements[0])])
    assert set(behavior_of(point, inst).pairs()) == {("•", "lo")}


def test_eval_must_land_in_behaviors():
    t = FinSet("T", ("t",))
    b = FinSet("B", ("b",))
    wrong = identity(t)
    with pytest.raises(ValidationError):
        BehaviorStructure(b, closure(b, []), wrong)


def test_ambient_imitation_is_imitation_of_behaviors(rnd):
    inst = tiny_instance()
    for _ in range(40):
        f = random_rel(rnd, UNIT, inst.tc)
        g = random_rel(rnd, UNIT, inst.tc)
        assert ambient_imitates(f, g, inst) == imitates(
            behavior_of(f, inst), behavior_of(g, inst), inst.brel
        )


def test_ambient_witnesses_align_with_the_boolean(rnd):
    inst = tiny_instance()
    hits = 0
    for _ in range(60):
        f = random_rel(rnd, inst.contexts, inst.tc)
        g = random_rel(rnd, inst.contexts, inst.tc)
        w = ambient_witnesses(f, g, inst)
        assert (w is not None) == ambient_imitates(f, g, inst)
        hits += w is not None
    assert hits  # sanity: the sample was not vacuous


def test_scalars_only_shrink(rnd):
    inst = tiny_instance()
    keep, drop = both_scalars()
    for _ in range(40):
        f = random_rel(rnd, inst.contexts, inst.tc)
        assert scalar_dominance_check(keep, f, inst)
        assert scalar_dominance_check(drop, f, inst)
    with pytest.raises(TypeMismatchError):
        scalar_dominance_check(identity(inst.targets), f, inst)


def test_instance_axioms_hold_on_presets():
    rng = random.Random(7)
    for name in ("chain2", "lawvere", "parsimony", "lookup-interp"):
        inst = load_preset(name).inst
        assert check_instance_axioms(inst, rng, samples=25) == []


def test_intrinsify_shape():
    inst = tiny_instance()
    intr = intrinsify(inst)
    assert intr.intrinsic
    assert intr.behavior.behaviors == inst.tc
    assert intr.eval == identity(inst.tc)


def test_intrinsify_implication(rnd):
    # intrinsic comparison is at least as strict as the original one
    inst = tiny_instance()
    intr = intrinsify(inst)
    seen_both = 0
    for _ in range(120):
        f = random_rel(rnd, UNIT, inst.tc)
        g = random_rel(rnd, UNIT, inst.tc)
        if ambient_imitates(f, g, intr):
            assert ambient_imitates(f, g, inst)
            seen_both += 1
    assert seen_both


def test_enlarging_the_order_keeps_imitation(rnd):
    inst = tiny_instance()
    bigger = with_enlarged_brel(inst, [("lo", "hi")])
    for _ in range(40):
        f = random_rel(rnd, UNIT, inst.tc)
        g = random_rel(rnd, UNIT, inst.tc)
        if ambient_imitates(f, g, inst):
            assert ambient_imitates(f, g, bigger)


def test_rng_matrix_and_extension(rnd):
    mat = rng_matrix(rnd, 4, 5, density=1.0)
    assert mat.shape == (4, 5) and mat.all()
    inst = tiny_instance()
    g = FinRel.from_pairs(inst.targets, inst.targets, [])
    wider = extend_randomly(g, rnd, density=1.0)
    assert wider.mat.all()


def test_chain_brel_instance_composes():
    b = FinSet("B", ("b0", "b1", "b2"))
    t = FinSet("T", ("t",))
    ev = FinRel.from_pairs(product(t, b), b, [])
    inst = TccInstance("chain", t, b, BehaviorStructure(b, chain_preorder(b), ev))
    empty = behavior_of(identity(inst.tc), inst)
    assert empty.mat.sum() == 0
    # tensoring a scalar in keeps the comparison sound
    assert ambient_imitates(
        identity(inst.tc), tensor(both_scalars()[1], identity(inst.tc)), inst
    )
