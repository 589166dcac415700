"""Functors between instances and their action on simulators."""

import pytest

from univsim.errors import TypeMismatchError, UnivsimError, ValidationError
from univsim.finrel import FinRel, FinSet, compose, identity, product
from univsim.instances.catalog import load_preset
from univsim.order import equality_preorder
from univsim.simcat import decide_parsimony
from univsim.simulator import Reduction, find_universality_witness, trivial_simulator
from univsim.tcc import BehaviorStructure, TccInstance, with_enlarged_brel
from univsim.tcfunctor import (
    ObjectAssignment,
    TcFunctor,
    check_tc_functor,
    compose_functors,
    enlarging_functor,
    identity_functor,
    map_through,
    random_relabel_functor,
    verify_universality_preservation,
)


@pytest.fixture(scope="module")
def chain2():
    return load_preset("chain2")


def test_assignment_must_be_a_bijection(chain2):
    t = chain2.inst.targets
    img = FinSet("T2", ("x", "y"))
    ObjectAssignment(t, img, ("x", "y"))
    with pytest.raises(ValidationError):
        ObjectAssignment(t, img, ("x",))
    with pytest.raises(ValidationError):
        ObjectAssignment(t, img, ("x", "x"))
    with pytest.raises(ValidationError):
        ObjectAssignment(product(t, t), img, ("x", "y"))


def test_identity_functor_checks_out(chain2, rnd):
    fun = identity_functor(chain2.inst)
    ok, bad = check_tc_functor(fun, rnd)
    assert ok and bad == []
    ev = chain2.inst.eval
    assert fun.map_morphism(ev) == ev


def test_random_relabel_functor_is_valid(chain2, rnd):
    fun = random_relabel_functor(chain2.inst, rnd)
    ok, bad = check_tc_functor(fun, rnd)
    assert ok, bad
    bij = fun.element_bijection(chain2.inst.targets)
    assert bij.mat.sum(axis=0).tolist() == [1] * bij.cod.size
    assert fun.map_object(chain2.inst.tc) == fun.target.tc


def test_enlargement_goes_one_way_only(chain2, rnd):
    inst = chain2.inst
    wider = with_enlarged_brel(inst, [("lo", "hi")])
    up = enlarging_functor(inst, wider)
    ok, _ = check_tc_functor(up, rnd)
    assert ok
    down = enlarging_functor(wider, inst)
    ok2, bad2 = check_tc_functor(down, rnd)
    assert not ok2
    assert any("comparison" in msg for msg in bad2)


def test_lost_definedness_is_reported(chain2, rnd):
    inst = chain2.inst
    partial_ev = FinRel.from_pairs(inst.tc, inst.behavior.behaviors, [("(a1,c0)", "hi")])
    smaller = TccInstance(
        "partial",
        inst.targets,
        inst.contexts,
        BehaviorStructure(inst.behavior.behaviors, inst.brel, partial_ev),
        inst.intrinsic,
    )
    fun = identity_functor(inst, smaller)
    ok, bad = check_tc_functor(fun, rnd)
    assert not ok
    assert any("definedness" in msg for msg in bad)


def test_map_through_simulator_preserves_universality(chain2, rnd):
    fun = random_relabel_functor(chain2.inst, rnd)
    sim = chain2.simulators["top"]
    w = find_universality_witness(sim)
    moved = verify_universality_preservation(fun, sim, w)
    image = map_through(fun, sim)
    assert check_tc_functor(fun, rnd)[0]
    assert moved.rel.dom == fun.target.targets
    assert find_universality_witness(image) is not None


def test_map_through_morphism(rnd):
    pars = load_preset("parsimony")
    res = decide_parsimony(pars.simulators["trivial"], pars.simulators["s_u"])
    assert res.morphism is not None
    fun = random_relabel_functor(pars.inst, rnd)
    image = map_through(fun, res.morphism)
    assert image.source.inst == fun.target
    assert image.target.s == map_through(fun, pars.simulators["s_u"]).s


def test_map_through_rejects_foreign_simulator(chain2):
    pars = load_preset("parsimony")
    fun = identity_functor(chain2.inst)
    with pytest.raises(TypeMismatchError):
        map_through(fun, pars.simulators["s_u"])


def test_compose_functors_acts_like_composition(chain2, rnd):
    inst = chain2.inst
    f1 = random_relabel_functor(inst, rnd, tag="one")
    f2 = random_relabel_functor(f1.target, rnd, tag="two")
    both = compose_functors(f2, f1)
    assert both.source == inst and both.target == f2.target
    ev = inst.eval
    assert both.map_morphism(ev) == f2.map_morphism(f1.map_morphism(ev))
    ok, bad = check_tc_functor(both, rnd)
    assert ok, bad
    with pytest.raises(TypeMismatchError):
        compose_functors(f1, f2)


def test_preservation_check_wants_a_real_witness(chain2):
    sim = chain2.simulators["top"]
    fun = identity_functor(chain2.inst)
    bogus = Reduction(
        FinRel.empty(chain2.inst.targets, sim.programs), "lax"
    )
    ok = find_universality_witness(sim)
    assert ok is not None and bogus.rel != ok.rel
    with pytest.raises(ValidationError):
        verify_universality_preservation(fun, sim, bogus)
