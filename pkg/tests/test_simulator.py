"""Simulators: canonical splits, reductions, universality, the no-go grading."""

from fractions import Fraction

import pytest

from univsim.errors import ValidationError
from univsim.finrel import FinRel, FinSet, UNIT, compose, identity, product
from univsim.instances.catalog import load_preset
from univsim.search import SearchBudget, iter_functional_rels, random_functional
from univsim.simulator import (
    MonotoneFn,
    Reduction,
    check_monotone_sampled,
    check_reduction,
    context_reduces,
    find_universality_witness,
    functional_image,
    is_singleton,
    make_simulator,
    nogo_check,
    pullback,
    simulator_from_raw,
    split_marginals_agree,
    state_key,
    strict_implies_both,
    trivial_simulator,
)


@pytest.fixture(scope="module")
def chain2():
    return load_preset("chain2")


@pytest.fixture(scope="module")
def nogo():
    return load_preset("spin-nogo")


def test_split_marginals_agree_by_construction(chain2):
    for sim in chain2.simulators.values():
        assert split_marginals_agree(sim) == (True, True)


def test_raw_round_trip(chain2):
    sim = chain2.simulators["top"]
    again = simulator_from_raw(sim.inst, sim.programs, sim.s)
    assert again.compiler == sim.compiler
    assert again.context_reduction == sim.context_reduction
    assert again.s == sim.s


def test_raw_rejects_entangled_morphism():
    t = FinSet("T", ("t0", "t1"))
    c = FinSet("C", ("c0", "c1"))
    p = FinSet("P", ("p",))
    from univsim.order import equality_preorder
    from univsim.tcc import BehaviorStructure, TccInstance

    ev = FinRel.from_pairs(
        product(t, c),
        t,
        [(f"({tl},{cl})", tl) for tl in t.elements for cl in c.elements],
    )
    inst = TccInstance(
        name="tangle",
        targets=t,
        contexts=c,
        behavior=BehaviorStructure(t, equality_preorder(t), ev),
        intrinsic=False,
    )
    # Target output depends on the context, which no split of the form
    # (compile one copy, reduce the other) can reproduce: the compiler
    # marginal comes out non-functional.
    raw = FinRel.from_pairs(
        product(p, c), product(t, c), [("(p,c0)", "(t0,c0)"), ("(p,c1)", "(t1,c0)")]
    )
    with pytest.raises(ValidationError):
        simulator_from_raw(inst, p, raw)


def test_reduction_validates_flavor_and_shape(chain2):
    sim = chain2.simulators["top"]
    with pytest.raises(ValidationError):
        Reduction(identity(sim.programs), "sideways")
    with pytest.raises(ValidationError):
        Reduction(FinRel.full(sim.programs, sim.inst.targets), "lax")


def test_identity_is_a_strict_self_reduction(chain2):
    for sim in chain2.simulators.values():
        r = Reduction(identity(sim.programs), "strict")
        assert check_reduction(r, sim, sim)


def test_strict_implies_lax_and_oplax(chain2, rnd):
    source = chain2.simulators["trivial"]
    target = chain2.simulators["top"]
    for _ in range(40):
        cand = random_functional(rnd, target.programs, source.programs)
        for flavor in ("strict", "lax", "oplax"):
            assert strict_implies_both(Reduction(cand, flavor), source, target)


def test_pullback_reindexes_programs(chain2):
    sim = chain2.simulators["trivial"]
    q = FinSet("Q", ("q0", "q1", "q2"))
    r = FinRel.from_pairs(q, sim.programs, [("q0", "a1"), ("q1", "a0"), ("q2", "a1")])
    pulled = pullback(sim, r)
    assert pulled.programs == q
    assert pulled.compiler == compose(sim.compiler, r)
    # Pulling back along the chosen map is a strict reduction to the original.
    assert check_reduction(Reduction(r, "strict"), sim, pulled)


def test_universality_witness_on_the_two_chain(chain2):
    sim = chain2.simulators["top"]
    w = find_universality_witness(sim)
    assert w is not None and w.flavor == "lax"
    assert set(w.rel.pairs()) == {("a0", "p"), ("a1", "p")}
    triv = chain2.simulators["trivial"]
    assert check_reduction(w, sim, triv)


def test_trivial_simulator_is_universal(chain2):
    triv = chain2.simulators["trivial"]
    w = find_universality_witness(triv)
    assert w is not None
    assert check_reduction(w, triv, triv)


def test_universality_search_respects_budget(chain2):
    sim = chain2.simulators["top"]
    from univsim.errors import BudgetExceededError

    with pytest.raises(BudgetExceededError):
        find_universality_witness(sim, SearchBudget(max_candidates=1))


def test_nogo_simulator_is_not_universal_directly(nogo):
    # Small enough to decide by exhaustion: no functional map from the six
    # targets into the two programs gives a lax reduction from trivial.
    sim = nogo.simulators["small"]
    triv = nogo.simulators["trivial"]
    assert all(
        not check_reduction(Reduction(cand, "lax"), sim, triv)
        for cand in iter_functional_rels(sim.inst.targets, sim.programs)
    )


def test_singleton_detection(chain2):
    inst = chain2.inst
    prog = FinSet("P2", ("x", "y"))
    const = FinRel.from_pairs(prog, inst.targets, [("x", "a0"), ("y", "a0")])
    sc = FinRel.from_pairs(
        product(prog, inst.contexts),
        inst.contexts,
        [("(x,c0)", "c0"), ("(y,c0)", "c0")],
    )
    sim = make_simulator(inst, const, sc)
    st = is_singleton(sim)
    assert st is not None and state_key(st) == "a0"
    assert is_singleton(chain2.simulators["trivial"]) is None
    empty = make_simulator(inst, FinRel.empty(prog, inst.targets), sc)
    st0 = is_singleton(empty)
    assert st0 is not None and state_key(st0) is None


def test_context_reduction_reflexive_with_discard(chain2):
    inst = chain2.inst
    f = FinRel.from_pairs(UNIT, inst.targets, [("•", "a1")])
    res = context_reduces(f, f, inst, flavor="lax")
    assert res.holds and res.witness is not None


def test_context_reduction_oplax_rejects_vacuous_witness(chain2):
    inst = chain2.inst
    top = FinRel.from_pairs(UNIT, inst.targets, [("•", "a1")])
    bot = FinRel.from_pairs(UNIT, inst.targets, [("•", "a0")])
    # Oplax wants the undressed side imitated by the dressed side, and an
    # empty context witness may not fake it by undefining everything.
    empty_w = FinRel.empty(product(UNIT, inst.contexts), inst.contexts)
    res = context_reduces(bot, top, inst, flavor="oplax", witness=empty_w)
    assert not res.holds


def test_functional_image_contains_empty_and_deduplicates(chain2):
    sim = chain2.simulators["top"]
    image = functional_image(sim.compiler)
    keys = [state_key(st) for st in image]
    assert keys[0] is None
    assert len(keys) == len(set(keys))
    assert set(keys) == {None, "a1"}


def test_state_key_rejects_wide_states():
    b = FinSet("B", ("x", "y"))
    with pytest.raises(ValidationError):
        state_key(FinRel.full(UNIT, b))


def test_monotone_fn_raises_off_table():
    b = FinSet("B", ("x", "y"))
    phi = MonotoneFn("half", {None: Fraction(0), "x": Fraction(1, 2)})
    assert phi(FinRel.from_pairs(UNIT, b, [("•", "x")])) == Fraction(1, 2)
    with pytest.raises(ValidationError):
        phi(FinRel.from_pairs(UNIT, b, [("•", "y")]))


def test_spectrum_size_is_monotone_on_the_nogo_instance(nogo, rnd):
    phi = nogo.phis["spectrum-size"]
    assert check_monotone_sampled(phi, nogo.inst, rnd, pairs=30) == []


def test_nogo_check_caps_and_inconclusive(nogo):
    phi = nogo.phis["spectrum-size"]
    v = nogo_check(nogo.simulators["small"], phi, nogo.inst)
    assert v.not_universal and v.verdict == "not-universal"
    assert v.sup_image < v.sup_all
    triv = nogo_check(nogo.simulators["trivial"], phi, nogo.inst)
    assert not triv.not_universal and triv.verdict == "inconclusive"
    assert triv.sup_image == triv.sup_all
