"""Complete parametrizations, quasi-fixed points, and unreachability.

A parametrization exposes maps into the behavior object through programs:
it is complete over an index object when every map factors, up to
behavioral imitation, through some functional choice of program.  Failure
of completeness for a simulator's evaluated body is unreachability, the
order-theoretic face of uncomputability.  Completeness over the context
object itself feeds the diagonal construction: every endomorphism of the
behavior object then has a quasi-fixed point, so an endomorphism without
one (negation on booleans) rules the corresponding universal simulators
out.  The same completeness data also yields the two singleton universal
simulator constructions when behaviors coincide with contexts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BudgetExceededError,
    TypeMismatchError,
    UnivsimError,
    ValidationError,
)
from .finrel import (
    FinRel,
    FinSet,
    UNIT,
    canonical_text,
    classify,
    compose,
    copy_rel,
    delete_rel,
    identity,
    pipeline,
    product,
    tensor,
)
from .order import equality_preorder, imitates
from .search import (
    SearchBudget,
    all_rel_count,
    functional_count,
    iter_all_rels,
    iter_functional_rels,
    iter_functional_states,
)
from .simulator import Reduction, Simulator, find_universality_witness, make_simulator
from .tcc import BehaviorStructure, TccInstance


@dataclass(frozen=True)
class Parametrization:
    """A map from program-context pairs into behaviors, with a witness cache.

    Witnesses are functional program choices keyed by the canonical text of
    the map they realize; they are found on demand and kept so reports can
    replay them without searching again.
    """

    inst: TccInstance
    programs: FinSet
    rel: FinRel  # programs x contexts -> behaviors
    witnesses: dict = field(default_factory=dict, compare=False, repr=False)
    # keyed by canonical_text(f), valued (f, p_f) so entries can be re-checked

    def __post_init__(self):
        pc = product(self.programs, self.inst.contexts)
        if self.rel.dom != pc or self.rel.cod != self.inst.behavior.behaviors:
            raise TypeMismatchError(
                "parametrization must map programs x contexts to behaviors"
            )


def eval_parametrization(inst: TccInstance) -> Parametrization:
    """The instance's own evaluation, programs being the targets."""
    return Parametrization(inst, inst.targets, inst.eval)


def realized(par: Parametrization, p_f: FinRel) -> FinRel:
    """The map a program choice realizes through the parametrization."""
    return compose(par.rel, tensor(p_f, identity(par.inst.contexts)))


def witness_ok(par: Parametrization, f: FinRel, p_f: FinRel) -> bool:
    """Does p_f realize f up to behavioral imitation?"""
    if not classify(p_f).functional:
        return False
    return imitates(realized(par, p_f), f, par.inst.behavior.brel)


def find_witness(
    par: Parametrization,
    f: FinRel,
    a: FinSet = UNIT,
    budget: SearchBudget | None = None,
) -> FinRel | None:
    """The least functional program choice realizing f, from the cache or
    by exhaustive search over functional maps a -> programs."""
    expected_dom = product(a, par.inst.contexts)
    if f.dom != expected_dom or f.cod != par.inst.behavior.behaviors:
        raise TypeMismatchError("witness search needs a map index x contexts -> behaviors")
    key = canonical_text(f)
    cached = par.witnesses.get(key)
    if cached is not None and witness_ok(par, f, cached[1]):
        return cached[1]
    budget = budget or SearchBudget()
    budget.charge(functional_count(a, par.programs), "parametrization witness search")
    for cand in iter_functional_rels(a, par.programs):
        if witness_ok(par, f, cand):
            par.witnesses[key] = (f, cand)
            return cand
    return None


@dataclass(frozen=True)
class CompletenessResult:
    complete: bool
    mode: str  # "functional" | "all"
    index: FinSet
    counterexample: FinRel | None
    checked: int

    def __bool__(self):
        return self.complete


def is_complete_parametrization(
    par: Parametrization,
    a: FinSet = UNIT,
    mode: str = "functional",
    budget: SearchBudget | None = None,
) -> CompletenessResult:
    """Does every map a x contexts -> behaviors have a witness?

    Functional mode quantifies over functional maps, all mode over every
    relation.  The first map without a witness is the counterexample, in
    enumeration order.
    """
    if mode not in ("functional", "all"):
        raise ValidationError("completeness mode is functional or all")
    budget = budget or SearchBudget()
    inst = par.inst
    dom = product(a, inst.contexts)
    b = inst.behavior.behaviors
    if mode == "all":
        count, it = all_rel_count(dom, b), iter_all_rels
    else:
        count, it = functional_count(dom, b), iter_functional_rels
    budget.charge(count * functional_count(a, par.programs), "completeness scan")
    checked = 0
    for f in it(dom, b):
        checked += 1
        if find_witness(par, f, a, budget) is None:
            return CompletenessResult(False, mode, a, f, checked)
    return CompletenessResult(True, mode, a, None, checked)


@dataclass(frozen=True)
class LawvereResult:
    point: FinRel  # state into behaviors
    witness: FinRel  # the program choice realizing the twisted diagonal
    twisted: FinRel  # g after the diagonal of the parametrization


def lawvere_quasi_fixed_point(
    par: Parametrization, g: FinRel, budget: SearchBudget | None = None
) -> LawvereResult:
    """The diagonal construction of a quasi-fixed point of g.

    Requires the parametrization's programs to be the contexts themselves.
    Twists the diagonal by g, obtains a witness for the twist, and runs
    the diagonal on that witness; the result imitates its own g-image,
    which is asserted.
    """
    inst = par.inst
    c = inst.contexts
    b = inst.behavior.behaviors
    if par.programs != c:
        raise TypeMismatchError("the diagonal needs programs to coincide with contexts")
    if g.dom != b or g.cod != b:
        raise TypeMismatchError("quasi-fixed points are of endomorphisms of behaviors")
    diagonal = compose(par.rel, copy_rel(c))
    twisted = compose(g, diagonal)
    c_f = find_witness(par, twisted, UNIT, budget)
    if c_f is None:
        raise ValidationError(
            "parametrization certificate invalid: the twisted diagonal has no witness"
        )
    point = compose(diagonal, c_f)
    if not imitates(point, compose(g, point), inst.behavior.brel):
        raise UnivsimError("framework bug: constructed point is not quasi-fixed")
    return LawvereResult(point, c_f, twisted)


def has_quasi_fixed_point(
    inst: TccInstance, g: FinRel, space: str = "deterministic"
) -> FinRel | None:
    """The least quasi-fixed state of g, or None.

    Deterministic mode scans single-valued total states only; in the full
    relational space the empty and the everything state are quasi-fixed
    for any g, which makes that mode vacuous for freeness claims.
    """
    b = inst.behavior.behaviors
    if g.dom != b or g.cod != b:
        raise TypeMismatchError("quasi-fixed points are of endomorphisms of behaviors")
    if space == "deterministic":
        states = []
        for i in range(b.size):
            mat = np.zeros((1, b.size), dtype=bool)
            mat[0, i] = True
            states.append(FinRel(UNIT, b, mat))
    elif space == "all":
        states = list(iter_all_rels(UNIT, b))
    else:
        raise ValidationError("quasi-fixed point space is deterministic or all")
    for st in states:
        if imitates(st, compose(g, st), inst.behavior.brel):
            return st
    return None


def parametrization_through_simulator(
    sim: Simulator, par: Parametrization, r: Reduction
) -> Parametrization:
    """Transport a parametrization of eval through a universal simulator.

    The transported map evaluates the simulator's body; every cached
    witness is recompiled through the universality witness and asserted to
    still realize its map.  Maps without an original witness stay
    unwitnessed, so counterexamples propagate unchanged.
    """
    inst = sim.inst
    if par.programs != inst.targets or par.rel != inst.eval:
        raise TypeMismatchError("transport starts from the evaluation parametrization")
    if r.rel.dom != inst.targets or r.rel.cod != sim.programs:
        raise TypeMismatchError("transport needs a reduction from the trivial simulator")
    new_par = Parametrization(inst, sim.programs, compose(inst.eval, sim.s))
    for key, (f, t_f) in par.witnesses.items():
        new_par.witnesses[key] = (f, transported_witness(new_par, r, f, t_f))
    return new_par


def transported_witness(
    new_par: Parametrization, r: Reduction, f: FinRel, t_f: FinRel
) -> FinRel:
    """Recompile one original witness for f; assert it still works."""
    p_f = compose(r.rel, t_f)
    if not witness_ok(new_par, f, p_f):
        raise UnivsimError("framework bug: recompiled witness stopped working")
    return p_f


@dataclass(frozen=True)
class UnreachabilityResult:
    unreachable: bool
    counterexample: FinRel | None
    mode: str
    checked: int

    def __bool__(self):
        return self.unreachable


def has_unreachability(
    sim: Simulator,
    mode: str = "functional",
    budget: SearchBudget | None = None,
) -> UnreachabilityResult:
    """Is some context-to-behavior map missing from the evaluated body?"""
    evaluated = Parametrization(sim.inst, sim.programs, compose(sim.inst.eval, sim.s))
    res = is_complete_parametrization(evaluated, UNIT, mode, budget)
    return UnreachabilityResult(not res.complete, res.counterexample, mode, res.checked)


@dataclass(frozen=True)
class RetractPair:
    """A deterministic embedding of target-context pairs into contexts."""

    section: FinRel  # targets x contexts -> contexts
    retraction: FinRel  # contexts -> targets x contexts

    def __post_init__(self):
        if self.section.dom != self.retraction.cod or self.section.cod != self.retraction.dom:
            raise TypeMismatchError("section and retraction must be opposed")
        if not classify(self.section).deterministic:
            raise ValidationError("section must be deterministic")
        if not classify(self.retraction).deterministic:
            raise ValidationError("retraction must be deterministic")
        if compose(self.retraction, self.section) != identity(self.section.dom):
            raise ValidationError("retraction must undo the section")


def find_retract_pair(inst: TccInstance) -> RetractPair | None:
    """A canonical retract of target-context pairs inside contexts, if any.

    Finitely this needs the pair set to be no larger than the context set,
    which pins the target set to at most one element.
    """
    tc = inst.tc
    c = inst.contexts
    if tc.size == 0 or tc.size > c.size:
        return None
    sec = np.zeros((tc.size, c.size), dtype=bool)
    for i in range(tc.size):
        sec[i, i] = True
    ret = np.zeros((c.size, tc.size), dtype=bool)
    for j in range(c.size):
        ret[j, min(j, tc.size - 1)] = True
    return RetractPair(FinRel(tc, c, sec), FinRel(c, tc, ret))


@dataclass(frozen=True)
class SingletonConstructions:
    s_id: Simulator | None
    t_id: FinRel | None
    s_u: Simulator | None
    t_u: FinRel | None
    notes: tuple[str, ...]


def singleton_constructions(
    inst: TccInstance,
    par: Parametrization | None = None,
    retract: RetractPair | None = None,
    budget: SearchBudget | None = None,
) -> SingletonConstructions:
    """Build the two singleton universal simulators, where possible.

    Both need behaviors to coincide with contexts.  The first uses a target
    whose evaluation row imitates doing nothing, with evaluation itself as
    the context reduction.  The second additionally needs a retract of
    target-context pairs inside contexts and uses its section instead.
    Each constructed simulator is asserted universal.
    """
    c = inst.contexts
    if inst.behavior.behaviors != c:
        raise ValidationError("singleton constructions need behaviors equal to contexts")
    if par is None:
        par = eval_parametrization(inst)
    elif par.programs != inst.targets or par.rel != inst.eval:
        raise TypeMismatchError("singleton constructions start from evaluation")
    notes = []

    def checked(sim: Simulator, tag: str) -> Simulator:
        if find_universality_witness(sim, budget) is None:
            raise UnivsimError(f"framework bug: constructed {tag} is not universal")
        return sim

    t_id = find_witness(par, identity(c), UNIT, budget)
    if t_id is None:
        s_id = None
        notes.append("no target imitates doing nothing; evaluation is not complete")
    else:
        s_id = checked(
            make_simulator(inst, compose(t_id, delete_rel(inst.targets)), inst.eval),
            "identity-style singleton",
        )
    if retract is None:
        retract = find_retract_pair(inst)
    t_u = None
    s_u = None
    if retract is None:
        notes.append(
            "no retract of target-context pairs inside contexts exists at this size"
        )
    else:
        u = compose(inst.eval, retract.retraction)
        t_u = find_witness(par, u, UNIT, budget)
        if t_u is None:
            notes.append("retract exists but no target realizes its unpacking")
        else:
            s_u = checked(
                make_simulator(
                    inst, compose(t_u, delete_rel(inst.targets)), retract.section
                ),
                "retract-style singleton",
            )
    return SingletonConstructions(s_id, t_id, s_u, t_u, tuple(notes))


@dataclass(frozen=True)
class CantorReport:
    n: int
    subsets: int
    compilers_checked: int
    universal_exists: bool
    surjection_exists: bool
    equivalence_holds: bool
    simulators_checked: int
    # None when the widened scan was skipped as over budget (n=3)
    universal_exists_any_context_reduction: bool | None
    negation_point: FinRel | None
    completeness_mode: str
    complete_over_contexts: bool


def cantor_instance(n: int) -> TccInstance:
    """Characteristic-map evaluation over an n-element context set."""
    if n < 1 or n > 3:
        raise ValidationError("the diagonal demonstration is sized for 1 <= n <= 3")
    c = FinSet(f"C{n}", tuple(f"c{i}" for i in range(n)))
    labels = []
    for bits in range(2**n):
        members = [f"c{i}" for i in range(n) if bits >> i & 1]
        labels.append("{" + ",".join(members) + "}")
    t = FinSet(f"Pow{n}", tuple(labels))
    b = FinSet("bool", ("0", "1"))
    tc = product(t, c)
    mat = np.zeros((tc.size, b.size), dtype=bool)
    for bits in range(2**n):
        for i in range(n):
            mat[bits * n + i, bits >> i & 1] = True
    ev = FinRel(tc, b, mat)
    return TccInstance(
        name=f"cantor{n}",
        targets=t,
        contexts=c,
        behavior=BehaviorStructure(b, equality_preorder(b), ev),
        intrinsic=True,
    )


def cantor_report(n: int, budget: SearchBudget | None = None) -> CantorReport:
    """Exhaustively relate surjections, universality, and fixed points.

    First scans every simulator whose programs are the contexts and whose
    context reduction discards the program: no compiler is surjective onto
    subsets, none of these simulators is universal, and the two failures
    are checked to coincide compiler by compiler.  Then widens to every
    context reduction whatsoever and confirms universality still never
    appears.  Independently confirms negation on booleans has no
    deterministic quasi-fixed point, the obstruction predicting both
    failures, and that evaluation is complete over the context index.
    """
    budget = budget or SearchBudget()
    inst = cantor_instance(n)
    t, c, b = inst.targets, inst.contexts, inst.behavior.behaviors
    cc = product(c, c)
    sc = tensor(delete_rel(c), identity(c))
    universal_for = []
    surjective_for = []
    budget.charge(functional_count(c, t), "compiler-by-compiler scan")
    for compiler in iter_functional_rels(c, t):
        sim = make_simulator(inst, compiler, sc)
        universal_for.append(find_universality_witness(sim, budget) is not None)
        surjective_for.append(
            bool(classify(compiler).total and compiler.mat.any(axis=0).all())
        )
    simulators_checked = 0
    universal_any: bool | None = False
    try:
        budget.charge(
            functional_count(c, t) * all_rel_count(cc, c), "all-context-reduction scan"
        )
    except BudgetExceededError:
        universal_any = None
    else:
        for compiler in iter_functional_rels(c, t):
            for any_sc in iter_all_rels(cc, c):
                simulators_checked += 1
                sim = make_simulator(inst, compiler, any_sc)
                if find_universality_witness(sim, budget) is not None:
                    universal_any = True
    neg = FinRel.from_pairs(b, b, [("0", "1"), ("1", "0")])
    negation_point = has_quasi_fixed_point(inst, neg, "deterministic")
    completeness = is_complete_parametrization(
        eval_parametrization(inst), c, "functional", budget
    )
    return CantorReport(
        n=n,
        subsets=t.size,
        compilers_checked=len(universal_for),
        universal_exists=any(universal_for),
        surjection_exists=any(surjective_for),
        equivalence_holds=universal_for == surjective_for,
        simulators_checked=simulators_checked,
        universal_exists_any_context_reduction=universal_any,
        negation_point=negation_point,
        completeness_mode=completeness.mode,
        complete_over_contexts=completeness.complete,
    )
