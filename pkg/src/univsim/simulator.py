"""Simulators, reductions between them, and the universality checks.

A simulator packages a functional compiler from programs to targets with a
context reduction from program-context pairs to contexts; the assembled
morphism copies the program, compiles one copy and feeds the other to the
context reduction.  Two marginal equations pin the canonical split of an
assembled morphism, so a raw morphism can be split back into its compiler
and context reduction when a total context state exists.

A reduction r maps the programs of one simulator into another's; it is
strict when pulling the simulator back along r gives the other exactly,
lax when the pullback's behaviour dominates, oplax for the converse.
Universality of a simulator means a lax reduction from the trivial
simulator (identity on target x context) into it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from .errors import BudgetExceededError, TypeMismatchError, ValidationError
from .finrel import (
    FinRel,
    FinSet,
    UNIT,
    classify,
    compose,
    copy_rel,
    delete_rel,
    domain,
    identity,
    pipeline,
    product,
    tensor,
)
from .search import (
    SearchBudget,
    all_rel_count,
    functional_count,
    iter_all_rels,
    iter_functional_rels,
    iter_functional_states,
)
from .tcc import TccInstance, ambient_imitates, behavior_of

REDUCTION_FLAVORS = ("strict", "lax", "oplax")


def assemble(compiler: FinRel, context_reduction: FinRel, contexts: FinSet) -> FinRel:
    """Copy the program, compile one copy, reduce context with the other."""
    programs = compiler.dom
    return compose(
        tensor(compiler, context_reduction),
        tensor(copy_rel(programs), identity(contexts)),
    )


@dataclass(frozen=True)
class Simulator:
    inst: TccInstance
    programs: FinSet
    compiler: FinRel  # programs -> targets, functional
    context_reduction: FinRel  # programs x contexts -> contexts
    s: FinRel  # assembled: programs x contexts -> targets x contexts

    def __post_init__(self):
        inst = self.inst
        if self.compiler.dom != self.programs or self.compiler.cod != inst.targets:
            raise ValidationError("compiler must map programs to targets")
        if not classify(self.compiler).functional:
            raise ValidationError("compiler must be functional")
        pc = product(self.programs, inst.contexts)
        if self.context_reduction.dom != pc or self.context_reduction.cod != inst.contexts:
            raise ValidationError(
                "context reduction must map programs x contexts to contexts"
            )
        if self.s != assemble(self.compiler, self.context_reduction, inst.contexts):
            raise ValidationError("simulator body must equal its assembled split")
        d1, d2 = split_marginals_agree(self)
        if not (d1 and d2):
            raise ValidationError("canonical split marginals disagree")


def marginal_equations(
    body: FinRel,
    compiler: FinRel,
    context_reduction: FinRel,
    targets: FinSet,
    contexts: FinSet,
    programs: FinSet,
) -> tuple[bool, bool]:
    """The two marginal equations satisfied by a canonical split.

    Discarding the context output of the body equals compiling after
    restricting to the body's domain; discarding the target output equals
    the context reduction after the same restriction.
    """
    dom_s = domain(body)
    lhs1 = compose(tensor(identity(targets), delete_rel(contexts)), body)
    rhs1 = pipeline(dom_s, tensor(identity(programs), delete_rel(contexts)), compiler)
    lhs2 = compose(tensor(delete_rel(targets), identity(contexts)), body)
    rhs2 = compose(context_reduction, dom_s)
    return lhs1 == rhs1, lhs2 == rhs2


def split_marginals_agree(sim: Simulator) -> tuple[bool, bool]:
    inst = sim.inst
    return marginal_equations(
        sim.s, sim.compiler, sim.context_reduction,
        inst.targets, inst.contexts, sim.programs,
    )


def make_simulator(
    inst: TccInstance, compiler: FinRel, context_reduction: FinRel
) -> Simulator:
    return Simulator(
        inst=inst,
        programs=compiler.dom,
        compiler=compiler,
        context_reduction=context_reduction,
        s=assemble(compiler, context_reduction, inst.contexts),
    )


def simulator_from_raw(inst: TccInstance, programs: FinSet, raw: FinRel) -> Simulator:
    """Recover the canonical split of a raw morphism, or reject it.

    The context reduction is the target-discarding marginal.  The compiler
    is the context-discarding marginal probed with the full context state,
    which exists only when the context set is inhabited.
    """
    pc = product(programs, inst.contexts)
    tc = inst.tc
    if raw.dom != pc or raw.cod != tc:
        raise TypeMismatchError("raw simulator must map programs x contexts to targets x contexts")
    if inst.contexts.size == 0:
        raise ValidationError("no total context state exists, compiler cannot be pinned")
    sc = compose(tensor(delete_rel(inst.targets), identity(inst.contexts)), raw)
    probe = FinRel.full(UNIT, inst.contexts)
    st = pipeline(
        tensor(identity(programs), probe),
        raw,
        tensor(identity(inst.targets), delete_rel(inst.contexts)),
    )
    if not classify(st).functional:
        raise ValidationError("raw morphism has a non-functional compiler marginal")
    if assemble(st, sc, inst.contexts) != raw:
        raise ValidationError("raw morphism does not factor through a program copy")
    return make_simulator(inst, st, sc)


def trivial_simulator(inst: TccInstance) -> Simulator:
    """Programs are the targets themselves and nothing is transformed."""
    return make_simulator(
        inst,
        identity(inst.targets),
        tensor(delete_rel(inst.targets), identity(inst.contexts)),
    )


def is_singleton(sim: Simulator) -> FinRel | None:
    """The constant the compiler factors through, if it does.

    A singleton simulator compiles every program to one fixed target state
    (possibly the empty one).  Returns that state, or None.
    """
    st = sim.compiler
    if not st.mat.any():
        return FinRel.empty(UNIT, sim.inst.targets)
    cols = st.mat.any(axis=0)
    if cols.sum() != 1:
        return None
    col = int(np.nonzero(cols)[0][0])
    if not st.mat[:, col].all():
        return None
    mat = np.zeros((1, sim.inst.targets.size), dtype=bool)
    mat[0, col] = True
    return FinRel(UNIT, sim.inst.targets, mat)


@dataclass(frozen=True)
class Reduction:
    rel: FinRel  # programs of the target simulator -> programs of the source
    flavor: str

    def __post_init__(self):
        if self.flavor not in REDUCTION_FLAVORS:
            raise ValidationError(f"unknown reduction flavor {self.flavor!r}")
        if not classify(self.rel).functional:
            raise ValidationError("reductions must be functional")


def pullback(sim: Simulator, r: FinRel) -> Simulator:
    """The simulator with programs re-indexed along r."""
    if r.cod != sim.programs:
        raise TypeMismatchError("pullback map must land in the simulator's programs")
    return make_simulator(
        sim.inst,
        compose(sim.compiler, r),
        compose(sim.context_reduction, tensor(r, identity(sim.inst.contexts))),
    )


def check_reduction(
    r: Reduction, source: Simulator, target: Simulator
) -> bool:
    """Does r witness a reduction source -> target of its flavor?"""
    if source.inst is not target.inst and source.inst != target.inst:
        raise TypeMismatchError("reductions compare simulators on one instance")
    if r.rel.dom != target.programs or r.rel.cod != source.programs:
        raise TypeMismatchError("reduction must map target programs to source programs")
    pulled = compose(source.s, tensor(r.rel, identity(source.inst.contexts)))
    if r.flavor == "strict":
        return pulled == target.s
    if r.flavor == "lax":
        return ambient_imitates(pulled, target.s, source.inst)
    return ambient_imitates(target.s, pulled, source.inst)


def strict_implies_both(r: Reduction, source: Simulator, target: Simulator) -> bool:
    """A strict reduction is in particular lax and oplax (sanity helper)."""
    if not check_reduction(Reduction(r.rel, "strict"), source, target):
        return True
    return check_reduction(
        Reduction(r.rel, "lax"), source, target
    ) and check_reduction(Reduction(r.rel, "oplax"), source, target)


def find_universality_witness(
    sim: Simulator, budget: SearchBudget | None = None
) -> Reduction | None:
    """Exhaustive search for a lax reduction from the trivial simulator.

    Scans all functional maps targets -> programs in enumeration order and
    returns the first that works, so the result is the lexicographic
    least.  Raises when the space exceeds the budget.
    """
    budget = budget or SearchBudget()
    inst = sim.inst
    triv = trivial_simulator(inst)
    space = functional_count(inst.targets, sim.programs)
    budget.charge(space, "universality witness search")
    for cand in iter_functional_rels(inst.targets, sim.programs):
        red = Reduction(cand, "lax")
        if check_reduction(red, sim, triv):
            return red
    return None


def universality_search_space(sim: Simulator) -> int:
    return functional_count(sim.inst.targets, sim.programs)


def dress(f: FinRel, f_c: FinRel, inst: TccInstance) -> FinRel:
    """Pair f with a context map along a copied input."""
    a = f.dom
    if f.cod != inst.targets:
        raise TypeMismatchError("dress expects a morphism into the target set")
    pc = product(a, inst.contexts)
    if f_c.dom != pc or f_c.cod != inst.contexts:
        raise TypeMismatchError("context witness must map input x contexts to contexts")
    return compose(tensor(f, f_c), tensor(copy_rel(a), identity(inst.contexts)))


@dataclass(frozen=True)
class ContextReductionResult:
    holds: bool
    flavor: str
    witness: FinRel | None
    search_space: str  # "witness" | "all" | "functional"
    candidates: int

    def __bool__(self):
        return self.holds


def _context_candidate_ok(
    f: FinRel, g: FinRel, f_c: FinRel, inst: TccInstance, flavor: str
) -> bool:
    dressed = dress(f, f_c, inst)
    undressed = tensor(g, identity(inst.contexts))
    if flavor == "lax":
        return ambient_imitates(dressed, undressed, inst)
    # Oplax additionally demands the dressed side produce behaviour
    # wherever the undressed side does; otherwise the empty witness would
    # make the relation hold vacuously for every pair.
    dressed_dom = behavior_of(dressed, inst).mat.any(axis=1)
    undressed_dom = behavior_of(undressed, inst).mat.any(axis=1)
    if (undressed_dom & ~dressed_dom).any():
        return False
    return ambient_imitates(undressed, dressed, inst)


def context_reduces(
    f: FinRel,
    g: FinRel,
    inst: TccInstance,
    flavor: str = "lax",
    witness: FinRel | None = None,
    budget: SearchBudget | None = None,
    search: str = "all",
) -> ContextReductionResult:
    """Can f, dressed with some context map, stand in for g?

    With a witness only that candidate is checked.  Otherwise the witness
    space is searched exhaustively: all relations when affordable, else
    functional ones only (the result then reports the narrower claim).
    """
    if flavor not in ("lax", "oplax"):
        raise ValidationError("context reduction flavor is lax or oplax")
    if f.dom != g.dom or f.cod != g.cod or f.cod != inst.targets:
        raise TypeMismatchError("context reduction compares maps input -> targets")
    budget = budget or SearchBudget()
    if witness is not None:
        ok = _context_candidate_ok(f, g, witness, inst, flavor)
        return ContextReductionResult(ok, flavor, witness if ok else None, "witness", 1)
    pc = product(f.dom, inst.contexts)
    spaces = []
    if search == "all":
        spaces.append(("all", all_rel_count(pc, inst.contexts), iter_all_rels))
    spaces.append(("functional", functional_count(pc, inst.contexts), iter_functional_rels))
    for name, count, it in spaces:
        if count > budget.max_candidates:
            continue
        for cand in it(pc, inst.contexts):
            if _context_candidate_ok(f, g, cand, inst, flavor):
                return ContextReductionResult(True, flavor, cand, name, count)
        return ContextReductionResult(False, flavor, None, name, count)
    raise BudgetExceededError(
        "context reduction witness space exceeds the budget",
        required=spaces[-1][1],
        budget=budget.max_candidates,
    )


def functional_image(f: FinRel) -> tuple[FinRel, ...]:
    """States reachable by composing f with a functional state.

    Contains the empty state (image of the empty state) and the image of
    each element; duplicates are dropped, first occurrence kept.
    """
    if not classify(f).functional:
        raise ValidationError("functional image is defined for functional morphisms")
    seen = set()
    out = []
    for st in iter_functional_states(f.dom):
        img = compose(f, st)
        key = img.mat.tobytes()
        if key not in seen:
            seen.add(key)
            out.append(img)
    return tuple(out)


def state_key(st: FinRel) -> str | None:
    """None for the empty state, else the single element's label."""
    hits = np.nonzero(st.mat[0])[0]
    if hits.size == 0:
        return None
    if hits.size > 1:
        raise ValidationError("state keys exist only for functional states")
    return st.cod.elements[int(hits[0])]


@dataclass(frozen=True)
class MonotoneFn:
    """A rational grading of functional target states.

    Keys are element labels, plus None for the empty state.  Monotony
    along witnessed context reductions is a sampled property, checked by
    :func:`check_monotone_sampled`.
    """

    name: str
    values: Mapping[str | None, Fraction]

    def __call__(self, st: FinRel) -> Fraction:
        key = state_key(st)
        if key not in self.values:
            raise ValidationError(f"{self.name} is not defined on state {key!r}")
        return self.values[key]


def check_monotone_sampled(
    phi: MonotoneFn,
    inst: TccInstance,
    rng,
    pairs: int = 60,
    witnesses_per_pair: int = 8,
) -> list[str]:
    """Sample witnessed lax context reductions and check phi respects them.

    Returns failure notes; empty means every witnessed pair was ordered
    correctly.  Witness sampling always includes the discard witness so
    the reflexive pairs are exercised.
    """
    from .search import random_functional, random_rel

    states = list(iter_functional_states(inst.targets))
    failures = []
    for _ in range(pairs):
        t1 = states[rng.randrange(len(states))]
        t2 = states[rng.randrange(len(states))]
        cands = [tensor(delete_rel(UNIT), identity(inst.contexts))]
        for _ in range(witnesses_per_pair):
            cands.append(random_rel(rng, product(UNIT, inst.contexts), inst.contexts))
            cands.append(random_functional(rng, product(UNIT, inst.contexts), inst.contexts))
        related = any(
            _context_candidate_ok(t1, t2, w, inst, "lax") for w in cands
        )
        if related and phi(t1) < phi(t2):
            failures.append(
                f"{phi.name} drops along a witnessed context reduction "
                f"{state_key(t1)} -> {state_key(t2)}"
            )
    return failures


@dataclass(frozen=True)
class NogoVerdict:
    not_universal: bool
    sup_image: Fraction
    sup_all: Fraction
    image_size: int

    @property
    def verdict(self) -> str:
        return "not-universal" if self.not_universal else "inconclusive"


def nogo_check(sim: Simulator, phi: MonotoneFn, inst: TccInstance) -> NogoVerdict:
    """Compare phi's reach through the compiler with its full reach.

    If the compiler's functional image tops out strictly below the best
    functional state overall, no lax reduction from the trivial simulator
    can exist.  Equality decides nothing.
    """
    image = functional_image(sim.compiler)
    sup_image = max(phi(st) for st in image)
    sup_all = max(phi(st) for st in iter_functional_states(inst.targets))
    return NogoVerdict(sup_image < sup_all, sup_image, sup_all, len(image))
