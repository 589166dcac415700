"""The category of simulators: processings, morphisms, parsimony.

A processing rewires target-context pairs without increasing behavior; it
has the same shape as a simulator whose programs are knob-target pairs,
plus a weakening condition saying that discarding the knob and doing
nothing dominates it.  A simulator morphism is a reduction followed by a
knob-correlated processing; it exists exactly when its target simulator
can be carved out of its source, so morphisms order simulators by
parsimony.

Deciding whether a morphism exists between two given simulators uses
three routes: an obstruction certificate when the target is the trivial
simulator (every lax reduction collapses behaviorally distinct targets),
an explicit construction when the source is trivial, and bounded
exhaustive search otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import BudgetExceededError, TypeMismatchError, UnivsimError, ValidationError
from .finrel import (
    FinRel,
    FinSet,
    classify,
    compose,
    copy_rel,
    delete_rel,
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
from .simulator import (
    Reduction,
    Simulator,
    assemble,
    check_reduction,
    context_reduces,
    find_universality_witness,
    make_simulator,
    marginal_equations,
    pullback,
    trivial_simulator,
)
from .tcc import TccInstance, ambient_imitates


def weakening_rel(knobs: FinSet, inst: TccInstance) -> FinRel:
    """Discard the knob, pass target and context through untouched."""
    return tensor(delete_rel(knobs), identity(inst.tc))


def processing_violations(
    inst: TccInstance, knobs: FinSet, qt: FinRel, qc: FinRel, q: FinRel
) -> list[str]:
    """All failed processing conditions, empty when q is valid.

    The three conditions: q splits through a copy of the knob-target pair
    with functional compiler part, the split's marginal equations hold,
    and the weakening relation dominates q.
    """
    kt = product(knobs, inst.targets)
    ktc = product(kt, inst.contexts)
    if qt.dom != kt or qt.cod != inst.targets:
        raise TypeMismatchError("processing compiler part must map knob x target to target")
    if qc.dom != ktc or qc.cod != inst.contexts:
        raise TypeMismatchError(
            "processing context part must map knob x target x context to context"
        )
    if q.dom != ktc or q.cod != inst.tc:
        raise TypeMismatchError("processing body must map knob x target x context onward")
    out = []
    if not classify(qt).functional:
        out.append("split: compiler part is not functional")
    if q != assemble(qt, qc, inst.contexts):
        out.append("split: body does not equal the assembled knob-target split")
    else:
        d1, d2 = marginal_equations(q, qt, qc, inst.targets, inst.contexts, kt)
        if not d1:
            out.append("domain: target marginal equation fails")
        if not d2:
            out.append("domain: context marginal equation fails")
    if not ambient_imitates(weakening_rel(knobs, inst), q, inst):
        out.append("weakening: discarding the knob does not dominate the body")
    return out


@dataclass(frozen=True)
class Processing:
    inst: TccInstance
    knobs: FinSet
    qt: FinRel  # knobs x targets -> targets, functional
    qc: FinRel  # knobs x targets x contexts -> contexts
    q: FinRel  # assembled body

    def __post_init__(self):
        bad = processing_violations(self.inst, self.knobs, self.qt, self.qc, self.q)
        if bad:
            raise ValidationError("; ".join(bad))


def make_processing(
    inst: TccInstance, knobs: FinSet, qt: FinRel, qc: FinRel
) -> Processing:
    return Processing(inst, knobs, qt, qc, assemble(qt, qc, inst.contexts))


def identity_processing(inst: TccInstance, knobs: FinSet) -> Processing:
    return make_processing(
        inst,
        knobs,
        tensor(delete_rel(knobs), identity(inst.targets)),
        tensor(delete_rel(knobs), delete_rel(inst.targets), identity(inst.contexts)),
    )


def processing_from_raw(inst: TccInstance, knobs: FinSet, raw: FinRel) -> Processing:
    """Split a raw body into a processing, or reject it.

    Reuses the canonical simulator split over knob-target programs, so a
    body whose target output depends on the context fails the split check
    there.
    """
    from .simulator import simulator_from_raw

    sim = simulator_from_raw(inst, product(knobs, inst.targets), raw)
    return Processing(inst, knobs, sim.compiler, sim.context_reduction, raw)


def knob_independent(proc: Processing) -> bool:
    """Does the body ignore its knob input entirely?"""
    k = proc.knobs.size
    if k <= 1:
        return True
    per_knob = proc.q.mat.reshape(k, -1, proc.q.cod.size)
    return bool((per_knob == per_knob[0]).all())


def check_processing(proc: Processing, sim: Simulator) -> Simulator:
    """Apply a processing to a simulator, knob correlated with program.

    The result compiles by post-processing the compiled target and reduces
    contexts by post-processing the reduced context, both informed by the
    program.  Raises when the processing's knobs are not the simulator's
    programs.
    """
    inst = sim.inst
    if proc.inst != inst:
        raise TypeMismatchError("processing and simulator live on different instances")
    if proc.knobs != sim.programs:
        raise TypeMismatchError("processing knobs must be the simulator's programs")
    p, c = sim.programs, inst.contexts
    new_t = pipeline(
        copy_rel(p), tensor(identity(p), sim.compiler), proc.qt
    )
    new_c = pipeline(
        tensor(copy_rel(p), identity(c)), tensor(identity(p), sim.s), proc.qc
    )
    out = make_simulator(inst, new_t, new_c)
    hit = pipeline(tensor(copy_rel(p), identity(c)), tensor(identity(p), sim.s), proc.q)
    if out.s != hit:
        raise UnivsimError("framework bug: processed split disagrees with direct application")
    return out


@dataclass(frozen=True)
class SimMorphism:
    """A reduction and a processing that carve the target out of the source."""

    source: Simulator
    target: Simulator
    r: FinRel  # target programs -> source programs, functional
    proc: Processing

    def __post_init__(self):
        if self.source.inst != self.target.inst:
            raise TypeMismatchError("morphism endpoints live on different instances")
        if self.r.dom != self.target.programs or self.r.cod != self.source.programs:
            raise TypeMismatchError("morphism reduction must map target programs to source programs")
        if not classify(self.r).functional:
            raise ValidationError("morphism reduction must be functional")
        if self.proc.knobs != self.target.programs:
            raise TypeMismatchError("morphism processing must be knobbed by the target programs")
        transformed = check_processing(self.proc, pullback(self.source, self.r))
        if transformed.s != self.target.s:
            raise ValidationError("morphism does not transform its source into its target")


def identity_morphism(sim: Simulator) -> SimMorphism:
    return SimMorphism(
        sim, sim, identity(sim.programs), identity_processing(sim.inst, sim.programs)
    )


def compose_morphisms(m2: SimMorphism, m1: SimMorphism) -> SimMorphism:
    """The composite along a shared middle simulator (m1 first)."""
    if m1.target != m2.source:
        raise TypeMismatchError("morphism chain mismatch")
    inst = m1.source.inst
    p_out = m2.target.programs
    tc = inst.tc
    r = compose(m1.r, m2.r)
    inner = compose(m1.proc.q, tensor(m2.r, identity(tc)))
    inner_t = compose(m1.proc.qt, tensor(m2.r, identity(inst.targets)))
    qt = pipeline(
        tensor(copy_rel(p_out), identity(inst.targets)),
        tensor(identity(p_out), inner_t),
        m2.proc.qt,
    )
    qc = pipeline(
        tensor(copy_rel(p_out), identity(tc)),
        tensor(identity(p_out), inner),
        m2.proc.qc,
    )
    q = pipeline(
        tensor(copy_rel(p_out), identity(tc)),
        tensor(identity(p_out), inner),
        m2.proc.q,
    )
    proc = Processing(inst, p_out, qt, qc, q)
    return SimMorphism(m1.source, m2.target, r, proc)


def morphism_to_lax_reduction(m: SimMorphism) -> Reduction:
    """Every simulator morphism's reduction part is lax; return it checked."""
    red = Reduction(m.r, "lax")
    if not check_reduction(red, m.source, m.target):
        raise UnivsimError("framework bug: morphism reduction fails the lax check")
    return red


def _lax_reductions(
    sim: Simulator, budget: SearchBudget
) -> Iterator[FinRel]:
    inst = sim.inst
    triv = trivial_simulator(inst)
    budget.charge(
        functional_count(inst.targets, sim.programs), "lax reduction enumeration"
    )
    for cand in iter_functional_rels(inst.targets, sim.programs):
        if check_reduction(Reduction(cand, "lax"), sim, triv):
            yield cand


@dataclass(frozen=True)
class CompressednessResult:
    compressed: bool
    # one entry per lax reduction to the trivial simulator, in enumeration
    # order: the reduction and its witness pair of target states, or None
    # when some behaviorally interchangeable merge is unavoidable
    entries: tuple[tuple[FinRel, tuple[FinRel, FinRel] | None], ...]

    @property
    def lax_count(self) -> int:
        return len(self.entries)


def is_compressed(
    sim: Simulator,
    budget: SearchBudget | None = None,
    search: str = "all",
) -> CompressednessResult:
    """Must every lax reduction merge two non-interchangeable targets?

    For each lax reduction to the trivial simulator, looks for two target
    states compiled onto the same target through the reduction such that
    the second does not oplax context-reduce to the first.  Compressed
    means every reduction admits such a pair.  Raises on non-universal
    simulators, where no lax reduction exists at all.
    """
    budget = budget or SearchBudget()
    inst = sim.inst
    states = list(iter_functional_states(inst.targets))
    oplax_cache: dict[tuple[bytes, bytes], bool] = {}

    def reduces(g: FinRel, t: FinRel) -> bool:
        key = (g.mat.tobytes(), t.mat.tobytes())
        if key not in oplax_cache:
            oplax_cache[key] = bool(
                context_reduces(g, t, inst, flavor="oplax", budget=budget, search=search)
            )
        return oplax_cache[key]

    entries = []
    for r in _lax_reductions(sim, budget):
        compiled = {
            i: compose(sim.compiler, compose(r, st)) for i, st in enumerate(states)
        }
        pair = None
        for i, t in enumerate(states):
            for j, g in enumerate(states):
                if i == j or compiled[i] != compiled[j]:
                    continue
                if not reduces(g, t):
                    pair = (t, g)
                    break
            if pair:
                break
        entries.append((r, pair))
    if not entries:
        raise ValidationError("compressedness is defined for universal simulators only")
    return CompressednessResult(all(p is not None for _, p in entries), tuple(entries))


@dataclass(frozen=True)
class ParsimonyResult:
    status: str  # "morphism-found" | "none-exists" | "none-found"
    method: str  # "identity" | "construction" | "s2id" | "no-lax-reduction" | "exhaustive"
    morphism: SimMorphism | None = None
    certificate: dict | None = None


def _strengthening_morphism(
    b: Simulator, budget: SearchBudget
) -> tuple[SimMorphism, FinRel, FinRel] | None:
    """Construct a morphism trivial -> b from an invertible-enough witness.

    Needs a lax-and-oplax reduction r and a functional m with
    b∘((r∘m)⊗id) = b; the processing then recompiles through r and ignores
    its knob.
    """
    inst = b.inst
    triv = trivial_simulator(inst)
    p, t, c = b.programs, inst.targets, inst.contexts
    budget.charge(functional_count(t, p), "invertible reduction search")
    for r in iter_functional_rels(t, p):
        if not check_reduction(Reduction(r, "lax"), b, triv):
            continue
        if not check_reduction(Reduction(r, "oplax"), b, triv):
            continue

        def fixes(m: FinRel) -> bool:
            return compose(b.s, tensor(compose(r, m), identity(c))) == b.s

        found = None
        right_inv = _right_inverse(r, p)
        if right_inv is not None and fixes(right_inv):
            found = right_inv
        else:
            budget.charge(functional_count(p, t), "recompilation fixer search")
            for m in iter_functional_rels(p, t):
                if fixes(m):
                    found = m
                    break
        if found is None:
            continue
        qt = pipeline(tensor(delete_rel(p), identity(t)), r, b.compiler)
        qc = pipeline(
            tensor(delete_rel(p), identity(t), identity(c)),
            tensor(r, identity(c)),
            b.context_reduction,
        )
        proc = make_processing(inst, p, qt, qc)
        return SimMorphism(triv, b, found, proc), r, found
    return None


def _right_inverse(r: FinRel, programs: FinSet) -> FinRel | None:
    """The least functional section of r, or None when r misses a program."""
    mat = np.zeros((programs.size, r.dom.size), dtype=bool)
    for j in range(programs.size):
        hits = np.nonzero(r.mat[:, j])[0]
        if hits.size == 0:
            return None
        mat[j, int(hits[0])] = True
    return FinRel(programs, r.dom, mat)


def _exhaustive_morphism_search(
    a: Simulator, b: Simulator, budget: SearchBudget
) -> tuple[SimMorphism | None, str]:
    """Scan all (reduction, processing) pairs; returns the search scope used."""
    inst = a.inst
    kt = product(b.programs, inst.targets)
    ktc = product(kt, inst.contexts)
    r_count = functional_count(b.programs, a.programs)
    qt_count = functional_count(kt, inst.targets)
    qc_all = all_rel_count(ktc, inst.contexts)
    qc_fun = functional_count(ktc, inst.contexts)
    scope = "all"
    qc_iter, qc_count = iter_all_rels, qc_all
    if r_count * qt_count * qc_all > budget.max_candidates:
        scope = "functional"
        qc_iter, qc_count = iter_functional_rels, qc_fun
    budget.charge(r_count * qt_count * qc_count, "morphism search")
    for r in iter_functional_rels(b.programs, a.programs):
        pulled = pullback(a, r)
        for qt in iter_functional_rels(kt, inst.targets):
            for qc in qc_iter(ktc, inst.contexts):
                q = assemble(qt, qc, inst.contexts)
                if processing_violations(inst, b.programs, qt, qc, q):
                    continue
                proc = Processing(inst, b.programs, qt, qc, q)
                if check_processing(proc, pulled).s == b.s:
                    return SimMorphism(a, b, r, proc), scope
    return None, scope


def decide_parsimony(
    a: Simulator, b: Simulator, budget: SearchBudget | None = None
) -> ParsimonyResult:
    """Does a simulator morphism a -> b exist?

    Routes: identical endpoints get the identity; a trivial target is
    decided by the compressedness obstruction when its hypotheses check
    out; a trivial source by the explicit strengthening construction;
    anything else by bounded exhaustive search.  A definitive no from an
    exhausted search is reported as none-exists, a budget-truncated one
    as none-found.
    """
    if a.inst != b.inst:
        raise TypeMismatchError("parsimony compares simulators on one instance")
    inst = a.inst
    budget = budget or SearchBudget()
    if a == b:
        return ParsimonyResult("morphism-found", "identity", identity_morphism(a))
    triv = trivial_simulator(inst)
    if b == triv:
        laxes = list(_lax_reductions(a, budget))
        if not laxes:
            return ParsimonyResult(
                "none-exists",
                "no-lax-reduction",
                certificate={"kind": "no-lax-reduction"},
            )
        all_oplax = all(
            check_reduction(Reduction(r, "oplax"), a, triv) for r in laxes
        )
        if all_oplax:
            comp = is_compressed(a, budget=budget)
            if comp.compressed:
                return ParsimonyResult(
                    "none-exists",
                    "s2id",
                    certificate={
                        "kind": "s2id",
                        "lax_reduction_count": comp.lax_count,
                        "all_lax_also_oplax": True,
                        "witnesses": comp.entries,
                        "brel_is_equality": inst.brel_is_equality,
                        "eval_total": bool(classify(inst.eval).total),
                    },
                )
    if a == triv:
        built = _strengthening_morphism(b, budget)
        if built is not None:
            morph, r, m = built
            return ParsimonyResult(
                "morphism-found",
                "construction",
                morph,
                certificate={"kind": "strengthening", "reduction": r, "section": m},
            )
    try:
        found, scope = _exhaustive_morphism_search(a, b, budget)
    except BudgetExceededError:
        return ParsimonyResult(
            "none-found", "exhaustive", certificate={"kind": "budget"}
        )
    if found is not None:
        return ParsimonyResult("morphism-found", "exhaustive", found)
    if scope == "all":
        return ParsimonyResult(
            "none-exists", "exhaustive", certificate={"kind": "exhausted-search"}
        )
    return ParsimonyResult(
        "none-found",
        "exhaustive",
        certificate={"kind": "functional-scope-only"},
    )
