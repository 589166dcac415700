"""Structure-preserving maps between instances, acting on simulators.

A functor here is finitely presented: an element bijection for each
generating set it touches, extended to products factor-wise and to every
other set as the identity.  Morphisms are conjugated by the induced
permutations, which automatically preserves composition, identities,
copy, delete and (partial) functionality.

The one condition with real content is preservation of the ambient
relation, quantified over all morphisms into target x context.  Because
evaluations are functional, imitation of two such morphisms is decided
row by row from the pairwise comparison of evaluated target-context
pairs, so the quantified statement collapses to a finite certificate:
evaluation definedness must transport exactly along the bijection, and
every behaviour comparison ev(p) >= ev(q) must hold again after
transport.  With exact definedness transport the certificate is not just
sufficient but equivalent to the quantified statement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TypeMismatchError, UnivsimError, ValidationError
from .finrel import (
    CROSS_CHECK_WORK,
    FinRel,
    FinSet,
    UNIT,
    compose,
    copy_rel,
    delete_rel,
    identity,
    pipeline,
    product,
    swap_rel,
    tensor,
)
from .simulator import (
    Reduction,
    Simulator,
    check_reduction,
    is_singleton,
    make_simulator,
    trivial_simulator,
)
from .simcat import Processing, SimMorphism
from .tcc import BehaviorStructure, TccInstance, relabel_preorder, rng_matrix


@dataclass(frozen=True)
class ObjectAssignment:
    """One generating set, its image, and the element bijection between them.

    ``relabel`` lists the image label of each source element, in source
    order; it must enumerate the image set exactly once.
    """

    src: FinSet
    dst: FinSet
    relabel: tuple[str, ...]

    def __post_init__(self):
        if self.src.is_product or self.dst.is_product:
            raise ValidationError("assignments are declared on atomic sets only")
        if self.src == UNIT or self.dst == UNIT:
            raise ValidationError("the unit set always maps to itself")
        if len(self.relabel) != self.src.size:
            raise ValidationError(
                f"assignment for {self.src.id!r} needs one image label per element"
            )
        if sorted(self.relabel) != sorted(self.dst.elements):
            raise ValidationError(
                f"assignment for {self.src.id!r} must enumerate {self.dst.id!r} exactly"
            )

    def rel(self) -> FinRel:
        mat = np.zeros((self.src.size, self.dst.size), dtype=bool)
        for i, label in enumerate(self.relabel):
            mat[i, self.dst.index(label)] = True
        return FinRel(self.src, self.dst, mat)


def _inv(perm: FinRel) -> FinRel:
    # inverse of a bijection; only ever applied to assignment images
    return FinRel(perm.cod, perm.dom, perm.mat.T)


@dataclass(frozen=True)
class TcFunctor:
    """A finitely presented functor from one instance's world to another's.

    Construction validates only the presentation (well-formed, unambiguous
    assignments); whether the result actually is a functor of instances is
    the job of :func:`check_tc_functor`, so broken candidates can be built
    and then rejected with a report.
    """

    source: TccInstance
    target: TccInstance
    assignments: tuple[ObjectAssignment, ...] = ()

    def __post_init__(self):
        seen = set()
        for a in self.assignments:
            if a.src in seen:
                raise ValidationError(f"two assignments for set {a.src.id!r}")
            seen.add(a.src)

    def assignment_for(self, a: FinSet) -> ObjectAssignment | None:
        for cand in self.assignments:
            if cand.src == a:
                return cand
        return None

    def map_object(self, a: FinSet) -> FinSet:
        if a.is_product:
            return product(*(self.map_object(f) for f in a.factors))
        hit = self.assignment_for(a)
        return hit.dst if hit is not None else a

    def element_bijection(self, a: FinSet) -> FinRel:
        """The coherence bijection a -> F a; factor-wise on products."""
        if a.is_product:
            return tensor(*(self.element_bijection(f) for f in a.factors))
        hit = self.assignment_for(a)
        return hit.rel() if hit is not None else identity(a)

    def map_morphism(self, f: FinRel) -> FinRel:
        return pipeline(
            _inv(self.element_bijection(f.dom)), f, self.element_bijection(f.cod)
        )


def identity_functor(inst: TccInstance, target: TccInstance | None = None) -> TcFunctor:
    """The identity presentation; target defaults to the instance itself.

    With a distinct target sharing carriers this is the candidate functor
    for comparing two behaviour disciplines on the same material.
    """
    return TcFunctor(inst, inst if target is None else target)


def enlarging_functor(source: TccInstance, target: TccInstance) -> TcFunctor:
    """Identity presentation between instances sharing all three carriers."""
    if (
        source.targets != target.targets
        or source.contexts != target.contexts
        or source.behavior.behaviors != target.behavior.behaviors
    ):
        raise TypeMismatchError("enlargement comparison needs shared carriers")
    return TcFunctor(source, target)


def _pair_transport_violations(fun: TcFunctor) -> list[str]:
    """The ambient-preservation certificate, reported pair by pair.

    Definedness of evaluation must carry over exactly, and comparisons of
    evaluated pairs must stay valid after transport.  Equivalent to
    preservation over all morphisms into target x context: imitation is
    decided rowwise, rows evaluate to single behaviours, and with exact
    definedness every row quantifier transfers along the bijection.
    """
    src, tgt = fun.source, fun.target
    perm = fun.element_bijection(src.tc)
    if perm.cod != tgt.tc:
        return [
            f"ambient: target x context maps to {perm.cod.id}, expected {tgt.tc.id}"
        ]
    out: list[str] = []
    n = src.tc.size
    image_row = perm.mat.argmax(axis=1)
    ev, ev2 = src.eval.mat, tgt.eval.mat
    src_def = ev.any(axis=1)
    tgt_def = ev2.any(axis=1)[image_row]
    for i in np.nonzero(src_def != tgt_def)[0][:5]:
        word = "loses" if src_def[i] else "gains"
        out.append(
            f"ambient: evaluation {word} definedness at "
            f"{src.tc.elements[int(i)]}"
        )
    if out:
        return out
    defined = np.nonzero(src_def)[0]
    val = ev.argmax(axis=1)
    val2 = ev2.argmax(axis=1)[image_row]
    cmp_src = src.brel.mat[np.ix_(val[defined], val[defined])]
    cmp_tgt = tgt.brel.mat[np.ix_(val2[defined], val2[defined])]
    bad = np.nonzero(cmp_src & ~cmp_tgt)
    for i, j in list(zip(*bad))[:5]:
        p = src.tc.elements[int(defined[i])]
        q = src.tc.elements[int(defined[j])]
        out.append(f"ambient: comparison {p} >= {q} is lost after transport")
    return out


def functor_violations(fun: TcFunctor, rng=None, samples: int = 30) -> list[str]:
    """All failed functor conditions, empty when the presentation is valid.

    Endpoint preservation and ambient preservation are checked exactly;
    functoriality and the copy/delete/swap coherences, which hold by
    construction for conjugation, are re-verified on random material as a
    guard against presentation bugs.
    """
    src, tgt = fun.source, fun.target
    out: list[str] = []
    ft = fun.map_object(src.targets)
    if ft != tgt.targets:
        out.append(f"objects: targets map to {ft.id}, expected {tgt.targets.id}")
    fc = fun.map_object(src.contexts)
    if fc != tgt.contexts:
        out.append(f"objects: contexts map to {fc.id}, expected {tgt.contexts.id}")
    if out:
        return out
    out.extend(_pair_transport_violations(fun))
    gens = [src.targets, src.contexts, src.behavior.behaviors, src.tc]
    for a in gens:
        if fun.map_morphism(identity(a)) != identity(fun.map_object(a)):
            out.append(f"functoriality: identity on {a.id} is not preserved")
        # the copy coherence conjugates a bijection of a x a, size^4 cells
        if a.size**4 <= CROSS_CHECK_WORK and fun.map_morphism(
            copy_rel(a)
        ) != copy_rel(fun.map_object(a)):
            out.append(f"coherence: copy on {a.id} is not preserved")
        if fun.map_morphism(delete_rel(a)) != delete_rel(fun.map_object(a)):
            out.append(f"coherence: delete on {a.id} is not preserved")
    sw = swap_rel(src.targets, src.contexts)
    if fun.map_morphism(sw) != swap_rel(fun.map_object(src.targets), fc):
        out.append("coherence: the swap of targets and contexts is not preserved")
    if rng is not None:
        for _ in range(samples):
            a, b, c = (gens[rng.randrange(len(gens))] for _ in range(3))
            f = FinRel(a, b, rng_matrix(rng, a.size, b.size))
            g = FinRel(b, c, rng_matrix(rng, b.size, c.size))
            if fun.map_morphism(compose(g, f)) != compose(
                fun.map_morphism(g), fun.map_morphism(f)
            ):
                out.append(
                    f"functoriality: composition {a.id} -> {b.id} -> {c.id} "
                    "is not preserved"
                )
                break
    return out


def check_tc_functor(
    fun: TcFunctor, rng=None, samples: int = 30
) -> tuple[bool, list[str]]:
    bad = functor_violations(fun, rng, samples)
    return (not bad, bad)


def map_through(fun: TcFunctor, x: Simulator | SimMorphism):
    """The image of a simulator or simulator morphism.

    Simulators map by transporting compiler and context reduction;
    morphisms map componentwise.  All images go through the validating
    constructors, so an invalid functor surfaces as a construction error
    here rather than a silently wrong image.
    """
    if isinstance(x, Simulator):
        if x.inst != fun.source:
            raise TypeMismatchError("simulator lives on a different instance")
        return make_simulator(
            fun.target,
            fun.map_morphism(x.compiler),
            fun.map_morphism(x.context_reduction),
        )
    if isinstance(x, SimMorphism):
        proc = x.proc
        image_proc = Processing(
            fun.target,
            fun.map_object(proc.knobs),
            fun.map_morphism(proc.qt),
            fun.map_morphism(proc.qc),
            fun.map_morphism(proc.q),
        )
        return SimMorphism(
            map_through(fun, x.source),
            map_through(fun, x.target),
            fun.map_morphism(x.r),
            image_proc,
        )
    raise TypeMismatchError(f"cannot map a {type(x).__name__} through a functor")


def compose_functors(second: TcFunctor, first: TcFunctor) -> TcFunctor:
    """The composite presentation, first applied first."""
    if first.target != second.source:
        raise TypeMismatchError("functor chain mismatch")
    assignments = []
    covered_images = set()
    for a in first.assignments:
        covered_images.add(a.dst)
        inner = second.assignment_for(a.dst)
        if inner is None:
            assignments.append(ObjectAssignment(a.src, a.dst, a.relabel))
        else:
            lookup = dict(zip(inner.src.elements, inner.relabel))
            assignments.append(
                ObjectAssignment(
                    a.src, inner.dst, tuple(lookup[e] for e in a.relabel)
                )
            )
    for b in second.assignments:
        if b.src not in covered_images and first.assignment_for(b.src) is None:
            assignments.append(b)
    return TcFunctor(first.source, second.target, tuple(assignments))


def random_relabel_functor(inst: TccInstance, rng, tag: str = "img") -> TcFunctor:
    """A functor onto a freshly relabelled, shuffled copy of the instance.

    Every carrier gets new labels in a new order and all structure is
    transported verbatim, so the result is valid by construction; useful
    as a source of nontrivial functors for randomized checks.
    """
    gens: list[FinSet] = []
    for a in (inst.targets, inst.contexts, inst.behavior.behaviors):
        if a == UNIT or a in gens:
            continue
        if a.is_product:
            raise TypeMismatchError("relabelling expects atomic carriers")
        gens.append(a)
    amap = {}
    for a in gens:
        renamed = [f"{e}.{tag}" for e in a.elements]
        order = list(range(a.size))
        rng.shuffle(order)
        dst = FinSet(f"{a.id}.{tag}", tuple(renamed[i] for i in order))
        amap[a] = ObjectAssignment(a, dst, tuple(renamed))

    def bij(a: FinSet) -> FinRel:
        if a.is_product:
            return tensor(*(bij(f) for f in a.factors))
        hit = amap.get(a)
        return hit.rel() if hit is not None else identity(a)

    b = inst.behavior.behaviors
    ev2 = pipeline(_inv(bij(inst.tc)), inst.eval, bij(b))
    b_asgn = amap.get(b)
    new_b = b_asgn.dst if b_asgn is not None else b
    mapping = (
        dict(zip(b.elements, b_asgn.relabel))
        if b_asgn is not None
        else {e: e for e in b.elements}
    )
    t_asgn, c_asgn = amap.get(inst.targets), amap.get(inst.contexts)
    image = TccInstance(
        f"{inst.name}.{tag}",
        t_asgn.dst if t_asgn is not None else inst.targets,
        c_asgn.dst if c_asgn is not None else inst.contexts,
        BehaviorStructure(new_b, relabel_preorder(inst.brel, new_b, mapping), ev2),
        inst.intrinsic,
    )
    return TcFunctor(inst, image, tuple(amap.values()))


def verify_universality_preservation(
    fun: TcFunctor, sim: Simulator, witness: Reduction
) -> Reduction:
    """Push a universality witness through the functor and re-check it.

    The transported witness must again certify universality of the image
    simulator, and a singleton simulator must stay singleton; a failure of
    either is a framework bug, not an input error.
    """
    if not check_reduction(witness, sim, trivial_simulator(sim.inst)):
        raise ValidationError("the given reduction does not witness universality")
    image = map_through(fun, sim)
    moved = Reduction(fun.map_morphism(witness.rel), witness.flavor)
    if not check_reduction(moved, image, trivial_simulator(fun.target)):
        raise UnivsimError(
            "framework bug: transported witness fails on the image simulator"
        )
    if is_singleton(sim) and not is_singleton(image):
        raise UnivsimError("framework bug: singleton image is not singleton")
    return moved
