"""Target-context instances: a target set, a context set, and a behaviour
structure that says when one joint morphism imitates another.

The behaviour structure carries a behaviour set B, a preorder on it, and a
functional (possibly partial) evaluation out of target x context.  The
ambient relation between morphisms into target x context is imitation of
their evaluations.  ``intrinsify`` rebuilds an instance so that behaviours
are the target-context pairs themselves and evaluation is the identity.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import TypeMismatchError, ValidationError
from .finrel import (
    FinRel,
    FinSet,
    UNIT,
    classify,
    compose,
    identity,
    product,
    restricts_to,
    scalar,
    tensor,
)
from .order import Preorder, imitates, imitation_witnesses


@dataclass(frozen=True)
class BehaviorStructure:
    behaviors: FinSet
    brel: Preorder
    eval: FinRel  # (targets x contexts) -> behaviors, functional

    def __post_init__(self):
        if self.brel.carrier != self.behaviors:
            raise ValidationError("behaviour preorder carrier mismatch")
        if self.eval.cod != self.behaviors:
            raise ValidationError("evaluation must land in the behaviour set")
        if not classify(self.eval).functional:
            raise ValidationError("evaluation must be functional")


@dataclass(frozen=True)
class TccInstance:
    name: str
    targets: FinSet
    contexts: FinSet
    behavior: BehaviorStructure
    intrinsic: bool = False

    def __post_init__(self):
        if self.behavior.eval.dom != self.tc:
            raise ValidationError(
                f"evaluation domain must be targets x contexts of {self.name!r}"
            )

    @property
    def tc(self) -> FinSet:
        return product(self.targets, self.contexts)

    @property
    def eval(self) -> FinRel:
        return self.behavior.eval

    @property
    def brel(self) -> Preorder:
        return self.behavior.brel

    @property
    def brel_is_equality(self) -> bool:
        return self.brel.is_equality


def behavior_of(f: FinRel, inst: TccInstance) -> FinRel:
    """Evaluation after f; the thing imitation actually compares."""
    if f.cod != inst.tc:
        raise TypeMismatchError(
            f"expected a morphism into {inst.tc.id}, got one into {f.cod.id}"
        )
    return compose(inst.eval, f)


def ambient_imitates(f: FinRel, g: FinRel, inst: TccInstance) -> bool:
    """f dominates g in the instance's ambient relation."""
    if f.dom != g.dom:
        raise TypeMismatchError("ambient comparison needs equal domains")
    return imitates(behavior_of(f, inst), behavior_of(g, inst), inst.brel)


def ambient_witnesses(f: FinRel, g: FinRel, inst: TccInstance):
    return imitation_witnesses(behavior_of(f, inst), behavior_of(g, inst), inst.brel)


def scalar_dominance_check(w: FinRel, f: FinRel, inst: TccInstance) -> bool:
    """Attaching any scalar can only lose behaviour: f dominates w x f."""
    if w.dom != UNIT or w.cod != UNIT:
        raise TypeMismatchError("w must be an endomorphism of the unit set")
    return ambient_imitates(f, tensor(w, f), inst)


def both_scalars() -> tuple[FinRel, FinRel]:
    return scalar(True), scalar(False)


def intrinsify(inst: TccInstance) -> TccInstance:
    """Make behaviours the target-context pairs themselves.

    The new preorder relates two pairs when the evaluation of the first,
    as a state, imitates the evaluation of the second under the old
    preorder.  Evaluation becomes the identity, and the ambient relation
    is unchanged on all morphisms.
    """
    tc = inst.tc
    ev = inst.eval.mat  # rows are states' behaviour value sets
    L = inst.brel.mat
    n = tc.size
    up = (ev.astype(np.uint8) @ L.astype(np.uint8)).astype(bool)
    down = (ev.astype(np.uint8) @ L.T.astype(np.uint8)).astype(bool)
    defined = ev.any(axis=1)
    mat = np.zeros((n, n), dtype=bool)
    for i in range(n):
        # row i imitates row j: j's values covered upward by i's, and
        # i's values covered downward by j's; vacuous when j is undefined
        enh = ~(ev & ~up[i]).any(axis=1)
        deg = ~(ev[i] & ~down).any(axis=1)
        mat[i] = (enh & deg) | ~defined
    new_brel = Preorder(tc, mat)
    behavior = BehaviorStructure(tc, new_brel, identity(tc))
    return TccInstance(
        name=inst.name + "_intr",
        targets=inst.targets,
        contexts=inst.contexts,
        behavior=behavior,
        intrinsic=True,
    )


def check_instance_axioms(inst: TccInstance, rng, samples: int = 50) -> list[str]:
    """Sampled checks of the two instance axioms.

    Restriction implies ambient domination, for arbitrary relations; and
    ambient domination is stable under precomposition with single-valued
    maps.  Returns human-readable failure notes.

    Stability is only claimed for single-valued precomposition because
    the relational version is false: when g is undefined somewhere f is
    defined, a multivalued map can merge such a row into g's domain, and
    the merged row then carries values of f with nothing under them on
    the g side.  Two-element chain, f the identity on both pairs, g its
    restriction to the top pair, h the full state: f dominates g, yet
    f after h produces the bottom value where g after h knows only the
    top.  Single-valued maps cannot merge rows, and every precomposition
    this library relies on (reduction pullbacks, dressing, whiskering by
    functional states) is single-valued.
    """
    from .search import random_functional

    failures: list[str] = []
    tc = inst.tc
    doms = [UNIT, inst.contexts, tc]
    for _ in range(samples):
        a = doms[rng.randrange(len(doms))]
        g = FinRel(a, tc, rng_matrix(rng, a.size, tc.size))
        f = extend_randomly(g, rng)
        if not ambient_imitates(f, g, inst):
            failures.append(
                "restriction does not imply ambient domination for "
                f"{a.id} -> {tc.id}"
            )
            continue
        z = doms[rng.randrange(len(doms))]
        h = random_functional(rng, z, a)
        if not ambient_imitates(compose(f, h), compose(g, h), inst):
            failures.append(
                "ambient relation not stable under single-valued precomposition"
            )
    return failures


def rng_matrix(rng, rows: int, cols: int, density: float = 0.3) -> np.ndarray:
    mat = np.zeros((rows, cols), dtype=bool)
    for i in range(rows):
        for j in range(cols):
            if rng.random() < density:
                mat[i, j] = True
    return mat


def extend_randomly(g: FinRel, rng, density: float = 0.3) -> FinRel:
    """A relation that restricts to g: same rows where g is defined,
    arbitrary rows elsewhere."""
    mat = g.mat.copy()
    empty_rows = ~mat.any(axis=1)
    for i in np.nonzero(empty_rows)[0]:
        for j in range(mat.shape[1]):
            if rng.random() < density:
                mat[i, j] = True
    f = FinRel(g.dom, g.cod, mat)
    assert restricts_to(f, g)
    return f


def relabel_preorder(p: Preorder, new_carrier: FinSet, mapping: dict[str, str]) -> Preorder:
    """Transport a preorder along a bijection of carriers (used by functors)."""
    n = new_carrier.size
    if p.carrier.size != n:
        raise TypeMismatchError("relabel needs carriers of equal size")
    perm = [new_carrier.index(mapping[e]) for e in p.carrier.elements]
    mat = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(n):
            if p.mat[i, j]:
                mat[perm[i], perm[j]] = True
    return Preorder(new_carrier, mat)


def with_enlarged_brel(inst: TccInstance, extra_edges) -> TccInstance:
    """Same instance with additional behaviour dominations (then closed)."""
    from .order import closure

    base = inst.brel.edges()
    new = closure(inst.behavior.behaviors, tuple(base) + tuple(extra_edges))
    if not np.array_equal(new.mat | inst.brel.mat, new.mat):
        raise ValidationError("enlargement must contain the original preorder")
    behavior = replace(inst.behavior, brel=new)
    return replace(inst, name=inst.name + "_enlarged", behavior=behavior)
