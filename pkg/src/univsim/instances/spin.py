"""Finite spin-system instances: energies, spectra, and their behavior order.

A spin system is a hypergraph whose facets carry exact rational local
energy tables over q spin levels, together with an energy threshold.
Evaluating a system in a configuration of the same hypergraph yields the
triple (energy, spectrum, threshold) when the energy does not exceed the
threshold, and is undefined otherwise.  The behavior order compares such
triples: spectra must agree below the lower threshold, thresholds may
only drop, and the realized energies must coincide below it.

Everything here is exact.  The behavior order demands set equality of
truncated spectra, which floating point would silently break, so all
energies are Fractions end to end.

The instances built here restrict attention to a finite list of systems
and their configurations.  That restriction is deliberate and is recorded
on the built instance: with finitely many Hamiltonians in reach, no
simulator over these targets can be universal for spin systems at large,
which is exactly what the spectrum-size bound demonstrates.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iproduct

import numpy as np

from ..errors import TypeMismatchError, ValidationError
from ..finrel import FinRel, FinSet, product
from ..order import Preorder
from ..search import SearchBudget
from ..simcat import Processing, make_processing
from ..simulator import MonotoneFn
from ..tcc import BehaviorStructure, TccInstance


@dataclass(frozen=True)
class SimplicialComplex:
    """A vertex set with a facet antichain."""

    name: str
    vertices: tuple[str, ...]
    facets: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        if len(set(self.vertices)) != len(self.vertices):
            raise ValidationError(f"duplicate vertices in complex {self.name!r}")
        pos = {v: i for i, v in enumerate(self.vertices)}
        canon = []
        for facet in self.facets:
            if not facet:
                raise ValidationError("facets must be nonempty")
            if len(set(facet)) != len(facet):
                raise ValidationError(f"facet {facet!r} repeats a vertex")
            for v in facet:
                if v not in pos:
                    raise ValidationError(f"facet vertex {v!r} is not in the complex")
            canon.append(tuple(sorted(facet, key=pos.__getitem__)))
        if len(set(canon)) != len(canon):
            raise ValidationError(f"duplicate facets in complex {self.name!r}")
        for e in canon:
            for e2 in canon:
                if e != e2 and set(e) <= set(e2):
                    raise ValidationError(
                        f"facets must form an antichain: {e!r} inside {e2!r}"
                    )
        object.__setattr__(self, "facets", tuple(canon))


@dataclass
class SpinSystem:
    """Local energy tables over a complex, with a threshold."""

    name: str
    complex: SimplicialComplex
    q: int
    terms: dict  # facet -> {spin-value tuple -> Fraction}
    delta: Fraction

    def __post_init__(self):
        if self.q < 1:
            raise ValidationError("spin systems need at least one level")
        self.delta = Fraction(self.delta)
        if set(self.terms) != set(self.complex.facets):
            raise ValidationError(
                f"system {self.name!r} must carry exactly one table per facet"
            )
        fixed = {}
        for facet, table in self.terms.items():
            want = set(iproduct(range(self.q), repeat=len(facet)))
            if set(table) != want:
                raise ValidationError(
                    f"facet {facet!r} table must cover all {self.q}^{len(facet)} rows"
                )
            fixed[facet] = {vals: Fraction(en) for vals, en in table.items()}
        self.terms = fixed

    def same_data(self, other: "SpinSystem") -> bool:
        """Equal up to the name."""
        return (
            self.complex == other.complex
            and self.q == other.q
            and self.terms == other.terms
            and self.delta == other.delta
        )


@dataclass(frozen=True)
class SpinConfiguration:
    """A total assignment of spin values to the vertices of a complex."""

    complex: SimplicialComplex
    q: int
    assignment: tuple[int, ...]  # aligned with complex.vertices

    def __post_init__(self):
        if len(self.assignment) != len(self.complex.vertices):
            raise ValidationError("assignment must cover every vertex")
        if any(not 0 <= v < self.q for v in self.assignment):
            raise ValidationError(f"spin values must lie in 0..{self.q - 1}")

    @property
    def label(self) -> str:
        return f"{self.complex.name}[{''.join(str(v) for v in self.assignment)}]"


@dataclass(frozen=True)
class SpinBehavior:
    """What evaluation reveals: realized energy, spectrum, threshold."""

    energy: Fraction
    spectrum: tuple[Fraction, ...]
    delta: Fraction

    @property
    def label(self) -> str:
        sp = ",".join(str(x) for x in self.spectrum)
        return f"e={self.energy}|sp={{{sp}}}|d={self.delta}"


def energy(system: SpinSystem, config: SpinConfiguration) -> Fraction:
    """Sum of the local terms on the configuration's restrictions."""
    if config.complex != system.complex or config.q != system.q:
        raise TypeMismatchError(
            f"configuration of {config.complex.name!r} does not fit "
            f"system {system.name!r}"
        )
    pos = {v: i for i, v in enumerate(system.complex.vertices)}
    total = Fraction(0)
    for facet in system.complex.facets:
        vals = tuple(config.assignment[pos[v]] for v in facet)
        total += system.terms[facet][vals]
    return total


def enumerate_configurations(
    cx: SimplicialComplex, q: int, budget: SearchBudget | None = None
) -> list[SpinConfiguration]:
    budget = budget or SearchBudget()
    budget.charge(q ** len(cx.vertices), f"configurations of {cx.name!r}")
    return [
        SpinConfiguration(cx, q, vals)
        for vals in iproduct(range(q), repeat=len(cx.vertices))
    ]


def spectrum(
    system: SpinSystem, budget: SearchBudget | None = None
) -> tuple[Fraction, ...]:
    """All realizable energies, sorted; {0} for the empty complex."""
    energies = {
        energy(system, c)
        for c in enumerate_configurations(system.complex, system.q, budget)
    }
    return tuple(sorted(energies))


def reduced(
    system: SpinSystem,
    delta: Fraction | None = None,
    budget: SearchBudget | None = None,
) -> tuple[Fraction, ...]:
    """The spectrum truncated at a threshold (the system's own by default)."""
    cut = system.delta if delta is None else Fraction(delta)
    return tuple(x for x in spectrum(system, budget) if x <= cut)


def size_measure(cx: SimplicialComplex, q: int) -> int:
    """Parameters needed for full local tables: sum of q^|facet|, 0 if none."""
    return sum(q ** len(facet) for facet in cx.facets)


def spin_eval(
    system: SpinSystem,
    config: SpinConfiguration,
    budget: SearchBudget | None = None,
) -> SpinBehavior | None:
    """(energy, spectrum, threshold), or None when outside the threshold
    or on a mismatched complex."""
    if config.complex != system.complex or config.q != system.q:
        return None
    en = energy(system, config)
    if en > system.delta:
        return None
    return SpinBehavior(en, spectrum(system, budget), system.delta)


def spin_brel(b1: SpinBehavior, b2: SpinBehavior) -> bool:
    """Does b1 dominate b2: truncated spectra equal, threshold no lower,
    energies equal and inside the lower threshold."""
    cut = b2.delta
    low1 = tuple(x for x in b1.spectrum if x <= cut)
    low2 = tuple(x for x in b2.spectrum if x <= cut)
    return low1 == low2 and b1.delta >= cut and b1.energy == b2.energy <= cut


def energy_matching(
    t_sys: SpinSystem,
    t_cfg: SpinConfiguration,
    s_sys: SpinSystem,
    s_cfg: SpinConfiguration,
    budget: SearchBudget | None = None,
) -> bool:
    """The pairwise simulation conditions on one (target, source) pair:
    spectra agree below the target threshold, and the two energies either
    coincide or both overshoot it.

    Related to, but stated independently of, the behavior order; callers
    report both without equating them.
    """
    cut = t_sys.delta
    if reduced(t_sys, cut, budget) != reduced(s_sys, cut, budget):
        return False
    e_t = energy(t_sys, t_cfg)
    e_s = energy(s_sys, s_cfg)
    return e_t == e_s or (e_t > cut and e_s > cut)


@dataclass
class SpinTcc:
    """A finite spin instance plus the data its labels stand for."""

    inst: TccInstance
    systems: dict  # target label -> SpinSystem
    configs: dict  # context label -> SpinConfiguration
    behaviors: dict  # behavior label -> SpinBehavior
    deviation: str


FINITE_NOTE = (
    "finite restriction: only the listed systems and their configurations "
    "exist here, while the full theory ranges over all spin systems with "
    "polynomially bounded relations; universality failures below concern "
    "this restriction's ambient relational category"
)


def build_spin_tcc(
    systems: list[SpinSystem],
    name: str = "spin",
    budget: SearchBudget | None = None,
) -> SpinTcc:
    """Assemble the instance whose targets are the given systems and whose
    contexts are every configuration of their complexes."""
    budget = budget or SearchBudget()
    if not systems:
        raise ValidationError("a spin instance needs at least one system")
    names = [s.name for s in systems]
    if len(set(names)) != len(names):
        raise ValidationError("system names must be unique")
    shapes = {}
    for s in systems:
        prior = shapes.get(s.complex.name)
        if prior is None:
            shapes[s.complex.name] = (s.complex, s.q)
        elif prior != (s.complex, s.q):
            raise ValidationError(
                f"complex name {s.complex.name!r} reused with different data"
            )
    configs = []
    for cx, q in shapes.values():
        configs.extend(enumerate_configurations(cx, q, budget))
    budget.charge(len(systems) * len(configs), f"behaviors of {name!r}")

    t = FinSet(f"{name}.T", tuple(names))
    c = FinSet(f"{name}.C", tuple(cfg.label for cfg in configs))
    by_label = dict(zip(names, systems))
    cfg_by_label = {cfg.label: cfg for cfg in configs}

    cells = []  # (target row offset, context column, behavior), row-major
    for ti, s in enumerate(systems):
        for ci, cfg in enumerate(configs):
            beh = spin_eval(s, cfg, budget)
            if beh is not None:
                cells.append((ti * len(configs) + ci, beh))
    realized = []
    seen = set()
    for _, beh in cells:
        if beh.label not in seen:
            seen.add(beh.label)
            realized.append(beh)
    realized.sort(key=lambda x: (x.delta, x.energy, x.spectrum))
    b = FinSet(f"{name}.B", tuple(beh.label for beh in realized))
    beh_by_label = {beh.label: beh for beh in realized}

    ev_mat = np.zeros((t.size * c.size, b.size), dtype=bool)
    for row, beh in cells:
        ev_mat[row, b.index(beh.label)] = True
    ev = FinRel(product(t, c), b, ev_mat)
    mat = np.zeros((b.size, b.size), dtype=bool)
    for i, b1 in enumerate(realized):
        for j, b2 in enumerate(realized):
            mat[i, j] = spin_brel(b1, b2)
    brel = Preorder(b, mat)

    inst = TccInstance(
        name=name,
        targets=t,
        contexts=c,
        behavior=BehaviorStructure(b, brel, ev),
        intrinsic=True,
    )
    return SpinTcc(inst, by_label, cfg_by_label, beh_by_label, FINITE_NOTE)


def field_system(n: int) -> SpinSystem:
    """n independent two-level sites, each costing 1 to excite; the
    threshold admits everything, so the spectrum below it is {0,..,n}."""
    if n < 0:
        raise ValidationError("site count must be nonnegative")
    vertices = tuple(str(i) for i in range(n))
    cx = SimplicialComplex(f"G{n}", vertices, tuple((v,) for v in vertices))
    terms = {(v,): {(0,): Fraction(0), (1,): Fraction(1)} for v in vertices}
    return SpinSystem(f"field{n}", cx, 2, terms, Fraction(n))


def reduced_spectrum_size(st: SpinTcc) -> MonotoneFn:
    """Cardinality of the truncated spectrum, the no-go yardstick; it can
    only grow along verified lax context-reductions."""
    values: dict = {None: 0}
    for label, system in st.systems.items():
        values[label] = len(reduced(system))
    return MonotoneFn("reduced-spectrum-size", values)


def _facet_image(facet, perm, cx: SimplicialComplex):
    pos = {v: i for i, v in enumerate(cx.vertices)}
    return tuple(sorted((perm[v] for v in facet), key=pos.__getitem__))


def check_automorphism(cx: SimplicialComplex, perm: dict) -> None:
    if sorted(perm) != sorted(cx.vertices) or sorted(perm.values()) != sorted(
        cx.vertices
    ):
        raise ValidationError(
            f"permutation must be a bijection on the vertices of {cx.name!r}"
        )
    images = {_facet_image(f, perm, cx) for f in cx.facets}
    if images != set(cx.facets):
        raise ValidationError(
            f"permutation must map facets of {cx.name!r} onto facets"
        )


def permute_config(cfg: SpinConfiguration, perm: dict) -> SpinConfiguration:
    """Relabel sites: the new value at v is the old value at perm^-1(v)."""
    check_automorphism(cfg.complex, perm)
    inv = {w: v for v, w in perm.items()}
    pos = {v: i for i, v in enumerate(cfg.complex.vertices)}
    vals = tuple(cfg.assignment[pos[inv[v]]] for v in cfg.complex.vertices)
    return SpinConfiguration(cfg.complex, cfg.q, vals)


def permute_system(system: SpinSystem, perm: dict) -> SpinSystem:
    """Carry each local table over to the image facet, aligning columns
    with the image's canonical vertex order."""
    cx = system.complex
    check_automorphism(cx, perm)
    pos = {v: i for i, v in enumerate(cx.vertices)}
    new_terms = {}
    for facet, table in system.terms.items():
        image = _facet_image(facet, perm, cx)
        # column i of the image facet reads the value of perm^-1(image[i])
        source_slot = {w: facet.index(v) for v, w in perm.items() if v in facet}
        reorder = tuple(source_slot[w] for w in image)
        new_terms[image] = {
            tuple(vals[k] for k in reorder): en for vals, en in table.items()
        }
    permuted = SpinSystem(system.name, cx, system.q, new_terms, system.delta)
    return permuted


def spin_permutation_processing(
    st: SpinTcc, perms: dict, knobs: FinSet
) -> Processing:
    """The processing that reshuffles spin values by per-complex vertex
    permutations, on both the coupling and the configuration side.

    Each permutation must be an automorphism of its complex, and each
    permuted system must again be one of the instance's targets; energies
    are conjugation-invariant, so the result passes processing checks.
    """
    inst = st.inst
    for cx_name, perm in perms.items():
        hits = [s.complex for s in st.systems.values() if s.complex.name == cx_name]
        if not hits:
            raise ValidationError(f"no target lives on a complex named {cx_name!r}")
        check_automorphism(hits[0], perm)

    def system_image(label: str) -> str:
        system = st.systems[label]
        perm = perms.get(system.complex.name)
        if perm is None:
            return label
        moved = permute_system(system, perm)
        for other_label, other in st.systems.items():
            if other.same_data(moved):
                return other_label
        raise ValidationError(
            f"permuted version of {label!r} is not among the targets"
        )

    def config_image(label: str) -> str:
        cfg = st.configs[label]
        perm = perms.get(cfg.complex.name)
        if perm is None:
            return label
        return permute_config(cfg, perm).label

    t, c = inst.targets, inst.contexts
    qt_mat = np.zeros((knobs.size * t.size, t.size), dtype=bool)
    for ki in range(knobs.size):
        for ti, tl in enumerate(t.elements):
            qt_mat[ki * t.size + ti, t.index(system_image(tl))] = True
    qt = FinRel(product(knobs, t), t, qt_mat)
    qc_mat = np.zeros((knobs.size * t.size * c.size, c.size), dtype=bool)
    for ci, cl in enumerate(c.elements):
        target_col = c.index(config_image(cl))
        for block in range(knobs.size * t.size):
            qc_mat[block * c.size + ci, target_col] = True
    qc = FinRel(product(knobs, t, c), c, qc_mat)
    return make_processing(inst, knobs, qt, qc)
