"""Ready-made instances: cofinal subsets, metric density, lookup machines.

Each builder returns real objects, not fixtures: the instance, the
simulator the construction is about, and where relevant a direct
order-theoretic check (cofinality, denseness) that universality search
must agree with.  The named presets at the bottom are what the command
line exposes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct

import numpy as np

from ..diagonal import Parametrization, cantor_instance
from ..errors import ValidationError
from ..finrel import (
    FinRel,
    FinSet,
    UNIT,
    compose,
    delete_rel,
    identity,
    product,
    tensor,
)
from ..order import Preorder, chain_preorder, closure, equality_preorder
from ..simulator import Simulator, make_simulator, trivial_simulator
from ..tcc import BehaviorStructure, TccInstance
from .spin import build_spin_tcc, field_system, reduced_spectrum_size


@dataclass
class PresetBundle:
    """Everything a command needs to talk about one named scenario."""

    name: str
    inst: TccInstance
    simulators: dict
    phis: dict = field(default_factory=dict)
    parametrization: Parametrization | None = None
    notes: tuple[str, ...] = ()


def cofinal_instance(
    p: Preorder, members, name: str = "cofinal"
) -> tuple[TccInstance, Simulator]:
    """Targets are the carrier itself, observed as-is; the simulator is
    the inclusion of the chosen members."""
    x = p.carrier
    members = tuple(members)
    if len(set(members)) != len(members):
        raise ValidationError("member list repeats an element")
    for m in members:
        x.index(m)
    inst = TccInstance(
        name=name,
        targets=x,
        contexts=UNIT,
        behavior=BehaviorStructure(x, p, identity(x)),
        intrinsic=True,
    )
    prog = FinSet(f"{name}.P", members)
    incl = FinRel.from_pairs(prog, x, [(m, m) for m in members])
    sim = make_simulator(inst, incl, delete_rel(prog))
    return inst, sim


def cofinal_check(p: Preorder, members) -> bool:
    """Directly: does every element sit below some member?"""
    return all(
        any(p.dominates(m, x) for m in members) for x in p.carrier.elements
    )


def metric_balls(
    points, dist: dict, radii
) -> dict[tuple[str, Fraction], frozenset]:
    """Open balls of a finite metric, keyed by center and radius."""
    points = tuple(points)
    radii = tuple(Fraction(r) for r in radii)
    if any(r <= 0 for r in radii):
        raise ValidationError("radii must be positive")

    def d(a, b):
        if a == b:
            return Fraction(0)
        val = dist.get((a, b), dist.get((b, a)))
        if val is None:
            raise ValidationError(f"no distance given for {a!r}, {b!r}")
        return Fraction(val)

    for a in points:
        for b in points:
            if d(a, b) != d(b, a) or (d(a, b) == 0) != (a == b):
                raise ValidationError("distances must be a symmetric metric")
            for mid in points:
                if d(a, b) > d(a, mid) + d(mid, b):
                    raise ValidationError("triangle inequality fails")
    return {
        (x, r): frozenset(y for y in points if d(x, y) < r)
        for x in points
        for r in radii
    }


def dense_metric_instance(
    points, dist: dict, subset, radii, name: str = "dense"
) -> tuple[TccInstance, Simulator]:
    """Targets are (center, radius) pairs evaluated to their open balls,
    ordered by inclusion; the simulator restricts centers to the subset.

    Universality of that restriction says every ball contains a ball
    centered in the subset, the finite shadow of a dense subset.
    """
    points = tuple(points)
    subset = tuple(subset)
    radii = tuple(Fraction(r) for r in radii)
    for m in subset:
        if m not in points:
            raise ValidationError(f"subset member {m!r} is not a point")
    balls = metric_balls(points, dist, radii)

    def t_label(x, r):
        return f"{x}@{r}"

    t = FinSet(f"{name}.T", tuple(t_label(x, r) for x in points for r in radii))
    distinct = []
    seen = set()
    for x in points:
        for r in radii:
            bs = balls[(x, r)]
            if bs not in seen:
                seen.add(bs)
                distinct.append(bs)
    distinct.sort(key=lambda bs: (len(bs), sorted(bs)))

    def b_label(bs):
        return "{" + ",".join(sorted(bs, key=points.index)) + "}"

    b = FinSet(f"{name}.B", tuple(b_label(bs) for bs in distinct))
    mat = np.zeros((b.size, b.size), dtype=bool)
    for i, s1 in enumerate(distinct):
        for j, s2 in enumerate(distinct):
            mat[i, j] = s1 <= s2
    brel = Preorder(b, mat)
    ev = FinRel.from_pairs(
        t,
        b,
        [
            (t_label(x, r), b_label(balls[(x, r)]))
            for x in points
            for r in radii
        ],
    )
    inst = TccInstance(
        name=name,
        targets=t,
        contexts=UNIT,
        behavior=BehaviorStructure(b, brel, ev),
        intrinsic=True,
    )
    prog = FinSet(
        f"{name}.P", tuple(t_label(m, r) for m in subset for r in radii)
    )
    incl = FinRel.from_pairs(prog, t, [(pl, pl) for pl in prog.elements])
    sim = make_simulator(inst, incl, delete_rel(prog))
    return inst, sim


def dense_check(points, dist: dict, subset, radii) -> bool:
    """Directly: does every ball include one centered in the subset?"""
    balls = metric_balls(points, dist, radii)
    radii = tuple(Fraction(r) for r in radii)
    return all(
        any(balls[(m, r2)] <= balls[(x, r)] for m in subset for r2 in radii)
        for x in points
        for r in radii
    )


def lookup_machines(
    c_labels,
    b_labels,
    tables="all",
    brel: Preorder | None = None,
    name: str = "lookup",
) -> tuple[TccInstance, dict]:
    """Targets are partial lookup tables from contexts to behaviors,
    evaluated by lookup; the finite stand-in for machine enumeration.

    There is no halting phenomenon here: a table is undefined at a context
    by construction, not by divergence, which is the main loss of the
    finite analogue.  ``tables`` is either "all" or a mapping from target
    names to {context: behavior} dicts.
    """
    c = FinSet(f"{name}.C", tuple(c_labels))
    b = FinSet(f"{name}.B", tuple(b_labels))
    if tables == "all":
        named = {}
        choices = [None, *b.elements]
        for combo in iproduct(choices, repeat=c.size):
            table = {
                cl: val for cl, val in zip(c.elements, combo) if val is not None
            }
            tag = ",".join(val if val is not None else "-" for val in combo)
            named[f"t[{tag}]"] = table
    else:
        named = {tname: dict(table) for tname, table in tables.items()}
    for tname, table in named.items():
        for cl, bl in table.items():
            c.index(cl)
            b.index(bl)
    t = FinSet(f"{name}.T", tuple(named))
    ev = FinRel.from_pairs(
        product(t, c),
        b,
        [
            (f"({tname},{cl})", bl)
            for tname, table in named.items()
            for cl, bl in table.items()
        ],
    )
    inst = TccInstance(
        name=name,
        targets=t,
        contexts=c,
        behavior=BehaviorStructure(b, brel or equality_preorder(b), ev),
        intrinsic=True,
    )
    return inst, named


def lookup_full_instance(name: str = "lookup-full") -> TccInstance:
    """Every partial table over two contexts and two behavior values."""
    inst, _ = lookup_machines(("c0", "c1"), ("0", "1"), "all", name=name)
    return inst


def lookup_interpreter_demo(name: str = "lookup-interp") -> PresetBundle:
    """A finite interpreter: one target that runs any of the four data
    tables when the context carries a program code alongside the data.

    Contexts split into two data points and eight code-data pairs; the
    interpreter table reads only the pairs, the four data tables read only
    the data.  Routing the context through the pairing makes the
    singleton simulator over the interpreter universal.
    """
    data = ("d0", "d1")
    codes = ("p00", "p01", "p10", "p11")
    pair = {(p, d): f"{p}.{d}" for p in codes for d in data}
    c_labels = data + tuple(pair[(p, d)] for p in codes for d in data)
    value = {"p00": ("0", "0"), "p01": ("0", "1"), "p10": ("1", "0"), "p11": ("1", "1")}
    tables = {
        f"t{code[1:]}": {"d0": value[code][0], "d1": value[code][1]}
        for code in codes
    }
    tables["interp"] = {
        pair[(p, d)]: value[p][data.index(d)] for p in codes for d in data
    }
    inst, named = lookup_machines(c_labels, ("0", "1"), tables, name=name)
    t, c = inst.targets, inst.contexts
    prog = FinSet(f"{name}.P", ("pu",) + codes)
    compiler = FinRel.from_pairs(prog, t, [(pl, "interp") for pl in prog.elements])
    sc_pairs = [(f"(pu,{cl})", cl) for cl in c.elements]
    for p in codes:
        for d in data:
            sc_pairs.append((f"({p},{d})", pair[(p, d)]))
    sc = FinRel.from_pairs(product(prog, c), c, sc_pairs)
    sim = make_simulator(inst, compiler, sc)
    return PresetBundle(
        name=name,
        inst=inst,
        simulators={"interp": sim, "trivial": trivial_simulator(inst)},
        notes=("the interpreter's own rows are routed through the identity code",),
    )


def lookup_lawvere_demo(name: str = "lawvere") -> PresetBundle:
    """Three constant tables over a three-chain of behaviors, which is
    also the context set; naming an element realizes its constant map.

    The chain order makes the constant-top row imitate every map, so the
    evaluation, read as context-indexed programs, is complete, and the
    diagonal construction must produce a quasi-fixed point for every
    endomorphism of behaviors.
    """
    chain = ("b0", "b1", "b2")
    tables = {f"const_{x}": {cl: x for cl in chain} for x in chain}
    inst, _ = lookup_machines(
        chain, chain, tables, brel=chain_preorder(FinSet(f"{name}.B", chain)), name=name
    )
    naming = FinRel.from_pairs(
        inst.contexts,
        inst.targets,
        [(x, f"const_{x}") for x in chain],
    )
    par = Parametrization(
        inst,
        inst.contexts,
        compose(inst.eval, tensor(naming, identity(inst.contexts))),
    )
    return PresetBundle(
        name=name,
        inst=inst,
        simulators={"trivial": trivial_simulator(inst)},
        parametrization=par,
        notes=("behavior order is the chain, not equality: the top row covers all",),
    )


def lookup_parsimony_demo(name: str = "parsimony") -> PresetBundle:
    """Three tables (an interpreter and two constants) and the singleton
    simulator that routes contexts to make the interpreter play each."""
    tables = {
        "u": {"kx": "x", "ky": "y"},
        "cx": {"kx": "x", "ky": "x"},
        "cy": {"kx": "y", "ky": "y"},
    }
    inst, _ = lookup_machines(("kx", "ky"), ("x", "y"), tables, name=name)
    t, c = inst.targets, inst.contexts
    prog = FinSet(f"{name}.P", ("pu", "px", "py"))
    compiler = FinRel.from_pairs(prog, t, [(pl, "u") for pl in prog.elements])
    route = {"pu": None, "px": "kx", "py": "ky"}
    sc = FinRel.from_pairs(
        product(prog, c),
        c,
        [
            (f"({pl},{cl})", route[pl] or cl)
            for pl in prog.elements
            for cl in c.elements
        ],
    )
    sim = make_simulator(inst, compiler, sc)
    return PresetBundle(
        name=name,
        inst=inst,
        simulators={"s_u": sim, "trivial": trivial_simulator(inst)},
    )


def chain_micro(name: str = "chain2") -> PresetBundle:
    """Two targets observed on a two-chain, one context; the simulator
    that always compiles to the top target is universal only because the
    order lets the top imitate the bottom."""
    t = FinSet(f"{name}.T", ("a0", "a1"))
    c = FinSet(f"{name}.C", ("c0",))
    b = FinSet(f"{name}.B", ("lo", "hi"))
    ev = FinRel.from_pairs(
        product(t, c), b, [("(a0,c0)", "lo"), ("(a1,c0)", "hi")]
    )
    inst = TccInstance(
        name=name,
        targets=t,
        contexts=c,
        behavior=BehaviorStructure(b, chain_preorder(b), ev),
        intrinsic=True,
    )
    prog = FinSet(f"{name}.P", ("p",))
    compiler = FinRel.from_pairs(prog, t, [("p", "a1")])
    sc = FinRel.from_pairs(product(prog, c), c, [("(p,c0)", "c0")])
    sim = make_simulator(inst, compiler, sc)
    return PresetBundle(
        name=name,
        inst=inst,
        simulators={"top": sim, "trivial": trivial_simulator(inst)},
    )


def cofinal_demo(name: str = "cofinal-demo") -> PresetBundle:
    """A four-element diamond with its top pair as members."""
    x = FinSet(f"{name}.X", ("bot", "left", "right", "top"))
    p = closure(
        x,
        [("top", "left"), ("top", "right"), ("left", "bot"), ("right", "bot")],
    )
    inst, sim = cofinal_instance(p, ("left", "top"), name=name)
    return PresetBundle(
        name=name,
        inst=inst,
        simulators={"inclusion": sim, "trivial": trivial_simulator(inst)},
    )


def dense_demo(name: str = "dense-demo") -> PresetBundle:
    """Four points on a line; the even ones as the would-be dense subset."""
    points = ("x0", "x1", "x2", "x3")
    dist = {
        (points[i], points[j]): Fraction(abs(i - j))
        for i in range(4)
        for j in range(i + 1, 4)
    }
    inst, sim = dense_metric_instance(
        points, dist, ("x0", "x2"), (Fraction(1), Fraction(2)), name=name
    )
    return PresetBundle(
        name=name,
        inst=inst,
        simulators={"inclusion": sim, "trivial": trivial_simulator(inst)},
    )


def spin_nogo_demo(name: str = "spin-nogo") -> PresetBundle:
    """Six field systems; a simulator whose compiler reaches only two of
    them, so the truncated-spectrum count caps at three against six."""
    st = build_spin_tcc([field_system(k) for k in range(6)], name=name)
    inst = st.inst
    prog = FinSet(f"{name}.P", ("p1", "p2"))
    compiler = FinRel.from_pairs(
        prog, inst.targets, [("p1", "field1"), ("p2", "field2")]
    )
    reachable = {
        "p1": [cl for cl, cfg in st.configs.items() if cfg.complex.name == "G1"],
        "p2": [cl for cl, cfg in st.configs.items() if cfg.complex.name == "G2"],
    }
    sc = FinRel.from_pairs(
        product(prog, inst.contexts),
        inst.contexts,
        [
            (f"({pl},{cl})", target)
            for pl in prog.elements
            for cl in inst.contexts.elements
            for target in reachable[pl]
        ],
    )
    sim = make_simulator(inst, compiler, sc)
    return PresetBundle(
        name=name,
        inst=inst,
        simulators={"small": sim, "trivial": trivial_simulator(inst)},
        phis={"spectrum-size": reduced_spectrum_size(st)},
        notes=(st.deviation,),
    )


def cantor_demo(n: int) -> PresetBundle:
    inst = cantor_instance(n)
    return PresetBundle(
        name=f"cantor-{n}",
        inst=inst,
        simulators={"trivial": trivial_simulator(inst)},
    )


PRESETS = {
    "cofinal-demo": cofinal_demo,
    "dense-demo": dense_demo,
    "lookup-interp": lookup_interpreter_demo,
    "lawvere": lookup_lawvere_demo,
    "parsimony": lookup_parsimony_demo,
    "chain2": chain_micro,
    "spin-nogo": spin_nogo_demo,
    "cantor-1": lambda: cantor_demo(1),
    "cantor-2": lambda: cantor_demo(2),
}


def load_preset(name: str) -> PresetBundle:
    try:
        builder = PRESETS[name]
    except KeyError:
        known = ", ".join(sorted(PRESETS))
        raise ValidationError(f"unknown preset {name!r}; have {known}") from None
    return builder()
