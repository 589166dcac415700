"""Finite sets and relations, with the structure maps used everywhere else.

A ``FinSet`` is an ordered tuple of labels.  A ``FinRel`` is a dense boolean
matrix indexed by a domain and codomain ``FinSet``; entry ``[i, j]`` means
element ``i`` relates to element ``j``.  Composition is boolean matrix
multiplication, tensor is the Kronecker product, so product elements are
tuples flattened in row-major order of the factor indices.

Products are *flat*: the factor list of a product set contains only atomic
sets, and the unit set ``I`` is stripped.  Consequently the tensor is
strictly associative and strictly unital: ``(A * B) * C``, ``A * (B * C)``
and ``A * B * C`` are the same ``FinSet``, and ``A * I = A``.  All
coherence maps are identities and never appear in client code.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache, reduce
from itertools import product as iproduct

import numpy as np

from .errors import TypeMismatchError, UnknownElementError, ValidationError

UNIT_LABEL = "•"

# Diagram cross-checks (classify/domain computed a second way) are skipped
# once their own cost passes this bound; the checks build copy maps with
# dom^3 cells and pay a dom^4 or dom^3*cod^2 multiply, so the bound is on
# that work, not on the input size.  The equalities are theorems here and
# the property suite exercises them exhaustively at small size.
CROSS_CHECK_WORK = 50_000_000


@dataclass(frozen=True)
class FinSet:
    """An ordered finite set of string labels.

    ``factors`` is empty for atomic sets.  For product sets it is the flat
    tuple of atomic factors; ``elements`` are then the row-major tuple
    labels ``(a,b,...)`` and must not be constructed by hand: use
    :func:`product`.
    """

    id: str
    elements: tuple[str, ...]
    factors: tuple["FinSet", ...] = ()

    def __post_init__(self):
        if len(set(self.elements)) != len(self.elements):
            raise ValidationError(f"duplicate labels in set {self.id!r}")
        if self.factors:
            expected = 1
            for f in self.factors:
                if f.factors:
                    raise ValidationError("product factors must be atomic")
                expected *= f.size
            if expected != len(self.elements):
                raise ValidationError(
                    f"product set {self.id!r} has {len(self.elements)} elements, "
                    f"expected {expected}"
                )
        else:
            for e in self.elements:
                if not e or "*" in e or any(c.isspace() for c in e):
                    raise ValidationError(
                        f"label {e!r} in set {self.id!r} contains reserved characters"
                    )

    @property
    def size(self) -> int:
        return len(self.elements)

    def index(self, label: str) -> int:
        try:
            return self.elements.index(label)
        except ValueError:
            raise UnknownElementError(f"{label!r} is not in set {self.id!r}") from None

    @property
    def is_product(self) -> bool:
        return bool(self.factors)

    def __repr__(self):
        return f"FinSet({self.id!r}, {self.size} elements)"


UNIT = FinSet("I", (UNIT_LABEL,))


def _flatten(sets: tuple[FinSet, ...]) -> tuple[FinSet, ...]:
    out: list[FinSet] = []
    for s in sets:
        if s == UNIT:
            continue
        if s.factors:
            out.extend(s.factors)
        else:
            out.append(s)
    return tuple(out)


@lru_cache(maxsize=None)
def _product_cached(factors: tuple[FinSet, ...]) -> FinSet:
    labels = tuple(
        "(" + ",".join(parts) + ")"
        for parts in iproduct(*(f.elements for f in factors))
    )
    pid = "(" + "*".join(f.id for f in factors) + ")"
    return FinSet(pid, labels, factors)


def product(*sets: FinSet) -> FinSet:
    """Tensor product of sets: flat, unit-stripped, row-major tuple labels."""
    factors = _flatten(tuple(sets))
    if not factors:
        return UNIT
    if len(factors) == 1:
        return factors[0]
    return _product_cached(factors)


def _bool_mm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (a.astype(np.uint8) @ b.astype(np.uint8)).astype(bool)


class FinRel:
    """A relation between two finite sets, stored as a dense boolean matrix."""

    __slots__ = ("dom", "cod", "mat")

    def __init__(self, dom: FinSet, cod: FinSet, mat):
        arr = np.array(mat, dtype=bool)
        if arr.shape != (dom.size, cod.size):
            raise ValidationError(
                f"matrix shape {arr.shape} does not match "
                f"{dom.id} -> {cod.id} ({dom.size}x{cod.size})"
            )
        arr.flags.writeable = False
        self.dom = dom
        self.cod = cod
        self.mat = arr

    @classmethod
    def from_pairs(cls, dom: FinSet, cod: FinSet, pairs) -> "FinRel":
        mat = np.zeros((dom.size, cod.size), dtype=bool)
        for a, x in pairs:
            mat[dom.index(a), cod.index(x)] = True
        return cls(dom, cod, mat)

    @classmethod
    def empty(cls, dom: FinSet, cod: FinSet) -> "FinRel":
        return cls(dom, cod, np.zeros((dom.size, cod.size), dtype=bool))

    @classmethod
    def full(cls, dom: FinSet, cod: FinSet) -> "FinRel":
        return cls(dom, cod, np.ones((dom.size, cod.size), dtype=bool))

    def pairs(self) -> tuple[tuple[str, str], ...]:
        rows, cols = np.nonzero(self.mat)
        return tuple(
            (self.dom.elements[i], self.cod.elements[j]) for i, j in zip(rows, cols)
        )

    def image(self, label: str) -> tuple[str, ...]:
        row = self.mat[self.dom.index(label)]
        return tuple(self.cod.elements[j] for j in np.nonzero(row)[0])

    def __eq__(self, other):
        if not isinstance(other, FinRel):
            return NotImplemented
        return (
            self.dom == other.dom
            and self.cod == other.cod
            and np.array_equal(self.mat, other.mat)
        )

    def __hash__(self):
        return hash((self.dom, self.cod, self.mat.tobytes()))

    def __repr__(self):
        return f"FinRel({self.dom.id} -> {self.cod.id}, {int(self.mat.sum())} pairs)"


def compose(g: FinRel, f: FinRel) -> FinRel:
    """``g after f``: pairs (a, y) with some x in both f(a) and g^-1(y)."""
    if f.cod != g.dom:
        raise TypeMismatchError(
            f"cannot compose: {f.dom.id} -> {f.cod.id} then {g.dom.id} -> {g.cod.id}"
        )
    return FinRel(f.dom, g.cod, _bool_mm(f.mat, g.mat))


def pipeline(*fs: FinRel) -> FinRel:
    """Compose left to right: pipeline(f, g, h) = h after g after f."""
    return reduce(lambda acc, nxt: compose(nxt, acc), fs)


def tensor(*fs: FinRel) -> FinRel:
    """Parallel composition; the matrix is the iterated Kronecker product."""
    if not fs:
        return identity(UNIT)
    mat = fs[0].mat.astype(np.uint8)
    for f in fs[1:]:
        mat = np.kron(mat, f.mat.astype(np.uint8))
    dom = product(*(f.dom for f in fs))
    cod = product(*(f.cod for f in fs))
    return FinRel(dom, cod, mat.astype(bool))


def identity(a: FinSet) -> FinRel:
    return FinRel(a, a, np.eye(a.size, dtype=bool))


def copy_rel(a: FinSet) -> FinRel:
    """The duplication map a |-> (a, a)."""
    aa = product(a, a)
    mat = np.zeros((a.size, aa.size), dtype=bool)
    for i in range(a.size):
        mat[i, i * a.size + i] = True
    return FinRel(a, aa, mat)


def delete_rel(a: FinSet) -> FinRel:
    """The total map into the unit set."""
    return FinRel(a, UNIT, np.ones((a.size, 1), dtype=bool))


def swap_rel(a: FinSet, b: FinSet) -> FinRel:
    ab, ba = product(a, b), product(b, a)
    mat = np.zeros((ab.size, ba.size), dtype=bool)
    for i in range(a.size):
        for j in range(b.size):
            mat[i * b.size + j, j * a.size + i] = True
    return FinRel(ab, ba, mat)


def structural(kind: str, a: FinSet, b: FinSet | None = None) -> FinRel:
    """Dispatch for the four structure maps: copy, delete, swap, identity."""
    if kind == "copy":
        return copy_rel(a)
    if kind == "delete":
        return delete_rel(a)
    if kind == "identity":
        return identity(a)
    if kind == "swap":
        if b is None:
            raise ValidationError("swap needs two sets")
        return swap_rel(a, b)
    raise ValidationError(f"unknown structural map {kind!r}")


def state(a: FinSet, label: str) -> FinRel:
    """The singleton state I -> a picking out one element."""
    mat = np.zeros((1, a.size), dtype=bool)
    mat[0, a.index(label)] = True
    return FinRel(UNIT, a, mat)


def empty_state(a: FinSet) -> FinRel:
    return FinRel.empty(UNIT, a)


def scalar(defined: bool) -> FinRel:
    """One of the two endomorphisms of the unit set."""
    return identity(UNIT) if defined else FinRel.empty(UNIT, UNIT)


def domain(f: FinRel) -> FinRel:
    """Partial identity on the elements where f is defined.

    Computed directly from the row support; below the size guard the
    string-diagram formula (copy, apply f on one leg, delete) is evaluated
    too and asserted equal.
    """
    defined = f.mat.any(axis=1)
    mat = np.zeros((f.dom.size, f.dom.size), dtype=bool)
    np.fill_diagonal(mat, defined)
    direct = FinRel(f.dom, f.dom, mat)
    if f.dom.size**4 <= CROSS_CHECK_WORK:
        via_diagram = pipeline(
            copy_rel(f.dom),
            tensor(identity(f.dom), compose(delete_rel(f.cod), f)),
        )
        assert via_diagram == direct, "domain diagram law violated"
    return direct


@dataclass(frozen=True)
class MorphismClass:
    functional: bool
    total: bool
    normalized: bool
    deterministic: bool


def classify(f: FinRel) -> MorphismClass:
    """Row-counting classification, cross-checked against the diagram laws."""
    sums = f.mat.sum(axis=1)
    functional = bool((sums <= 1).all())
    total = bool((sums >= 1).all())
    normalized = compose(f, domain(f)) == f
    assert normalized, "relations are always normalized here"
    if f.dom.size**3 * f.cod.size**2 <= CROSS_CHECK_WORK:
        dup_then = compose(copy_rel(f.cod), f)
        then_dup = compose(tensor(f, f), copy_rel(f.dom))
        assert functional == (dup_then == then_dup), "functional diagram law disagrees"
        assert total == (compose(delete_rel(f.cod), f) == delete_rel(f.dom)), (
            "totality diagram law disagrees"
        )
    return MorphismClass(functional, total, normalized, functional and total)


def restricts_to(f: FinRel, g: FinRel) -> bool:
    """True when f agrees with g on g's domain of definition (f extends g)."""
    if f.dom != g.dom or f.cod != g.cod:
        raise TypeMismatchError("restriction comparison needs equal types")
    return compose(f, domain(g)) == g


def support(f: FinRel, check: bool = True) -> tuple[FinSet, FinRel]:
    """The subset of the codomain hit by f, with its inclusion map.

    With ``check`` on, the defining factorization property is sampled: maps
    out of the codomain agree after f exactly when they agree after the
    inclusion.
    """
    mask = f.mat.any(axis=0)
    labels = tuple(e for e, m in zip(f.cod.elements, mask) if m)
    bits = "".join("1" if m else "0" for m in mask)
    sub = FinSet(f"supp_{f.cod.id}_{bits}", labels)
    incl = FinRel.from_pairs(sub, f.cod, [(e, e) for e in labels])
    if check and f.cod.size <= 64:
        rng = np.random.default_rng(0)
        y = FinSet("_supp_probe", ("y0", "y1"))
        for _ in range(3):
            h = FinRel(f.cod, y, rng.random((f.cod.size, 2)) < 0.5)
            h2_mat = h.mat.copy()
            # agree on the support, arbitrary elsewhere
            off = ~mask
            h2_mat[off] = rng.random((int(off.sum()), 2)) < 0.5
            h2 = FinRel(f.cod, y, h2_mat)
            same_after_f = compose(h, f) == compose(h2, f)
            same_after_incl = compose(h, incl) == compose(h2, incl)
            assert same_after_f == same_after_incl, "support factorization violated"
    return sub, incl


def canonical_text(f: FinRel) -> str:
    """Stable one-line rendering used for hashing and witness keys."""
    pair_text = " ".join(f"{a}->{x}" for a, x in f.pairs())
    return f"{f.dom.id}|{f.cod.id}|{pair_text}"
