"""Preorders on finite carriers and the maps between subsets they induce.

The matrix convention throughout: ``mat[i, j]`` is true when element ``i``
is at or above element ``j`` (row dominates column).

Three notions build on one another:

* an *enhancement* from U to V sends every element of U to something in V
  at or above it (moving up);
* a *degradation* from V to U sends every element of V to something in U
  it sits above (moving down is allowed, never up);
* ``imitates(nu, mu)`` holds when, argument by argument on mu's domain of
  definition, there is an enhancement from mu's values into nu's and a
  degradation from nu's values back into mu's.

With the discrete (equality) preorder this collapses to "nu extends mu",
see :func:`univsim.finrel.restricts_to`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TypeMismatchError, ValidationError
from .finrel import FinRel, FinSet, _bool_mm


@dataclass(frozen=True)
class Preorder:
    carrier: FinSet
    mat: np.ndarray  # mat[i, j]: element i dominates element j

    def __post_init__(self):
        m = np.array(self.mat, dtype=bool)
        if m.shape != (self.carrier.size, self.carrier.size):
            raise ValidationError("preorder matrix shape does not match carrier")
        if not np.diagonal(m).all():
            raise ValidationError("preorder must be reflexive")
        if not np.array_equal(_bool_mm(m, m) | m, m):
            raise ValidationError("preorder must be transitive")
        m.flags.writeable = False
        object.__setattr__(self, "mat", m)

    def __eq__(self, other):
        if not isinstance(other, Preorder):
            return NotImplemented
        return self.carrier == other.carrier and np.array_equal(self.mat, other.mat)

    def __hash__(self):
        return hash((self.carrier, self.mat.tobytes()))

    @property
    def is_equality(self) -> bool:
        return bool(np.array_equal(self.mat, np.eye(self.carrier.size, dtype=bool)))

    def dominates(self, hi: str, lo: str) -> bool:
        return bool(self.mat[self.carrier.index(hi), self.carrier.index(lo)])

    def edges(self) -> tuple[tuple[str, str], ...]:
        """Non-reflexive related pairs (hi, lo), row-major."""
        out = []
        for i, hi in enumerate(self.carrier.elements):
            for j, lo in enumerate(self.carrier.elements):
                if i != j and self.mat[i, j]:
                    out.append((hi, lo))
        return tuple(out)


def closure(carrier: FinSet, edges) -> Preorder:
    """Reflexive-transitive closure of generating pairs (hi, lo)."""
    n = carrier.size
    mat = np.eye(n, dtype=bool)
    for hi, lo in edges:
        mat[carrier.index(hi), carrier.index(lo)] = True
    while True:
        nxt = mat | _bool_mm(mat, mat)
        if np.array_equal(nxt, mat):
            break
        mat = nxt
    return Preorder(carrier, mat)


def equality_preorder(carrier: FinSet) -> Preorder:
    return Preorder(carrier, np.eye(carrier.size, dtype=bool))


def chain_preorder(carrier: FinSet) -> Preorder:
    """Total order with later elements on top of earlier ones."""
    n = carrier.size
    return Preorder(carrier, np.tril(np.ones((n, n), dtype=bool)))


@dataclass(frozen=True)
class MapWitness:
    """A concrete enhancement or degradation, as an assignment list."""

    kind: str  # "enhancement" | "degradation"
    assignment: tuple[tuple[str, str], ...]

    def validate(self, order: Preorder) -> bool:
        for src, tgt in self.assignment:
            if self.kind == "enhancement":
                if not order.dominates(tgt, src):
                    return False
            elif self.kind == "degradation":
                if not order.dominates(src, tgt):
                    return False
            else:
                raise ValidationError(f"unknown witness kind {self.kind!r}")
        return True


def _mask(order: Preorder, subset) -> np.ndarray:
    mask = np.zeros(order.carrier.size, dtype=bool)
    for label in subset:
        mask[order.carrier.index(label)] = True
    return mask


def exists_map(kind: str, src_subset, tgt_subset, order: Preorder) -> MapWitness | None:
    """Search for an enhancement or degradation between two subsets.

    Enhancement src -> tgt: every source element gets a target at or above
    it.  Degradation src -> tgt: every source element gets a target it
    dominates.  Returns the witness assigning each source the
    lexicographically first valid target, or None.
    """
    if kind not in ("enhancement", "degradation"):
        raise ValidationError(f"unknown map kind {kind!r}")
    src = _mask(order, src_subset)
    tgt = _mask(order, tgt_subset)
    elems = order.carrier.elements
    assignment = []
    for i in np.nonzero(src)[0]:
        if kind == "enhancement":
            ok = tgt & order.mat[:, i]  # targets dominating source i
        else:
            ok = tgt & order.mat[i, :]  # targets dominated by source i
        hits = np.nonzero(ok)[0]
        if hits.size == 0:
            return None
        assignment.append((elems[i], elems[hits[0]]))
    return MapWitness(kind, tuple(assignment))


def _imitation_rows(nu: FinRel, mu: FinRel, order: Preorder):
    """Per-row booleans (enhancement ok, degradation ok, mu defined)."""
    L = order.mat
    mu_defined = mu.mat.any(axis=1)
    # enhancement mu(a) -> nu(a): every u in mu(a) lies below some v in nu(a)
    covered_up = _bool_mm(nu.mat, L)
    enh_ok = ~(mu.mat & ~covered_up).any(axis=1)
    # degradation nu(a) -> mu(a): every v in nu(a) lies above some u in mu(a)
    covered_down = _bool_mm(mu.mat, L.T)
    deg_ok = ~(nu.mat & ~covered_down).any(axis=1)
    return enh_ok, deg_ok, mu_defined


def imitates(nu: FinRel, mu: FinRel, order: Preorder) -> bool:
    """Argument-wise two-sided domination of mu by nu over mu's domain."""
    if nu.cod != order.carrier or mu.cod != order.carrier:
        raise TypeMismatchError("imitation needs values in the order's carrier")
    if nu.dom != mu.dom:
        raise TypeMismatchError("imitation compares maps with equal domains")
    enh_ok, deg_ok, mu_defined = _imitation_rows(nu, mu, order)
    return bool((enh_ok & deg_ok)[mu_defined].all())


def imitation_witnesses(nu: FinRel, mu: FinRel, order: Preorder):
    """Per-argument (enhancement, degradation) witness pairs, or None.

    Used to put checkable certificates into reports; `imitates` is the
    fast boolean version of the same computation.
    """
    if not imitates(nu, mu, order):
        return None
    out = {}
    for i, a in enumerate(nu.dom.elements):
        mu_vals = [mu.cod.elements[j] for j in np.nonzero(mu.mat[i])[0]]
        if not mu_vals:
            continue
        nu_vals = [nu.cod.elements[j] for j in np.nonzero(nu.mat[i])[0]]
        enh = exists_map("enhancement", mu_vals, nu_vals, order)
        deg = exists_map("degradation", nu_vals, mu_vals, order)
        assert enh is not None and deg is not None
        out[a] = (enh, deg)
    return out
