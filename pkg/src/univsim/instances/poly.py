"""Polynomial-bound certificates for relations between measured sets.

A certificate pairs size measures on a relation's two ends with a
polynomial whose coefficients are nonnegative rationals, hence
nondecreasing on nonnegative sizes.  Checking it on a finite relation
means checking every related pair, which certifies membership in the
finite restriction of the polynomially-bounded relational category.
Asymptotics are not expressible here: a finite check can never separate
polynomial from exponential growth, it only pins the declared bound on
the elements that exist.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from ..errors import ValidationError
from ..finrel import FinRel, FinSet
from .spin import SpinTcc, size_measure


@dataclass(frozen=True)
class SizeMeasure:
    """Nonnegative rational sizes for every element of one set."""

    name: str
    values: Mapping[str, Fraction]

    def __call__(self, label: str) -> Fraction:
        if label not in self.values:
            raise ValidationError(f"{self.name} is not defined on {label!r}")
        return self.values[label]


def constant_measure(fs: FinSet, value=0, name: str | None = None) -> SizeMeasure:
    value = Fraction(value)
    if value < 0:
        raise ValidationError("sizes must be nonnegative")
    return SizeMeasure(name or f"{fs.id}-const", {e: value for e in fs.elements})


def spin_size_measure(st: SpinTcc, end: str) -> SizeMeasure:
    """Parameter-count sizes for a spin instance's targets or contexts."""
    if end == "targets":
        values = {
            label: Fraction(size_measure(s.complex, s.q))
            for label, s in st.systems.items()
        }
    elif end == "contexts":
        values = {
            label: Fraction(size_measure(c.complex, c.q))
            for label, c in st.configs.items()
        }
    else:
        raise ValidationError("end is targets or contexts")
    return SizeMeasure(f"{st.inst.name}-{end}", values)


@dataclass(frozen=True)
class PolyCertificate:
    """A nondecreasing polynomial bound between two measured sets.

    coefficients[k] multiplies x^k; all must be nonnegative, which is
    what makes the polynomial monotone where sizes live.
    """

    coefficients: tuple[Fraction, ...]
    dom_measure: SizeMeasure
    cod_measure: SizeMeasure

    def __post_init__(self):
        coeffs = tuple(Fraction(c) for c in self.coefficients)
        if any(c < 0 for c in coeffs):
            raise ValidationError("certificate coefficients must be nonnegative")
        object.__setattr__(self, "coefficients", coeffs)

    def bound(self, x: Fraction) -> Fraction:
        total = Fraction(0)
        for c in reversed(self.coefficients):
            total = total * x + c
        return total


def poly_bound_check(f: FinRel, cert: PolyCertificate) -> bool:
    """Does every related pair satisfy |out| <= p(|in|)?"""
    for a, y in f.pairs():
        if cert.cod_measure(y) > cert.bound(cert.dom_measure(a)):
            return False
    return True


def poly_violations(f: FinRel, cert: PolyCertificate) -> list[tuple[str, str]]:
    """The pairs that break the bound, for reporting."""
    return [
        (a, y)
        for a, y in f.pairs()
        if cert.cod_measure(y) > cert.bound(cert.dom_measure(a))
    ]
