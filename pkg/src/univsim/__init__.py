"""Finite relational simulation instances and their decision procedures.

The ambient category is finite sets with relations as morphisms, built
on dense boolean matrices (:mod:`univsim.finrel`).  On top of it sit
preordered behavior comparison (:mod:`univsim.order`), evaluation
instances (:mod:`univsim.tcc`), simulators and their reductions
(:mod:`univsim.simulator`), the category of simulators
(:mod:`univsim.simcat`), diagonal and counting arguments
(:mod:`univsim.diagonal`), maps between instances
(:mod:`univsim.tcfunctor`), worked instances
(:mod:`univsim.instances`), and the document language plus command
line front end (:mod:`univsim.dsl`, :mod:`univsim.cli`).
"""

from .errors import (
    BudgetExceededError,
    TypeMismatchError,
    UnknownElementError,
    UnivsimError,
    ValidationError,
)
from .finrel import (
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
from .order import Preorder, chain_preorder, closure, equality_preorder, imitates
from .search import SearchBudget
from .simcat import Processing, SimMorphism, decide_parsimony
from .simulator import (
    Reduction,
    Simulator,
    check_reduction,
    find_universality_witness,
    make_simulator,
    nogo_check,
    trivial_simulator,
)
from .tcc import BehaviorStructure, TccInstance, intrinsify
from .tcfunctor import TcFunctor, check_tc_functor, map_through
from .diagonal import (
    Parametrization,
    cantor_report,
    is_complete_parametrization,
    lawvere_quasi_fixed_point,
)
from .report import Report, emit, instance_fingerprint, reverify

__version__ = "0.1.0"

__all__ = [
    "BehaviorStructure",
    "BudgetExceededError",
    "FinRel",
    "FinSet",
    "Parametrization",
    "Preorder",
    "Processing",
    "Reduction",
    "Report",
    "SearchBudget",
    "SimMorphism",
    "Simulator",
    "TccInstance",
    "TcFunctor",
    "TypeMismatchError",
    "UNIT",
    "UnivsimError",
    "UnknownElementError",
    "ValidationError",
    "cantor_report",
    "chain_preorder",
    "check_reduction",
    "check_tc_functor",
    "closure",
    "compose",
    "copy_rel",
    "decide_parsimony",
    "delete_rel",
    "emit",
    "equality_preorder",
    "find_universality_witness",
    "identity",
    "imitates",
    "instance_fingerprint",
    "intrinsify",
    "is_complete_parametrization",
    "lawvere_quasi_fixed_point",
    "make_simulator",
    "map_through",
    "nogo_check",
    "pipeline",
    "product",
    "reverify",
    "swap_rel",
    "tensor",
    "trivial_simulator",
]
