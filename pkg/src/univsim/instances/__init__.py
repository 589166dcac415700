"""Concrete instances: spin systems, order-theoretic demos, lookup machines."""

from .catalog import (
    PRESETS,
    PresetBundle,
    chain_micro,
    cofinal_check,
    cofinal_instance,
    dense_check,
    dense_metric_instance,
    load_preset,
    lookup_full_instance,
    lookup_interpreter_demo,
    lookup_lawvere_demo,
    lookup_machines,
    lookup_parsimony_demo,
    spin_nogo_demo,
)
from .poly import PolyCertificate, SizeMeasure, constant_measure, poly_bound_check
from .spin import (
    SimplicialComplex,
    SpinBehavior,
    SpinConfiguration,
    SpinSystem,
    SpinTcc,
    build_spin_tcc,
    energy,
    energy_matching,
    field_system,
    reduced,
    reduced_spectrum_size,
    size_measure,
    spectrum,
    spin_brel,
    spin_eval,
    spin_permutation_processing,
)

__all__ = [name for name in dir() if not name.startswith("_")]
