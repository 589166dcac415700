"""Spin systems, polynomial certificates, and the preset catalog."""

from fractions import Fraction

import pytest

from univsim.errors import TypeMismatchError, ValidationError
from univsim.finrel import FinRel, FinSet
from univsim.instances.catalog import (
    PRESETS,
    cofinal_check,
    cofinal_instance,
    dense_check,
    dense_metric_instance,
    load_preset,
    lookup_machines,
    metric_balls,
)
from univsim.instances.poly import (
    PolyCertificate,
    SizeMeasure,
    constant_measure,
    poly_bound_check,
    poly_violations,
    spin_size_measure,
)
from univsim.instances.spin import (
    SimplicialComplex,
    SpinConfiguration,
    SpinSystem,
    build_spin_tcc,
    check_automorphism,
    energy,
    energy_matching,
    field_system,
    permute_config,
    permute_system,
    reduced,
    reduced_spectrum_size,
    size_measure,
    spin_brel,
    spin_eval,
    spin_permutation_processing,
    spectrum,
)
from univsim.order import closure
from univsim.simulator import find_universality_witness
from univsim.tcc import check_instance_axioms


def ising_edge(delta=Fraction(1, 2)):
    cx = SimplicialComplex("E", ("s0", "s1"), (("s0", "s1"),))
    terms = {
        ("s0", "s1"): {
            (0, 0): Fraction(0),
            (0, 1): Fraction(1),
            (1, 0): Fraction(1),
            (1, 1): Fraction(0),
        }
    }
    return SpinSystem("edge", cx, 2, terms, delta)


def test_complex_canonicalizes_and_rejects_nesting():
    cx = SimplicialComplex("X", ("a", "b", "c"), (("c", "b"),))
    assert cx.facets == (("b", "c"),)
    with pytest.raises(ValidationError, match="antichain"):
        SimplicialComplex("X", ("a", "b", "c"), (("a", "b"), ("a",)))
    with pytest.raises(ValidationError):
        SimplicialComplex("X", ("a", "a"), ())


def test_system_wants_complete_tables():
    cx = SimplicialComplex("E", ("s0", "s1"), (("s0", "s1"),))
    with pytest.raises(ValidationError, match="cover"):
        SpinSystem("half", cx, 2, {("s0", "s1"): {(0, 0): 0}}, 1)


def test_field_system_spectrum_counts_excitations():
    # hand count: energy is the number of excited sites
    assert spectrum(field_system(3)) == (
        Fraction(0),
        Fraction(1),
        Fraction(2),
        Fraction(3),
    )
    assert spectrum(field_system(0)) == (Fraction(0),)


def test_ising_edge_energies_by_hand():
    sys = ising_edge()
    cfg = lambda vals: SpinConfiguration(sys.complex, 2, vals)
    assert energy(sys, cfg((0, 0))) == 0
    assert energy(sys, cfg((0, 1))) == 1
    assert energy(sys, cfg((1, 1))) == 0
    assert spectrum(sys) == (Fraction(0), Fraction(1))
    assert reduced(sys) == (Fraction(0),)
    assert reduced(sys, Fraction(2)) == (Fraction(0), Fraction(1))


def test_size_measure_sums_table_rows():
    assert size_measure(field_system(3).complex, 2) == 6
    assert size_measure(ising_edge().complex, 2) == 4
    assert size_measure(SimplicialComplex("0", (), ()), 2) == 0


def test_spin_eval_respects_threshold_and_shape():
    sys = ising_edge()
    inside = SpinConfiguration(sys.complex, 2, (0, 0))
    outside = SpinConfiguration(sys.complex, 2, (0, 1))
    beh = spin_eval(sys, inside)
    assert beh is not None and beh.energy == 0
    assert spin_eval(sys, outside) is None
    other = SpinConfiguration(field_system(1).complex, 2, (0,))
    assert spin_eval(sys, other) is None
    with pytest.raises(TypeMismatchError):
        energy(sys, other)


def test_spin_brel_is_threshold_truncation_dominance():
    sys = ising_edge()
    b_low = spin_eval(sys, SpinConfiguration(sys.complex, 2, (0, 0)))
    assert spin_brel(b_low, b_low)
    rich = spin_eval(
        ising_edge(delta=Fraction(2)), SpinConfiguration(sys.complex, 2, (0, 0))
    )
    # the higher-threshold behavior dominates the truncated one
    assert spin_brel(rich, b_low)
    assert not spin_brel(b_low, rich)


def test_energy_matching_on_matching_and_clashing_pairs():
    f1 = field_system(1)
    c0 = SpinConfiguration(f1.complex, 2, (0,))
    assert energy_matching(f1, c0, f1, c0)
    f2 = field_system(2)
    c00 = SpinConfiguration(f2.complex, 2, (0, 0))
    # below the target threshold 2 the spectra are {0,1,2} vs {0,1}
    assert not energy_matching(f2, c00, f1, c0)
    # matching energies but clashing thresholds still fail the spectrum leg
    assert energy_matching(f1, c0, field_system(1), c0)


def test_build_spin_tcc_shapes_and_axioms(rnd):
    st = build_spin_tcc([field_system(1), field_system(2)], name="fields")
    assert st.inst.targets.size == 2
    assert st.inst.contexts.size == 2 + 4
    assert st.inst.behavior.behaviors.size == 5
    # evaluation is defined exactly on own-complex cells
    assert st.inst.eval.mat.sum() == 2 + 4
    assert check_instance_axioms(st.inst, rnd, samples=20) == []
    phi = reduced_spectrum_size(st)
    assert phi(FinRel.from_pairs(FinSet("u", ("•",)), st.inst.targets, [])) == 0


def test_build_spin_tcc_rejects_clashing_names():
    with pytest.raises(ValidationError, match="unique"):
        build_spin_tcc([field_system(1), field_system(1)])
    # same complex name over different vertex data
    fake_g1 = SimplicialComplex("G1", ("a", "b"), (("a",), ("b",)))
    terms = {("a",): {(0,): 0, (1,): 1}, ("b",): {(0,): 0, (1,): 1}}
    impostor = SpinSystem("field1b", fake_g1, 2, terms, Fraction(2))
    with pytest.raises(ValidationError, match="reused"):
        build_spin_tcc([field_system(1), impostor])


def test_reduced_spectrum_size_values():
    st = build_spin_tcc([field_system(1), field_system(2)], name="fields")
    phi = reduced_spectrum_size(st)
    assert phi.values[None] == 0
    assert phi.values["field1"] == 2
    assert phi.values["field2"] == 3


def test_automorphism_checks():
    sys = ising_edge()
    check_automorphism(sys.complex, {"s0": "s1", "s1": "s0"})
    with pytest.raises(ValidationError):
        check_automorphism(sys.complex, {"s0": "s0"})
    mixed = SimplicialComplex("M", ("a", "b", "c"), (("a", "b"), ("c",)))
    with pytest.raises(ValidationError, match="facets"):
        check_automorphism(mixed, {"a": "c", "c": "a", "b": "b"})


def test_permutations_respect_energy():
    sys = ising_edge()
    swap = {"s0": "s1", "s1": "s0"}
    cfg = SpinConfiguration(sys.complex, 2, (0, 1))
    moved = permute_config(cfg, swap)
    assert moved.assignment == (1, 0)
    assert permute_system(sys, swap).same_data(sys)
    assert energy(permute_system(sys, swap), moved) == energy(sys, cfg)


def test_spin_permutation_processing_builds():
    st = build_spin_tcc([field_system(2)], name="f2")
    knobs = FinSet("K", ("k",))
    proc = spin_permutation_processing(st, {"G2": {"0": "1", "1": "0"}}, knobs)
    assert proc.knobs == knobs
    # a permutation of a complex nobody lives on is refused
    with pytest.raises(ValidationError, match="no target"):
        spin_permutation_processing(st, {"G9": {}}, knobs)


def test_size_measures_and_poly_certificates():
    st = build_spin_tcc([field_system(1), field_system(2)], name="fields")
    tm = spin_size_measure(st, "targets")
    cm = spin_size_measure(st, "contexts")
    assert tm("field1") == 2 and tm("field2") == 4
    with pytest.raises(ValidationError):
        tm("nowhere")
    runs_on = FinRel.from_pairs(
        st.inst.targets,
        st.inst.contexts,
        [
            (label, cl)
            for label, s in st.systems.items()
            for cl, cfg in st.configs.items()
            if cfg.complex == s.complex
        ],
    )
    linear = PolyCertificate((Fraction(0), Fraction(1)), tm, cm)
    assert poly_bound_check(runs_on, linear)
    zero = PolyCertificate((Fraction(0),), tm, cm)
    assert not poly_bound_check(runs_on, zero)
    assert len(poly_violations(runs_on, zero)) == runs_on.mat.sum()
    with pytest.raises(ValidationError):
        PolyCertificate((Fraction(-1),), tm, cm)
    with pytest.raises(ValidationError):
        constant_measure(st.inst.targets, -1)


def test_poly_bound_evaluates_horner_style():
    m = SizeMeasure("m", {"a": Fraction(3)})
    cert = PolyCertificate((Fraction(1), Fraction(2), Fraction(1)), m, m)
    assert cert.bound(Fraction(3)) == 1 + 2 * 3 + 9


def test_cofinal_matches_direct_check():
    x = FinSet("X", ("bot", "left", "right", "top"))
    p = closure(
        x, [("top", "left"), ("top", "right"), ("left", "bot"), ("right", "bot")]
    )
    inst, sim = cofinal_instance(p, ("left", "top"))
    assert cofinal_check(p, ("left", "top"))
    assert find_universality_witness(sim) is not None
    inst2, sim2 = cofinal_instance(p, ("left",), name="cof2")
    assert not cofinal_check(p, ("left",))
    assert find_universality_witness(sim2) is None


def test_dense_matches_direct_check():
    # two tight clusters; picking one point per cluster is dense,
    # one cluster alone is not
    points = ("a1", "a2", "b1", "b2")
    dist = {
        ("a1", "a2"): 1,
        ("b1", "b2"): 1,
        ("a1", "b1"): 10,
        ("a1", "b2"): 10,
        ("a2", "b1"): 10,
        ("a2", "b2"): 10,
    }
    radii = (Fraction(2), Fraction(11))
    from univsim.search import SearchBudget

    assert dense_check(points, dist, ("a2", "b2"), radii)
    inst, sim = dense_metric_instance(points, dist, ("a2", "b2"), radii)
    assert find_universality_witness(sim, SearchBudget(500_000)) is not None
    assert not dense_check(points, dist, ("a2",), radii)
    inst2, sim2 = dense_metric_instance(points, dist, ("a2",), radii, name="dense2")
    assert find_universality_witness(sim2) is None


def test_metric_validation():
    with pytest.raises(ValidationError, match="triangle"):
        metric_balls(("a", "b", "c"), {("a", "b"): 5, ("b", "c"): 1, ("a", "c"): 1}, (1,))
    with pytest.raises(ValidationError, match="positive"):
        metric_balls(("a", "b"), {("a", "b"): 1}, (0,))


def test_lookup_machines_all_tables():
    inst, named = lookup_machines(("k0",), ("0", "1"), "all", name="lk")
    # one context, so tables are: undefined, 0, 1
    assert inst.targets.size == 3
    assert set(named) == {"t[-]", "t[0]", "t[1]"}


def test_every_preset_loads_and_is_lawful(rnd):
    for name in PRESETS:
        bundle = load_preset(name)
        assert bundle.simulators, name
        assert check_instance_axioms(bundle.inst, rnd, samples=10) == [], name
    with pytest.raises(ValidationError):
        load_preset("no-such-preset")
