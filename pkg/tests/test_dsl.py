"""Document language: corpus round trips, diagnostics, canonical form."""

import re
from pathlib import Path

import pytest

from univsim.dsl import parse, quote_label, serialize
from univsim.errors import ValidationError
from univsim.finrel import UNIT

CORPUS = Path(__file__).resolve().parent.parent / "corpus"
VALID = sorted((CORPUS / "valid").glob("*.tcc"))
BAD = sorted((CORPUS / "bad").glob("*.tcc"))

EXPECT = re.compile(r"#\s*expect:\s*(E-[A-Z]+)@(\d+):(\d+)")


def test_corpus_is_populated():
    assert len(VALID) >= 20
    assert len(BAD) >= 10


@pytest.mark.parametrize("path", VALID, ids=lambda p: p.stem)
def test_valid_corpus_round_trips(path):
    doc = parse(path.read_text())
    assert doc.ok, [str(d) for d in doc.diagnostics]
    assert doc.blocks
    canon = serialize(doc)
    doc2 = parse(canon)
    assert doc2.ok, [str(d) for d in doc2.diagnostics]
    assert serialize(doc2) == canon


@pytest.mark.parametrize("path", BAD, ids=lambda p: p.stem)
def test_bad_corpus_diagnostics_are_stable(path):
    text = path.read_text()
    want = EXPECT.search(text)
    assert want is not None, "bad corpus file lacks an expectation header"
    code, line, col = want.group(1), int(want.group(2)), int(want.group(3))
    doc = parse(text)
    assert not doc.ok
    first = doc.diagnostics[0]
    assert (first.code, first.line, first.col) == (code, line, col)


def test_every_diagnostic_carries_code_and_span():
    for path in BAD:
        for d in parse(path.read_text()).diagnostics:
            assert d.code.startswith("E-")
            assert d.line >= 1 and d.col >= 1
            assert d.end_col >= d.col


def test_resolved_objects_are_engine_objects():
    doc = parse((CORPUS / "valid" / "09-tiny-instance.tcc").read_text())
    assert doc.ok
    inst = next(iter(doc.instances.values()))
    assert inst.targets.size > 0
    assert inst.eval.cod == inst.behavior.behaviors
    assert doc.sets["I"] == UNIT


def test_checks_carry_expectations():
    doc = parse((CORPUS / "valid" / "18-check-universal.tcc").read_text())
    assert doc.ok
    specs = list(doc.checks.values())
    assert specs
    assert any(c.expect is not None for c in specs)


def test_quote_label_round_trips_exotica():
    for label in ('pla"in', "a,b", "{x}", "e=1|d=2", "sp{0,1}"):
        doc = parse(f"set S {{ {quote_label(label)} }}")
        assert doc.ok, [str(d) for d in doc.diagnostics]
        (s,) = [v for k, v in doc.sets.items() if k == "S"]
        assert s.elements == (label,)


def test_unknown_reference_points_at_the_use():
    doc = parse("rel r : A -> A { }")
    assert not doc.ok
    assert doc.diagnostics[0].code == "E-REF"
    assert doc.diagnostics[0].line == 1


def test_forward_references_are_rejected():
    text = "rel r : S -> S { }\nset S { s0 }"
    doc = parse(text)
    assert not doc.ok
    assert doc.diagnostics[0].code == "E-REF"


def test_duplicate_names_and_reserved_unit():
    doc = parse("set A { x }\nset A { y }")
    assert [d.code for d in doc.diagnostics] == ["E-DUP"]
    doc2 = parse("set I { dot }")
    assert [d.code for d in doc2.diagnostics] == ["E-DUP"]


def test_recovery_continues_after_a_broken_block():
    text = "set A { x ! }\nset B { y }"
    doc = parse(text)
    assert not doc.ok
    assert "B" in doc.sets


def test_serialize_refuses_broken_documents():
    doc = parse("set A { x x }")
    assert not doc.ok
    with pytest.raises(ValidationError):
        serialize(doc)


def test_canonical_form_orders_pairs_row_major():
    text = 'set A { a1 a0 }\nrel r : A -> A { a1 -> a0  a0 -> a1 }'
    canon = serialize(parse(text))
    # pair order follows the declared element order of the domain
    assert canon.index("a1 -> a0") < canon.index("a0 -> a1")


def test_product_elements_decompose_in_serial_form():
    doc = parse(
        "set T { t0 t1 }\nset C { c0 }\n"
        "rel e : T * C -> T { (t1, c0) -> t0 }"
    )
    assert doc.ok
    out = serialize(doc)
    assert "(t1, c0) -> t0" in out
    again = parse(out)
    assert again.ok
    assert again.rels["e"] == doc.rels["e"]
