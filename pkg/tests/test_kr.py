import pytest
from hypothesis import given, strategies as st

from framesem import kr
from framesem.kr import (
    AnchorRef,
    ConceptRef,
    Facet,
    Frame,
    InstanceRef,
    KBError,
    Literal,
    RelationalExpr,
    frames_equal_modulo_indices,
    parse_kb,
    serialize_kb,
)

SURGERY_BLOCK = """\
concept SURGERY
  IS-A value MEDICAL-PROCEDURE
  AGENT default SURGEON
  sem PHYSICIAN
  relaxable-to HUMAN, ROBOT
  LOCATION default OPERATING-ROOM
  sem MEDICAL-BUILDING
  relaxable-to PLACE
"""


def test_surgery_block_parses_to_seven_slots():
    frames = parse_kb(SURGERY_BLOCK)
    assert len(frames) == 1
    f = frames[0]
    assert f.head == ConceptRef("SURGERY")
    assert len(f.slots) == 7
    assert f.filler("IS-A", Facet.VALUE) == ConceptRef("MEDICAL-PROCEDURE")
    assert f.filler("AGENT", Facet.DEFAULT) == ConceptRef("SURGEON")
    assert f.filler("AGENT", Facet.SEM) == ConceptRef("PHYSICIAN")
    assert f.fillers("AGENT", Facet.RELAXABLE_TO) == [ConceptRef("HUMAN"), ConceptRef("ROBOT")]
    assert f.fillers("LOCATION", Facet.RELAXABLE_TO) == [ConceptRef("PLACE")]


def test_empty_document_gives_empty_list():
    assert parse_kb("") == []
    assert parse_kb("; only a comment\n\n") == []


def test_unknown_facet_is_a_syntax_error():
    with pytest.raises(KBError):
        parse_kb("concept FOO\n  AGENT maybe HUMAN\n")


def test_duplicate_block_name_rejected():
    doc = "concept FOO\n  IS-A value ALL\nconcept FOO\n  IS-A value ALL\n"
    with pytest.raises(KBError):
        parse_kb(doc)


def test_syntax_error_reports_line_number():
    with pytest.raises(KBError) as err:
        parse_kb("concept FOO\n  AGENT maybe HUMAN\n")
    assert err.value.line == 2


def test_surgery_round_trip():
    frames = parse_kb(SURGERY_BLOCK)
    assert parse_kb(serialize_kb(frames)) == frames


def test_empty_list_serializes_to_empty_document():
    assert serialize_kb([]) == ""


def test_multi_filler_relaxable_line_round_trips_on_one_line():
    text = serialize_kb(parse_kb(SURGERY_BLOCK))
    agent_lines = [l for l in text.splitlines() if "relaxable-to" in l]
    assert "  relaxable-to HUMAN ROBOT" in agent_lines


def test_instance_block_facetless_lines():
    doc = """\
instance SURGERY-#10
  AGENT SURGEON-#14
  BENEFICIARY PATIENT-#89
  LOCATION HOSPITAL-#3
  DATE 2024-12-12
"""
    frames = parse_kb(doc)
    f = frames[0]
    assert f.head == AnchorRef("SURGERY", 10)
    assert all(s.facet is Facet.VALUE for s in f.slots)
    assert f.filler("AGENT") == AnchorRef("SURGEON", 14)
    assert f.filler("DATE") == Literal("2024-12-12")
    assert parse_kb(serialize_kb(frames)) == frames


def test_relational_expr_and_number_fillers_round_trip():
    doc = "instance EVENT-1\n  TIME < find-anchor-time\n  VALUE .8\n"
    frames = parse_kb(doc)
    f = frames[0]
    assert f.filler("TIME") == RelationalExpr("<", "find-anchor-time")
    assert f.filler("VALUE") == Literal(".8")
    # numbers survive as exact strings
    assert ".8" in serialize_kb(frames)
    assert parse_kb(serialize_kb(frames)) == frames


def _tiger_frame(index):
    f = Frame(InstanceRef("TIGER", index), kind="instance")
    f.add("DISCOURSE-STATUS", Facet.VALUE, [Literal("new")])
    return f


def test_equal_modulo_indices_renumbering():
    ok, mapping = frames_equal_modulo_indices([_tiger_frame(1)], [_tiger_frame(7)])
    assert ok
    assert mapping == {("TIGER", 1): 7}


def test_equal_modulo_indices_identity():
    ok, mapping = frames_equal_modulo_indices([_tiger_frame(3)], [_tiger_frame(3)])
    assert ok
    assert mapping == {("TIGER", 3): 3}


def test_sets_differing_in_one_facet_are_not_equal():
    a = Frame(ConceptRef("FOO"))
    a.add("AGENT", Facet.DEFAULT, [ConceptRef("HUMAN")])
    b = Frame(ConceptRef("FOO"))
    b.add("AGENT", Facet.SEM, [ConceptRef("HUMAN")])
    ok, _ = frames_equal_modulo_indices([a], [b])
    assert not ok


def test_anchors_compare_exactly():
    a = Frame(AnchorRef("HUMAN", 17), kind="instance")
    a.add("HAS-NAME", Facet.VALUE, [Literal("Tony")])
    b = Frame(AnchorRef("HUMAN", 18), kind="instance")
    b.add("HAS-NAME", Facet.VALUE, [Literal("Tony")])
    ok, _ = frames_equal_modulo_indices([a], [b])
    assert not ok


def test_cross_referencing_instances_renumber_consistently():
    def pair(i, j):
        ev = Frame(InstanceRef("FEED", i), kind="instance")
        ev.add("AGENT", Facet.VALUE, [InstanceRef("HUMAN", j)])
        hu = Frame(InstanceRef("HUMAN", j), kind="instance")
        hu.add("HAS-NAME", Facet.VALUE, [Literal("Mary")])
        return [ev, hu]

    ok, mapping = frames_equal_modulo_indices(pair(1, 2), pair(5, 9))
    assert ok
    assert mapping == {("FEED", 1): 5, ("HUMAN", 2): 9}

    # an inconsistent cross-reference cannot be repaired by renumbering
    a = pair(1, 2)
    b = pair(5, 9)
    b[0].slots[0] = kr.Slot("AGENT", Facet.VALUE, (InstanceRef("HUMAN", 1),))
    ok, _ = frames_equal_modulo_indices(a, b)
    assert not ok


def test_facet_strength_is_a_strict_total_order():
    strengths = [f.strength for f in (Facet.VALUE, Facet.DEFAULT, Facet.SEM, Facet.RELAXABLE_TO)]
    assert strengths == sorted(strengths, reverse=True)
    assert len(set(strengths)) == 4


# -- property tests ---------------------------------------------------------

_concept_names = st.sampled_from(
    ["SURGERY", "HUMAN", "TIGER", "EVENT", "MEDICAL-PROCEDURE", "PLACE", "ROBOT"]
)
_safe_literals = st.sampled_from(["Tony", "blue", ".8", "2024-12-12", "new", "1"])
_props = st.sampled_from(["IS-A", "AGENT", "THEME", "LOCATION", "HAS-NAME", "COLOR"])


@st.composite
def _concept_frames(draw):
    head = ConceptRef(draw(_concept_names))
    frame = Frame(head, kind="concept")
    n = draw(st.integers(min_value=1, max_value=5))
    for _ in range(n):
        prop = draw(_props)
        facet = draw(st.sampled_from(list(Facet)))
        fillers = draw(
            st.lists(
                st.one_of(
                    _concept_names.map(ConceptRef),
                    _safe_literals.map(Literal),
                    st.builds(
                        InstanceRef, _concept_names, st.integers(min_value=0, max_value=30)
                    ),
                ),
                min_size=1,
                max_size=3,
            )
        )
        frame.add(prop, facet, fillers)
    return frame


@given(st.lists(_concept_frames(), max_size=4))
def test_round_trip_property(frames):
    # distinct heads only: duplicate block names are rejected by design
    seen, uniq = set(), []
    for f in frames:
        if f.head.name not in seen:
            seen.add(f.head.name)
            uniq.append(f)
    assert parse_kb(serialize_kb(uniq)) == uniq


@given(st.lists(_concept_frames(), max_size=3), st.integers(min_value=1, max_value=50))
def test_equal_modulo_indices_invariant_under_renumbering(frames, offset):
    def shift(filler):
        if isinstance(filler, InstanceRef):
            return InstanceRef(filler.concept, filler.index + offset)
        return filler

    shifted = []
    for f in frames:
        g = Frame(shift(f.head), kind=f.kind)
        for s in f.slots:
            g.slots.append(kr.Slot(s.prop, s.facet, tuple(shift(x) for x in s.fillers)))
        shifted.append(g)
    ok, _ = frames_equal_modulo_indices(frames, shifted)
    assert ok
    ok_rev, _ = frames_equal_modulo_indices(shifted, frames)
    assert ok_rev
    ok_self, _ = frames_equal_modulo_indices(frames, frames)
    assert ok_self
