"""Record types: construction invariants and serialization round trips."""

from __future__ import annotations

import json
import unicodedata

import pytest
from hypothesis import given, strategies as st

from genswap.records import (
    AnnotationDecision,
    AnnotationState,
    ExampleRecord,
    FormRatio,
    Gender,
    GenderEvidence,
    GenderTag,
    PerturbedPair,
    ProjectedFocus,
    RejectReason,
    Risk,
    RiskLabel,
    SentenceRecord,
    Side,
    SourceSentence,
    Token,
    TranslationOutcome,
    make_tokens,
    pair_id_for,
    read_jsonl,
    sentence_id_for,
    write_jsonl,
)

from conftest import GOLDEN_ARTIFACTS


def sentence(surfaces=("the", "nurse", "sings")) -> SentenceRecord:
    return SentenceRecord.from_surfaces("doc-1", surfaces)


def source(surfaces=("the", "nurse", "sings"), focus=1) -> SourceSentence:
    rec = sentence(surfaces)
    return SourceSentence(rec, focus, rec.tokens[focus].surface)


def pair(substitute="guard") -> PerturbedPair:
    base = source()
    substituted = make_tokens(["the", substitute, "sings"])
    return PerturbedPair(
        pair_id=pair_id_for(base.sentence.sentence_id, 1, substitute),
        base=base,
        substitute_surface=substitute,
        substituted_tokens=substituted,
        candidate_rank=3,
        mlm_score=0.25,
    )


# ---------------------------------------------------------------------------
# tokens and sentences


@pytest.mark.parametrize("surface", ["", "two words", "tab\tin", "nl\nin"])
def test_token_rejects_empty_or_whitespace_surfaces(surface):
    with pytest.raises(ValueError):
        Token(surface, 0)


def test_token_rejects_negative_index():
    with pytest.raises(ValueError, match="negative token index"):
        Token("ok", -1)


def test_make_tokens_enumerates_indices():
    tokens = make_tokens(["a", "b", "c"])
    assert [(t.surface, t.index) for t in tokens] == [("a", 0), ("b", 1), ("c", 2)]


def test_sentence_rejects_empty_and_gapped_token_lists():
    with pytest.raises(ValueError, match="no tokens"):
        SentenceRecord("x", "d", ())
    with pytest.raises(ValueError, match="contiguous"):
        SentenceRecord("x", "d", (Token("a", 0), Token("b", 2)))


def test_sentence_round_trip():
    rec = sentence()
    assert SentenceRecord.from_json(rec.to_json()) == rec
    assert rec.surfaces() == ["the", "nurse", "sings"]


def test_sentence_id_ignores_unicode_composition():
    composed = ["café"]
    decomposed = ["café"]
    assert composed != decomposed
    assert sentence_id_for(composed) == sentence_id_for(decomposed)


def test_sentence_id_respects_token_boundaries():
    assert sentence_id_for(["ab", "c"]) != sentence_id_for(["a", "bc"])


@given(st.lists(st.text(min_size=1), min_size=1, max_size=6))
def test_sentence_id_is_nfc_invariant(surfaces):
    normalized = [unicodedata.normalize("NFC", s) for s in surfaces]
    digest = sentence_id_for(surfaces)
    assert digest == sentence_id_for(normalized)
    assert len(digest) == 16
    int(digest, 16)


# ---------------------------------------------------------------------------
# focus and pairs


def test_source_sentence_validates_focus():
    rec = sentence()
    with pytest.raises(ValueError, match="out of range"):
        SourceSentence(rec, 3, "sings")
    with pytest.raises(ValueError, match="does not match"):
        SourceSentence(rec, 0, "nurse")


def test_perturbed_pair_accepts_single_focus_substitution():
    p = pair()
    assert p.substituted_tokens[1].surface == "guard"


def test_perturbed_pair_rejects_malformed_substitutions():
    base = source()
    good_id = pair_id_for(base.sentence.sentence_id, 1, "guard")
    with pytest.raises(ValueError, match="count differs"):
        PerturbedPair(good_id, base, "guard", make_tokens(["the", "guard"]), 0, 0.5)
    with pytest.raises(ValueError, match="exactly at the focus"):
        PerturbedPair(
            good_id, base, "guard", make_tokens(["a", "guard", "sings"]), 0, 0.5
        )
    with pytest.raises(ValueError, match="exactly at the focus"):
        PerturbedPair(
            good_id, base, "nurse", make_tokens(["the", "nurse", "sings"]), 0, 0.5
        )
    with pytest.raises(ValueError, match="equals the original"):
        PerturbedPair(
            good_id, base, "Nurse", make_tokens(["the", "Nurse", "sings"]), 0, 0.5
        )


def test_pair_id_depends_on_every_component():
    ids = {
        pair_id_for("s1", 1, "guard"),
        pair_id_for("s2", 1, "guard"),
        pair_id_for("s1", 2, "guard"),
        pair_id_for("s1", 1, "clerk"),
    }
    assert len(ids) == 4
    assert pair_id_for("s1", 1, "guard") == pair_id_for("s1", 1, "guard")


# ---------------------------------------------------------------------------
# outcomes


def test_projected_focus_fields_come_together():
    ProjectedFocus(None, None)
    ProjectedFocus(2, 0.5)
    with pytest.raises(ValueError):
        ProjectedFocus(2, None)
    with pytest.raises(ValueError):
        ProjectedFocus(None, 0.5)


def test_gender_tag_unknown_iff_no_evidence():
    GenderTag(Gender.UNKNOWN, GenderEvidence.NONE)
    GenderTag(Gender.FEMININE, GenderEvidence.SUFFIX)
    with pytest.raises(ValueError):
        GenderTag(Gender.UNKNOWN, GenderEvidence.LEXICON)
    with pytest.raises(ValueError):
        GenderTag(Gender.MASCULINE, GenderEvidence.NONE)


def test_translation_outcome_round_trips_both_shapes():
    projected = TranslationOutcome(
        pair_id="p1",
        side=Side.ORIGINAL,
        target_language="fr",
        translation_tokens=("la", "garde"),
        projected=ProjectedFocus(1, 0.75),
        gender=GenderTag(Gender.FEMININE, GenderEvidence.DETERMINER),
    )
    unprojected = TranslationOutcome(
        pair_id="p1",
        side=Side.SUBSTITUTED,
        target_language="ru",
        translation_tokens=("x",),
        projected=ProjectedFocus(None, None),
        gender=None,
    )
    for outcome in (projected, unprojected):
        row = outcome.to_json()
        assert row["lang"] == outcome.target_language
        assert TranslationOutcome.from_json(json.loads(json.dumps(row))) == outcome


def test_translation_outcome_requires_gender_iff_projected():
    with pytest.raises(ValueError, match="gender present iff projection"):
        TranslationOutcome(
            "p1", Side.ORIGINAL, "fr", ("x",), ProjectedFocus(None, None),
            GenderTag(Gender.MASCULINE, GenderEvidence.LEXICON),
        )
    with pytest.raises(ValueError, match="gender present iff projection"):
        TranslationOutcome(
            "p1", Side.ORIGINAL, "fr", ("x",), ProjectedFocus(0, 1.0), None
        )


def test_risk_label_validates_indeterminate_reasons():
    RiskLabel(Risk.INDETERMINATE, "UNPROJECTED")
    RiskLabel(Risk.INDETERMINATE, "UNKNOWN_GENDER")
    RiskLabel(Risk.AT_RISK, "anything goes here")
    with pytest.raises(ValueError, match="bad INDETERMINATE reason"):
        RiskLabel(Risk.INDETERMINATE, "GENDER_SWAP")


def test_form_ratio_display_and_total():
    ratio = FormRatio("clerk", "ru", 0, 36)
    assert ratio.ratio_display == "0:36"
    assert ratio.total == 36
    with pytest.raises(ValueError, match="negative tally"):
        FormRatio("clerk", "ru", -1, 0)


def test_annotation_decision_round_trip_and_pending_guard():
    decision = AnnotationDecision("p1", "de", AnnotationState.ACCEPTED, "ann", "t0")
    row = decision.to_json()
    assert row["lang"] == "de"
    assert AnnotationDecision.from_json(row) == decision
    with pytest.raises(ValueError, match="not a recordable verdict"):
        AnnotationDecision("p1", "de", AnnotationState.PENDING, "ann", "t0")


def test_reject_reason_values_are_stable():
    assert {r.value for r in RejectReason} == {
        "MULTI_PERSON", "NO_PERSON", "GENDERED_TERM", "NAME", "NOT_NOUN"
    }


# ---------------------------------------------------------------------------
# full records and jsonl files


def test_golden_example_records_round_trip_exactly():
    rows = list(read_jsonl(GOLDEN_ARTIFACTS / "09_records.jsonl"))
    assert rows
    for row in rows[:50]:
        assert ExampleRecord.from_json(row).to_json() == row


def test_write_jsonl_counts_and_preserves_unicode(tmp_path):
    path = tmp_path / "deep" / "rows.jsonl"
    rows = [{"text": "café"}, {"n": 1, "ok": True, "none": None}]
    assert write_jsonl(path, rows) == 2
    assert "café" in path.read_text("utf-8")
    assert list(read_jsonl(path)) == rows


def test_read_jsonl_skips_blank_lines(tmp_path):
    path = tmp_path / "rows.jsonl"
    path.write_text('{"a": 1}\n\n   \n{"b": 2}\n', encoding="utf-8")
    assert list(read_jsonl(path)) == [{"a": 1}, {"b": 2}]


json_scalars = st.one_of(
    st.none(),
    st.booleans(),
    st.integers(min_value=-(2**53), max_value=2**53),
    st.floats(allow_nan=False, allow_infinity=False),
    st.text(),
)


@given(
    st.lists(
        st.dictionaries(st.text(max_size=8), json_scalars, max_size=4), max_size=8
    )
)
def test_jsonl_round_trip_property(tmp_path_factory, rows):
    path = tmp_path_factory.mktemp("jsonl") / "rows.jsonl"
    assert write_jsonl(path, rows) == len(rows)
    assert list(read_jsonl(path)) == rows
