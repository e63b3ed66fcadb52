"""Perturbation engine: caps, one-token difference, scan accounting."""

from __future__ import annotations

import pytest

from genswap.filtering import (
    default_first_names_path,
    default_gendered_paths,
    load_first_names,
    load_gendered_list,
)
from genswap.perturb import (
    DEFAULT_ACCEPT_CAP,
    DEFAULT_SCAN_CAP,
    PerturbReport,
    is_fragment,
    perturb,
)
from genswap.protocol import MaskCandidate
from genswap.records import (
    PerturbedPair,
    SentenceRecord,
    SourceSentence,
    make_tokens,
    pair_id_for,
)


@pytest.fixture(scope="module")
def lexicon():
    return load_gendered_list(default_gendered_paths())


@pytest.fixture(scope="module")
def first_names():
    return load_first_names(default_first_names_path())


def _golden_source_list(golden_sentences, golden_sources):
    sentences = {row["sentence_id"]: row for row in golden_sentences}
    out = []
    for row in golden_sources:
        sent = sentences[row["sentence_id"]]
        record = SentenceRecord.from_json(sent)
        out.append(SourceSentence(record, row["focus_index"], row["focus_surface"]))
    return out


def _by_surface(sources, surface):
    return next(s for s in sources if s.focus_surface == surface)


# --- caps over the recorded backends -----------------------------------------

def test_scan_cap_reached_without_filling_accepts(
    fixture_gateway, golden_sentences, golden_sources, lexicon, first_names
):
    sources = _golden_source_list(golden_sentences, golden_sources)
    report = PerturbReport()
    pairs = perturb(
        _by_surface(sources, "quartermaster"), fixture_gateway, lexicon,
        first_names, report=report,
    )
    assert report.scanned == DEFAULT_SCAN_CAP
    assert report.accepted == len(pairs) < DEFAULT_ACCEPT_CAP


def test_accept_cap_stops_the_scan_early(
    fixture_gateway, golden_sentences, golden_sources, lexicon, first_names
):
    sources = _golden_source_list(golden_sentences, golden_sources)
    report = PerturbReport()
    pairs = perturb(
        _by_surface(sources, "counselor"), fixture_gateway, lexicon,
        first_names, report=report,
    )
    assert len(pairs) == DEFAULT_ACCEPT_CAP
    assert report.accepted == DEFAULT_ACCEPT_CAP
    assert report.scanned < DEFAULT_SCAN_CAP


def test_every_source_respects_both_caps(
    fixture_gateway, golden_sentences, golden_sources, lexicon, first_names
):
    sources = _golden_source_list(golden_sentences, golden_sources)
    for source in sources:
        report = PerturbReport()
        pairs = perturb(source, fixture_gateway, lexicon, first_names, report=report)
        assert report.scanned <= DEFAULT_SCAN_CAP
        assert len(pairs) <= DEFAULT_ACCEPT_CAP
        assert report.scanned == (
            report.fragments + report.same_as_original + report.duplicates
            + report.rejected_filter + report.accepted
        )


def test_pairs_differ_from_base_in_exactly_one_position(
    fixture_gateway, golden_sentences, golden_sources, golden_pairs,
    lexicon, first_names,
):
    sources = _golden_source_list(golden_sentences, golden_sources)
    produced = set()
    for source in sources:
        for pair in perturb(source, fixture_gateway, lexicon, first_names):
            base = pair.base.sentence.tokens
            diff = [
                i
                for i, (a, b) in enumerate(zip(base, pair.substituted_tokens))
                if a.surface != b.surface
            ]
            assert len(base) == len(pair.substituted_tokens)
            assert diff == [pair.base.focus_index]
            produced.add((pair.pair_id, pair.substitute_surface))
    golden = {(row["pair_id"], row["substitute"]) for row in golden_pairs}
    assert produced == golden


# --- scan accounting over a scripted gateway ----------------------------------

class ScriptedGateway:
    """fill_mask returns a fixed candidate list; NER follows a per-substitute
    script (default: PERSON stays on the focus); POS marks verbs by a list."""

    def __init__(self, candidates, person_map=None, verbs=()):
        self.candidates = candidates
        self.person_map = person_map or {}
        self.verbs = set(verbs)

    def fill_mask(self, tokens, mask_index, top_k):
        return self.candidates[:top_k]

    def ner_tag(self, tokens):
        from genswap.protocol import NerSpan

        focus = self.person_map.get(tokens[1], [1])
        return [NerSpan(i, "PERSON") for i in focus]

    def pos_tag(self, tokens):
        return [
            "PUNCT" if t == "." else "VERB" if t in self.verbs else "NOUN"
            for t in tokens
        ]


def _source(tokens, focus):
    record = SentenceRecord.from_surfaces("t", tokens)
    return SourceSentence(record, focus, tokens[focus])


def _cands(*tokens):
    return [
        MaskCandidate(tok, 0.9 / (rank + 1), rank + 1)
        for rank, tok in enumerate(tokens)
    ]


def test_scan_accounting_by_outcome(lexicon, first_names):
    gateway = ScriptedGateway(
        _cands(
            "##er",        # fragment
            "two words",   # fragment (whitespace)
            "Doctor",      # same as original, case-insensitive
            "waitress",    # gendered term -> filter reject
            "clerk",       # accepted
            "Clerk",       # duplicate after lowercasing
            "mary",        # listed first name -> filter reject
            "running",     # tagged VERB -> filter reject
            "shifty",      # PERSON moves off the focus -> reject
            "janitor",     # accepted
        ),
        person_map={"shifty": [2]},
        verbs=["running"],
    )
    source = _source(["a", "doctor", "works", "."], 1)
    report = PerturbReport()
    pairs = perturb(source, gateway, lexicon, first_names, report=report)

    assert [p.substitute_surface for p in pairs] == ["clerk", "janitor"]
    assert report.scanned == 10
    assert report.fragments == 2
    assert report.same_as_original == 1
    assert report.duplicates == 1
    assert report.rejected_filter == 4
    assert report.accepted == 2

    clerk = pairs[0]
    assert clerk.pair_id == pair_id_for(source.sentence.sentence_id, 1, "clerk")
    assert clerk.candidate_rank == 5
    assert clerk.mlm_score == pytest.approx(0.9 / 5)
    assert [t.surface for t in clerk.substituted_tokens] == ["a", "clerk", "works", "."]


def test_substitutes_are_lowercased(lexicon, first_names):
    gateway = ScriptedGateway(_cands("Janitor"))
    pairs = perturb(_source(["a", "doctor", "works", "."], 1), gateway, lexicon, first_names)
    assert [p.substitute_surface for p in pairs] == ["janitor"]


def test_accept_cap_with_scripted_candidates(lexicon, first_names):
    names = [f"worker{i}" for i in range(8)]
    gateway = ScriptedGateway(_cands(*names))
    report = PerturbReport()
    pairs = perturb(
        _source(["a", "doctor", "works", "."], 1),
        gateway, lexicon, first_names,
        scan_cap=100, accept_cap=3, report=report,
    )
    assert [p.substitute_surface for p in pairs] == names[:3]
    # The loop stops before scanning a fourth candidate.
    assert report.scanned == 3


def test_scan_cap_with_scripted_candidates(lexicon, first_names):
    gateway = ScriptedGateway(_cands(*["##x"] * 50))
    report = PerturbReport()
    pairs = perturb(
        _source(["a", "doctor", "works", "."], 1),
        gateway, lexicon, first_names,
        scan_cap=5, accept_cap=10, report=report,
    )
    assert pairs == []
    assert report.scanned == 5
    assert report.fragments == 5


def test_caps_must_be_positive(lexicon, first_names):
    gateway = ScriptedGateway(_cands("clerk"))
    source = _source(["a", "doctor", "works", "."], 1)
    with pytest.raises(ValueError, match="caps"):
        perturb(source, gateway, lexicon, first_names, scan_cap=0)
    with pytest.raises(ValueError, match="caps"):
        perturb(source, gateway, lexicon, first_names, accept_cap=0)


def test_is_fragment():
    assert is_fragment("##er")
    assert is_fragment("two words")
    assert is_fragment("tab\tsplit")
    assert not is_fragment("clerk")
    assert not is_fragment("well-known")


# --- pair invariants enforced by the record type --------------------------------

def test_perturbed_pair_rejects_bad_shapes():
    source = _source(["a", "doctor", "works", "."], 1)
    good = make_tokens(["a", "clerk", "works", "."])
    PerturbedPair("p1", source, "clerk", good, 1, 0.5)

    with pytest.raises(ValueError, match="token count"):
        PerturbedPair("p1", source, "clerk", make_tokens(["a", "clerk", "works"]), 1, 0.5)
    with pytest.raises(ValueError, match="focus index"):
        PerturbedPair(
            "p1", source, "clerk", make_tokens(["a", "clerk", "naps", "."]), 1, 0.5
        )
    with pytest.raises(ValueError, match="focus index"):
        PerturbedPair("p1", source, "clerk", make_tokens(["a", "doctor", "works", "."]), 1, 0.5)
    with pytest.raises(ValueError, match="substitute equals"):
        PerturbedPair(
            "p1", source, "Doctor", make_tokens(["a", "Doctor", "works", "."]), 1, 0.5
        )
