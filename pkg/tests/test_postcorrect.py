from __future__ import annotations

import itertools
import math
import random

import pytest
from hypothesis import assume, example, given, settings
from hypothesis import strategies as st
from oracles import channel_path_score, exhaustive_decode, lev_matrix, min_script_cost

from ocrfix.docmodel import BBox, Document, Line, Page, Token
from ocrfix.errors import EmptyTrainingSet, ParseError, VersionMismatch
from ocrfix.postcorrect import (
    BeamConfig,
    ChannelModel,
    EditOp,
    TrainingPair,
    align_pair,
    apply_script,
    beam_corrector,
    correct_document,
    correct_line,
    decode_line,
    load_channel,
    load_lm,
    read_pairs,
    save_channel,
    save_lm,
    script_cost,
    train_channel,
    train_lm,
    write_pairs,
)
from ocrfix.postcorrect.align import DEL, INS, KEEP, SUB
from ocrfix.postcorrect.models import EOS


# -- alignment -------------------------------------------------------------------


def test_align_identity():
    assert align_pair("abc", "abc") == [EditOp(KEEP, c, c) for c in "abc"]


def test_align_substitution():
    assert align_pair("abd", "abc") == [EditOp(KEEP, "a", "a"), EditOp(KEEP, "b", "b"), EditOp(SUB, "d", "c")]


def test_align_insertion():
    assert align_pair("ac", "abc") == [EditOp(KEEP, "a", "a"), EditOp(INS, None, "b"), EditOp(KEEP, "c", "c")]


def test_align_deletion():
    assert align_pair("abxc", "abc") == [EditOp(KEEP, "a", "a"), EditOp(KEEP, "b", "b"), EditOp(DEL, "x", None), EditOp(KEEP, "c", "c")]


def test_align_prefers_substitute_over_delete_insert():
    # "ab" -> "ba" costs 2 either as two substitutions or as delete+insert
    assert [op.kind for op in align_pair("ab", "ba")] == [SUB, SUB]


def test_align_empty_sides():
    assert align_pair("", "ab") == [EditOp(INS, None, "a"), EditOp(INS, None, "b")]
    assert align_pair("ab", "") == [EditOp(DEL, "a", None), EditOp(DEL, "b", None)]
    assert align_pair("", "") == []


def test_align_exhaustive_short_strings():
    words = ["".join(p) for n in range(5) for p in itertools.product("ab", repeat=n)]
    for a in words:
        for b in words:
            ops = align_pair(a, b)
            assert apply_script(a, ops) == b
            assert script_cost(ops) == min_script_cost(a, b)


@given(st.text("abcḵä", max_size=12), st.text("abcḵä", max_size=12))
@settings(max_examples=300, deadline=None)
def test_align_script_is_minimal(a, b):
    ops = align_pair(a, b)
    assert apply_script(a, ops) == b
    assert script_cost(ops) == lev_matrix(a, b)


def test_apply_script_rejects_wrong_source():
    with pytest.raises(ValueError):
        apply_script("ab", [EditOp(KEEP, "x", "x"), EditOp(KEEP, "b", "b")])


# -- channel ---------------------------------------------------------------------


def test_single_pair_substitution_probability():
    ch = train_channel([TrainingPair("abd", "abc")], k=0)
    # intended gold 'c' was observed as 'd' with no keeps or drops of 'c'
    assert ch.distribution("c")[("sub", "d")] == 1.0
    assert ch.distribution("c")["keep"] == 0.0
    assert math.exp(ch.log_emit("c", "d")) == 1.0


def test_identity_pairs_give_identity_channel():
    ch = train_channel([TrainingPair("abc", "abc"), TrainingPair("cab", "cab")], k=0)
    for c in "abc":
        assert ch.distribution(c)["keep"] == 1.0
    assert not ch.drop_chars and not ch.ins_chars and not ch.sub_sources


def test_empty_training_set():
    with pytest.raises(EmptyTrainingSet):
        train_channel([])


def test_untrained_channel_is_identity():
    ch = ChannelModel()
    assert not ch.trained
    for c in "aḵ ":
        assert ch.distribution(c) == {"keep": 1.0}
        assert ch.log_emit(c, c) == 0.0
        assert ch.log_emit(c, "z") == -math.inf
    assert ch.log_no_insert == 0.0


def test_insert_and_drop_counts():
    ch = train_channel([TrainingPair("axb", "ab"), TrainingPair("a", "ab")], k=0)
    assert ch.ins["x"] == 1
    assert ch.drop["b"] == 1
    # slots: "axb"->"ab" has 3 slots with one filled; "a"->"ab" has 3 empty
    assert ch.empty_slots == 5


def test_training_pair_requires_reference():
    with pytest.raises(ValueError):
        TrainingPair("abc", "")
    assert TrainingPair("é", "é").src == "é"


pair_lists = st.lists(st.tuples(st.text("abcd", max_size=8), st.text("abcd", min_size=1, max_size=8)), min_size=1, max_size=8)


@given(pair_lists, st.floats(0.0, 1.0))
@example([("a", "a")], 5e-324)  # subnormal k: ratios underflow unless taken in log space
@settings(max_examples=200, deadline=None)
def test_channel_normalizes(pairs, k):
    ch = train_channel([TrainingPair(s, r) for s, r in pairs], k)
    for c in ch.intended_vocab:
        dist = ch.distribution(c)
        assert abs(sum(dist.values()) - 1.0) < 1e-9
        assert all(p >= 0 for p in dist.values())
    if ch._slot_z > 0:
        total = math.exp(ch.log_no_insert) + sum(math.exp(ch.log_insert(o)) for o in ch.observed_vocab | ch.ins_chars)
        assert abs(total - 1.0) < 1e-9


def test_channel_round_trip(tmp_path):
    ch = train_channel([TrainingPair("ḵäb", "kab"), TrainingPair("ab", "abc")])
    save_channel(ch, tmp_path / "c.json")
    back = load_channel(tmp_path / "c.json")
    assert back.to_json() == ch.to_json()
    for c in ch.intended_vocab:
        assert back.distribution(c) == ch.distribution(c)


def test_channel_file_errors(tmp_path):
    (tmp_path / "c.json").write_text('{"format": "ocrfix-channel", "version": 99}')
    with pytest.raises(VersionMismatch):
        load_channel(tmp_path / "c.json")
    (tmp_path / "c.json").write_text('{"format": "other"}')
    with pytest.raises(ParseError):
        load_channel(tmp_path / "c.json")


# -- language model -------------------------------------------------------------


@pytest.mark.parametrize("k", [0.01, 0.5, 1.0])
def test_lm_add_k_bigram(k):
    lm = train_lm(["ab"], order=2, k=k)
    v_prime = 2 + 1  # {a, b} plus the end sentinel
    assert lm.prob("a", "b") == pytest.approx((1 + k) / (1 + k * v_prime), abs=1e-12)


def test_lm_empty_corpus():
    with pytest.raises(EmptyTrainingSet):
        train_lm([])


@given(st.lists(st.text("abc", max_size=8), min_size=1, max_size=6), st.integers(1, 5), st.floats(0.001, 1.0))
@settings(max_examples=150, deadline=None)
def test_lm_conditionals_normalize(corpus, order, k):
    lm = train_lm(corpus, order, k)
    contexts = list(lm.counts) + [lm.start, "zz"[: order - 1]]
    for ctx in contexts:
        total = sum(lm.prob(ctx, c) for c in lm.vocab) + lm.prob(ctx, EOS)
        assert abs(total - 1.0) < 1e-9


def test_lm_total_mass_at_most_one():
    lm = train_lm(["abba", "ab", "b"], order=3, k=0.1)
    mass = sum(
        math.exp(lm.score("".join(p))) for n in range(7) for p in itertools.product(sorted(lm.vocab), repeat=n)
    )
    assert mass <= 1.0 + 1e-12
    assert mass > 0.9  # most mass sits on short strings for this corpus


def test_lm_round_trip(tmp_path):
    lm = train_lm(["ḵäb", "kab ab"], order=3)
    save_lm(lm, tmp_path / "lm.json")
    back = load_lm(tmp_path / "lm.json")
    assert back.score("kab") == lm.score("kab")
    assert back.to_json() == lm.to_json()


def test_pairs_file(tmp_path):
    pairs = [TrainingPair("ḵa", "ka"), TrainingPair("", "x")]
    write_pairs(pairs, tmp_path / "p.tsv")
    assert read_pairs(tmp_path / "p.tsv") == pairs
    (tmp_path / "bad.tsv").write_text("no tab here\n")
    with pytest.raises(ParseError):
        read_pairs(tmp_path / "bad.tsv")


# -- decoding --------------------------------------------------------------------


def test_empty_line():
    assert correct_line("", ChannelModel(), train_lm(["a"])) == ""


def test_untrained_channel_identity_examples():
    lm = train_lm(["zzz", "qq"])
    for s in ["abc", "ḵäē łǥ", "  x ", "дog"]:
        assert correct_line(s, ChannelModel(), lm) == s


def test_cyrillic_confusion_example():
    # observed Cyrillic 'д' always stands for intended Latin 'd'
    ch = train_channel([TrainingPair("д", "d"), TrainingPair("дд", "dd")])
    lm = train_lm(["d", "dd", "ddd"])
    out, score = decode_line("дog", ch, lm)
    assert out == "dog"
    ranked = exhaustive_decode("дog", ch, lm, set("дog") | ch.intended_vocab, 3, 1.0, 1)
    assert ranked[0][1] == "dog"
    assert ranked[0][0] - ranked[1][0] > 1e-6
    assert score == pytest.approx(ranked[0][0], abs=1e-9)


@st.composite
def decoding_case(draw):
    pairs = draw(st.lists(st.tuples(st.text("abc", max_size=4), st.text("abc", min_size=1, max_size=4)), min_size=1, max_size=5))
    corpus = draw(st.lists(st.text("abc", max_size=5), min_size=1, max_size=4))
    obs = draw(st.text("abc", max_size=3))
    lam = draw(st.sampled_from([0.5, 1.0, 2.0]))
    return pairs, corpus, obs, lam


@given(decoding_case())
@settings(max_examples=40, deadline=None)
def test_wide_beam_matches_exhaustive_search(case):
    pairs, corpus, obs, lam = case
    assume(obs)
    ch = train_channel([TrainingPair(s, r) for s, r in pairs])
    lm = train_lm(corpus, order=3)
    out, score = decode_line(obs, ch, lm, BeamConfig(10_000, lam, 1))
    alphabet = set(obs) | ch.intended_vocab
    ranked = exhaustive_decode(obs, ch, lm, alphabet, 2 * len(obs) + 1, lam, 1)
    assert score == pytest.approx(ranked[0][0], abs=1e-9)
    # the returned string really achieves the returned score
    assert lm.score(out) + lam * channel_path_score(out, obs, ch, 1) == pytest.approx(score, abs=1e-9)
    if len(ranked) > 1 and ranked[0][0] - ranked[1][0] > 1e-9:
        assert out == ranked[0][1]


@pytest.fixture(scope="module")
def trained_models():
    from ocrfix.synth import noisy_pairs

    pairs = [TrainingPair(s, r) for s, r in noisy_pairs(300, seed=3, p=0.2)]
    return train_channel(pairs), train_lm([p.ref for p in pairs])


@given(st.integers(0, 10_000), st.integers(1, 6), st.integers(1, 24))
@settings(max_examples=60, deadline=None)
def test_wider_beam_never_scores_worse(trained_models, seed, narrow, extra):
    ch, lm = trained_models
    rng = random.Random(seed)
    alphabet = sorted(ch.observed_vocab)
    line = "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 18)))
    a = decode_line(line, ch, lm, BeamConfig(narrow))[1]
    b = decode_line(line, ch, lm, BeamConfig(narrow + extra))[1]
    assert b >= a - 1e-9


def test_decoding_is_deterministic(trained_models):
    ch, lm = trained_models
    line = "ḵaya gälē łoxa"
    assert decode_line(line, ch, lm) == decode_line(line, ch, lm)


def test_zero_channel_weight_follows_lm():
    ch = train_channel([TrainingPair("b", "a"), TrainingPair("a", "a"), TrainingPair("a", "b")])
    lm = train_lm(["aaaa"] * 5, order=2)
    assert correct_line("bbb", ch, lm, BeamConfig(8, 0.0)) == "aaa"


def test_beam_config_validation():
    with pytest.raises(ValueError):
        BeamConfig(0)
    with pytest.raises(ValueError):
        BeamConfig(4, -1.0)


def test_correct_document_keeps_geometry_when_count_unchanged():
    doc = Document(
        "d",
        (Page(1, (Line("a", (Token("xa", BBox(0, 0, 4, 4), "kwk"), Token("yb", None, "kwk"))), Line("b"))),),
    )
    out = correct_document(doc, lambda lines: [s.upper() for s in lines])
    toks = out.pages[0].lines[0].tokens
    assert [t.text for t in toks] == ["XA", "YB"]
    assert toks[0].bbox == BBox(0, 0, 4, 4)
    assert out.pages[0].lines[1].tokens == ()


def test_correct_document_retokenizes_on_count_change():
    doc = Document("d", (Page(1, (Line("a", (Token("xa", BBox(0, 0, 4, 4), "kwk"), Token("yb"))),)),))
    out = correct_document(doc, lambda lines: ["xayb"])
    (tok,) = out.pages[0].lines[0].tokens
    assert tok == Token("xayb", None, "kwk", False)


def test_correct_document_sends_only_non_empty_lines():
    seen = []

    def spy(lines):
        seen.extend(lines)
        return list(lines)

    doc = Document("d", (Page(1, (Line("a"), Line("b", (Token("q"),)))),))
    correct_document(doc, spy)
    assert seen == ["q"]


def test_beam_corrector_batch():
    run = beam_corrector(ChannelModel(), train_lm(["x"]))
    assert run(["ab", "", "c d"]) == ["ab", "", "c d"]
