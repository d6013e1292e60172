import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from textnorm.candidates import (
    CandidateSet,
    Verbalizer,
    edit_distance,
    good_set,
    prune_candidates,
    verbalize,
)
from textnorm.corpus import number_corpus
from textnorm.ngram import train_ngram

from oracles import levenshtein

tokens = st.lists(st.sampled_from(["a", "b", "c", "one", "two"]), max_size=7).map(tuple)


@pytest.fixture(scope="module")
def number_lm():
    return train_ngram(number_corpus(2000, seed=1), order=3, smoothing="witten-bell")


def test_am_reads_a_m(covering):
    assert ("a", "m") in verbalize(covering, "am").candidates


def test_out_of_domain_is_pass_through_only(covering):
    cs = verbalize(covering, "zzz")
    assert cs.candidates == (("zzz",),)
    assert cs.pass_through_index == 0


def test_123_readings(covering):
    cands = set(verbalize(covering, "123", limit=1000).candidates)
    for want in ("one hundred twenty three", "one two three", "one twenty three"):
        assert tuple(want.split()) in cands
    assert ("123",) in cands


def test_pass_through_is_last_and_unique(covering):
    cs = verbalize(covering, "9:00")
    assert cs.candidates[-1] == ("9:00",)
    assert len(set(cs.candidates)) == len(cs.candidates)


def test_verbalizer_memoizes(covering):
    v = Verbalizer(covering, 20)
    assert v("5") is v("5")


def test_duplicate_candidates_rejected():
    with pytest.raises(ValueError):
        CandidateSet("x", (("a",), ("a",)))


def test_good_set_examples():
    cs = CandidateSet("120", (("one", "twenty"), ("one", "hundred", "twenty"), ("120",)))
    assert good_set(cs, ("one", "twenty", "one")).good == [("one", "twenty")]
    assert good_set(cs, ("120",)).good_mask == (False, False, True)
    eq = CandidateSet("x", (("a",), ("b",)))
    assert good_set(eq, ("c",)).good_mask == (True, True)


def test_good_set_reordering_invariant():
    rng = random.Random(0)
    for _ in range(200):
        cands = list({tuple(rng.choice("abc") for _ in range(rng.randint(1, 3))) for _ in range(5)})
        ref = tuple(rng.choice("abc") for _ in range(rng.randint(0, 3)))
        a = good_set(CandidateSet("x", tuple(cands)), ref)
        rng.shuffle(cands)
        b = good_set(CandidateSet("x", tuple(cands)), ref)
        assert set(a.good) == set(b.good)


@given(tokens, tokens)
def test_edit_distance_matches_recursive_oracle(a, b):
    assert edit_distance(a, b) == levenshtein(a, b)


@given(tokens, tokens, tokens)
@settings(max_examples=200)
def test_edit_distance_is_a_metric(a, b, c):
    assert edit_distance(a, a) == 0
    assert edit_distance(a, b) == edit_distance(b, a)
    assert (edit_distance(a, b) == 0) == (a == b)
    assert edit_distance(a, c) <= edit_distance(a, b) + edit_distance(b, c)


def test_prune_identity_when_small(number_lm):
    cs = CandidateSet("12", (("twelve",), ("one", "two"), ("12",)))
    assert prune_candidates(cs, number_lm, 5) == cs


def test_prune_keeps_lm_preferred(number_lm):
    cs = CandidateSet("120", (("one", "two", "zero"), ("one", "twenty"), ("120",)))
    a = number_lm.score_sequence(("one", "twenty"))
    b = number_lm.score_sequence(("one", "two", "zero"))
    assert a > b
    assert prune_candidates(cs, number_lm, 1).candidates == (("one", "twenty"), ("120",))


def test_prune_k1_keeps_argmax(covering, number_lm):
    cs = verbalize(covering, "100000", limit=100)
    assert len(cs) > 30
    best = max((c for j, c in enumerate(cs.candidates) if not cs.is_pass_through(j)),
               key=number_lm.score_sequence)
    out = prune_candidates(cs, number_lm, 1)
    assert out.candidates == (best, ("100000",))


def test_prune_subset_and_size(covering, number_lm):
    cs = verbalize(covering, "100000", limit=100)
    for k in (1, 3, 10):
        out = prune_candidates(cs, number_lm, k)
        assert set(out.candidates) <= set(cs.candidates)
        assert len(out) <= k + 1
        assert out.pass_through_index is not None


def test_lm_pruning_engages_over_cap(covering, number_lm):
    raw = verbalize(covering, "100000", limit=10_000)
    capped = verbalize(covering, "100000", limit=10, lm=number_lm)
    assert len(raw) > 11 and len(capped) == 11
    assert set(capped.candidates) <= set(raw.candidates)
