import math
import random

import numpy as np
import pytest

from textnorm.candidates import CandidateSet, good_set
from textnorm.maxent import (
    DegenerateTrainingError,
    RankingExample,
    build_problem,
    regularized,
    train,
)
from textnorm.ranker import (
    LocalFeatureConfig,
    RankerModel,
    extract_local_features,
    load_ranker,
    rank,
    save_ranker,
    train_ranker,
)

from instances import dislm_instance, gradient_error, local_instance

WAKE = ["wake", "me", "at", "9:00", "am"]


# --- features -----------------------------------------------------------------


def test_wake_features():
    f = extract_local_features(WAKE, 3, ("nine",))
    assert f["ng nine"] == 1
    assert f["lb me at nine"] == 1
    assert f["rb nine am <pad>"] == 1
    for left in ("me", "at"):
        assert f[f"skL {left} nine"] == 1
    assert f["skR am nine"] == 1
    assert "bias" not in f
    # the 4-word window also reaches the first word
    assert f["skL wake nine"] == 1


def test_ngram_padding():
    f = extract_local_features(["x"], 0, ("a", "b"))
    assert {"ng a", "ng b", "ng <y> a", "ng a b", "ng b </y>", "ng <y> a b", "ng a b </y>"} <= set(f)
    assert "ng <y>" not in f and "ng </y>" not in f


def test_pass_through_bias():
    assert extract_local_features(WAKE, 1, ("me",))["bias"] == 1


def test_left_padding_at_start():
    f = extract_local_features(["12", "x"], 0, ("a", "b"))
    assert f["lb <pad> <pad> a"] == 1
    assert f["rb b x <pad>"] == 1


def test_templates_subset():
    f = extract_local_features(WAKE, 3, ("nine",), LocalFeatureConfig(templates=("bias",)))
    assert f == {}
    with pytest.raises(ValueError):
        LocalFeatureConfig(templates=("nope",))


def test_feature_extraction_bounds():
    with pytest.raises(IndexError):
        extract_local_features(WAKE, 5, ("x",))


# --- objective and gradient ---------------------------------------------------


def test_gradient_local_features():
    rng = random.Random(1)
    errs = [gradient_error(local_instance(rng), rng, l2=rng.choice((0.0, 0.1))) for _ in range(60)]
    assert max(errs) < 1e-4


@pytest.mark.parametrize("mode", ["fixed", "tuned"])
def test_gradient_dislm_features(mode):
    rng = random.Random(2)
    errs = [gradient_error(dislm_instance(rng, mode, rng.random() < 0.5), rng) for _ in range(60)]
    assert max(errs) < 1e-4


def test_loglik_at_zero():
    rng = random.Random(3)
    for _ in range(30):
        rows = local_instance(rng)
        p = build_problem([RankingExample(f, g, o) for f, g, o in rows])
        obj, _ = p.loglik(np.zeros(p.n_features))
        want = sum(math.log(sum(g) / len(g)) for _, g, _ in rows)
        assert obj == pytest.approx(want, abs=1e-12)
        w = np.array([rng.gauss(0, 3) for _ in range(p.n_features)])
        assert p.loglik(w)[0] <= 0


def test_separable_case():
    ex = RankingExample([{"good": 1.0}, {"other": 1.0}], [True, False])
    res = train(build_problem([ex]), max_iter=500)
    w = dict(zip(build_problem([ex]).index.names, res.weights))
    assert w["good"] > 0
    assert -1e-3 < res.objective <= 0


def test_objective_nondecreasing():
    rng = random.Random(4)
    rows = [r for _ in range(5) for r in local_instance(rng)]
    res = train(build_problem([RankingExample(f, g, o) for f, g, o in rows]), l2=0.01, max_iter=100)
    assert all(b >= a - 1e-12 for a, b in zip(res.history, res.history[1:]))


def test_strong_l2_shrinks_weights():
    rng = random.Random(5)
    rows = [r for _ in range(5) for r in local_instance(rng)]
    p = build_problem([RankingExample(f, g, o) for f, g, o in rows])
    norms = [np.abs(train(p, l2=l2, max_iter=300).weights).max() for l2 in (0.01, 1.0, 100.0)]
    assert norms[0] > norms[1] > norms[2] and norms[2] < 1e-2


def test_degenerate_training():
    ex = RankingExample([{"a": 1.0}, {"b": 1.0}], [True, True])
    with pytest.raises(DegenerateTrainingError):
        train(build_problem([ex]))


def test_frozen_coordinates_stay():
    ex = RankingExample([{"a": 1.0}, {"b": 1.0}], [True, False])
    p = build_problem([ex])
    frozen = np.array([True, False])
    res = train(p, init=np.array([0.5, 0.0]), frozen=frozen, max_iter=50)
    assert res.weights[0] == 0.5
    _, g = regularized(p, res.weights, 0.0, frozen=frozen)
    assert g[0] == 0.0


# --- training and inference -----------------------------------------------------


def wake_examples():
    sents = [
        (["wake", "me", "at", "9:00", "am"], 3, ("nine",)),
        (["call", "at", "9:00", "pm"], 2, ("nine",)),
        (["it", "is", "9:00"], 2, ("nine", "o'clock")),
        (["the", "show", "is", "at", "9:00"], 4, ("nine", "o'clock")),
    ]
    out = []
    for s, i, ref in sents:
        cs = CandidateSet(s[i], (("nine",), ("nine", "o'clock"), (s[i],)))
        out.append((s, i, good_set(cs, ref)))
    return out


def test_ranker_learns_context():
    model = train_ranker(wake_examples(), l2=0.01, max_iter=300)
    for s, i, cs in wake_examples():
        assert cs.good_mask[rank(model, s, i, cs)]


def test_rank_singleton_and_ties():
    model = RankerModel({})
    cs = CandidateSet("x", (("x",),))
    assert rank(model, ["x"], 0, cs) == 0
    cs2 = CandidateSet("x", (("a",), ("b",), ("x",)))
    assert rank(model, ["x"], 0, cs2) == 0


def test_rank_matches_enumeration():
    rng = random.Random(6)
    for _ in range(100):
        sentence = [rng.choice("xyz") for _ in range(4)]
        i = rng.randrange(4)
        cands = tuple(sorted({tuple(rng.choice("ab") for _ in range(rng.randint(1, 3))) for _ in range(4)}))
        weights = {}
        for y in cands:
            for k in extract_local_features(sentence, i, y):
                weights.setdefault(k, rng.gauss(0, 1))
        model = RankerModel(weights)
        cs = CandidateSet(sentence[i], cands)
        scores = [sum(weights.get(k, 0) * v for k, v in extract_local_features(sentence, i, y).items())
                  for y in cands]
        assert rank(model, sentence, i, cs) == scores.index(max(scores))


def test_shift_invariance():
    rng = random.Random(7)
    for _ in range(30):
        rows = local_instance(rng)
        plain = build_problem([RankingExample(f, g, o) for f, g, o in rows])
        c = rng.uniform(-5, 5)
        moved = build_problem([RankingExample(f, g, [x + c for x in o]) for f, g, o in rows])
        w = np.array([rng.gauss(0, 1) for _ in range(plain.n_features)])
        (a, ga), (b, gb) = plain.loglik(w), moved.loglik(w)
        assert a == pytest.approx(b, abs=1e-9) and np.allclose(ga, gb, atol=1e-9)


def test_train_ranker_rejects_bad_examples():
    s, i, cs = wake_examples()[0]
    with pytest.raises(ValueError):
        train_ranker([(s, i, CandidateSet("9:00", (("9:00",),), (True,)))])
    with pytest.raises(ValueError):
        train_ranker([(s, i, CandidateSet("9:00", (("a",), ("b",))))])


def test_save_load_roundtrip(tmp_path):
    model = train_ranker(wake_examples(), l2=0.01)
    p = tmp_path / "r.tsv"
    save_ranker(model, p)
    back = load_ranker(p)
    assert back.weights == model.weights and back.config == model.config
    assert back.l2 == model.l2


def test_load_rejects_garbage(tmp_path):
    p = tmp_path / "bad.tsv"
    p.write_text("a\tb\tc\n")
    with pytest.raises(ValueError):
        load_ranker(p)
