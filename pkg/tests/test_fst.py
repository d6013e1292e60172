import math
import random

import pytest

from textnorm import fst as F

from oracles import compose_rel, random_acyclic, ranked_paths, relation

N_RANDOM = 500


def rand_fsts(seed, n=N_RANDOM):
    rng = random.Random(seed)
    return [random_acyclic(F.Fst, rng) for _ in range(n)]


def as_nshortest_tuples(ps):
    return [(p.weight, p.output, p.input) for p in ps]


def test_compose_matches_relation_product():
    rng = random.Random(11)
    for _ in range(N_RANDOM):
        a = random_acyclic(F.Fst, rng)
        b = random_acyclic(F.Fst, rng)
        assert relation(F.compose(a, b)) == compose_rel(relation(a), relation(b))


@pytest.mark.parametrize("side", ["input", "output"])
def test_project(side):
    for f in rand_fsts(12):
        want = {}
        for (i, o), w in relation(f).items():
            k = (i, i) if side == "input" else (o, o)
            want[k] = min(w, want.get(k, math.inf))
        assert relation(F.project(f, side)) == want


def test_invert():
    for f in rand_fsts(13):
        assert relation(F.invert(f)) == {(o, i): w for (i, o), w in relation(f).items()}


def test_rmepsilon_preserves_relation():
    for f in rand_fsts(14):
        g = F.rmepsilon(f)
        assert relation(g) == relation(f)
        for q in g.states():
            assert all((il, ol) != (0, 0) for il, ol, _, _ in g.arcs(q))


@pytest.mark.parametrize("unique", [False, True])
def test_nshortest_matches_sorted_enumeration(unique):
    rng = random.Random(15)
    for f in rand_fsts(16):
        want = ranked_paths(f, unique)
        n = rng.randint(1, max(1, len(want) + 2))
        assert as_nshortest_tuples(F.nshortest(f, n, unique=unique)) == want[:n]


def test_nshortest_tie_order():
    # equal weights: ordered by output string, then input string
    f = F.union(F.cross("b", "y"), F.cross("a", "y"), F.cross("c", "x"))
    got = [(p.output_string, p.input_string) for p in F.nshortest(f, 3)]
    assert got == [("x", "c"), ("y", "a"), ("y", "b")]


def test_nshortest_rejects_cycles():
    with pytest.raises(F.CyclicFstError):
        F.nshortest(F.closure(F.literal("a")), 1)


def test_serialize_roundtrip_lossless():
    rng = random.Random(17)
    for _ in range(100):
        f = random_acyclic(F.Fst, rng, weights=(0.1, 1 / 3, 2.718281828459045, 1e-12))
        g = F.deserialize(F.serialize(f))
        assert F.serialize(g) == F.serialize(f)
        assert relation(g) == relation(f)


@pytest.mark.parametrize("text", ["", "FST x\n", "FST 0\nA 0 1 2\n", "FST 0\nA 0 1 97 97 nan\n", "nope\n"])
def test_deserialize_errors(text):
    with pytest.raises(F.FstParseError):
        F.deserialize(text)


def test_cross_and_closure_through_composition():
    f = F.closure(F.cross("ab", "x"))
    for n in range(4):
        out = F.nshortest(F.project(F.compose(F.literal("ab" * n), f), "output"), 5)
        assert [p.output_string for p in out] == ["x" * n]
    assert F.nshortest(F.compose(F.literal("aba"), f), 1) == []


def test_union_concat_weights():
    f = F.concat(F.literal("a", 1.0), F.union(F.literal("b", 2.0), F.literal("c", 0.5)))
    assert relation(F.rmepsilon(f)) == {(F.labels("ab"), F.labels("ab")): 3.0,
                                        (F.labels("ac"), F.labels("ac")): 1.5}


def test_optimize_keeps_relation():
    for f in rand_fsts(18, 100):
        assert relation(F.rmepsilon_optimize(f)) == relation(f)
