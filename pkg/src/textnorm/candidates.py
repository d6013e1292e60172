"""Candidate verbalizations for written tokens."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Sequence

import numpy as np

from . import fst as F
from ._accel import edit_distance_ids

if TYPE_CHECKING:  # pragma: no cover
    from .ngram import NgramLm

Tokens = tuple[str, ...]

DEFAULT_CAP = 100
RAW_LIMIT = 10_000


def edit_distance(a: Sequence[str], b: Sequence[str]) -> int:
    """Token-level Levenshtein distance with unit costs."""
    if tuple(a) == tuple(b):
        return 0
    ids: dict[str, int] = {}
    ia = np.fromiter((ids.setdefault(t, len(ids)) for t in a), dtype=np.int64, count=len(a))
    ib = np.fromiter((ids.setdefault(t, len(ids)) for t in b), dtype=np.int64, count=len(b))
    return edit_distance_ids(ia, ib)


@dataclass(frozen=True)
class CandidateSet:
    written: str
    candidates: tuple[Tokens, ...]
    good_mask: tuple[bool, ...] | None = None

    def __post_init__(self) -> None:
        if len(set(self.candidates)) != len(self.candidates):
            raise ValueError(f"duplicate candidates for {self.written!r}")
        if self.good_mask is not None and len(self.good_mask) != len(self.candidates):
            raise ValueError("good_mask length mismatch")

    @property
    def pass_through(self) -> Tokens:
        return (self.written,)

    @property
    def pass_through_index(self) -> int | None:
        try:
            return self.candidates.index(self.pass_through)
        except ValueError:
            return None

    def is_pass_through(self, k: int) -> bool:
        return self.candidates[k] == self.pass_through

    @property
    def good(self) -> list[Tokens]:
        if self.good_mask is None:
            return []
        return [c for c, g in zip(self.candidates, self.good_mask) if g]

    def __len__(self) -> int:
        return len(self.candidates)


def grammar_outputs(V: F.Fst, token: str, limit: int) -> list[Tokens]:
    """Distinct readings of ``token`` under ``V``, best first."""
    lattice = F.project(F.compose(F.literal(token), V), "output")
    out = []
    for path in F.nshortest(lattice, limit, unique=True):
        words = tuple(path.output_string.split())
        if words:
            out.append(words)
    return out


def _dedupe(seqs) -> list[Tokens]:
    seen: set[Tokens] = set()
    out = []
    for s in seqs:
        if s not in seen:
            seen.add(s)
            out.append(s)
    return out


def verbalize(V: F.Fst, token: str, limit: int = DEFAULT_CAP, lm: "NgramLm | None" = None) -> CandidateSet:
    """Grammar readings of ``token`` plus the token itself.

    With a pruning ``lm`` the grammar is queried up to ``RAW_LIMIT`` readings
    and cut to ``limit`` by LM score only when it produced more than that;
    otherwise the ``limit`` shortest paths are kept.
    """
    if limit < 1:
        raise ValueError("limit must be >= 1")
    if lm is None:
        readings = grammar_outputs(V, token, limit)
    else:
        readings = grammar_outputs(V, token, RAW_LIMIT)
        if len(readings) > limit:
            cs = CandidateSet(token, tuple(_dedupe(readings)))
            pruned = prune_candidates(cs, lm, limit)
            readings = list(pruned.candidates)
    cands = _dedupe(readings + [(token,)])
    return CandidateSet(token, tuple(cands))


class Verbalizer:
    """Memoizing wrapper around :func:`verbalize` for one grammar."""

    def __init__(self, V: F.Fst, limit: int = DEFAULT_CAP, lm: "NgramLm | None" = None):
        self.V = F.rmepsilon_optimize(V)
        self.limit = limit
        self.lm = lm
        self._cache: dict[str, CandidateSet] = {}

    def __call__(self, token: str) -> CandidateSet:
        cs = self._cache.get(token)
        if cs is None:
            cs = self._cache[token] = verbalize(self.V, token, self.limit, self.lm)
        return cs


def good_set(cands: CandidateSet, reference: Sequence[str]) -> CandidateSet:
    """Mark the candidates at minimum edit distance from ``reference``."""
    ref = tuple(reference)
    dists = [edit_distance(c, ref) for c in cands.candidates]
    best = min(dists)
    return replace(cands, good_mask=tuple(d == best for d in dists))


def prune_candidates(cands: CandidateSet, lm: "NgramLm", k: int) -> CandidateSet:
    """Keep the ``k`` best candidates by LM score, plus pass-through."""
    if k < 1:
        raise ValueError("k must be >= 1")
    pt = cands.pass_through_index
    others = [j for j in range(len(cands)) if j != pt]
    if len(others) <= k:
        return cands
    scored = sorted(others, key=lambda j: (-lm.score_sequence(cands.candidates[j]), j))
    keep = set(scored[:k])
    if pt is not None:
        keep.add(pt)
    idx = sorted(keep)
    mask = None if cands.good_mask is None else tuple(cands.good_mask[j] for j in idx)
    return CandidateSet(cands.written, tuple(cands.candidates[j] for j in idx), mask)
