"""Training examples for the discriminative LM from spoken-only text.

A span of spoken words that the grammar can produce is mapped back to every
written form that yields it and then forward again, giving the readings that
would compete with it had the written form been observed.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from . import fst as F
from .candidates import CandidateSet, Tokens

MAX_SPAN = 5
MAX_CANDIDATES = 10_000


@dataclass
class HallucinationConfig:
    max_span: int = MAX_SPAN
    max_candidates: int = MAX_CANDIDATES
    drop_singletons: bool = True


@dataclass(frozen=True)
class HallucinatedExample:
    sentence_id: int
    start: int
    span: Tokens
    candidates: tuple[Tokens, ...]
    history: Tokens

    @property
    def length(self) -> int:
        return len(self.span)

    @property
    def good(self) -> tuple[Tokens, ...]:
        return (self.span,)


class OutputMatcher:
    """Set-of-states simulation of the output side of a transducer.

    Answers "is this word sequence a complete output of V" for a growing
    prefix, so the longest matching span costs one pass over its characters.
    """

    def __init__(self, V: F.Fst):
        self.V = V
        self._by_out: list[dict[int, list[int]]] = []
        for q in V.states():
            table: dict[int, list[int]] = {}
            for _il, ol, _w, d in V.arcs(q):
                table.setdefault(ol, []).append(d)
            self._by_out.append(table)
        self._closure: dict[int, frozenset[int]] = {}

    def closure(self, q: int) -> frozenset[int]:
        c = self._closure.get(q)
        if c is None:
            seen = {q}
            stack = [q]
            while stack:
                s = stack.pop()
                for d in self._by_out[s].get(F.EPSILON, ()):
                    if d not in seen:
                        seen.add(d)
                        stack.append(d)
            c = self._closure[q] = frozenset(seen)
        return c

    def start(self) -> frozenset[int]:
        if self.V.start < 0:
            return frozenset()
        return self.closure(self.V.start)

    def advance(self, states: frozenset[int], text: str) -> frozenset[int]:
        for ch in text:
            lab = ord(ch)
            nxt: set[int] = set()
            for s in states:
                for d in self._by_out[s].get(lab, ()):
                    nxt |= self.closure(d)
            states = frozenset(nxt)
            if not states:
                break
        return states

    def accepts(self, states: frozenset[int]) -> bool:
        return any(self.V.is_final(s) for s in states)

    def longest_match(self, words: Sequence[str], start: int, max_span: int) -> int:
        """Length of the longest output of V starting at ``words[start]``, or 0."""
        best = 0
        states = self.start()
        for k in range(max_span):
            j = start + k
            if j >= len(words) or not states:
                break
            states = self.advance(states, (" " if k else "") + words[j])
            if states and self.accepts(states):
                best = k + 1
        return best


class Hallucinator:
    def __init__(self, V: F.Fst, config: HallucinationConfig | None = None):
        self.V = V
        self.Vinv = F.invert(V)
        self.config = config or HallucinationConfig()
        self.matcher = OutputMatcher(V)
        self._cache: dict[Tokens, tuple[Tokens, ...]] = {}

    def readings(self, span: Sequence[str]) -> tuple[Tokens, ...]:
        """Spoken forms reachable from any written source of ``span``."""
        span = tuple(span)
        hit = self._cache.get(span)
        if hit is not None:
            return hit
        written = F.project(F.compose(F.literal(" ".join(span)), self.Vinv), "output")
        lattice = F.project(F.compose(F.rmepsilon_optimize(written), self.V), "output")
        cap = self.config.max_candidates
        out: list[Tokens] = []
        seen: set[Tokens] = set()
        for p in F.nshortest(lattice, cap, unique=True):
            words = tuple(p.output_string.split())
            if words and words not in seen:
                seen.add(words)
                out.append(words)
        if span not in seen and out:
            # keep the observed span even when the cap cut it off
            if len(out) >= cap:
                out.pop()
            out.append(span)
        res = self._cache[span] = tuple(out)
        return res

    def spans(self, sentence: Sequence[str], sentence_id: int = 0) -> list[HallucinatedExample]:
        words = list(sentence)
        out = []
        i = 0
        while i < len(words):
            k = self.matcher.longest_match(words, i, self.config.max_span)
            if k == 0:
                i += 1
                continue
            span = tuple(words[i:i + k])
            cands = self.readings(span)
            if cands:
                out.append(HallucinatedExample(sentence_id, i, span, cands, tuple(words[:i])))
            i += k
        return out


def hallucinate_spans(sentence: Sequence[str], V: F.Fst | Hallucinator,
                      config: HallucinationConfig | None = None, sentence_id: int = 0) -> list[HallucinatedExample]:
    h = V if isinstance(V, Hallucinator) else Hallucinator(V, config)
    return h.spans(sentence, sentence_id)


def hallucinate_corpus(sentences: Iterable[Sequence[str]], V: F.Fst | Hallucinator,
                       config: HallucinationConfig | None = None) -> list[HallucinatedExample]:
    h = V if isinstance(V, Hallucinator) else Hallucinator(V, config)
    out = []
    for sid, s in enumerate(sentences):
        out.extend(h.spans(s, sid))
    return out


def to_training_examples(halls: Sequence[HallucinatedExample], drop_singletons: bool = True):
    """DisLM examples ``(history, CandidateSet, pass-through flags)``.

    No written token exists, so no candidate is flagged as pass-through.
    """
    out = []
    for h in halls:
        if drop_singletons and len(h.candidates) < 2:
            continue
        mask = tuple(c == h.span for c in h.candidates)
        cs = CandidateSet("", h.candidates, mask)
        out.append((h.history, cs, [False] * len(h.candidates)))
    return out


def write_dump(halls: Sequence[HallucinatedExample], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for h in halls:
            span = " ".join(h.span)
            for c in h.candidates:
                fh.write(f"{h.sentence_id}\t{h.start}\t{span}\t{' '.join(c)}\t{int(c == h.span)}\n")
