"""Backoff n-gram language models over spoken tokens.

Models are kept in backoff form: for each context ``h`` a table of explicit
probabilities for seen successors plus a backoff weight ``alpha(h)`` that
scales the lower-order distribution for everything else.  Probabilities are
natural-log scored; the ARPA writer converts to log10.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

BOS, EOS, UNK = "<s>", "</s>", "<unk>"
SMOOTHING = ("katz", "witten-bell")

KATZ_K = 5
# Contexts whose seen successors would take all the probability mass keep at
# least this much for backoff.
MIN_LEFTOVER = 1e-4
ABSOLUTE_FALLBACK = 0.5
# Katz unigram probability of the unknown word; seen words share the rest.
UNK_FLOOR = 1e-10

Context = tuple[str, ...]


class EmptyCorpusError(ValueError):
    pass


class Vocabulary:
    """Word <-> id bijection with the three reserved symbols at ids 0..2."""

    def __init__(self, words: Iterable[str] = ()):
        self.words: list[str] = [BOS, EOS, UNK]
        self.ids: dict[str, int] = {w: i for i, w in enumerate(self.words)}
        for w in words:
            self.add(w)

    def add(self, word: str) -> int:
        i = self.ids.get(word)
        if i is None:
            i = self.ids[word] = len(self.words)
            self.words.append(word)
        return i

    def id(self, word: str) -> int:
        return self.ids.get(word, self.ids[UNK])

    def word(self, i: int) -> str:
        return self.words[i]

    def __contains__(self, word: str) -> bool:
        return word in self.ids

    def __len__(self) -> int:
        return len(self.words)


@dataclass
class NgramLm:
    order: int
    smoothing: str
    vocab: Vocabulary
    probs: dict[Context, dict[str, float]]  # context -> successor -> P
    alpha: dict[Context, float]
    counts: dict[Context, Counter] = field(default_factory=dict, repr=False)

    def _norm(self, w: str) -> str:
        return w if w in self.probs[()] else UNK

    def prob(self, word: str, context: Sequence[str] = ()) -> float:
        w = self._norm(word)
        h = tuple(context)[-(self.order - 1):] if self.order > 1 else ()
        h = tuple(c if c == BOS or c in self.probs[()] else UNK for c in h)
        mult = 1.0
        while True:
            table = self.probs.get(h)
            if table is not None and w in table:
                return mult * table[w]
            mult *= self.alpha.get(h, 1.0)
            h = h[1:]

    def logprob(self, word: str, context: Sequence[str] = ()) -> float:
        return math.log(self.prob(word, context))

    def state(self, context: Sequence[str]) -> Context:
        """The history that matters for the next prediction."""
        if self.order == 1:
            return ()
        return tuple(context)[-(self.order - 1):]

    def predicted_words(self) -> list[str]:
        return list(self.probs[()])

    def contexts(self) -> list[Context]:
        return list(self.probs)

    def score_sequence(self, tokens: Sequence[str]) -> float:
        return score_sequence(self, tokens)


def _count(sentences: Sequence[Sequence[str]], order: int) -> dict[int, dict[Context, Counter]]:
    counts: dict[int, dict[Context, Counter]] = {n: defaultdict(Counter) for n in range(1, order + 1)}
    for sent in sentences:
        toks = [BOS, *sent, EOS]
        for i in range(1, len(toks)):
            for n in range(1, order + 1):
                if i - n + 1 < 0:
                    break
                h = tuple(toks[i - n + 1:i])
                counts[n][h][toks[i]] += 1
    return counts


def good_turing_discounts(count_of_counts: Counter, k: int = KATZ_K) -> dict[int, float]:
    """Katz discount ratios d_r for r = 1..k.

    Falls back to absolute discounting ``(r - D) / r`` when the Good-Turing
    estimates fall outside (0, 1], which happens on small or unusual counts.
    """
    n = count_of_counts
    d: dict[int, float] = {}
    n1 = n.get(1, 0)
    ok = n1 > 0
    if ok:
        big = (k + 1) * n.get(k + 1, 0) / n1
        if big >= 1.0:
            ok = False
        else:
            for r in range(1, k + 1):
                if n.get(r, 0) == 0:
                    continue
                dr = ((r + 1) * n.get(r + 1, 0) / (r * n[r]) - big) / (1.0 - big)
                if not (0.0 < dr <= 1.0):
                    ok = False
                    break
                d[r] = dr
    if ok and d:
        return d
    return {r: (r - ABSOLUTE_FALLBACK) / r for r in range(1, k + 1)}


def _with_leftover(table: dict[str, float]) -> tuple[dict[str, float], float]:
    left = 1.0 - sum(table.values())
    if left < MIN_LEFTOVER:
        scale = (1.0 - MIN_LEFTOVER) / sum(table.values())
        table = {w: p * scale for w, p in table.items()}
        left = MIN_LEFTOVER
    return table, left


def train_ngram(sentences: Sequence[Sequence[str]], order: int = 3, smoothing: str = "katz") -> NgramLm:
    if order not in (1, 2, 3):
        raise ValueError("order must be 1, 2 or 3")
    if smoothing not in SMOOTHING:
        raise ValueError(f"unknown smoothing {smoothing!r}")
    sentences = [list(s) for s in sentences]
    if not sentences:
        raise EmptyCorpusError("cannot train a language model on an empty corpus")
    counts = _count(sentences, order)
    vocab = Vocabulary(w for w in counts[1][()] if w != EOS)
    words = [w for w in vocab.words if w != BOS]  # predicted types, incl. </s> and <unk>

    probs: dict[Context, dict[str, float]] = {}
    alpha: dict[Context, float] = {}
    uni = counts[1][()]
    total = sum(uni.values())

    if smoothing == "katz":
        disc = {n: good_turing_discounts(Counter(c for ctr in counts[n].values() for c in ctr.values()))
                for n in counts}

        def dr(n: int, c: int) -> float:
            return disc[n].get(c, 1.0) if c <= KATZ_K else 1.0

        seen = {w: (1.0 - UNK_FLOOR) * c / total for w, c in uni.items()}
        unseen = [w for w in words if w not in seen]  # at least <unk>
        for w in unseen:
            seen[w] = UNK_FLOOR / len(unseen)
        probs[()] = seen
        for n in range(2, order + 1):
            for h, ctr in counts[n].items():
                ch = sum(ctr.values())
                table = {w: dr(n, c) * c / ch for w, c in ctr.items()}
                table, left = _with_leftover(table)
                lower = h[1:]
                probs[h] = table
                alpha[h] = left / max(_unseen_mass(probs, alpha, table, lower, words), 1e-300)
    else:
        types = len(uni)
        base = 1.0 / len(words)
        probs[()] = {w: (uni.get(w, 0) + types * base) / (total + types) for w in words}
        for n in range(2, order + 1):
            for h, ctr in counts[n].items():
                ch = sum(ctr.values())
                t = len(ctr)
                lower = h[1:]
                probs[h] = {w: (c + t * _lookup(probs, alpha, w, lower)) / (ch + t) for w, c in ctr.items()}
                alpha[h] = t / (ch + t)
    flat = {h: ctr for n in counts for h, ctr in counts[n].items()}
    return NgramLm(order, smoothing, vocab, probs, alpha, flat)


def _unseen_mass(probs, alpha, table, lower: Context, words) -> float:
    """Lower-order mass of the words missing from ``table``.

    Summed directly when most words are present, since ``1 - seen`` cancels
    badly when the remainder is close to the unknown-word floor.
    """
    if 2 * len(table) < len(words):
        return 1.0 - sum(_lookup(probs, alpha, w, lower) for w in table)
    return sum(_lookup(probs, alpha, w, lower) for w in words if w not in table)


def _lookup(probs, alpha, w: str, h: Context) -> float:
    mult = 1.0
    while True:
        table = probs.get(h)
        if table is not None and w in table:
            return mult * table[w]
        mult *= alpha.get(h, 1.0)
        h = h[1:]


def score_sequence(lm: NgramLm, tokens: Sequence[str]) -> float:
    """Natural-log probability of ``tokens`` as a full sentence."""
    hist: list[str] = [BOS]
    total = 0.0
    for w in list(tokens) + [EOS]:
        total += lm.logprob(w, hist)
        hist.append(w)
    return total


def baseline_decode(sentence: Sequence, lm: NgramLm) -> list[int]:
    """Index of the chosen candidate per token, maximizing the sentence score.

    Viterbi over the last ``order - 1`` emitted words.  Among equal scores the
    lexicographically smallest index tuple wins, i.e. earlier candidates.
    """
    width = lm.order - 1
    beams: dict[Context, tuple[float, tuple[int, ...]]] = {(BOS,)[-width:] if width else (): (0.0, ())}
    for cs in sentence:
        cands = cs.candidates
        if not cands:
            raise ValueError(f"empty candidate set for {cs.written!r}")
        nxt: dict[Context, tuple[float, tuple[int, ...]]] = {}
        for state, (score, path) in beams.items():
            for j, y in enumerate(cands):
                s = score
                h = list(state)
                for w in y:
                    s += lm.logprob(w, h if h else [BOS])
                    h.append(w)
                ns = tuple(h[-width:]) if width else ()
                cand = (s, path + (j,))
                cur = nxt.get(ns)
                if cur is None or _better(cand, cur):
                    nxt[ns] = cand
        beams = nxt
    best = None
    for state, (score, path) in beams.items():
        cand = (score + lm.logprob(EOS, list(state) if state else [BOS]), path)
        if best is None or _better(cand, best):
            best = cand
    return list(best[1])


def _better(a, b) -> bool:
    return a[0] > b[0] or (a[0] == b[0] and a[1] < b[1])


# --- ARPA ------------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(x)


def write_arpa(lm: NgramLm, path: str | Path) -> None:
    by_order: dict[int, list[tuple[Context, float, float | None]]] = defaultdict(list)
    by_order[1].append(((BOS,), -99.0, None))
    for h, table in lm.probs.items():
        for w, p in table.items():
            by_order[len(h) + 1].append((h + (w,), math.log10(p), None))
    rows: dict[int, list[str]] = {}
    for n, entries in by_order.items():
        lines = []
        for gram, lp, _ in sorted(entries, key=lambda e: e[0]):
            a = lm.alpha.get(gram)
            line = f"{_fmt(lp)}\t{' '.join(gram)}"
            if a is not None and n < lm.order:
                line += f"\t{_fmt(math.log10(a)) if a > 0 else '-99'}"
            lines.append(line)
        rows[n] = lines
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# smoothing={lm.smoothing}\n\n\\data\\\n")
        for n in range(1, lm.order + 1):
            fh.write(f"ngram {n}={len(rows.get(n, []))}\n")
        for n in range(1, lm.order + 1):
            fh.write(f"\n\\{n}-grams:\n")
            for line in rows.get(n, []):
                fh.write(line + "\n")
        fh.write("\n\\end\\\n")


def read_arpa(path: str | Path) -> NgramLm:
    probs: dict[Context, dict[str, float]] = defaultdict(dict)
    alpha: dict[Context, float] = {}
    smoothing = "katz"
    order = 0
    section = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if line.startswith("# smoothing="):
                smoothing = line.split("=", 1)[1]
                continue
            if not line or line.startswith("#"):
                continue
            if line == "\\data\\":
                section = "data"
            elif line == "\\end\\":
                break
            elif line.startswith("\\") and line.endswith("-grams:"):
                section = int(line[1:-len("-grams:")])
            elif section == "data":
                if not line.startswith("ngram "):
                    raise ValueError(f"{path}:{lineno}: bad header line")
                order = max(order, int(line[6:].split("=")[0]))
            elif isinstance(section, int):
                parts = line.split("\t") if "\t" in line else line.split()
                if "\t" in line:
                    lp, gram_s, *rest = parts
                    gram = tuple(gram_s.split(" "))
                else:
                    lp, gram, rest = parts[0], tuple(parts[1:section + 1]), parts[section + 1:]
                if len(gram) != section:
                    raise ValueError(f"{path}:{lineno}: expected a {section}-gram")
                lpf = float(lp)
                if gram != (BOS,):
                    probs[gram[:-1]][gram[-1]] = 10.0 ** lpf
                if rest:
                    b = float(rest[0])
                    alpha[gram] = 0.0 if b <= -99 else 10.0 ** b
            else:
                raise ValueError(f"{path}:{lineno}: unexpected content")
    if () not in probs:
        raise ValueError(f"{path}: no unigrams")
    vocab = Vocabulary(w for w in probs[()] if w not in (EOS, UNK))
    return NgramLm(order, smoothing, vocab, dict(probs), alpha, {})
