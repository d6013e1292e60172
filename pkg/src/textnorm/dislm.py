"""Discriminative language model over spoken n-gram suffixes.

A candidate ``y`` for a token is scored by the weights of every n-gram
(n = 1..order) that ends at one of its words, with left context taken from
``y`` itself, then the spoken history, then padding.  In boundary mode a
``<p>`` marker separates token segments.  A pass-through candidate also gets
the bias weight.

The weights compile into a deterministic word automaton whose states are the
contexts that matter.  Missing arcs are handled by failure arcs: a failure
arc is taken only when the current state has no arc for the next word, which
keeps the score exact for weights of either sign.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import fst as F
from .candidates import CandidateSet
from .maxent import DegenerateTrainingError, FeatureIndex, RankingExample, build_problem, train

PAD = "<pad>"
MARKER = "<p>"
BIAS = "<bias>"
RESERVED = (PAD, MARKER, BIAS)
FIXED_BIAS = -10.0

# Labels used by the encoded automaton besides word ids.
PHI = -1  # failure: follow when no arc matches
RHO = -2  # at the root: any word without its own arc

Gram = tuple[str, ...]
History = Sequence[Sequence[str]]


@dataclass
class DisLmConfig:
    order: int = 3
    bias_mode: str = "fixed"  # fixed | tuned
    bias: float = FIXED_BIAS
    boundary: bool = False
    l2: float = 0.0
    max_iter: int = 200
    tol: float = 1e-5

    def __post_init__(self) -> None:
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if self.bias_mode not in ("fixed", "tuned"):
            raise ValueError(f"unknown bias mode {self.bias_mode!r}")


@dataclass
class DisLmModel:
    weights: dict[Gram, float]
    bias: float = FIXED_BIAS
    bias_mode: str = "fixed"
    boundary: bool = False
    order: int = 3
    iterations: int = 0
    objective: float = 0.0
    _automaton: "Automaton | None" = field(default=None, repr=False, compare=False)

    @property
    def marker(self) -> str:
        return MARKER

    def automaton(self) -> "Automaton":
        if self._automaton is None:
            self._automaton = Automaton.from_fst(encode_as_fst(self))
        return self._automaton

    def score(self, history: History, y: Sequence[str], pass_through: bool) -> float:
        fv = extract_dislm_features(history, y, pass_through, self)
        total = sum(self.weights.get(_split(k), 0.0) * v for k, v in fv.items() if k != BIAS)
        return total + (self.bias if pass_through else 0.0)


def _split(name: str) -> Gram:
    return tuple(name.split(" "))


def _segments(history) -> list[tuple[str, ...]]:
    if isinstance(history, str):
        raise TypeError("history must be a sequence of tokens or of token segments")
    items = list(history)
    if all(isinstance(t, str) for t in items):
        return [tuple(items)] if items else []
    return [tuple(s) for s in items if len(s)]


def context_sequence(history, boundary: bool) -> list[str]:
    """Flattened left context, with markers between segments in boundary mode."""
    out: list[str] = []
    for seg in _segments(history):
        out.extend(seg)
        if boundary:
            out.append(MARKER)
    return out


def extract_dislm_features(history, y: Sequence[str], pass_through: bool, config) -> dict[str, int]:
    """Suffix n-gram counts for ``y`` after ``history``; names are space-joined grams."""
    order = config.order
    seq = context_sequence(history, config.boundary)
    start = len(seq)
    seq.extend(y)
    feats: Counter[str] = Counter()
    for q in range(start, len(seq)):
        for n in range(1, order + 1):
            lo = q - n + 1
            gram = [PAD] * max(0, -lo) + seq[max(lo, 0):q + 1]
            feats[" ".join(gram)] += 1
    if pass_through:
        feats[BIAS] += 1
    return dict(feats)


DisLmExample = tuple[History, CandidateSet, Sequence[bool]]


def _check_tokens(words) -> None:
    for w in words:
        if w in RESERVED:
            raise ValueError(f"reserved token {w!r} appears in the data")


def train_dislm(examples: Sequence[DisLmExample], config: DisLmConfig | None = None) -> DisLmModel:
    cfg = config or DisLmConfig()
    rows = []
    for history, cs, flags in examples:
        if len(cs) < 2:
            raise ValueError(f"training example for {cs.written!r} has a single candidate")
        if cs.good_mask is None or not any(cs.good_mask):
            raise ValueError(f"training example for {cs.written!r} has no good candidate")
        flags = list(flags)
        if len(flags) != len(cs):
            raise ValueError("pass-through flags and candidates differ in length")
        for seg in _segments(history):
            _check_tokens(seg)
        for y in cs.candidates:
            _check_tokens(y)
        feats = []
        offsets = []
        for y, pt in zip(cs.candidates, flags):
            fv = extract_dislm_features(history, y, pt, cfg)
            if cfg.bias_mode == "fixed":
                fv.pop(BIAS, None)
                offsets.append(cfg.bias if pt else 0.0)
            else:
                offsets.append(0.0)
            feats.append(fv)
        rows.append(RankingExample(feats, list(cs.good_mask), offsets))
    if not rows:
        raise DegenerateTrainingError("no training examples")
    index = FeatureIndex([BIAS] if cfg.bias_mode == "tuned" else [])
    problem = build_problem(rows, index)
    init = np.zeros(problem.n_features)
    penalized = np.ones(problem.n_features)
    if cfg.bias_mode == "tuned":
        init[0] = cfg.bias
        penalized[0] = 0.0
    res = train(problem, l2=cfg.l2, max_iter=cfg.max_iter, tol=cfg.tol, init=init, penalized=penalized)
    weights: dict[Gram, float] = {}
    bias = cfg.bias
    for name, w in zip(problem.index.names, res.weights):
        if name == BIAS:
            bias = float(w)
        else:
            weights[_split(name)] = float(w)
    return DisLmModel(weights, bias, cfg.bias_mode, cfg.boundary, cfg.order, res.iterations, res.objective)


# --- automaton ---------------------------------------------------------------


def _states(model: DisLmModel) -> set[Gram]:
    """Suffixes of prefixes of weighted n-grams, up to order - 1 words."""
    width = model.order - 1
    qs: set[Gram] = {()}
    for g in model.weights:
        for k in range(1, min(len(g), width + 1)):
            p = g[:k]
            for s in range(k):
                qs.add(p[s:])
    return qs


def _longest_suffix(h: Gram, qs: set[Gram]) -> Gram:
    for s in range(len(h) + 1):
        if h[s:] in qs:
            return h[s:]
    return ()


def encode_as_fst(model: DisLmModel) -> F.Fst:
    """Word automaton; arc weights are negated scores so lower is better.

    Labels are ids in the attached symbol table, plus ``PHI`` failure arcs
    and a ``RHO`` self-loop at the empty context.
    """
    width = model.order - 1
    qs = _states(model)
    order_qs = sorted(qs, key=lambda h: (len(h), h))
    syms = F.SymbolTable()
    vocab = sorted({w for g in model.weights for w in g} - {PAD})
    for w in vocab:
        syms.add(w)
    out = F.Fst()
    out.symbols = syms
    sid = {h: out.add_state() for h in order_qs}
    start_ctx = _longest_suffix((PAD,) * width, qs)
    out.set_start(sid[start_ctx])
    by_context: dict[Gram, set[str]] = {}
    for g in model.weights:
        by_context.setdefault(g[:-1], set()).add(g[-1])
    for h in order_qs:
        q = sid[h]
        out.set_final(q, 0.0)
        nexts = set(by_context.get(h, ()))
        nexts |= {p[-1] for p in qs if len(p) == len(h) + 1 and p[:-1] == h}
        nexts.discard(PAD)
        for a in sorted(nexts):
            full = h + (a,)
            score = sum(model.weights.get(full[s:], 0.0) for s in range(len(full)))
            dest = _longest_suffix(full[-width:] if width else (), qs)
            lab = syms.find(a)
            out.add_arc(q, lab, lab, -score, sid[dest])
        if h:
            out.add_arc(q, PHI, PHI, 0.0, sid[h[1:]])
        else:
            out.add_arc(q, RHO, RHO, 0.0, q)
    return out


class Automaton:
    """Walker over an encoded automaton with failure semantics."""

    def __init__(self, arcs: list[dict[str, tuple[float, int]]], fail: list[int], start: int):
        self.arcs = arcs
        self.fail = fail
        self.start = start
        self._memo: dict[tuple[int, str], tuple[float, int]] = {}

    @classmethod
    def from_fst(cls, f: F.Fst) -> "Automaton":
        arcs: list[dict[str, tuple[float, int]]] = []
        fail: list[int] = []
        for q in range(f.num_states):
            table: dict[str, tuple[float, int]] = {}
            back = -1
            for il, _ol, w, dst in f.arcs(q):
                if il == PHI:
                    back = dst
                elif il == RHO:
                    back = -1
                else:
                    table[f.symbols.symbol(il)] = (w, dst)
            arcs.append(table)
            fail.append(back)
        return cls(arcs, fail, f.start)

    def step(self, q: int, word: str) -> tuple[float, int]:
        """Cost of reading ``word`` in state ``q`` and the next state."""
        key = (q, word)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        cost = 0.0
        s = q
        while True:
            arc = self.arcs[s].get(word)
            if arc is not None:
                res = (cost + arc[0], arc[1])
                break
            if self.fail[s] < 0:
                res = (cost, s)
                break
            s = self.fail[s]
        self._memo[key] = res
        return res

    def cost(self, words: Sequence[str], q: int | None = None) -> tuple[float, int]:
        q = self.start if q is None else q
        total = 0.0
        for w in words:
            c, q = self.step(q, w)
            total += c
        return total, q


def sequence_cost(f: F.Fst, words: Sequence[str]) -> float:
    """Weight of ``words`` under an encoded automaton."""
    return Automaton.from_fst(f).cost(list(words))[0]


def decode_sentence(model: DisLmModel, cand_sets: Sequence[CandidateSet]) -> list[int]:
    """Jointly best candidate index per token.

    Exact dynamic programming over (token, automaton state); among equal
    scores the lexicographically smallest index tuple wins.
    """
    auto = model.automaton()
    beams: dict[int, tuple[float, tuple[int, ...]]] = {auto.start: (0.0, ())}
    for i, cs in enumerate(cand_sets):
        if len(cs) == 0:
            raise ValueError(f"empty candidate set for {cs.written!r}")
        nxt: dict[int, tuple[float, tuple[int, ...]]] = {}
        for q, (score, path) in beams.items():
            if model.boundary and i > 0:
                c, q = auto.step(q, MARKER)
                base = score - c
            else:
                base = score
            for j, y in enumerate(cs.candidates):
                c, q2 = auto.cost(y, q)
                s = base - c
                if cs.is_pass_through(j):
                    s += model.bias
                cand = (s, path + (j,))
                cur = nxt.get(q2)
                if cur is None or cand[0] > cur[0] or (cand[0] == cur[0] and cand[1] < cur[1]):
                    nxt[q2] = cand
        beams = nxt
    best = min(beams.values(), key=lambda t: (-t[0], t[1]))
    return list(best[1])


def joint_score(model: DisLmModel, cand_sets: Sequence[CandidateSet], choice: Sequence[int]) -> float:
    """Direct feature-based score of one joint assignment."""
    total = 0.0
    history: list[tuple[str, ...]] = []
    for cs, j in zip(cand_sets, choice):
        y = cs.candidates[j]
        total += model.score(history, y, cs.is_pass_through(j))
        history.append(y)
    return total


# --- model file ---------------------------------------------------------------


def save_dislm(model: DisLmModel, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# textnorm dislm\n")
        fh.write(f"# order={model.order}\n# bias_mode={model.bias_mode}\n# bias={model.bias!r}\n")
        fh.write(f"# boundary={'marker' if model.boundary else 'none'}\n")
        fh.write(f"# iterations={model.iterations}\n# objective={model.objective!r}\n")
        for g in sorted(model.weights):
            fh.write(f"{' '.join(g)}\t{model.weights[g]!r}\n")


def load_dislm(path: str | Path) -> DisLmModel:
    header: dict[str, str] = {}
    weights: dict[Gram, float] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if line.startswith("#"):
                if "=" in line:
                    k, v = line[1:].strip().split("=", 1)
                    header[k] = v
                continue
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected n-gram<TAB>weight")
            try:
                weights[_split(parts[0])] = float(parts[1])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: bad weight {parts[1]!r}") from None
    if "order" not in header:
        raise ValueError(f"{path}: not a dislm model (missing header)")
    return DisLmModel(weights, float(header.get("bias", FIXED_BIAS)), header.get("bias_mode", "fixed"),
                      header.get("boundary", "none") == "marker", int(header["order"]),
                      int(header.get("iterations", 0)), float(header.get("objective", 0.0)))
