"""Local maximum-entropy ranking of each token's candidates.

Feature names are space-separated: a template id followed by the words it
ties together.  Words never contain spaces, so names are unambiguous.

    ng   output n-grams (n = 1..3) of the candidate padded with <y> ... </y>
    lb   (x[i-2], x[i-1], first output word)
    rb   (last output word, x[i+1], x[i+2])
    skL  (written word to the left within the window, output word)
    skR  (written word to the right within the window, output word)
    bias candidate equals the written token
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .candidates import CandidateSet
from .maxent import DegenerateTrainingError, RankingExample, build_problem, dot, train

PAD = "<pad>"
Y_BEGIN, Y_END = "<y>", "</y>"
BIAS = "bias"

TEMPLATES = ("ngram", "boundary", "skip", "bias")


@dataclass
class LocalFeatureConfig:
    templates: tuple[str, ...] = TEMPLATES
    max_n: int = 3
    window: int = 4

    def __post_init__(self) -> None:
        bad = set(self.templates) - set(TEMPLATES)
        if bad:
            raise ValueError(f"unknown templates {sorted(bad)}")


def extract_local_features(sentence: Sequence[str], i: int, y: Sequence[str],
                           config: LocalFeatureConfig | None = None) -> dict[str, int]:
    cfg = config or LocalFeatureConfig()
    if not 0 <= i < len(sentence):
        raise IndexError(f"position {i} outside a sentence of {len(sentence)} tokens")
    y = tuple(y)
    feats: Counter[str] = Counter()

    def x(j: int) -> str:
        return sentence[j] if 0 <= j < len(sentence) else PAD

    if "ngram" in cfg.templates:
        padded = (Y_BEGIN, *y, Y_END)
        for n in range(1, cfg.max_n + 1):
            for s in range(len(padded) - n + 1):
                gram = padded[s:s + n]
                if n == 1 and gram[0] in (Y_BEGIN, Y_END):
                    continue
                feats["ng " + " ".join(gram)] += 1
    if "boundary" in cfg.templates and y:
        feats[f"lb {x(i - 2)} {x(i - 1)} {y[0]}"] += 1
        feats[f"rb {y[-1]} {x(i + 1)} {x(i + 2)}"] += 1
    if "skip" in cfg.templates:
        for d in range(1, cfg.window + 1):
            for side, j in (("skL", i - d), ("skR", i + d)):
                if 0 <= j < len(sentence):
                    for w in y:
                        feats[f"{side} {sentence[j]} {w}"] += 1
    if "bias" in cfg.templates and y == (sentence[i],):
        feats[BIAS] += 1
    return dict(feats)


@dataclass
class RankerModel:
    weights: dict[str, float]
    config: LocalFeatureConfig = field(default_factory=LocalFeatureConfig)
    l2: float = 0.0
    iterations: int = 0
    objective: float = 0.0

    def score(self, sentence: Sequence[str], i: int, y: Sequence[str]) -> float:
        return dot(self.weights, extract_local_features(sentence, i, y, self.config))


RankerExample = tuple[Sequence[str], int, CandidateSet]


def train_ranker(examples: Sequence[RankerExample], l2: float = 0.0, max_iter: int = 200,
                 config: LocalFeatureConfig | None = None, tol: float = 1e-5) -> RankerModel:
    cfg = config or LocalFeatureConfig()
    rows = []
    for sentence, i, cs in examples:
        if len(cs) < 2:
            raise ValueError(f"training example for {cs.written!r} has a single candidate")
        if cs.good_mask is None or not any(cs.good_mask):
            raise ValueError(f"training example for {cs.written!r} has no good candidate")
        feats = [extract_local_features(sentence, i, y, cfg) for y in cs.candidates]
        rows.append(RankingExample(feats, list(cs.good_mask)))
    if not rows:
        raise DegenerateTrainingError("no training examples")
    problem = build_problem(rows)
    res = train(problem, l2=l2, max_iter=max_iter, tol=tol)
    weights = {name: float(w) for name, w in zip(problem.index.names, res.weights)}
    return RankerModel(weights, cfg, l2, res.iterations, res.objective)


def rank(model: RankerModel, sentence: Sequence[str], i: int, cands: CandidateSet) -> int:
    """Index of the best candidate; the earliest wins ties."""
    if len(cands) == 0:
        raise ValueError("empty candidate set")
    scores = [model.score(sentence, i, y) for y in cands.candidates]
    return int(np.argmax(scores))


def decode_local(model: RankerModel, sentence: Sequence[str], cand_sets: Sequence[CandidateSet]) -> list[int]:
    return [rank(model, sentence, i, cs) for i, cs in enumerate(cand_sets)]


def save_ranker(model: RankerModel, path: str | Path) -> None:
    c = model.config
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# textnorm ranker\n")
        fh.write(f"# templates={','.join(c.templates)}\n# max_n={c.max_n}\n# window={c.window}\n")
        fh.write(f"# l2={model.l2!r}\n# iterations={model.iterations}\n# objective={model.objective!r}\n")
        for name in sorted(model.weights):
            fh.write(f"{name}\t{model.weights[name]!r}\n")


def load_ranker(path: str | Path) -> RankerModel:
    header: dict[str, str] = {}
    weights: dict[str, float] = {}
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
                raise ValueError(f"{path}:{lineno}: expected feature<TAB>weight")
            try:
                weights[parts[0]] = float(parts[1])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: bad weight {parts[1]!r}") from None
    if "templates" not in header:
        raise ValueError(f"{path}: not a ranker model (missing header)")
    cfg = LocalFeatureConfig(tuple(t for t in header["templates"].split(",") if t),
                             int(header.get("max_n", 3)), int(header.get("window", 4)))
    return RankerModel(weights, cfg, float(header.get("l2", 0.0)),
                       int(header.get("iterations", 0)), float(header.get("objective", 0.0)))
