"""End-to-end pipelines and the grammar x system evaluation grid."""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

from . import data_path
from . import fst as F
from .candidates import CandidateSet, Verbalizer, good_set
from .corpus import AlignedSentence, SyntheticConfig, generate_synthetic, number_corpus
from .dislm import DisLmConfig, DisLmModel, decode_sentence, train_dislm
from .grammar import load_grammar
from .hallucinate import HallucinationConfig, Hallucinator, to_training_examples
from .metrics import EvalReport, evaluate
from .ngram import NgramLm, baseline_decode, train_ngram
from .ranker import RankerModel, decode_local, train_ranker

log = logging.getLogger(__name__)

GRAMMARS = {
    "language-specific": "specific.grm",
    "covering": "covering.grm",
}

SYSTEMS = (
    ("baseline", "Baseline"),
    ("local-ranker", "Local ranking"),
    ("dislm", "Dis. LM, real data"),
    ("dislm+tuned-bias", "+tuned bias"),
    ("dislm+tuned-bias+boundary", "+boundary"),
    ("dislm-hallucinated", "Dis. LM, hallucinated data"),
)
SYSTEM_LABELS = dict(SYSTEMS)


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    grammar: str = "language-specific"
    data: str = "real"  # real | hallucinated
    system: str = "local-ranker"
    seed: int = 0
    cap: int = 100
    order: int = 3
    ranker_l2: float = 0.01
    dislm_l2: float = 0.01
    max_iter: int = 1000
    fixed_bias: float = -10.0

    def validate(self) -> None:
        if self.data not in ("real", "hallucinated"):
            raise ConfigError(f"unknown data kind {self.data!r}")
        if self.data == "hallucinated" and not self.system.startswith("dislm"):
            raise ConfigError("hallucinated training data is only available for the discriminative LM: "
                              "its features see spoken tokens only, so no written context is needed")
        if self.system not in SYSTEM_LABELS and self.system not in ("dislm",):
            raise ConfigError(f"unknown system {self.system!r}")


def grammar_fst(kind_or_path: str | Path, lexicon: str | Path | None = None,
                numbers: str | Path | None = None) -> F.Fst:
    """Compile a shipped grammar by kind name, a .grm file, or load a serialized Fst."""
    name = str(kind_or_path)
    if name in GRAMMARS:
        return load_grammar(data_path(GRAMMARS[name]), lexicon or data_path("lexicon_en.tsv"),
                            numbers or data_path("numbers_en.tsv"))
    p = Path(name)
    if p.suffix == ".grm":
        return load_grammar(p, lexicon or data_path("lexicon_en.tsv"), numbers or data_path("numbers_en.tsv"))
    return F.deserialize(p.read_text(encoding="utf-8"))


def pruning_lm(seed: int = 0) -> NgramLm:
    return train_ngram(number_corpus(10_000, seed), order=3, smoothing="witten-bell")


# --- per-system data preparation --------------------------------------------


def candidate_sets(verbalizer: Verbalizer, corpus: Sequence[AlignedSentence]) -> list[list[CandidateSet]]:
    return [[verbalizer(x) for x in s.written] for s in corpus]


def ranker_examples(corpus, cands):
    out = []
    for s, css in zip(corpus, cands):
        written = s.written
        for i, (cs, (_, z)) in enumerate(zip(css, s.pairs)):
            if len(cs) > 1:
                out.append((written, i, good_set(cs, z)))
    return out


def dislm_examples(corpus, cands):
    out = []
    for s, css in zip(corpus, cands):
        history: list[tuple[str, ...]] = []
        for cs, (_, z) in zip(css, s.pairs):
            if len(cs) > 1:
                g = good_set(cs, z)
                out.append((list(history), g, [cs.is_pass_through(j) for j in range(len(cs))]))
            history.append(z)
    return out


def hallucinated_examples(V: F.Fst | Hallucinator, corpus: Sequence[AlignedSentence]):
    h = V if isinstance(V, Hallucinator) else Hallucinator(V, HallucinationConfig())
    halls = []
    for sid, s in enumerate(corpus):
        halls.extend(h.spans(s.spoken_words(), sid))
    return to_training_examples(halls)


def _choose(cands: list[list[CandidateSet]], picks: list[list[int]]) -> list[list[tuple[str, ...]]]:
    return [[cs.candidates[j] for cs, j in zip(css, p)] for css, p in zip(cands, picks)]


# --- systems ------------------------------------------------------------------


def train_system(system: str, cfg: RunConfig, train: Sequence[AlignedSentence], train_cands,
                 V: F.Fst | Hallucinator | None = None):
    if system == "baseline":
        return train_ngram([s.spoken_words() for s in train], order=cfg.order, smoothing="katz")
    if system == "local-ranker":
        return train_ranker(ranker_examples(train, train_cands), l2=cfg.ranker_l2, max_iter=cfg.max_iter)
    dcfg = DisLmConfig(order=cfg.order, bias=cfg.fixed_bias, l2=cfg.dislm_l2, max_iter=cfg.max_iter)
    if system == "dislm":
        return train_dislm(dislm_examples(train, train_cands), dcfg)
    if system == "dislm+tuned-bias":
        return train_dislm(dislm_examples(train, train_cands), replace(dcfg, bias_mode="tuned"))
    if system == "dislm+tuned-bias+boundary":
        return train_dislm(dislm_examples(train, train_cands), replace(dcfg, bias_mode="tuned", boundary=True))
    if system == "dislm-hallucinated":
        if V is None:
            raise ConfigError("hallucinated training needs the grammar")
        return train_dislm(hallucinated_examples(V, train), dcfg)
    raise ConfigError(f"unknown system {system!r}")


def decode(model, corpus: Sequence[AlignedSentence], cands) -> list[list[tuple[str, ...]]]:
    if isinstance(model, NgramLm):
        picks = [baseline_decode(css, model) for css in cands]
    elif isinstance(model, RankerModel):
        picks = [decode_local(model, s.written, css) for s, css in zip(corpus, cands)]
    elif isinstance(model, DisLmModel):
        picks = [decode_sentence(model, css) for css in cands]
    else:
        raise TypeError(f"cannot decode with {type(model).__name__}")
    return _choose(cands, picks)


# --- grid -----------------------------------------------------------------------


@dataclass
class GridConfig:
    seed: int = 0
    n_train: int = 5000
    n_dev: int = 500
    n_test: int = 500
    grammars: tuple[str, ...] = tuple(GRAMMARS)
    systems: tuple[str, ...] = tuple(s for s, _ in SYSTEMS)
    run: RunConfig = field(default_factory=RunConfig)
    tune: bool = False
    use_pruning_lm: bool = True


@dataclass
class GridResult:
    reports: dict[tuple[str, str], EvalReport]
    config: GridConfig
    seconds: float
    tuned: dict[str, dict] = field(default_factory=dict)

    def wer(self, grammar: str, system: str) -> float:
        return self.reports[(grammar, system)].wer

    def table(self) -> str:
        gs = [g for g in self.config.grammars]
        head = ["System"] + [f"{g} {m}" for g in gs for m in ("WER", "SER")]
        rows = [head]
        for s in self.config.systems:
            row = [SYSTEM_LABELS[s]]
            for g in gs:
                r = self.reports.get((g, s))
                row += [f"{100 * r.wer:.2f}%", f"{100 * r.ser:.2f}%"] if r else ["-", "-"]
            rows.append(row)
        widths = [max(len(r[k]) for r in rows) for k in range(len(head))]
        lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
        lines.insert(1, "  ".join("-" * w for w in widths))
        return "\n".join(lines)

    def tsv(self) -> str:
        lines = ["grammar\tsystem\twer\tser\tedits\tref_tokens\tsentences\terrored"]
        for g in self.config.grammars:
            for s in self.config.systems:
                r = self.reports[(g, s)]
                lines.append(f"{g}\t{SYSTEM_LABELS[s]}\t{r.wer!r}\t{r.ser!r}\t{r.edits}\t{r.ref_tokens}\t{r.sentences}\t{r.errored}")
        return "\n".join(lines) + "\n"


TUNE_L2 = (0.001, 0.01, 0.1)
TUNE_BIAS = (-10.0, -5.0, -2.0)


def run_grid(config: GridConfig | None = None, corpora=None, grammars: dict[str, F.Fst] | None = None) -> GridResult:
    cfg = config or GridConfig()
    t0 = time.perf_counter()
    if corpora is None:
        corpora = generate_synthetic(SyntheticConfig(cfg.n_train, cfg.n_dev, cfg.n_test), seed=cfg.seed)
    train, dev, test = corpora
    prune = pruning_lm(cfg.seed) if cfg.use_pruning_lm else None
    reports: dict[tuple[str, str], EvalReport] = {}
    tuned: dict[str, dict] = {}
    for g in cfg.grammars:
        V = grammars[g] if grammars and g in grammars else grammar_fst(g)
        verb = Verbalizer(V, cfg.run.cap, prune)
        hall = Hallucinator(verb.V) if "dislm-hallucinated" in cfg.systems else None
        tc = candidate_sets(verb, train)
        ec = candidate_sets(verb, test)
        run = replace(cfg.run, grammar=g)
        if cfg.tune:
            dc = candidate_sets(verb, dev)
            run = tune(run, train, tc, dev, dc)
            tuned[g] = asdict(run)
            log.info("grammar %s: tuned ranker_l2=%g dislm_l2=%g fixed_bias=%g", g, run.ranker_l2, run.dislm_l2,
                     run.fixed_bias)
        log.info("grammar %s: candidates ready (%.1fs)", g, time.perf_counter() - t0)
        for s in cfg.systems:
            model = train_system(s, run, train, tc, hall)
            out = decode(model, test, ec)
            reports[(g, s)] = evaluate(out, test, label=f"{g}/{s}")
            log.info("%s %s: WER %.4f (%.1fs)", g, s, reports[(g, s)].wer, time.perf_counter() - t0)
    return GridResult(reports, cfg, time.perf_counter() - t0, tuned)


def tune(run: RunConfig, train, tc, dev, dc) -> RunConfig:
    """Pick regularization strengths and the fixed bias by dev-set WER."""
    def dev_wer(system: str, r: RunConfig) -> float:
        return evaluate(decode(train_system(system, r, train, tc), dev, dc), dev).wer

    best_l2 = min(TUNE_L2, key=lambda l2: (dev_wer("local-ranker", replace(run, ranker_l2=l2)), l2))
    run = replace(run, ranker_l2=best_l2)
    best_d = min(TUNE_L2, key=lambda l2: (dev_wer("dislm", replace(run, dislm_l2=l2)), l2))
    run = replace(run, dislm_l2=best_d)
    best_b = min(TUNE_BIAS, key=lambda b: (dev_wer("dislm", replace(run, fixed_bias=b)), -b))
    return replace(run, fixed_bias=best_b)
