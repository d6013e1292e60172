"""Command-line interface: ``textnorm <subcommand> ...``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import data_path
from . import fst as F
from .candidates import Verbalizer
from .corpus import AlignedSentence, CorpusFormatError, SyntheticConfig, generate_synthetic, load_corpus, save_corpus
from .dislm import DisLmModel, load_dislm, save_dislm
from .experiment import (GRAMMARS, GridConfig, RunConfig, ConfigError, candidate_sets, decode,
                         grammar_fst, hallucinated_examples, pruning_lm, run_grid, train_system)
from .grammar import GrammarSyntaxError, load_grammar
from .hallucinate import Hallucinator, write_dump
from .maxent import DegenerateTrainingError
from .metrics import evaluate
from .ngram import NgramLm, read_arpa, write_arpa
from .ranker import RankerModel, load_ranker, save_ranker

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2

log = logging.getLogger("textnorm")


def _grammar_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grammar", default="language-specific",
                   help=f"shipped grammar ({', '.join(GRAMMARS)}), a .grm file, or a compiled .fst")
    p.add_argument("--lexicon", help="lexical map for the grammar's placeholders")
    p.add_argument("--numbers", help="number-word table")
    p.add_argument("--cap", type=int, default=100, help="candidates kept per token")
    p.add_argument("--no-prune-lm", action="store_true", help="truncate instead of LM-pruning long candidate lists")


def _verbalizer(args) -> Verbalizer:
    V = grammar_fst(args.grammar, args.lexicon, args.numbers)
    return Verbalizer(V, args.cap, None if args.no_prune_lm else pruning_lm(getattr(args, "seed", 0)))


def _run_config(args, system: str) -> RunConfig:
    cfg = RunConfig(grammar=args.grammar, data=getattr(args, "data", "real"), system=system,
                    seed=getattr(args, "seed", 0), cap=args.cap, order=getattr(args, "order", 3),
                    max_iter=getattr(args, "max_iter", 1000))
    if hasattr(args, "l2") and args.l2 is not None:
        cfg = replace(cfg, ranker_l2=args.l2, dislm_l2=args.l2)
    cfg.validate()
    return cfg


# --- subcommands ------------------------------------------------------------------


def cmd_compile_grammar(args) -> int:
    V = load_grammar(args.grammar, args.lexicon, args.numbers or data_path("numbers_en.tsv"),
                     root=args.root, max_digits=args.max_digits)
    Path(args.output).write_text(F.serialize(V), encoding="utf-8")
    print(f"{args.output}: {V.num_states} states, {V.num_arcs} arcs")
    return EXIT_OK


def cmd_gen_corpus(args) -> int:
    cfg = SyntheticConfig(args.n_train, args.n_dev, args.n_test)
    train, dev, test = generate_synthetic(cfg, seed=args.seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, corpus in (("train", train), ("dev", dev), ("test", test)):
        save_corpus(corpus, out / f"{name}.tsv")
    if args.numbers_corpus:
        from .corpus import number_corpus

        with open(out / "numbers.txt", "w", encoding="utf-8") as fh:
            for words in number_corpus(10_000, args.seed):
                fh.write(" ".join(words) + "\n")
    print(f"wrote {len(train)}/{len(dev)}/{len(test)} sentences to {out}")
    return EXIT_OK


def cmd_train_baseline(args) -> int:
    corpus = load_corpus(args.corpus)
    from .ngram import train_ngram

    lm = train_ngram([s.spoken_words() for s in corpus], order=args.order, smoothing=args.smoothing)
    write_arpa(lm, args.output)
    print(f"{args.output}: order {lm.order} {lm.smoothing}, {len(lm.vocab)} words")
    return EXIT_OK


def cmd_train_ranker(args) -> int:
    cfg = _run_config(args, "local-ranker")
    corpus = load_corpus(args.corpus)
    verb = _verbalizer(args)
    model = train_system("local-ranker", cfg, corpus, candidate_sets(verb, corpus))
    save_ranker(model, args.output)
    print(f"{args.output}: {len(model.weights)} weights, objective {model.objective:.4f}")
    return EXIT_OK


def _parse_bias(text: str) -> tuple[str, float]:
    if text == "tuned":
        return "tuned", -10.0
    if text.startswith("tuned:"):
        return "tuned", float(text[6:])
    if text == "fixed":
        return "fixed", -10.0
    if text.startswith("fixed:"):
        return "fixed", float(text[6:])
    raise argparse.ArgumentTypeError(f"expected fixed[:VALUE] or tuned, got {text!r}")


def cmd_train_dislm(args) -> int:
    mode, value = args.bias
    if args.data == "hallucinated":
        system = "dislm-hallucinated"
        if mode == "tuned" or args.boundary:
            raise ConfigError("hallucinated examples carry no pass-through candidates or token "
                              "boundaries; use the fixed bias without --boundary")
    elif mode == "tuned":
        system = "dislm+tuned-bias+boundary" if args.boundary else "dislm+tuned-bias"
    else:
        system = "dislm"
    cfg = replace(_run_config(args, system), fixed_bias=value)
    corpus = load_corpus(args.corpus)
    verb = _verbalizer(args)
    if system == "dislm-hallucinated":
        model = train_system(system, cfg, corpus, None, Hallucinator(verb.V))
    else:
        cands = candidate_sets(verb, corpus)
        if args.boundary and mode == "fixed":
            from .dislm import DisLmConfig, train_dislm
            from .experiment import dislm_examples

            dcfg = DisLmConfig(order=cfg.order, bias=value, boundary=True, l2=cfg.dislm_l2, max_iter=cfg.max_iter)
            model = train_dislm(dislm_examples(corpus, cands), dcfg)
        else:
            model = train_system(system, cfg, corpus, cands)
    save_dislm(model, args.output)
    print(f"{args.output}: {len(model.weights)} n-gram weights, bias {model.bias:.4f} ({model.bias_mode})")
    return EXIT_OK


def cmd_hallucinate(args) -> int:
    if args.data != "hallucinated":
        raise ConfigError("hallucinate produces discriminative-LM examples from spoken text only; "
                          "--data real is not a valid combination (hallucinated data is restricted to the dislm)")
    V = grammar_fst(args.grammar, args.lexicon, args.numbers)
    h = Hallucinator(F.rmepsilon_optimize(V))
    corpus = load_corpus(args.corpus)
    halls = []
    for sid, s in enumerate(corpus):
        halls.extend(h.spans(s.spoken_words(), sid))
    write_dump(halls, args.output)
    print(f"{args.output}: {len(halls)} spans")
    return EXIT_OK


def _load_model(path: str):
    head = Path(path).read_text(encoding="utf-8")[:200]
    if head.startswith("# textnorm ranker"):
        return load_ranker(path)
    if head.startswith("# textnorm dislm"):
        return load_dislm(path)
    if "\\data\\" in head:
        return read_arpa(path)
    raise ConfigError(f"{path}: unrecognized model file")


def cmd_normalize(args) -> int:
    model = _load_model(args.model)
    verb = _verbalizer(args)
    if args.text:
        lines = [" ".join(args.text)]
    elif args.input and args.input != "-":
        lines = Path(args.input).read_text(encoding="utf-8").splitlines()
    else:
        lines = sys.stdin.read().splitlines()
    out = sys.stdout
    if args.output:
        out = open(args.output, "w", encoding="utf-8")
    try:
        for line in lines:
            toks = line.split()
            if not toks:
                out.write("\n")
                continue
            sent = AlignedSentence([(t, (t,)) for t in toks])
            chosen = decode(model, [sent], candidate_sets(verb, [sent]))[0]
            if args.aligned:
                for x, y in zip(toks, chosen):
                    out.write(f"{x}\t{' '.join(y)}\n")
                out.write("\n")
            else:
                out.write(" ".join(w for y in chosen for w in y) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_evaluate(args) -> int:
    system = load_corpus(args.system)
    ref = load_corpus(args.reference)
    if [s.written for s in system] != [s.written for s in ref]:
        raise ConfigError("system output and reference differ in their written tokens")
    rep = evaluate([s.spoken for s in system], ref, label=args.label, whole_sentence=args.whole_sentence)
    print("label\twer\tser\tedits\tref_tokens\tsentences\terrored")
    print(rep.row())
    return EXIT_OK


def cmd_grid(args) -> int:
    run = RunConfig(seed=args.seed, cap=args.cap, max_iter=args.max_iter)
    cfg = GridConfig(seed=args.seed, n_train=args.n_train, n_dev=args.n_dev, n_test=args.n_test,
                     run=run, tune=args.tune, use_pruning_lm=not args.no_prune_lm)
    corpora = None
    if args.corpus_dir:
        d = Path(args.corpus_dir)
        corpora = tuple(load_corpus(d / f"{n}.tsv") for n in ("train", "dev", "test"))
    res = run_grid(cfg, corpora)
    print(res.table())
    print(f"\n({res.seconds:.1f}s)")
    if args.output:
        Path(args.output).write_text(res.tsv(), encoding="utf-8")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="textnorm", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("compile-grammar", help="compile a grammar to a serialized Fst")
    s.add_argument("grammar")
    s.add_argument("--lexicon")
    s.add_argument("--numbers")
    s.add_argument("--root")
    s.add_argument("--max-digits", type=int, default=6)
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_compile_grammar)

    s = sub.add_parser("gen-corpus", help="write seeded synthetic train/dev/test corpora")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--n-train", type=int, default=5000)
    s.add_argument("--n-dev", type=int, default=500)
    s.add_argument("--n-test", type=int, default=500)
    s.add_argument("--numbers-corpus", action="store_true", help="also write the pruning-LM number corpus")
    s.add_argument("-o", "--out-dir", required=True)
    s.set_defaults(func=cmd_gen_corpus)

    s = sub.add_parser("train-baseline", help="train the n-gram baseline LM (ARPA output)")
    s.add_argument("--corpus", required=True)
    s.add_argument("--order", type=int, default=3)
    s.add_argument("--smoothing", choices=("katz", "witten-bell"), default="katz")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_train_baseline)

    s = sub.add_parser("train-ranker", help="train the local maxent ranker")
    s.add_argument("--corpus", required=True)
    _grammar_args(s)
    s.add_argument("--data", choices=("real", "hallucinated"), default="real")
    s.add_argument("--l2", type=float)
    s.add_argument("--max-iter", type=int, default=1000)
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_train_ranker)

    s = sub.add_parser("train-dislm", help="train the discriminative LM")
    s.add_argument("--corpus", required=True)
    _grammar_args(s)
    s.add_argument("--data", choices=("real", "hallucinated"), default="real")
    s.add_argument("--bias", type=_parse_bias, default=("fixed", -10.0), help="fixed[:VALUE] or tuned")
    s.add_argument("--boundary", action="store_true", help="insert <p> markers between tokens")
    s.add_argument("--order", type=int, default=3)
    s.add_argument("--l2", type=float)
    s.add_argument("--max-iter", type=int, default=1000)
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_train_dislm)

    s = sub.add_parser("hallucinate", help="dump hallucinated dislm examples from spoken text")
    s.add_argument("--corpus", required=True)
    s.add_argument("--grammar", default="covering")
    s.add_argument("--lexicon")
    s.add_argument("--numbers")
    s.add_argument("--data", choices=("real", "hallucinated"), default="hallucinated")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_hallucinate)

    s = sub.add_parser("normalize", help="verbalize text with a trained model")
    s.add_argument("--model", required=True)
    _grammar_args(s)
    s.add_argument("--input", help="input file, one sentence per line (default stdin)")
    s.add_argument("--aligned", action="store_true", help="emit the aligned corpus format")
    s.add_argument("-o", "--output")
    s.add_argument("text", nargs="*")
    s.set_defaults(func=cmd_normalize)

    s = sub.add_parser("evaluate", help="WER/SER of aligned system output against a reference")
    s.add_argument("--system", required=True)
    s.add_argument("--reference", required=True)
    s.add_argument("--label", default="")
    s.add_argument("--whole-sentence", action="store_true", help="sentence-level WER numerator")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("grid", help="run every grammar x system cell and print the results table")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--n-train", type=int, default=5000)
    s.add_argument("--n-dev", type=int, default=500)
    s.add_argument("--n-test", type=int, default=500)
    s.add_argument("--corpus-dir", help="directory with train.tsv, dev.tsv, test.tsv")
    s.add_argument("--cap", type=int, default=100)
    s.add_argument("--max-iter", type=int, default=1000)
    s.add_argument("--no-prune-lm", action="store_true")
    s.add_argument("--tune", action="store_true", help="pick hyperparameters by dev-set WER")
    s.add_argument("-o", "--output", help="also write the results as TSV")
    s.set_defaults(func=cmd_grid)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, GrammarSyntaxError, CorpusFormatError, F.FstParseError, DegenerateTrainingError,
            ValueError) as e:
        print(f"textnorm: error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as e:
        print(f"textnorm: I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
