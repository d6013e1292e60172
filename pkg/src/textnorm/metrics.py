"""Word and sentence error rates over token-aligned outputs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .candidates import edit_distance
from .corpus import AlignedSentence, is_normalized

SystemOutput = Sequence[Sequence[Sequence[str]]]  # sentence -> token -> words


class NoNormalizedTokensError(ZeroDivisionError):
    pass


@dataclass
class EvalReport:
    wer: float
    ser: float
    edits: int
    ref_tokens: int
    sentences: int
    errored: int
    label: str = ""

    def row(self) -> str:
        return f"{self.label}\t{self.wer:.6f}\t{self.ser:.6f}\t{self.edits}\t{self.ref_tokens}\t{self.sentences}\t{self.errored}"


def _check(system: SystemOutput, reference: Sequence[AlignedSentence]) -> None:
    if len(system) != len(reference):
        raise ValueError(f"{len(system)} system sentences for {len(reference)} reference sentences")
    for k, (out, ref) in enumerate(zip(system, reference)):
        if len(out) != len(ref):
            raise ValueError(f"sentence {k}: {len(out)} output tokens for {len(ref)} reference tokens")


def evaluate(system: SystemOutput, reference: Sequence[AlignedSentence], label: str = "",
             whole_sentence: bool = False) -> EvalReport:
    """WER and SER.

    The WER numerator sums per-token edit distances, or with
    ``whole_sentence`` the edit distance between the flattened sentences.
    The denominator counts reference words of tokens that were normalized.
    """
    _check(system, reference)
    edits = 0
    denom = 0
    errored = 0
    for out, ref in zip(system, reference):
        bad = False
        for y, (x, z) in zip(out, ref.pairs):
            if tuple(y) != z:
                bad = True
            if is_normalized(x, z):
                denom += len(z)
        if whole_sentence:
            edits += edit_distance([w for y in out for w in y], ref.spoken_words())
        else:
            edits += sum(edit_distance(y, z) for y, (_, z) in zip(out, ref.pairs))
        errored += bad
    if denom == 0:
        raise NoNormalizedTokensError("reference has no normalized tokens; WER is undefined")
    n = len(reference)
    return EvalReport(edits / denom, errored / n if n else 0.0, edits, denom, n, errored, label)


def wer(system: SystemOutput, reference: Sequence[AlignedSentence], whole_sentence: bool = False) -> EvalReport:
    return evaluate(system, reference, whole_sentence=whole_sentence)


def ser(system: SystemOutput, reference: Sequence[AlignedSentence]) -> EvalReport:
    _check(system, reference)
    n = len(reference)
    errored = sum(any(tuple(y) != z for y, (_, z) in zip(out, ref.pairs)) for out, ref in zip(system, reference))
    try:
        return evaluate(system, reference)
    except NoNormalizedTokensError:
        return EvalReport(float("nan"), errored / n if n else 0.0, 0, 0, n, errored)
