"""Rule-generated number verbalizers.

A :class:`NumberSpec` carries word forms for one language; the builders turn
it into transducers from digit strings to spoken readings.  Readings are
space separated words.  Supported modes:

``cardinal``   123 -> one hundred twenty three
``ordinal``    123 -> one hundred twenty third
``digit``      123 -> one two three (every listed form of every digit)
``paired``     1911 -> nineteen eleven, 920 -> nine twenty, 6308 -> sixty three oh eight
``hundreds``   2200 -> twenty two hundred
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from . import fst as F

MODES = ("cardinal", "ordinal", "digit", "paired", "hundreds")


@dataclass
class NumberSpec:
    unit: dict[int, str]  # 1..9
    teen: dict[int, str]  # 10..19
    ten: dict[int, str]  # 2..9 -> twenty..ninety
    scale: dict[str, str]  # "hundred", "thousand"
    ordinal: dict[str, str]  # cardinal word -> ordinal word
    digit: dict[int, list[str]]  # 0..9 -> forms, e.g. 0 -> [zero, oh]
    zero: str = "zero"
    modes: tuple[str, ...] = MODES

    def __post_init__(self) -> None:
        missing = [d for d in range(10) if not self.digit.get(d)]
        if missing:
            raise ValueError(f"no digit-word form for digits {missing}")
        if not self.modes:
            raise ValueError("at least one reading mode must be enabled")
        bad = set(self.modes) - set(MODES)
        if bad:
            raise ValueError(f"unknown reading modes {sorted(bad)}")
        for k in range(1, 10):
            if k not in self.unit:
                raise ValueError(f"missing unit word for {k}")
        for k in range(10, 20):
            if k not in self.teen:
                raise ValueError(f"missing teen word for {k}")
        for k in range(2, 10):
            if k not in self.ten:
                raise ValueError(f"missing ten word for {k}0")
        for s in ("hundred", "thousand"):
            if s not in self.scale:
                raise ValueError(f"missing scale word {s!r}")


def load_number_spec(path: str | Path) -> NumberSpec:
    """Read the ``section<TAB>key<TAB>value`` format.

    Sections: unit, teen, ten, scale, ordinal, digit, and optionally ``mode``
    (one enabled mode per line, value column empty).
    """
    unit: dict[int, str] = {}
    teen: dict[int, str] = {}
    ten: dict[int, str] = {}
    scale: dict[str, str] = {}
    ordinal: dict[str, str] = {}
    digit: dict[int, list[str]] = {}
    modes: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            section = parts[0]
            if section == "mode":
                modes.append(parts[1])
                continue
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 tab-separated fields")
            key, value = parts[1], parts[2]
            if section == "unit":
                unit[int(key)] = value
            elif section == "teen":
                teen[int(key)] = value
            elif section == "ten":
                ten[int(key)] = value
            elif section == "scale":
                scale[key] = value
            elif section == "ordinal":
                ordinal[key] = value
            elif section == "digit":
                digit.setdefault(int(key), []).append(value)
            else:
                raise ValueError(f"{path}:{lineno}: unknown section {section!r}")
    zero = digit.get(0, ["zero"])[0]
    return NumberSpec(unit, teen, ten, scale, ordinal, digit, zero=zero,
                      modes=tuple(modes) or MODES)


def _space() -> F.Fst:
    return F.cross("", " ")


def _insert(s: str) -> F.Fst:
    return F.cross("", s)


def _map(pairs) -> F.Fst:
    return F.union(*(F.cross(a, b) for a, b in pairs))


class _Pieces:
    """Cardinal building blocks, each restricted to a fixed input length."""

    def __init__(self, spec: NumberSpec):
        s = spec
        self.units = _map((str(k), s.unit[k]) for k in range(1, 10))  # 1..9
        self.teens = _map((str(k), s.teen[k]) for k in range(10, 20))
        tens = []
        for t in range(2, 10):
            tail = F.union(F.cross("0", ""), F.concat(_space(), self.units))
            tens.append(F.concat(F.cross(str(t), s.ten[t]), tail))
        self.c2 = F.union(self.teens, *tens)  # 10..99
        self.r2 = F.union(F.concat(F.cross("0", ""), self.units), self.c2)  # 01..99
        hundred = _insert(" " + s.scale["hundred"])
        self.c3 = F.concat(self.units, hundred,
                           F.union(F.cross("00", ""), F.concat(_space(), self.r2)))  # 100..999
        self.r3 = F.union(
            F.cross("000", ""),
            F.concat(_space(), F.union(F.concat(F.cross("0", ""), self.r2), self.c3)),
        )  # 000..999 after a scale word
        self.thousand = _insert(" " + s.scale["thousand"])
        self.zero = F.cross("0", s.zero)


def cardinal_fst(spec: NumberSpec, max_digits: int) -> F.Fst:
    p = _Pieces(spec)
    parts = [p.zero, p.units]
    if max_digits >= 2:
        parts.append(p.c2)
    if max_digits >= 3:
        parts.append(p.c3)
    lead = [p.units, p.c2, p.c3]
    for k in range(4, min(max_digits, 6) + 1):
        parts.append(F.concat(lead[k - 4], p.thousand, p.r3))
    return F.union(*parts)


def _cardinal_words(spec: NumberSpec) -> set[str]:
    words = set(spec.unit.values()) | set(spec.teen.values()) | set(spec.ten.values())
    words |= set(spec.scale.values())
    words.add(spec.zero)
    return words


def ordinal_fst(spec: NumberSpec, max_digits: int) -> F.Fst:
    """Cardinal readings with the final word rewritten to its ordinal form."""
    card = cardinal_fst(spec, max_digits)
    words = sorted(_cardinal_words(spec))
    word = F.union(*(F.literal(w) for w in words))
    last = _map((w, spec.ordinal[w]) for w in words if w in spec.ordinal)
    rewrite = F.concat(F.closure(F.concat(word, F.literal(" "))), last)
    return F.rmepsilon_optimize(F.compose(card, rewrite))


def digit_fst(spec: NumberSpec, max_digits: int) -> F.Fst:
    one = F.union(*(F.cross(str(d), form) for d in range(10) for form in spec.digit[d]))
    tail = None
    for _ in range(max_digits - 1):
        step = F.concat(_space(), one)
        tail = F.optional(step if tail is None else F.concat(step, tail))
    return one if tail is None else F.concat(one, tail)


def _pair(spec: NumberSpec, p: _Pieces) -> F.Fst:
    """Second group of a paired reading: 10..99, or 0d read as '<zero> d'."""
    zero = F.union(*(F.cross("0", form) for form in spec.digit[0]))
    return F.union(p.c2, F.concat(zero, _space(), p.units))


def paired_fst(spec: NumberSpec, max_digits: int) -> F.Fst:
    p = _Pieces(spec)
    parts = []
    if max_digits >= 3:
        parts.append(F.concat(p.units, _space(), _pair(spec, p)))
    if max_digits >= 4:
        parts.append(F.concat(p.c2, _space(), _pair(spec, p)))
    return F.union(*parts)


def hundreds_fst(spec: NumberSpec, max_digits: int) -> F.Fst:
    p = _Pieces(spec)
    if max_digits < 4:
        return F.Fst()
    hundred = _insert(" " + spec.scale["hundred"])
    return F.concat(p.c2, hundred, F.union(F.cross("00", ""), F.concat(_space(), p.r2)))


_BUILDERS = {
    "cardinal": cardinal_fst,
    "ordinal": ordinal_fst,
    "digit": digit_fst,
    "paired": paired_fst,
    "hundreds": hundreds_fst,
}


def build_number_fst(spec: NumberSpec, max_digits: int = 6) -> F.Fst:
    """Digit strings of length <= ``max_digits`` to all enabled readings."""
    if max_digits < 1:
        raise ValueError("max_digits must be >= 1")
    parts = [_BUILDERS[m](spec, max_digits) for m in spec.modes]
    return F.rmepsilon_optimize(F.union(*parts))


def number_builtins(spec: NumberSpec, max_digits: int = 6) -> dict[str, F.Fst]:
    """Named machines a grammar may reference: CARDINAL, ORDINAL, DIGITS,
    PAIRED, HUNDREDS and NUMBER (the union of the spec's enabled modes)."""
    out = {
        "CARDINAL": F.rmepsilon_optimize(cardinal_fst(spec, max_digits)),
        "ORDINAL": ordinal_fst(spec, max_digits),
        "DIGITS": F.rmepsilon_optimize(digit_fst(spec, max_digits)),
        "PAIRED": F.rmepsilon_optimize(paired_fst(spec, max_digits)),
        "HUNDREDS": F.rmepsilon_optimize(hundreds_fst(spec, max_digits)),
    }
    out["NUMBER"] = build_number_fst(spec, max_digits)
    return out
