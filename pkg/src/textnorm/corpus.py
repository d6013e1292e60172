"""Aligned written/spoken corpora: file format and a seeded synthetic generator.

File format: one token per line, ``written<TAB>spoken words``; blank lines
end a sentence; lines starting with ``#`` are comments.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .numbers import NumberSpec, load_number_spec

Pair = tuple[str, tuple[str, ...]]


class CorpusFormatError(ValueError):
    def __init__(self, path, lineno: int, msg: str):
        super().__init__(f"{path}:{lineno}: {msg}")
        self.lineno = lineno


@dataclass
class AlignedSentence:
    pairs: list[Pair]
    tag: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        clean = []
        for x, z in self.pairs:
            z = tuple(z)
            if not x or any(c.isspace() for c in x):
                raise ValueError(f"written token {x!r} is empty or contains whitespace")
            if not z:
                raise ValueError(f"empty spoken form for {x!r}")
            for w in z:
                if not w or any(c.isspace() for c in w):
                    raise ValueError(f"spoken token {w!r} is empty or contains whitespace")
            clean.append((x, z))
        self.pairs = clean

    @property
    def written(self) -> list[str]:
        return [x for x, _ in self.pairs]

    @property
    def spoken(self) -> list[tuple[str, ...]]:
        return [z for _, z in self.pairs]

    def spoken_words(self) -> list[str]:
        return [w for _, z in self.pairs for w in z]

    def __len__(self) -> int:
        return len(self.pairs)


def is_normalized(x: str, z: Sequence[str]) -> bool:
    return tuple(z) != (x,)


def load_corpus(path: str | Path) -> list[AlignedSentence]:
    out: list[AlignedSentence] = []
    cur: list[Pair] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n").rstrip("\r")
            if line.startswith("#"):
                continue
            if not line.strip():
                if cur:
                    out.append(AlignedSentence(cur))
                    cur = []
                continue
            if "\t" not in line:
                raise CorpusFormatError(path, lineno, "expected 'written<TAB>spoken'")
            x, z = line.split("\t", 1)
            if not x or any(c.isspace() for c in x):
                raise CorpusFormatError(path, lineno, f"written token {x!r} is empty or contains whitespace")
            words = z.split(" ")
            if not z or any(not w or any(c.isspace() for c in w) for w in words):
                raise CorpusFormatError(path, lineno, f"bad spoken form {z!r}")
            cur.append((x, tuple(words)))
    if cur:
        out.append(AlignedSentence(cur))
    return out


def save_corpus(corpus: Iterable[AlignedSentence], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in corpus:
            for x, z in s.pairs:
                fh.write(f"{x}\t{' '.join(z)}\n")
            fh.write("\n")


# --- number readings used by the generator ------------------------------------


class Reader:
    """Spoken forms of digit strings, from a language's number words."""

    def __init__(self, spec: NumberSpec):
        self.s = spec

    def cardinal(self, n: int) -> list[str]:
        s = self.s
        if n == 0:
            return [s.zero]
        out: list[str] = []
        if n >= 1000:
            out += self.cardinal(n // 1000) + [s.scale["thousand"]]
            n %= 1000
        if n >= 100:
            out += [s.unit[n // 100], s.scale["hundred"]]
            n %= 100
        if n >= 20:
            out.append(s.ten[n // 10])
            n %= 10
        if 10 <= n < 20:
            out.append(s.teen[n])
        elif n:
            out.append(s.unit[n])
        return out

    def ordinal(self, n: int) -> list[str]:
        words = self.cardinal(n)
        return words[:-1] + [self.s.ordinal[words[-1]]]

    def digits(self, text: str, zero: str | None = None) -> list[str]:
        zero = zero or self.s.digit[0][0]
        return [zero if c == "0" else self.s.digit[int(c)][0] for c in text]

    def pair(self, text: str, oh: str) -> list[str]:
        """Two-digit group of a paired reading (never '00')."""
        v = int(text)
        if text[0] == "0":
            return [oh, self.s.unit[v]]
        return self.cardinal(v)

    def paired(self, text: str, oh: str = "oh") -> list[str]:
        """920 -> nine twenty, 1911 -> nineteen eleven, 1905 -> nineteen oh five."""
        if len(text) == 3:
            return [self.s.unit[int(text[0])]] + self.pair(text[1:], oh)
        return self.cardinal(int(text[:2])) + self.pair(text[2:], oh)

    def hundreds(self, text: str) -> list[str]:
        head = self.cardinal(int(text[:2])) + [self.s.scale["hundred"]]
        rest = int(text[2:])
        return head + (self.cardinal(rest) if rest else [])

    def year(self, y: int) -> list[str]:
        t = str(y)
        if y % 100 == 0 and y % 1000:
            return self.hundreds(t)
        if 2000 <= y < 2010:
            return self.cardinal(y)
        return self.paired(t)


# --- synthetic generator ------------------------------------------------------

CLASSES = ("time", "number", "year", "ordinal", "money", "measure", "url", "abbr", "plus")

DEFAULT_MIXTURE = {
    "time": 0.22,
    "number": 0.24,
    "year": 0.12,
    "ordinal": 0.08,
    "money": 0.08,
    "measure": 0.12,
    "url": 0.05,
    "abbr": 0.06,
    "plus": 0.03,
}

MONTHS = ("january", "february", "march", "april", "may", "june", "july", "august",
          "september", "october", "november", "december")
NAMES = ("google", "yahoo", "amazon", "weather", "maps", "news", "music", "flights")
TLDS = ("com", "org", "net")


@dataclass
class SyntheticConfig:
    n_train: int = 5000
    n_dev: int = 500
    n_test: int = 500
    mixture: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_MIXTURE))
    numbers_path: str | None = None

    def validate(self) -> None:
        for name in ("n_train", "n_dev", "n_test"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.n_train + self.n_dev + self.n_test == 0:
            raise ValueError("all split sizes are zero")
        bad = set(self.mixture) - set(CLASSES)
        if bad:
            raise ValueError(f"unknown classes in mixture: {sorted(bad)}")
        if any(v < 0 for v in self.mixture.values()) or sum(self.mixture.values()) <= 0:
            raise ValueError("mixture weights must be nonnegative with a positive sum")


def _w(words: str) -> list[Pair]:
    return [(t, (t,)) for t in words.split()]


class _Gen:
    def __init__(self, rng: random.Random, reader: Reader):
        self.r = rng
        self.rd = reader

    def choice(self, seq):
        return seq[self.r.randrange(len(seq))]

    # each template returns the sentence pairs

    def hour(self) -> int:
        return self.r.randint(1, 12)

    def time(self) -> list[Pair]:
        r, rd = self.r, self.rd
        h = self.hour()
        hw = tuple(rd.cardinal(h))
        kind = r.random()
        if kind < 0.45:
            # time followed by a period word: read the hour alone when on the hour
            mins = 0 if r.random() < 0.6 else r.choice([5, 15, 30, 45, 20, 10])
            x = f"{h}:{mins:02d}"
            z = hw if mins == 0 else hw + self._minutes(mins)
            period = self.choice(("am", "pm"))
            pw = ("a", "m") if period == "am" else ("p", "m")
            lead = self.choice(("wake me at", "set an alarm for", "remind me at", "call me at",
                                "the meeting starts at", "we are leaving at"))
            tail = self.choice(("", "tomorrow", "please", "on monday", "today"))
            return _w(lead) + [(x, z), (period, pw)] + _w(tail)
        if kind < 0.75:
            mins = 0 if r.random() < 0.5 else r.choice([5, 15, 30, 45, 20, 10, 40])
            x = f"{h}:{mins:02d}"
            z = hw + (("o'clock",) if mins == 0 else self._minutes(mins))
            lead = self.choice(("the train leaves at", "it is", "the show begins at", "dinner is at",
                                "we are free after", "the store opens at"))
            tail = self.choice(("", "sharp", "tonight", "i think", "right"))
            return _w(lead) + [(x, z)] + _w(tail)
        period = self.choice(("am", "pm"))
        pw = ("a", "m") if period == "am" else ("p", "m")
        lead = self.choice(("see you at", "the call is at", "the doctor is busy until", "wake me up at"))
        return _w(lead) + [(f"{h}{period}", hw + pw)] + _w(self.choice(("", "tomorrow", "ok")))

    def _minutes(self, m: int) -> tuple[str, ...]:
        if m < 10:
            return ("oh", *self.rd.cardinal(m))
        return tuple(self.rd.cardinal(m))

    def number(self) -> list[Pair]:
        r, rd = self.r, self.rd
        kind = r.random()
        if kind < 0.25:
            n = str(r.randint(100, 9999))
            if n[-2:] == "00":
                n = n[:-1] + "5"
            lead = self.choice(("the flight number is", "my flight is", "flight", "we are on flight",
                                "the bus number is", "take bus"))
            z = tuple(rd.paired(n))
            return _w(lead) + [(n, z)] + _w(self.choice(("", "today", "to boston", "please")))
        if kind < 0.45:
            n = "".join(self.choice("0123456789") for _ in range(r.choice((4, 5))))
            lead = self.choice(("my pin is", "the code is", "my zip code is", "the zip is",
                                "enter the code"))
            return _w(lead) + [(n, tuple(rd.digits(n, "zero")))] + _w(self.choice(("", "please", "ok")))
        if kind < 0.55:
            n = str(r.randint(1, 9)) + "".join(self.choice("0123456789") for _ in range(3))
            lead = self.choice(("call extension", "dial extension", "my extension is"))
            return _w(lead) + [(n, tuple(rd.digits(n, "oh")))] + _w(self.choice(("", "now", "please")))
        # five-digit numbers are always read digit by digit, so counts stay below 10000
        n = r.choice((r.randint(2, 99), r.randint(100, 999), r.randint(1000, 9999)))
        lead = self.choice(("the total is", "there are", "i need", "we have", "it is about",
                            "the population is", "i counted"))
        tail = self.choice(("", "people", "items", "votes", "in total", "points"))
        return _w(lead) + [(str(n), tuple(rd.cardinal(n)))] + _w(tail)

    def year(self) -> list[Pair]:
        r, rd = self.r, self.rd
        y = r.randint(1900, 2019) if r.random() < 0.9 else r.choice((1800, 1900, 2000))
        z = tuple(rd.year(y))
        kind = r.random()
        if kind < 0.4:
            lead = self.choice(("born in", "since", "it happened in", "built in", "back in"))
            return _w(lead) + [(str(y), z)] + _w(self.choice(("", "i think", "or so")))
        if kind < 0.8:
            m = self.choice(MONTHS)
            return _w(self.choice(("in", "since", "until"))) + [(m, (m,)), (str(y), z)]
        # model names read as pairs too
        return _w(self.choice(("the", "a", "my"))) + [(str(y), z)] + _w(self.choice(("model", "edition", "car")))

    def ordinal(self) -> list[Pair]:
        r, rd = self.r, self.rd
        n = r.choice((r.randint(1, 31), r.randint(1, 31), r.randint(32, 120)))
        suf = "th" if 10 < n % 100 < 14 else {1: "st", 2: "nd", 3: "rd"}.get(n % 10, "th")
        tok = (f"{n}{suf}", tuple(rd.ordinal(n)))
        kind = r.random()
        if kind < 0.5:
            m = self.choice(MONTHS)
            return _w(self.choice(("on", "by", "after"))) + [(m, (m,)), tok]
        return _w(self.choice(("the", "on the", "it is the", "my"))) + [tok] + _w(
            self.choice(("floor", "time", "birthday", "anniversary", "day")))

    def money(self) -> list[Pair]:
        r, rd = self.r, self.rd
        n = r.choice((1, r.randint(2, 99), r.randint(100, 9999)))
        z = tuple(rd.cardinal(n)) + (("dollar",) if n == 1 else ("dollars",))
        lead = self.choice(("it costs", "i paid", "send me", "the price is", "that is"))
        return _w(lead) + [(f"${n}", z)] + _w(self.choice(("", "only", "each", "total")))

    def measure(self) -> list[Pair]:
        r, rd = self.r, self.rd
        kind = r.random()
        if kind < 0.35:
            # a model number directly before a calibre
            model = self.choice(("1911", "1917", "1903", "1895", "1873", "1909"))
            cal = self.choice((9, 10, 45))
            x = [(model, tuple(rd.paired(model))), (f"{cal}mm", tuple(rd.cardinal(cal)) + ("millimeter",))]
            return _w(self.choice(("the", "a", "my"))) + x + _w(self.choice(("pistol", "is", "")))
        unit = self.choice(("mm", "kg", "mi"))
        n = r.choice((1, r.randint(2, 20), r.randint(21, 500)))
        if unit == "mm":
            word = ("millimeter",)
        elif unit == "kg":
            word = ("kilogram",) if n == 1 else ("kilograms",)
        else:
            word = ("mile",) if n == 1 else ("miles",)
        lead = self.choice(("it weighs", "a", "about", "we drove", "i need a", "it is"))
        return _w(lead) + [(f"{n}{unit}", tuple(rd.cardinal(n)) + word)] + _w(self.choice(("", "long", "bolt", "away")))

    def url(self) -> list[Pair]:
        name, tld = self.choice(NAMES), self.choice(TLDS)
        lead = self.choice(("go to", "open", "search", "visit"))
        return _w(lead) + [(f"{name}.{tld}", (name, "dot", tld))]

    def abbr(self) -> list[Pair]:
        r = self.r
        kind = r.random()
        sp = {"TV": ("t", "v"), "UK": ("u", "k"), "US": ("u", "s"), "DC": ("d", "c"), "IT": ("i", "t")}
        if kind < 0.45:
            a = self.choice(("TV", "UK", "DC", "US", "IT"))
            lead = self.choice(("turn on the", "watch", "news from the", "the", "call the", "fly to"))
            return _w(lead) + [(a, sp[a])] + _w(self.choice(("", "now", "tonight", "office", "department")))
        # the period word doubles as a verb
        base = self.choice((
            "i am here", "i am hungry", "i am on my way", "yes i am", "i am late", "i am home",
        ))
        return _w(base) + _w("at") + self._time_token()

    def _time_token(self) -> list[Pair]:
        h = self.hour()
        return [(f"{h}:00", tuple(self.rd.cardinal(h)) + ("o'clock",))]

    def plus(self) -> list[Pair]:
        a, b = self.r.randint(1, 20), self.r.randint(1, 20)
        return _w("what is") + [(str(a), tuple(self.rd.cardinal(a))), ("+", ("plus",)),
                                (str(b), tuple(self.rd.cardinal(b)))]


def generate_synthetic(config: SyntheticConfig | None = None, seed: int = 0):
    """Seeded (train, dev, test) corpora."""
    cfg = config or SyntheticConfig()
    cfg.validate()
    spec = load_number_spec(cfg.numbers_path or _default_numbers())
    rng = random.Random(seed)
    gen = _Gen(rng, Reader(spec))
    classes = [c for c in CLASSES if cfg.mixture.get(c, 0) > 0]
    weights = [cfg.mixture[c] for c in classes]
    builders: dict[str, Callable[[], list[Pair]]] = {c: getattr(gen, c) for c in classes}

    def sentence() -> AlignedSentence:
        c = rng.choices(classes, weights)[0]
        return AlignedSentence(builders[c](), tag=c)

    total = cfg.n_train + cfg.n_dev + cfg.n_test
    sents = [sentence() for _ in range(total)]
    a, b = cfg.n_train, cfg.n_train + cfg.n_dev
    return sents[:a], sents[a:b], sents[b:]


def _default_numbers() -> Path:
    from . import data_path

    return data_path("numbers_en.tsv")


def number_corpus(n: int = 10_000, seed: int = 0, max_digits: int = 6,
                  numbers_path: str | Path | None = None) -> list[list[str]]:
    """Spoken readings of uniformly random numbers, for the pruning LM."""
    spec = load_number_spec(numbers_path or _default_numbers())
    rd = Reader(spec)
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        k = rng.randint(1, max_digits)
        v = rng.randint(10 ** (k - 1) if k > 1 else 0, 10 ** k - 1)
        out.append(rd.cardinal(v))
    return out
