"""Weighted finite-state transducers over the tropical semiring.

Labels are non-negative integers with ``0`` reserved for epsilon.  Character
level machines use Unicode codepoints as labels; word level machines (the
discriminative LM automaton, sentence lattices) use ids from a
:class:`SymbolTable`.

Weights combine with ``min`` (choice) and ``+`` (sequence), so the best path
is the shortest one.  Every operation returns a new machine and never mutates
its arguments; an :class:`Fst` is meant to be treated as frozen once built.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

EPSILON = 0
INF = math.inf

__all__ = [
    "EPSILON",
    "Fst",
    "Path",
    "SymbolTable",
    "CyclicFstError",
    "FstParseError",
    "labels",
    "literal",
    "cross",
    "cross_fst",
    "union",
    "concat",
    "closure",
    "plus",
    "optional",
    "reweight",
    "build",
    "compose",
    "invert",
    "project",
    "connect",
    "rmepsilon",
    "rmepsilon_optimize",
    "is_acyclic",
    "topological_order",
    "nshortest",
    "serialize",
    "deserialize",
]


class CyclicFstError(ValueError):
    """Raised when an algorithm that needs an acyclic machine gets a cyclic one."""


class FstParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class Fst:
    """Mutable during construction, immutable by convention afterwards.

    Arcs are stored per source state as ``(ilabel, olabel, weight, nextstate)``
    tuples.
    """

    __slots__ = ("_arcs", "_finals", "start", "symbols", "_index")

    def __init__(self) -> None:
        self._arcs: list[list[tuple[int, int, float, int]]] = []
        self._finals: dict[int, float] = {}
        self.start = -1
        self.symbols: SymbolTable | None = None
        self._index = None

    # construction

    def add_state(self) -> int:
        self._arcs.append([])
        return len(self._arcs) - 1

    def add_states(self, n: int) -> None:
        self._arcs.extend([] for _ in range(n))

    def add_arc(self, src: int, ilabel: int, olabel: int, weight: float, dst: int) -> None:
        self._arcs[src].append((ilabel, olabel, float(weight), dst))

    def set_start(self, q: int) -> None:
        self.start = q

    def set_final(self, q: int, weight: float = 0.0) -> None:
        self._finals[q] = float(weight)

    # inspection

    @property
    def num_states(self) -> int:
        return len(self._arcs)

    def states(self) -> range:
        return range(len(self._arcs))

    def arcs(self, q: int) -> list[tuple[int, int, float, int]]:
        return self._arcs[q]

    def final(self, q: int) -> float:
        return self._finals.get(q, INF)

    def is_final(self, q: int) -> bool:
        return q in self._finals

    @property
    def finals(self) -> dict[int, float]:
        return dict(self._finals)

    @property
    def num_arcs(self) -> int:
        return sum(len(a) for a in self._arcs)

    def input_index(self) -> list[dict[int, list[tuple[int, int, float, int]]]]:
        """Per state, arcs grouped by input label (cached)."""
        if self._index is None:
            index = []
            for arcs in self._arcs:
                d: dict[int, list] = {}
                for arc in arcs:
                    d.setdefault(arc[0], []).append(arc)
                index.append(d)
            self._index = index
        return self._index

    def copy(self) -> "Fst":
        f = Fst()
        f._arcs = [list(a) for a in self._arcs]
        f._finals = dict(self._finals)
        f.start = self.start
        f.symbols = self.symbols
        return f

    def __repr__(self) -> str:
        return f"Fst(states={self.num_states}, arcs={self.num_arcs}, finals={len(self._finals)})"

    def _add_copy(self, other: "Fst") -> int:
        """Append ``other``'s states into self; return the state offset."""
        offset = len(self._arcs)
        for arcs in other._arcs:
            self._arcs.append([(i, o, w, d + offset) for i, o, w, d in arcs])
        return offset


@dataclass(frozen=True)
class Path:
    input: tuple[int, ...]
    output: tuple[int, ...]
    weight: float

    @property
    def input_string(self) -> str:
        return "".join(map(chr, self.input))

    @property
    def output_string(self) -> str:
        return "".join(map(chr, self.output))


class SymbolTable:
    """Bijective word <-> id map; id 0 is epsilon."""

    def __init__(self, symbols: Iterable[str] = ()) -> None:
        self._sym = ["<eps>"]
        self._ids = {"<eps>": 0}
        for s in symbols:
            self.add(s)

    def add(self, symbol: str) -> int:
        if symbol not in self._ids:
            self._ids[symbol] = len(self._sym)
            self._sym.append(symbol)
        return self._ids[symbol]

    def find(self, symbol: str, default: int | None = None) -> int | None:
        return self._ids.get(symbol, default)

    def __getitem__(self, symbol: str) -> int:
        return self._ids[symbol]

    def symbol(self, i: int) -> str:
        return self._sym[i]

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._ids

    def __len__(self) -> int:
        return len(self._sym)

    def items(self) -> Iterator[tuple[int, str]]:
        return iter(enumerate(self._sym))


def labels(s: str | Sequence[int]) -> tuple[int, ...]:
    if isinstance(s, str):
        return tuple(ord(c) for c in s)
    return tuple(s)


# ---------------------------------------------------------------------------
# rational constructions


def literal(s: str | Sequence[int], weight: float = 0.0) -> Fst:
    """Identity acceptor for one string."""
    seq = labels(s)
    f = Fst()
    f.add_states(len(seq) + 1)
    f.set_start(0)
    for k, c in enumerate(seq):
        f.add_arc(k, c, c, 0.0, k + 1)
    f.set_final(len(seq), weight)
    return f


def cross(u: str | Sequence[int], v: str | Sequence[int], weight: float = 0.0) -> Fst:
    """Exactly the pair ``u -> v``, labels aligned left and padded with epsilon."""
    a, b = labels(u), labels(v)
    n = max(len(a), len(b))
    f = Fst()
    f.add_states(n + 1)
    f.set_start(0)
    for k in range(n):
        il = a[k] if k < len(a) else EPSILON
        ol = b[k] if k < len(b) else EPSILON
        f.add_arc(k, il, ol, 0.0, k + 1)
    f.set_final(n, weight)
    return f


def _erase(f: Fst, side: str) -> Fst:
    g = f.copy()
    g._index = None
    for q in g.states():
        if side == "output":
            g._arcs[q] = [(i, EPSILON, w, d) for i, o, w, d in g._arcs[q]]
        else:
            g._arcs[q] = [(EPSILON, o, w, d) for i, o, w, d in g._arcs[q]]
    return g


def cross_fst(a: Fst, b: Fst) -> Fst:
    """Cross product of two languages: every input string of ``a`` maps to
    every output string of ``b``."""
    return concat(_erase(a, "output"), _erase(b, "input"))


def union(*fsts: Fst) -> Fst:
    f = Fst()
    start = f.add_state()
    f.set_start(start)
    for g in fsts:
        if g.start < 0:
            continue
        off = f._add_copy(g)
        for q, w in g._finals.items():
            f.set_final(q + off, w)
        f.add_arc(start, EPSILON, EPSILON, 0.0, g.start + off)
    return f


def concat(*fsts: Fst) -> Fst:
    if not fsts:
        return literal("")
    f = Fst()
    prev_finals: dict[int, float] | None = None
    for g in fsts:
        if g.start < 0:
            return Fst()
        off = f._add_copy(g)
        if prev_finals is None:
            f.set_start(g.start + off)
        else:
            for q, w in prev_finals.items():
                f.add_arc(q, EPSILON, EPSILON, w, g.start + off)
        prev_finals = {q + off: w for q, w in g._finals.items()}
    f._finals = dict(prev_finals or {})
    return f


def closure(f: Fst) -> Fst:
    """Kleene star."""
    g = Fst()
    start = g.add_state()
    g.set_start(start)
    g.set_final(start, 0.0)
    if f.start < 0:
        return g
    off = g._add_copy(f)
    g.add_arc(start, EPSILON, EPSILON, 0.0, f.start + off)
    for q, w in f._finals.items():
        g.add_arc(q + off, EPSILON, EPSILON, w, start)
    return g


def plus(f: Fst) -> Fst:
    return concat(f, closure(f))


def optional(f: Fst) -> Fst:
    return union(f, literal(""))


def reweight(f: Fst, weight: float) -> Fst:
    """Multiply (tropical: add) ``weight`` onto every accepted path."""
    g = f.copy()
    g._finals = {q: w + weight for q, w in g._finals.items()}
    return g


def build(kind: str, *operands) -> Fst:
    """Dispatch a rational construction by name.

    ``literal`` and ``cross`` take strings; ``weight`` takes ``(fst, w)``;
    the others take machines.
    """
    if kind == "literal":
        return literal(*operands)
    if kind == "cross":
        u, v = operands[:2]
        if isinstance(u, Fst) or isinstance(v, Fst):
            a = u if isinstance(u, Fst) else literal(u)
            b = v if isinstance(v, Fst) else literal(v)
            return cross_fst(a, b)
        return cross(u, v)
    if kind == "union":
        return union(*operands)
    if kind == "concat":
        return concat(*operands)
    if kind == "optional":
        return optional(operands[0])
    if kind == "star":
        return closure(operands[0])
    if kind == "plus":
        return plus(operands[0])
    if kind == "weight":
        return reweight(operands[0], operands[1])
    raise ValueError(f"unknown construction {kind!r}")


# ---------------------------------------------------------------------------
# algebra


def compose(a: Fst, b: Fst) -> Fst:
    """Composition ``a o b`` with a three-state epsilon-sequencing filter.

    Filter state 0 allows everything; after ``a`` moves alone on an output
    epsilon (state 2) it may not let ``b`` move alone and vice versa (state 1),
    which keeps exactly one path per pair of epsilon interleavings.
    """
    out = Fst()
    out.symbols = b.symbols or a.symbols
    if a.start < 0 or b.start < 0:
        return out
    bidx = b.input_index()
    ids: dict[tuple[int, int, int], int] = {}
    stack: list[tuple[int, int, int]] = []

    def state(t: tuple[int, int, int]) -> int:
        s = ids.get(t)
        if s is None:
            s = out.add_state()
            ids[t] = s
            stack.append(t)
        return s

    out.set_start(state((a.start, b.start, 0)))
    a_arcs, b_arcs = a._arcs, b._arcs
    a_fin, b_fin = a._finals, b._finals
    while stack:
        t = stack.pop()
        qa, qb, filt = t
        s = ids[t]
        if qa in a_fin and qb in b_fin:
            out.set_final(s, a_fin[qa] + b_fin[qb])
        bmap = bidx[qb]
        beps = bmap.get(EPSILON, ())
        arcs_out = out._arcs[s]
        for il, ol, w, na in a_arcs[qa]:
            if ol == EPSILON:
                if filt != 1:
                    arcs_out.append((il, EPSILON, w, state((na, qb, 2))))
                if filt == 0:
                    for _, ol2, w2, nb in beps:
                        arcs_out.append((il, ol2, w + w2, state((na, nb, 0))))
            else:
                for _, ol2, w2, nb in bmap.get(ol, ()):
                    arcs_out.append((il, ol2, w + w2, state((na, nb, 0))))
        if filt != 2:
            for _, ol2, w2, nb in beps:
                arcs_out.append((EPSILON, ol2, w2, state((qa, nb, 1))))
    return connect(out)


def invert(f: Fst) -> Fst:
    g = Fst()
    g.start = f.start
    g.symbols = f.symbols
    g._finals = dict(f._finals)
    g._arcs = [[(o, i, w, d) for i, o, w, d in arcs] for arcs in f._arcs]
    return g


def project(f: Fst, side: str = "output") -> Fst:
    if side not in ("input", "output"):
        raise ValueError(f"side must be 'input' or 'output', not {side!r}")
    g = Fst()
    g.start = f.start
    g.symbols = f.symbols
    g._finals = dict(f._finals)
    if side == "output":
        g._arcs = [[(o, o, w, d) for i, o, w, d in arcs] for arcs in f._arcs]
    else:
        g._arcs = [[(i, i, w, d) for i, o, w, d in arcs] for arcs in f._arcs]
    return g


def connect(f: Fst) -> Fst:
    """Drop states that are not both accessible and coaccessible."""
    if f.start < 0:
        return Fst()
    n = f.num_states
    acc = bytearray(n)
    acc[f.start] = 1
    stack = [f.start]
    rev: list[list[int]] = [[] for _ in range(n)]
    while stack:
        q = stack.pop()
        for _, _, _, d in f._arcs[q]:
            rev[d].append(q)
            if not acc[d]:
                acc[d] = 1
                stack.append(d)
    coacc = bytearray(n)
    stack = [q for q in f._finals if acc[q]]
    for q in stack:
        coacc[q] = 1
    while stack:
        q = stack.pop()
        for p in rev[q]:
            if not coacc[p]:
                coacc[p] = 1
                stack.append(p)
    g = Fst()
    g.symbols = f.symbols
    if not coacc[f.start]:
        return g
    remap = [-1] * n
    for q in range(n):
        if coacc[q]:
            remap[q] = g.add_state()
    for q in range(n):
        r = remap[q]
        if r < 0:
            continue
        g._arcs[r] = [(i, o, w, remap[d]) for i, o, w, d in f._arcs[q] if remap[d] >= 0]
        if q in f._finals:
            g._finals[r] = f._finals[q]
    g.start = remap[f.start]
    return g


def _epsilon_closure(f: Fst, q: int) -> dict[int, float]:
    """Shortest distances from ``q`` over epsilon:epsilon arcs."""
    dist = {q: 0.0}
    heap = [(0.0, q)]
    done = set()
    relaxations = 0
    limit = 4 * (f.num_states + 1) ** 2
    while heap:
        d, p = heapq.heappop(heap)
        if d > dist.get(p, INF):
            continue
        done.add(p)
        for il, ol, w, r in f._arcs[p]:
            if il == EPSILON and ol == EPSILON:
                nd = d + w
                if nd < dist.get(r, INF) - 1e-12:
                    if r == q and nd < 0:
                        raise ValueError("negative-weight epsilon cycle")
                    dist[r] = nd
                    heapq.heappush(heap, (nd, r))
                    relaxations += 1
                    if relaxations > limit:
                        raise ValueError("negative-weight epsilon cycle")
    return dist


def rmepsilon(f: Fst) -> Fst:
    """Remove epsilon:epsilon arcs, keeping the weighted relation."""
    f = connect(f)
    g = Fst()
    g.symbols = f.symbols
    if f.start < 0:
        return g
    g.add_states(f.num_states)
    g.start = f.start
    has_eps = [any(i == EPSILON and o == EPSILON for i, o, _, _ in arcs) for arcs in f._arcs]
    for q in f.states():
        if not has_eps[q]:
            g._arcs[q] = list(f._arcs[q])
            if q in f._finals:
                g._finals[q] = f._finals[q]
            continue
        best: dict[tuple[int, int, int], float] = {}
        fin = INF
        for r, d in _epsilon_closure(f, q).items():
            fin = min(fin, d + f.final(r))
            for il, ol, w, nr in f._arcs[r]:
                if il == EPSILON and ol == EPSILON:
                    continue
                key = (il, ol, nr)
                nw = d + w
                if nw < best.get(key, INF):
                    best[key] = nw
        g._arcs[q] = [(il, ol, w, nr) for (il, ol, nr), w in best.items()]
        if fin < INF:
            g._finals[q] = fin
    return connect(g)


def _dedupe_arcs(f: Fst) -> Fst:
    g = f.copy()
    g._index = None
    for q in g.states():
        best: dict[tuple[int, int, int], float] = {}
        for il, ol, w, d in g._arcs[q]:
            key = (il, ol, d)
            if w < best.get(key, INF):
                best[key] = w
        g._arcs[q] = [(il, ol, w, d) for (il, ol, d), w in best.items()]
    return g


def rmepsilon_optimize(f: Fst) -> Fst:
    """Epsilon removal, trimming and parallel-arc merging.

    No determinization is attempted; only the weighted relation is promised.
    """
    return _dedupe_arcs(rmepsilon(f))


def topological_order(f: Fst) -> list[int]:
    n = f.num_states
    indeg = [0] * n
    for arcs in f._arcs:
        for _, _, _, d in arcs:
            indeg[d] += 1
    order = [q for q in range(n) if indeg[q] == 0]
    k = 0
    while k < len(order):
        q = order[k]
        k += 1
        for _, _, _, d in f._arcs[q]:
            indeg[d] -= 1
            if indeg[d] == 0:
                order.append(d)
    if len(order) != n:
        raise CyclicFstError("machine has a cycle")
    return order


def is_acyclic(f: Fst) -> bool:
    try:
        topological_order(connect(f))
    except CyclicFstError:
        return False
    return True


def nshortest(f: Fst, n: int, unique: bool = False) -> list[Path]:
    """The ``n`` lowest-weight paths, ordered by (weight, output, input).

    Best-first search whose priority is (exact lower bound on completion,
    output prefix, input prefix).  Both components only grow along a path,
    so complete paths leave the heap already in final order and ties are
    resolved lexicographically without enumerating all tied paths.  With
    ``unique`` repeated (input, output) pairs are dropped.
    """
    if n < 1:
        raise ValueError("n must be positive")
    g = connect(f)
    if g.start < 0:
        return []
    order = topological_order(g)
    h = [INF] * g.num_states
    for q in reversed(order):
        best = g.final(q)
        for _, _, w, d in g._arcs[q]:
            c = w + h[d]
            if c < best:
                best = c
        h[q] = best
    results: list[Path] = []
    seen: set[tuple[tuple[int, ...], tuple[int, ...]]] = set()
    counter = 0
    heap = [(round(h[g.start], 9), (), (), 1, counter, g.start, 0.0)]
    arcs, finals = g._arcs, g._finals
    while heap and len(results) < n:
        _, out, inp, kind, _, q, cost = heapq.heappop(heap)
        if kind == 0:
            if unique:
                key = (inp, out)
                if key in seen:
                    continue
                seen.add(key)
            results.append(Path(inp, out, cost))
            continue
        if q in finals:
            c = cost + finals[q]
            counter += 1
            heapq.heappush(heap, (round(c, 9), out, inp, 0, counter, -1, c))
        for il, ol, w, d in arcs[q]:
            c = cost + w
            counter += 1
            heapq.heappush(
                heap,
                (
                    round(c + h[d], 9),
                    out + (ol,) if ol else out,
                    inp + (il,) if il else inp,
                    1,
                    counter,
                    d,
                    c,
                ),
            )
    return results


# ---------------------------------------------------------------------------
# text format


def _fmt(w: float) -> str:
    s = f"{w:.9g}"
    return s if float(s) == w else repr(w)


def serialize(f: Fst) -> str:
    lines = [f"FST {f.start}"]
    if f.symbols is not None:
        for i, s in f.symbols.items():
            if i:
                lines.append(f"S {i} {s}")
    for q in f.states():
        for il, ol, w, d in f._arcs[q]:
            lines.append(f"A {q} {d} {il} {ol} {_fmt(w)}")
    for q in sorted(f._finals):
        lines.append(f"F {q} {_fmt(f._finals[q])}")
    return "\n".join(lines) + "\n"


def deserialize(text: str) -> Fst:
    f = Fst()
    arcs: list[tuple[int, int, int, int, float]] = []
    finals: list[tuple[int, float]] = []
    symbols: list[tuple[int, str]] = []
    header = False
    top = -1
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split(" ")
        try:
            if not header:
                if parts[0] != "FST" or len(parts) != 2:
                    raise FstParseError(lineno, "expected header 'FST <start>'")
                f.start = int(parts[1])
                top = max(top, f.start)
                header = True
            elif parts[0] == "A" and len(parts) == 6:
                src, dst, il, ol = (int(p) for p in parts[1:5])
                w = float(parts[5])
                # negative labels are reserved markers (failure arcs) and pass through
                if min(src, dst) < 0 or not math.isfinite(w):
                    raise FstParseError(lineno, "negative state or non-finite weight")
                arcs.append((src, dst, il, ol, w))
                top = max(top, src, dst)
            elif parts[0] == "F" and len(parts) == 3:
                q, w = int(parts[1]), float(parts[2])
                if q < 0 or not math.isfinite(w):
                    raise FstParseError(lineno, "bad final record")
                finals.append((q, w))
                top = max(top, q)
            elif parts[0] == "S" and len(parts) == 3:
                symbols.append((int(parts[1]), parts[2]))
            else:
                raise FstParseError(lineno, f"unrecognized record {line!r}")
        except FstParseError:
            raise
        except ValueError as exc:
            raise FstParseError(lineno, str(exc)) from None
    if not header:
        raise FstParseError(1, "missing header")
    f.add_states(top + 1)
    for src, dst, il, ol, w in arcs:
        f.add_arc(src, il, ol, w, dst)
    for q, w in finals:
        f.set_final(q, w)
    if symbols:
        table = SymbolTable()
        for i, s in sorted(symbols):
            if table.add(s) != i:
                raise FstParseError(0, f"symbol ids must be dense, got {i} for {s!r}")
        f.symbols = table
    return f
