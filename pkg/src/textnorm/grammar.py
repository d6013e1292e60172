"""A small Thrax-like grammar language compiled to transducers.

Statements are ``name = expr;`` with ``#`` line comments.  Operators, from
loosest to tightest binding::

    a | b        union
    a @ b        composition
    a b          concatenation (juxtaposition)
    a : b        cross product (u -> v for every u in a, v in b)
    a* a+ a?     closure, positive closure, optional

Atoms are double-quoted strings (``\\"`` and ``\\\\`` escapes), earlier
definitions, ``@@KEY@@`` placeholders bound from a lexicon, builtin machines
such as ``CARDINAL``, ``( ... )`` and ``Optimize[ ... ]``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from . import fst as F

BUILTIN_NAMES = frozenset({"CARDINAL", "ORDINAL", "DIGITS", "PAIRED", "HUNDREDS", "NUMBER"})
PLACEHOLDER_RE = re.compile(r"@@[A-Z_0-9]+@@")


class GrammarError(ValueError):
    pass


class GrammarSyntaxError(GrammarError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line, self.col = line, col


class UndefinedVariableError(GrammarError):
    pass


class DuplicateDefinitionError(GrammarError):
    pass


class MissingLexiconKeyError(GrammarError):
    pass


class UnknownRootError(GrammarError):
    pass


# --- AST -------------------------------------------------------------------


@dataclass(frozen=True)
class Literal:
    text: str


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Placeholder:
    key: str


@dataclass(frozen=True)
class Union:
    items: tuple


@dataclass(frozen=True)
class Concat:
    items: tuple


@dataclass(frozen=True)
class Cross:
    left: object
    right: object


@dataclass(frozen=True)
class Compose:
    left: object
    right: object


@dataclass(frozen=True)
class Closure:
    item: object
    kind: str  # "*", "+", "?"


@dataclass(frozen=True)
class Optimize:
    item: object


@dataclass
class GrammarAst:
    definitions: dict[str, object] = field(default_factory=dict)

    @property
    def names(self) -> list[str]:
        return list(self.definitions)

    def placeholders(self) -> set[str]:
        found: set[str] = set()
        for expr in self.definitions.values():
            _walk_placeholders(expr, found)
        return found


def _walk_placeholders(node, found: set[str]) -> None:
    if isinstance(node, Placeholder):
        found.add(node.key)
    elif isinstance(node, (Union, Concat)):
        for item in node.items:
            _walk_placeholders(item, found)
    elif isinstance(node, (Cross, Compose)):
        _walk_placeholders(node.left, found)
        _walk_placeholders(node.right, found)
    elif isinstance(node, (Closure, Optimize)):
        _walk_placeholders(node.item, found)


# --- lexer / parser --------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<placeholder>@@[A-Z_0-9]+@@)
  | (?P<optimize>Optimize\[)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[=;|:@*+?()\]])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    value: str
    line: int
    col: int


def _tokenize(source: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise GrammarSyntaxError(f"unexpected character {source[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        if kind not in ("ws", "comment"):
            toks.append(_Tok(kind, text, line, pos - line_start + 1))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rfind("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


def _unescape(body: str) -> str:
    return re.sub(r"\\(.)", r"\1", body)


class _Parser:
    def __init__(self, source: str, predefined: Iterable[str]):
        self.toks = _tokenize(source)
        self.i = 0
        self.predefined = frozenset(predefined)
        self.defined: set[str] = set()

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value: str) -> _Tok:
        tok = self.next()
        if tok.value != value or tok.kind == "string":
            raise GrammarSyntaxError(f"expected {value!r}, got {tok.value or 'end of input'!r}", tok.line, tok.col)
        return tok

    def parse(self) -> GrammarAst:
        ast = GrammarAst()
        while self.peek().kind != "eof":
            tok = self.next()
            if tok.kind != "name":
                raise GrammarSyntaxError(f"expected a definition name, got {tok.value!r}", tok.line, tok.col)
            if tok.value in ast.definitions or tok.value in self.predefined:
                raise DuplicateDefinitionError(f"{tok.line}:{tok.col}: {tok.value!r} is already defined")
            self.expect("=")
            expr = self.union()
            self.expect(";")
            ast.definitions[tok.value] = expr
            self.defined.add(tok.value)
        return ast

    def _starts_atom(self, tok: _Tok) -> bool:
        return tok.kind in ("string", "placeholder", "optimize", "name") or tok.value == "("

    def union(self):
        items = [self.compose()]
        while self.peek().value == "|" and self.peek().kind == "op":
            self.next()
            items.append(self.compose())
        return items[0] if len(items) == 1 else Union(tuple(items))

    def compose(self):
        left = self.concat()
        while self.peek().value == "@" and self.peek().kind == "op":
            self.next()
            left = Compose(left, self.concat())
        return left

    def concat(self):
        items = [self.cross()]
        while self._starts_atom(self.peek()):
            items.append(self.cross())
        return items[0] if len(items) == 1 else Concat(tuple(items))

    def cross(self):
        left = self.postfix()
        if self.peek().value == ":" and self.peek().kind == "op":
            self.next()
            return Cross(left, self.postfix())
        return left

    def postfix(self):
        node = self.atom()
        while self.peek().kind == "op" and self.peek().value in ("*", "+", "?"):
            node = Closure(node, self.next().value)
        return node

    def atom(self):
        tok = self.next()
        if tok.kind == "string":
            return Literal(_unescape(tok.value[1:-1]))
        if tok.kind == "placeholder":
            return Placeholder(tok.value)
        if tok.kind == "name":
            if tok.value not in self.defined and tok.value not in self.predefined:
                raise UndefinedVariableError(f"{tok.line}:{tok.col}: undefined variable {tok.value!r}")
            return Var(tok.value)
        if tok.kind == "optimize":
            inner = self.union()
            self.expect("]")
            return Optimize(inner)
        if tok.value == "(":
            inner = self.union()
            self.expect(")")
            return inner
        raise GrammarSyntaxError(f"unexpected {tok.value or 'end of input'!r}", tok.line, tok.col)


def parse_grammar(source: str, predefined: Iterable[str] = BUILTIN_NAMES) -> GrammarAst:
    """Parse grammar text.  ``predefined`` names may be referenced without a
    definition and are supplied at compile time."""
    return _Parser(source, predefined).parse()


# --- lexicon ---------------------------------------------------------------


class Lexicon:
    """Placeholder key -> one or more spoken expansions."""

    def __init__(self, entries: Mapping[str, Iterable[str]] | None = None):
        self._entries: dict[str, list[str]] = {}
        for key, values in (entries or {}).items():
            for v in ([values] if isinstance(values, str) else values):
                self.add(key, v)

    def add(self, key: str, expansion: str) -> None:
        if not PLACEHOLDER_RE.fullmatch(key):
            raise ValueError(f"bad lexicon key {key!r}")
        if not expansion:
            raise ValueError(f"empty expansion for {key}")
        values = self._entries.setdefault(key, [])
        if expansion not in values:
            values.append(expansion)

    def __getitem__(self, key: str) -> list[str]:
        return list(self._entries[key])

    def __contains__(self, key: str) -> bool:
        return key in self._entries

    def keys(self):
        return self._entries.keys()


def load_lexicon(path: str | Path) -> Lexicon:
    lex = Lexicon()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected KEY<TAB>expansion")
            try:
                lex.add(parts[0], parts[1])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    return lex


def _expansion(key: str, lex: Lexicon):
    if key not in lex:
        raise MissingLexiconKeyError(f"placeholder {key} has no lexicon entry")
    values = lex[key]
    if len(values) == 1:
        return Literal(values[0])
    return Union(tuple(Literal(v) for v in values))


def _bind(node, lex: Lexicon):
    if isinstance(node, Placeholder):
        return _expansion(node.key, lex)
    if isinstance(node, Union):
        return Union(tuple(_bind(n, lex) for n in node.items))
    if isinstance(node, Concat):
        return Concat(tuple(_bind(n, lex) for n in node.items))
    if isinstance(node, Cross):
        return Cross(_bind(node.left, lex), _bind(node.right, lex))
    if isinstance(node, Compose):
        return Compose(_bind(node.left, lex), _bind(node.right, lex))
    if isinstance(node, Closure):
        return Closure(_bind(node.item, lex), node.kind)
    if isinstance(node, Optimize):
        return Optimize(_bind(node.item, lex))
    return node


def bind_lexicon(ast: GrammarAst, lex: Lexicon) -> GrammarAst:
    """Replace every placeholder by the union of its expansions."""
    return GrammarAst({name: _bind(expr, lex) for name, expr in ast.definitions.items()})


# --- compilation -----------------------------------------------------------


class _Compiler:
    def __init__(self, ast: GrammarAst, builtins: Mapping[str, F.Fst], lexicon: Lexicon | None):
        self.ast = ast
        self.builtins = builtins
        self.lexicon = lexicon
        self.cache: dict[str, F.Fst] = {}

    def var(self, name: str) -> F.Fst:
        if name in self.cache:
            return self.cache[name]
        if name in self.ast.definitions:
            result = self.expr(self.ast.definitions[name])
        elif name in self.builtins:
            result = self.builtins[name]
        else:
            raise UndefinedVariableError(f"no definition or builtin named {name!r}")
        self.cache[name] = result
        return result

    def expr(self, node) -> F.Fst:
        if isinstance(node, Literal):
            return F.literal(node.text)
        if isinstance(node, Var):
            return self.var(node.name)
        if isinstance(node, Placeholder):
            if self.lexicon is None:
                raise MissingLexiconKeyError(f"unbound placeholder {node.key}")
            return self.expr(_expansion(node.key, self.lexicon))
        if isinstance(node, Union):
            return F.union(*(self.expr(n) for n in node.items))
        if isinstance(node, Concat):
            return F.concat(*(self.expr(n) for n in node.items))
        if isinstance(node, Cross):
            if isinstance(node.left, Literal) and isinstance(node.right, Literal):
                return F.cross(node.left.text, node.right.text)
            return F.cross_fst(self.expr(node.left), self.expr(node.right))
        if isinstance(node, Compose):
            return F.compose(self.expr(node.left), self.expr(node.right))
        if isinstance(node, Closure):
            inner = self.expr(node.item)
            return {"*": F.closure, "+": F.plus, "?": F.optional}[node.kind](inner)
        if isinstance(node, Optimize):
            return F.rmepsilon_optimize(self.expr(node.item))
        raise TypeError(f"not a grammar node: {node!r}")


def compile_grammar(
    ast: GrammarAst,
    root: str | None = None,
    builtins: Mapping[str, F.Fst] | None = None,
    lexicon: Lexicon | None = None,
    optimize: bool = True,
) -> F.Fst:
    """Compile definition ``root`` (default: the last one) to a transducer.

    Placeholders must already be bound, unless ``lexicon`` is given, in which
    case they are substituted during compilation.
    """
    if not ast.definitions:
        raise UnknownRootError("grammar has no definitions")
    if root is None:
        root = list(ast.definitions)[-1]
    if root not in ast.definitions:
        raise UnknownRootError(f"no definition named {root!r}")
    result = _Compiler(ast, builtins or {}, lexicon).var(root)
    return F.rmepsilon_optimize(result) if optimize else result


def load_grammar(
    grammar_path: str | Path,
    lexicon_path: str | Path | None = None,
    numbers_path: str | Path | None = None,
    root: str | None = None,
    max_digits: int = 6,
) -> F.Fst:
    """Parse, bind and compile a grammar file in one call."""
    from .numbers import load_number_spec, number_builtins

    ast = parse_grammar(Path(grammar_path).read_text(encoding="utf-8"))
    if lexicon_path is not None:
        ast = bind_lexicon(ast, load_lexicon(lexicon_path))
    builtins = {}
    if numbers_path is not None:
        builtins = number_builtins(load_number_spec(numbers_path), max_digits)
    return compile_grammar(ast, root, builtins)
