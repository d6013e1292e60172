import random

import pytest

from textnorm import data_path
from textnorm import fst as F
from textnorm.grammar import (
    Cross,
    DuplicateDefinitionError,
    GrammarSyntaxError,
    Lexicon,
    Literal,
    MissingLexiconKeyError,
    UndefinedVariableError,
    UnknownRootError,
    bind_lexicon,
    compile_grammar,
    load_lexicon,
    parse_grammar,
)

from oracles import relation


def as_strings(rel):
    return {("".join(map(chr, i)), "".join(map(chr, o))) for i, o in rel}


def outputs(V, token, n=1000):
    lat = F.project(F.compose(F.literal(token), V), "output")
    return [p.output_string for p in F.nshortest(lat, n, unique=True)]


# --- an independent interpreter over random expression trees ----------------


def rand_expr(rng, depth):
    if depth == 0 or rng.random() < 0.3:
        return ("lit", "".join(rng.choice("ab") for _ in range(rng.randint(0, 2))))
    kind = rng.choice(("union", "concat", "cross", "opt", "compose"))
    if kind == "opt":
        return ("opt", rand_expr(rng, depth - 1))
    return (kind, rand_expr(rng, depth - 1), rand_expr(rng, depth - 1))


def render(e):
    if e[0] == "lit":
        return '"' + e[1] + '"'
    if e[0] == "opt":
        return "(" + render(e[1]) + ")?"
    op = {"union": " | ", "concat": " ", "cross": " : ", "compose": " @ "}[e[0]]
    return "(" + render(e[1]) + op + render(e[2]) + ")"


def denote(e):
    if e[0] == "lit":
        return {(e[1], e[1])}
    if e[0] == "opt":
        return denote(e[1]) | {("", "")}
    a, b = denote(e[1]), denote(e[2])
    if e[0] == "union":
        return a | b
    if e[0] == "concat":
        return {(i1 + i2, o1 + o2) for i1, o1 in a for i2, o2 in b}
    if e[0] == "cross":
        return {(i, o) for i, _ in a for _, o in b}
    return {(i, o) for i, m in a for m2, o in b if m == m2}


def test_compile_matches_interpreter_on_random_grammars():
    rng = random.Random(5)
    for _ in range(300):
        e = rand_expr(rng, 3)
        V = compile_grammar(parse_grammar(f"x = {render(e)};"))
        assert as_strings(relation(V)) == denote(e), render(e)


# --- parsing ------------------------------------------------------------------

TIME_FRAGMENT = """
period = @@TIME_AM@@ | @@TIME_PM@@;
space = " " | ("" : " ");
time = Optimize[(period space)? time_variants |
                time_variants (space period)?];
"""


def test_time_fragment_parses():
    ast = parse_grammar(TIME_FRAGMENT, predefined={"time_variants"})
    assert ast.names == ["period", "space", "time"]
    assert ast.placeholders() == {"@@TIME_AM@@", "@@TIME_PM@@"}


def test_time_fragment_allows_both_orders():
    lex = load_lexicon(data_path("lexicon_en.tsv"))
    src = 'time_variants = "3:30" : "three thirty";' + TIME_FRAGMENT
    V = compile_grammar(bind_lexicon(parse_grammar(src), lex), "time")
    spoken = {p.output_string for p in F.nshortest(F.project(V, "output"), 100, unique=True)}
    assert {"three thirty p m", "p m three thirty", "three thirty"} <= spoken
    assert outputs(V, "3:30 p m") == ["three thirty p m"]
    assert outputs(V, "p m3:30") == ["p m three thirty"]


def test_single_cross():
    ast = parse_grammar('x = "a" : "b";')
    assert ast.definitions == {"x": Cross(Literal("a"), Literal("b"))}
    assert relation(compile_grammar(ast)) == {((ord("a"),), (ord("b"),)): 0.0}


def test_escapes():
    V = compile_grammar(parse_grammar(r'x = "a\"b\\";'))
    assert outputs(V, 'a"b\\') == ['a"b\\']


@pytest.mark.parametrize("src,err", [
    ("x = y;", UndefinedVariableError),
    ('x = "a"; x = "b";', DuplicateDefinitionError),
    ('x = "a" |;', GrammarSyntaxError),
    ('x = "a"', GrammarSyntaxError),
    ('x = "unterminated;', GrammarSyntaxError),
])
def test_parse_errors(src, err):
    with pytest.raises(err):
        parse_grammar(src)


def test_syntax_error_has_position():
    with pytest.raises(GrammarSyntaxError) as exc:
        parse_grammar('a = "x";\nb = "y" | | "z";')
    assert "2" in str(exc.value)


def test_unknown_root():
    with pytest.raises(UnknownRootError):
        compile_grammar(parse_grammar('x = "a";'), "nope")


def test_root_defaults_to_last_definition():
    V = compile_grammar(parse_grammar('x = "a"; y = "b";'))
    assert outputs(V, "b") == ["b"] and outputs(V, "a") == []


# --- lexicon ------------------------------------------------------------------


def test_lexicon_bindings():
    lex = load_lexicon(data_path("lexicon_en.tsv"))
    assert lex["@@MINUS@@"] == ["minus"]
    assert lex["@@DECIMAL_DOT@@"] == ["point"]
    assert lex["@@URL_DOT@@"] == ["dot"]
    ast = bind_lexicon(parse_grammar("x = @@MINUS@@;"), lex)
    assert ast.definitions["x"] == Literal("minus")


def test_repeated_keys_union():
    lex = Lexicon({"@@PLUS@@": ["plus", "and"]})
    V = compile_grammar(bind_lexicon(parse_grammar('x = "+" : @@PLUS@@;'), lex))
    assert sorted(outputs(V, "+")) == ["and", "plus"]


def test_bind_without_placeholders_is_identity():
    ast = parse_grammar('x = "a" | "b";')
    assert bind_lexicon(ast, Lexicon()).definitions == ast.definitions


def test_missing_key_names_placeholder():
    with pytest.raises(MissingLexiconKeyError, match="@@NOPE@@"):
        bind_lexicon(parse_grammar("x = @@NOPE@@;"), Lexicon())


def test_bind_then_compile_equals_substitution():
    lex = load_lexicon(data_path("lexicon_en.tsv"))
    ast = parse_grammar('x = ("-" : @@MINUS@@) | ("." : @@URL_DOT@@) | ("+" : @@PLUS@@);')
    a = compile_grammar(bind_lexicon(ast, lex))
    b = compile_grammar(ast, lexicon=lex)
    assert relation(a) == relation(b)


# --- shipped grammars ---------------------------------------------------------


def test_specific_time(specific):
    assert set(outputs(specific, "9:00")) == {"nine", "nine o'clock"}
    assert outputs(specific, "am") == ["a m"]


def test_covering_overgenerates(covering, specific):
    for tok in ("9:30", "123", "$5", "2200"):
        s, c = set(outputs(specific, tok)), set(outputs(covering, tok, 5000))
        assert s and s <= c and len(c) > len(s), tok
    assert "half past nine" in outputs(covering, "9:30", 5000)


def test_shipped_grammars_parse_cleanly():
    for name in ("specific.grm", "covering.grm"):
        ast = parse_grammar(data_path(name).read_text(encoding="utf-8"))
        assert ast.names
