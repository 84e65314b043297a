from hypothesis import given, settings
from hypothesis import strategies as st
import pytest

from setkr.errors import ParseError
from setkr.hfset import BOT, EMPTY, TOP, Atom, HSet, Tup
from setkr.parser import (format_assertion, format_formula, format_kb, parse_assertion,
                          parse_formula, parse_kb, parse_term, tokenize)
from setkr.syntax import (And, Apply, Assertion, Atomic, CBin, CName, ConceptEnum, ConceptOp,
                          ConceptRef, Equiv, Exists, Forall, Implies, KnowledgeBase, Lit, Not,
                          OperatorDef, OperatorSig, Or, Prim, SyntacticStructure, is_primitive,
                          free_placeholders, set_of, tuple_of)

ST = SyntacticStructure(
    {"a", "b", "c", "d", "2", "3", "5"}, {"C"},
    {"F": OperatorSig("F", ("C",)), "G": OperatorSig("G", ("C", "C")),
     "+": OperatorSig("+", ("C", "C")), "Op": OperatorSig("Op", ("C", "C")),
     "Opp": OperatorSig("Opp", ("C",))})


def test_operator_definition():
    kb = parse_kb("individual 0; concept N; op Succ(N); def Succ(N) ::= {N, {N}};")
    (d,) = kb.definitions
    assert isinstance(d, OperatorDef) and d.target == "Succ"
    assert d.params == (("N", 1),)
    n = ConceptRef("N", 1)
    assert d.body == Apply("{}", (n, Apply("{}", (n,))))


def test_enumeration_definition():
    kb = parse_kb("def Digits ::= {0,1,2,3,4,5,6,7,8,9};")
    (d,) = kb.definitions
    assert isinstance(d, ConceptEnum)
    assert [m.name for m in d.members] == [str(k) for k in range(10)]
    assert "Digits" in kb.structure.concepts


def test_operation_definition():
    kb = parse_kb("concept Human, Male; def Man ::= Human /\\ Male;")
    (d,) = kb.definitions
    assert d == ConceptOp("Man", CBin("inter", CName("Human"), CName("Male")))
    assert parse_kb("concept Human, Male; def Man ::= Human ∩ Male;").definitions == kb.definitions


def test_infix_assertion():
    a = parse_assertion("2+3 = 5", ST)
    assert a == Assertion(Apply("+", (Atomic("2"), Atomic("3"))), Atomic("5"))
    assert is_primitive(a)


def test_reflexive_assertion():
    a = parse_assertion("a = a", ST)
    assert a.lhs == a.rhs == Atomic("a")


def test_nested_assertion():
    a = parse_assertion("Op(a,Op(b,Opp(c))) = Opp(d)", ST)
    assert a.lhs == Apply("Op", (Atomic("a"), Apply("Op", (Atomic("b"), Apply("Opp", (Atomic("c"),))))))
    assert not is_primitive(a)


def test_postfix_and_boolean_sugar():
    assert parse_assertion("a.Opp = b", ST) == parse_assertion("Opp(a) = b", ST)
    assert parse_assertion("F(a)", ST) == Assertion(Apply("F", (Atomic("a"),)), Lit(TOP))


def test_ascii_and_unicode_spellings_agree():
    pairs = [("a != b", "a ≠ b"), ("not a = b and c = d", "¬a = b ∧ c = d"),
             ("a = b or c = d", "a = b ∨ c = d"), ("a = b implies c = d", "a = b → c = d"),
             ("a = b equiv c = d", "a = b ≡ c = d"), ("forall C: F(C) = C", "∀ C: F(C) = C")]
    for ascii, uni in pairs:
        assert parse_formula(ascii, ST) == parse_formula(uni, ST)


def test_comments_and_copies():
    kb = parse_kb("# header\nconcept N; # trailing\nassert N^1 = N²;")
    (a,) = kb.schema_assertions
    assert a == Assertion(ConceptRef("N", 1), ConceptRef("N", 2))


@pytest.mark.parametrize("src", [
    "individual a; assert a = ;",
    "def ::= ;",
    "individual a\nassert b = a;",
    "concept C; op F(C); assert F(a) = {b;",
    "op F(;",
    "assert (a = b;",
    "individual a; assert a == b;",
])
def test_syntax_errors_have_spans(src):
    with pytest.raises(ParseError) as info:
        parse_kb(src, "t.skr")
    diags = info.value.diagnostics
    assert diags and all(d.severity == "error" and d.message for d in diags)
    lines = src.split("\n")
    for d in diags:
        assert d.span.file == "t.skr"
        assert 1 <= d.span.line <= len(lines)
        assert 1 <= d.span.column <= len(lines[d.span.line - 1]) + 1


def test_diagnostic_rendering():
    with pytest.raises(ParseError) as info:
        parse_kb("individual a;\nassert a = ;", "kb.skr")
    assert str(info.value.diagnostics[0]).startswith("kb.skr:2:12: error: ")


def test_no_partial_ast_on_error():
    with pytest.raises(ParseError):
        parse_kb("individual a; assert a = a; assert a = ;")


def test_tokenize_positions():
    toks = [t for t in tokenize("a ∪ b\n  c") if t.text]
    assert [(t.text, t.line, t.col) for t in toks][:4] == [("a", 1, 1), ("∪", 1, 3), ("b", 1, 5), ("c", 2, 3)]


def test_parse_term_literals():
    assert parse_term("∅") == Lit(EMPTY)
    # set formers over literals fold to one literal value
    assert parse_term("{⊤, ⊥}") == Lit(HSet([TOP, BOT]))
    assert parse_term("{a, ⊥}", ST) == Apply("{}", (Atomic("a"), Lit(BOT)))


def test_arithmetic_round_trip(arithmetic_text):
    kb = parse_kb(arithmetic_text)
    assert parse_kb(format_kb(kb)) == kb


# -- structured fuzzer ---------------------------------------------------------

VALUES = st.sampled_from([EMPTY, TOP, BOT, HSet([EMPTY]), Tup([Atom("x"), EMPTY]), HSet([Atom("y")])])


def terms(depth=5):
    leaf = st.one_of(st.sampled_from(["a", "b", "c", "d"]).map(Atomic), VALUES.map(Lit),
                     st.integers(1, 3).map(lambda k: ConceptRef("C", k)))
    if depth == 0:
        return leaf

    def grow(inner):
        return st.one_of(
            inner.map(lambda t: Apply("F", (t,))),
            st.tuples(inner, inner).map(lambda p: Apply("G", p)),
            st.tuples(inner, inner).map(lambda p: Apply("+", p)),
            st.lists(inner, max_size=3).map(lambda xs: set_of(*xs)),
            st.lists(inner, min_size=2, max_size=3).map(lambda xs: tuple_of(*xs)),
            st.tuples(st.sampled_from(["union", "inter", "diff", "prod"]), inner, inner).map(
                lambda p: Apply(p[0], p[1:])),
        )
    return st.recursive(leaf, grow, max_leaves=2 ** depth)


assertions = st.builds(Assertion, terms(), terms())


def formulas():
    leaf = assertions.map(Prim)
    return st.recursive(leaf, lambda f: st.one_of(
        f.map(Not),
        st.tuples(f, f).map(lambda p: And(*p)),
        st.tuples(f, f).map(lambda p: Or(*p)),
        st.tuples(f, f).map(lambda p: Implies(*p)),
        st.tuples(f, f).map(lambda p: Equiv(*p))), max_leaves=6)


@settings(max_examples=300, deadline=None)
@given(assertions)
def test_assertion_round_trip(a):
    assert parse_assertion(format_assertion(a, ST), ST) == a


@settings(max_examples=200, deadline=None)
@given(formulas())
def test_formula_round_trip(f):
    assert parse_formula(format_formula(f, ST), ST) == f


@settings(max_examples=100, deadline=None)
@given(st.lists(assertions, max_size=4))
def test_kb_round_trip(items):
    ground = tuple(a for a in items if not free_placeholders(a))
    schemas = tuple(a for a in items if free_placeholders(a))
    kb = KnowledgeBase(ST, (), ground, schemas)
    again = parse_kb(format_kb(kb))
    assert again.assertions == ground and again.schema_assertions == schemas
    assert parse_kb(format_kb(again)) == again


@settings(max_examples=200, deadline=None)
@given(st.text(alphabet="ab=;(){},∪ \n#:|^1CF", max_size=40))
def test_garbage_never_crashes(src):
    try:
        parse_kb("concept C; op F(C);\n" + src, "g.skr")
    except ParseError as e:
        lines = ("concept C; op F(C);\n" + src).split("\n")
        for d in e.diagnostics:
            assert 1 <= d.span.line <= len(lines)
            assert 1 <= d.span.column <= len(lines[d.span.line - 1]) + 1
