from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from setkr.desugar import (FreshNamer, desugar_kb, desugar_logic, desugar_multi,
                           desugar_quantifier, flatten_nested, lower)
from setkr.errors import BodyMentionsForeignConcept
from setkr.hfset import BOT, EMPTY, TOP, Atom, HSet, nat
from setkr.parser import format_assertion, format_kb, parse_assertion, parse_kb
from setkr.semantics import Interpretation, interpretation_from_kb, models, models_kb
from setkr.syntax import (And, Apply, Assertion, Atomic, Compr, ConceptRef, Exists, Forall,
                          Implies, Lit, Multi, Not, OperatorSig, Or, Prim, SyntacticStructure,
                          is_primitive)


def eq(x, y):
    return Assertion(Atomic(x), Atomic(y))


def world(**individuals):
    vals = {k: Atom(v) if isinstance(v, str) else v for k, v in individuals.items()}
    atoms = {v for v in vals.values() if isinstance(v, Atom)}
    return Interpretation(HSet(atoms), vals)


# -- multi-assertions --------------------------------------------------------------

def test_multi_builds_tuple_equality():
    m = desugar_multi([eq("a", "b"), eq("c", "d")])
    assert m == Assertion(Apply("()", (Atomic("a"), Atomic("c"))), Apply("()", (Atomic("b"), Atomic("d"))))


def test_unary_multi_collapses():
    assert desugar_multi([eq("a", "b")]) == eq("a", "b")
    with pytest.raises(ValueError):
        desugar_multi([])


def test_multi_model_equivalence():
    i = world(**{"0": "u0", "1": "u1", "2": "u2"})
    m = desugar_multi([eq("0", "0"), eq("1", "2")])
    assert models(i, eq("0", "0")) and not models(i, eq("1", "2"))
    assert not models(i, m)
    assert desugar_logic(Multi((Prim(eq("0", "0")), Prim(eq("1", "2"))))) == m


# -- flattening ----------------------------------------------------------------------

OPS = SyntacticStructure({"a", "b", "c", "d"}, {"D"},
                         {"Op": OperatorSig("Op", ("D", "D")), "Opp": OperatorSig("Opp", ("D",))})


def test_worked_example():
    a = parse_assertion("Op(a,Op(b,Opp(c))) = Opp(d)", OPS)
    out = flatten_nested(a, FreshNamer(OPS.names(), names=["x", "y"]))
    assert [format_assertion(x) for x in out] == ["Op(a, x) = Opp(d)", "x = Op(b, y)", "y = Opp(c)"]
    assert all(is_primitive(x) for x in out)


def test_primitive_assertion_is_unchanged():
    assert flatten_nested(eq("a", "b"), FreshNamer()) == [eq("a", "b")]


ARITH = SyntacticStructure({"0"}, {"N"}, {"Succ": OperatorSig("Succ", ("N",)),
                                          "Add": OperatorSig("Add", ("N", "N"))})


def arithmetic_model(size=6):
    """0 = ∅, Succ(n) = n ∪ {n}, Add on the von Neumann naturals below size."""
    succ = {(nat(k),): nat(k + 1) for k in range(size)}
    add = {(nat(x), nat(y)): nat(min(x + y, size)) for x in range(size + 1) for y in range(size + 1)}
    return Interpretation(HSet(), {"0": EMPTY}, {}, {"Succ": succ, "Add": add})


@pytest.mark.parametrize("text, truth", [
    ("Add(Succ(0), 0) = Succ(0)", True),
    ("Add(Succ(0), Succ(0)) = Succ(Succ(0))", True),
    ("Add(Succ(0), Succ(0)) = Succ(0)", False),
])
def test_arithmetic_flattening_keeps_meaning(text, truth):
    a = parse_assertion(text, ARITH)
    out = flatten_nested(a, FreshNamer(ARITH.names()))
    assert all(is_primitive(x) for x in out)
    i = arithmetic_model()
    ext = Interpretation(i.universe, dict(i.individuals), {}, i.operators)
    for x in reversed(out[1:]):
        ext.individuals[x.lhs.name] = ext.evaluator().eval(x.rhs)
    assert models(i, a) is truth
    assert all(models(ext, x) for x in out) is truth


def test_flattening_first_step():
    a = parse_assertion("Add(Succ(0), 0) = Succ(0)", ARITH)
    out = flatten_nested(a, FreshNamer(ARITH.names(), names=["x"]))
    assert [format_assertion(x) for x in out] == ["Add(x, 0) = Succ(0)", "x = Succ(0)"]


# -- connectives -----------------------------------------------------------------

def test_negation_encoding():
    enc = desugar_logic(Not(Prim(eq("a", "a2"))))
    assert enc == Assertion(Apply("inter", (Apply("{}", (Atomic("a"),)), Apply("{}", (Atomic("a2"),)))),
                            Lit(EMPTY))
    assert format_assertion(enc) == "({a} ∩ {a2}) = ∅"


def test_conjunction_of_reflexive_assertions():
    enc = desugar_logic(And(Prim(eq("a", "a")), Prim(eq("b", "b"))))
    assert format_assertion(enc) == "(({a} ∩ {a}) ∪ ({b} ∩ {b})) = {a, a, b, b}"
    i = world(a="u0", b="u1")
    assert i.evaluator().eval(enc.rhs) == HSet([Atom("u0"), Atom("u1")])
    assert models(i, enc)


def test_vacuous_implication():
    i = world(**{"0": "u0", "1": "u1", "2": "u2", "3": "u3"})
    enc = desugar_logic(Implies(Prim(eq("0", "1")), Prim(eq("2", "3"))))
    assert models(i, enc)
    # oracle: the left operand of the union is {0,1} \ ({0}∩{1}) = {0,1}
    left = enc.lhs.args[0].args[0]
    assert i.evaluator().eval(left) == HSet([Atom("u0"), Atom("u1")])


def test_set_valued_denotations():
    # {a} is a set containing a set when a denotes a set
    i = world(a=HSet([Atom("x")]), b=HSet([Atom("x")]), c=EMPTY)
    assert not models(i, desugar_logic(Not(Prim(eq("a", "b")))))
    assert models(i, desugar_logic(Not(Prim(eq("a", "c")))))
    assert models(i, desugar_logic(Or(Prim(eq("a", "c")), Prim(eq("a", "b")))))


FAMILY_VALUES = [Atom("u0"), Atom("u1"), EMPTY, HSet([Atom("u0")])]


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([Not, And, Or, Implies]),
       st.tuples(*[st.sampled_from(FAMILY_VALUES)] * 4))
def test_connectives_over_mixed_values(op, vals):
    i = world(**dict(zip(("a", "a2", "b", "b2"), vals)))
    p, q = vals[0] == vals[1], vals[2] == vals[3]
    a1, a2 = Prim(eq("a", "a2")), Prim(eq("b", "b2"))
    f = op(a1) if op is Not else op(a1, a2)
    truth = {Not: not p, And: p and q, Or: p or q, Implies: (not p) or q}[op]
    assert models(i, desugar_logic(f)) == truth


# -- quantifiers ---------------------------------------------------------------------

X = ConceptRef("C", 1)


def extent_world(extent, table=None):
    return Interpretation(HSet(extent), {}, {"C": HSet(extent)},
                          {"P": {(x,): v for x, v in (table or {}).items()}})


def test_forall_diagonal():
    enc = desugar_quantifier(Forall("C", Prim(Assertion(X, X))))
    assert enc == Assertion(Compr("C", 1, Assertion(X, X)), Atomic("C"))
    for n in range(4):
        assert models(extent_world([Atom(f"u{k}") for k in range(n)]), enc)


def test_quantifiers_over_empty_extent():
    body = Prim(Assertion(Apply("P", (X,)), Lit(TOP)))
    i = extent_world([])
    assert not models(i, desugar_quantifier(Exists("C", body)))
    assert models(i, desugar_quantifier(Forall("C", body)))


def test_quantifiers_against_direct_evaluation():
    body = Prim(Assertion(Apply("P", (X,)), Lit(TOP)))
    universe = [Atom(f"u{k}") for k in range(3)]
    for bits in product((TOP, BOT), repeat=3):
        i = extent_world(universe, dict(zip(universe, bits)))
        assert models(i, desugar_logic(Forall("C", body))) == all(b == TOP for b in bits)
        assert models(i, desugar_logic(Exists("C", body))) == any(b == TOP for b in bits)


def test_foreign_concept_in_body():
    with pytest.raises(BodyMentionsForeignConcept):
        desugar_quantifier(Forall("C", Prim(Assertion(X, ConceptRef("D", 1)))))
    with pytest.raises(BodyMentionsForeignConcept):
        desugar_quantifier(Forall("C", Prim(Assertion(X, X))), concepts={"D"})


# -- fresh names and whole knowledge bases ---------------------------------------------

def test_fresh_names_avoid_the_symbol_table():
    namer = FreshNamer({"_v1", "_v3", "x"}, names=["x", "y"])
    got = [namer() for _ in range(4)]
    assert got == ["y", "_v2", "_v4", "_v5"]
    assert len(set(got)) == 4


def test_lower_is_deterministic():
    f = Implies(Prim(parse_assertion("Op(a, Opp(b)) = c", OPS)), Prim(eq("a", "b")))
    assert lower(f, FreshNamer(OPS.names())) == lower(f, FreshNamer(OPS.names()))


KB_TEXT = """
individual 0, a, b;
concept N;
op Succ(N);
def 0 ::= ∅;
def Succ(N) ::= {N, {N}};
assert not a = b;
assert Succ(Succ(0)) = a;
"""


def test_desugar_kb_output_is_primitive_and_reparses():
    kb = desugar_kb(parse_kb(KB_TEXT))
    assert all(is_primitive(a) for a in kb.assertions)
    assert not kb.formulas
    assert parse_kb(format_kb(kb)) == kb
    assert set(kb.structure.individuals) - {"0", "a", "b"} == {"_v1", "_v2", "_v3"}


def test_desugar_kb_keeps_models():
    kb = parse_kb(KB_TEXT)
    low = desugar_kb(kb)
    two = HSet([EMPTY, HSet([EMPTY])])
    for a_val, b_val in [(HSet([two, HSet([two])]), Atom("b")), (Atom("a"), Atom("b")),
                         (HSet([two, HSet([two])]), HSet([two, HSet([two])]))]:
        i = Interpretation(HSet(), {"0": EMPTY, "a": a_val, "b": b_val}, {}, {},
                           tuple(kb.definitions[1:]))
        j = Interpretation(HSet(), dict(i.individuals), {}, {}, tuple(kb.definitions[1:]))
        for d in low.definitions:
            if d.target.startswith("_v"):
                j.individuals[d.target] = j.evaluator().eval(d.body)
        assert models_kb(i, kb) == models_kb(j, low)
