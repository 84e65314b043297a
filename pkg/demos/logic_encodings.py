"""Connectives and quantifiers written as a single set equality.

Negation of a = b becomes {a} ∩ {b} = ∅; conjunction, disjunction and
implication combine such singleton intersections.  Here every encoding is
printed and then checked against an ordinary truth table on small
interpretations.

    python3 demos/logic_encodings.py
"""
from itertools import product

from setkr.desugar import desugar_logic
from setkr.hfset import BOT, TOP, Atom, HSet
from setkr.parser import format_assertion, parse_formula
from setkr.semantics import Interpretation, models
from setkr.syntax import OperatorSig, SyntacticStructure

st = SyntacticStructure({"a", "a2", "b", "b2"}, {"C"})
FORMULAS = {
    "not a = a2": lambda p, q: not p,
    "a = a2 and b = b2": lambda p, q: p and q,
    "a = a2 or b = b2": lambda p, q: p or q,
    "a = a2 implies b = b2": lambda p, q: (not p) or q,
    "a = a2 equiv b = b2": lambda p, q: p == q,
}

universe = [Atom("u0"), Atom("u1")]
for text, truth in FORMULAS.items():
    enc = desugar_logic(parse_formula(text, st))
    shown = format_assertion(enc)
    print(f"{text:24} ~> {shown if len(shown) < 90 else shown[:87] + '...'}")
    rows = 0
    for vals in product(universe, repeat=4):
        i = Interpretation(HSet(universe), dict(zip(("a", "a2", "b", "b2"), vals)))
        p, q = vals[0] == vals[1], vals[2] == vals[3]
        assert models(i, enc) == truth(p, q)
        rows += 1
    print(f"{'':24}    agrees with the truth table on {rows} interpretations")

# quantifiers filter a concept: ∀ keeps everything, ∃ keeps something
st = SyntacticStructure(set(), {"C"}, {})
forall = desugar_logic(parse_formula("forall C: C = C", st))
print("\nforall C: C = C  ~>", format_assertion(forall))
exists_p = parse_formula("exists C: P(C) = true",
                         SyntacticStructure(set(), {"C"}, {"P": OperatorSig("P", ("C",))}))
enc = desugar_logic(exists_p)
for bits in product((TOP, BOT), repeat=2):
    i = Interpretation(HSet(universe), {}, {"C": HSet(universe)},
                       {"P": {(x,): b for x, b in zip(universe, bits)}})
    print(f"  P = {[b.name for b in bits]}: exists holds = {models(i, enc)}")
