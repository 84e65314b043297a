"""A small family ontology, translated from description logic.

Roles become binary Boolean operators, and ∃R.C becomes a comprehension over
all individuals using the successor operator hat_R.  The translated concepts
are then evaluated on a concrete family and compared with what the DL
semantics says directly.

    python3 demos/family_ontology.py
"""
from pathlib import Path

from setkr.dl import (AtLeast, AtomicConcept, Complement, DLInterpretation, Exists, ForallR,
                      InverseRole, dl_extension, format_dl, parse_dl, translated_extension)
from setkr.parser import format_kb

text = Path(__file__).with_name("data").joinpath("family.dl").read_text("utf-8")
onto = parse_dl(text, "family.dl")
print("--- family.dl as .skr ---")
print(format_kb(onto.to_kb()))

family = DLInterpretation(
    ("alice", "bob", "carol", "dave"),
    {"Human": frozenset({"alice", "bob", "carol", "dave"}),
     "Female": frozenset({"alice", "carol"}), "Male": frozenset({"bob", "dave"})},
    {"ParentOf": frozenset({("alice", "carol"), ("bob", "carol"), ("carol", "dave")})})

female, human = AtomicConcept("Female"), AtomicConcept("Human")
queries = [
    Exists("ParentOf", female),                # has a daughter
    Exists(InverseRole("ParentOf"), female),   # has a mother
    ForallR("ParentOf", female),               # every child is female (childless included)
    AtLeast(2, InverseRole("ParentOf"), human),
    Complement(Exists("ParentOf", human)),
]
print("--- extents: translation vs DL semantics ---")
for q in queries:
    got = sorted(translated_extension(q, family))
    want = sorted(dl_extension(q, family))
    print(f"{format_dl(q):40} {got}  {'agrees' if got == want else 'DIFFERS'}")
