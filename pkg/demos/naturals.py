"""The natural numbers as a recursive replacement definition.

0 is the empty set and Succ(n) = {n, {n}}.  The concept N is defined as
{0} ∪ Succ(N), which only makes sense as a process: every round adds the
successors of what is already there.  The evaluator runs that process for a
bounded number of rounds and says honestly that no fixpoint was reached.

    python3 demos/naturals.py
"""
from pathlib import Path

from setkr.definitions import build_dependency_graph, check_nonrecursive, evaluate
from setkr.hfset import render
from setkr.parser import parse_kb

kb = parse_kb(Path(__file__).with_name("data").joinpath("arithmetic.skr").read_text("utf-8"))

# the only recursion is through the replacement, so the acyclicity check passes
graph = build_dependency_graph(kb.definitions)
print("replacement edges:", sorted(graph.replacement_edges))
print("recursion check:", check_nonrecursive(graph) or "ok")

for rounds in (1, 2, 3, 5):
    r = evaluate(kb.definitions, max_rounds=rounds, concept_names=kb.structure.concepts)
    ext = r.concept_extents["N"]
    print(f"\nafter {rounds} round(s): |N| = {len(ext)}, fixpoint = {r.fixpoint_reached}")
    for n in ext:
        text = render(n)
        print("  ", text if len(text) < 70 else text[:67] + "...")

# Succ(n) = {n, {n}} always has exactly two elements, unlike n ∪ {n}
r = evaluate(kb.definitions, max_rounds=4, concept_names=kb.structure.concepts)
print("\nsizes of the successors:", [len(v) for v in r.concept_extents["N"]])

# a definition that mentions itself outside a replacement is rejected
bad = parse_kb("individual a, 1; concept N; op +(N, N); def a ::= a + 1;")
print("\na ::= a + 1 ->", check_nonrecursive(build_dependency_graph(bad.definitions)))
