"""Bounded entailment: search small interpretations for a countermodel.

Unbounded entailment over arbitrary interpretations is out of reach, so the
search looks at universes of a few atoms and reports what it found.  A
countermodel is real; "holds" only speaks for the bound.

    python3 demos/bounded_entailment.py
"""
import json

from setkr.parser import parse_assertion, parse_kb
from setkr.semantics import CounterModel, SearchBound, check_entails, models, models_kb

kb = parse_kb("""
individual a, b, c;
concept Person;
op Parent(Person);
assert Parent(a) = b;
assert Parent(c) = b;
assert not a = c;
""")

for query in ["Parent(a) = Parent(c)", "a = b", "Parent(Parent(a)) = Parent(b)", "not Parent(b) = b"]:
    q = parse_assertion(query, kb.structure)
    v = check_entails(kb, q, SearchBound(atoms=3))
    print(f"{query:32} {v.verdict:14} ({v.stats.nodes} search nodes)")
    if isinstance(v, CounterModel):
        m = v.interpretation
        # a countermodel can always be re-checked independently
        assert models_kb(m, kb) and not models(m, q)
        print("   ", json.dumps(m.to_json(), ensure_ascii=False))

# with a tiny node budget the search gives up and says so
v = check_entails(kb, parse_assertion("a = b", kb.structure), SearchBound(atoms=3, node_limit=2))
print("\nwith node_limit=2:", v.verdict)
