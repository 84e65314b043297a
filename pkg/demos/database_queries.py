"""The database fragment: flat facts Op(a1, ..., an) = b and memberships a ∈ C.

Such knowledge bases are answered by a congruence closure over the facts,
in time linear in their number, and the answers match bounded entailment.

    python3 demos/database_queries.py
"""
import random
import time

from setkr.parser import parse_assertion, parse_kb
from setkr.semantics import Holds, check_entails, classify_fragment, query_database
from setkr.syntax import Apply, Assertion, Atomic, KnowledgeBase, Lit, OperatorSig, SyntacticStructure
from setkr.hfset import TOP

kb = parse_kb("""
individual alice, bob, carol, female, male;
concept Human;
op Sex(Human);
op Mother(Human);
assert Sex(alice) = female;
assert Sex(bob) = male;
assert Mother(bob) = alice;
assert Mother(carol) = alice;
assert alice ∈ Human;
""")
print("fragment:", classify_fragment(kb))
for query in ["Sex(alice) = female", "Sex(alice) = male", "Sex(Mother(bob))", "carol ∈ Human"]:
    try:
        q = parse_assertion(query, kb.structure)
        answer = query_database(kb, q)
        agree = isinstance(check_entails(kb, q, atoms=3), Holds) == answer
        print(f"  {query:22} -> {answer}  (bounded entailment agrees: {agree})")
    except Exception as e:
        print(f"  {query:22} -> {type(e).__name__}: {e}")

# time grows linearly with the number of facts
rng = random.Random(1)
print("\nfacts    seconds   µs/fact")
for n in (1_000, 10_000, 100_000):
    people = [f"p{k}" for k in range(n // 2)]
    st = SyntacticStructure(set(people) | {"female", "male"}, {"Human"},
                            {"Sex": OperatorSig("Sex", ("Human",))})
    facts = [Assertion(Apply("Sex", (Atomic(p),)), Atomic(rng.choice(("female", "male"))))
             for p in people]
    facts += [Assertion(Apply("in", (Atomic(p), Atomic("Human"))), Lit(TOP)) for p in people]
    big = KnowledgeBase(st, (), facts)
    start = time.perf_counter()
    query_database(big, Assertion(Apply("Sex", (Atomic(people[-1]),)), Atomic("male")))
    took = time.perf_counter() - start
    print(f"{n:>7}  {took:8.3f}  {took / n * 1e6:8.2f}")
