"""Acceptance criteria, one test per criterion.

Each criterion is a plain function returning (passed, detail) so the module
also runs as a script::

    python3 tests/test_acceptance.py [--seed N]

Every run prints one PASS/FAIL line per criterion.  Randomized criteria use
``SETKR_SEED`` (default 20240611) unless a seed is given.
"""
from __future__ import annotations

import gc
import os
import random
import sys
import time
from itertools import combinations, product

import numpy as np
import pytest

from setkr.definitions import build_dependency_graph, check_nonrecursive, evaluate
from setkr.desugar import FreshNamer, desugar_logic, desugar_multi, flatten_nested
from setkr.dl import (AtLeast, AtomicConcept, Complement, DLInterpretation, Exists, ForallR,
                      Intersect, InverseRole, Nominal, Translator, Union_, seed_from)
from setkr.hfset import BOT, EMPTY, TOP, Atom, HSet, render
from setkr.parser import format_assertion, parse_assertion, parse_kb
from setkr.semantics import (BoundExhausted, Holds, Interpretation, SearchBound, check_entails,
                             classify_fragment, models, query_database)
from setkr.syntax import (And, Apply, Assertion, Atomic, ConceptRef, Equiv, Implies, KnowledgeBase,
                          Lit, Not, OperatorSig, Or, Prim, SyntacticStructure, is_primitive)
from setkr.syntax import Exists as QExists
from setkr.syntax import Forall as QForall

SEED = int(os.environ.get("SETKR_SEED", "20240611"))

RESULTS: list = []


def run_criterion(number, title, limit, fn, *args):
    start = time.perf_counter()
    passed, detail = fn(*args)
    elapsed = time.perf_counter() - start
    in_time = elapsed < limit
    ok = passed and in_time
    timing = f"{elapsed:.2f}s (limit {limit:g}s)"
    if passed and not in_time:
        detail += "; too slow"
    line = f"{'PASS' if ok else 'FAIL'} [{number}] {title}: {detail}; {timing}"
    RESULTS.append(line)
    print(line)
    return ok, line


def atoms(n):
    return [Atom(f"u{k}") for k in range(n)]


def interp(universe, individuals=None, concepts=None, operators=None):
    return Interpretation(HSet(universe), dict(individuals or {}), dict(concepts or {}),
                          dict(operators or {}))


# -- 1, 2: connectives and tautologies -----------------------------------------

A1 = Prim(Assertion(Atomic("a"), Atomic("a2")))
A2 = Prim(Assertion(Atomic("b"), Atomic("b2")))

CONNECTIVES = [
    ("not", Not(A1), lambda p, q: not p),
    ("and", And(A1, A2), lambda p, q: p and q),
    ("or", Or(A1, A2), lambda p, q: p or q),
    ("implies", Implies(A1, A2), lambda p, q: (not p) or q),
    ("equiv", Equiv(A1, A2), lambda p, q: p == q),
]


def connective_family():
    """All assignments of four term denotations over 1 to 3 atoms."""
    for n in (1, 2, 3):
        universe = atoms(n)
        for vals in product(universe, repeat=4):
            yield interp(universe, dict(zip(("a", "a2", "b", "b2"), vals)))


def criterion_connectives():
    encodings = [(name, desugar_logic(f), truth) for name, f, truth in CONNECTIVES]
    checked = mismatches = 0
    for i in connective_family():
        v = i.individuals
        p, q = v["a"] == v["a2"], v["b"] == v["b2"]
        for _name, enc, truth in encodings:
            checked += 1
            if models(i, enc) != truth(p, q):
                mismatches += 1
    return mismatches == 0, f"{checked} cases, {mismatches} mismatches"


TAUTOLOGIES = [
    ("de morgan (or)", Equiv(Not(Or(A1, A2)), And(Not(A1), Not(A2)))),
    ("de morgan (and)", Equiv(Not(And(A1, A2)), Or(Not(A1), Not(A2)))),
    ("implication as disjunction", Equiv(Implies(A1, A2), Or(Not(A1), A2))),
]


def criterion_tautologies():
    encodings = [(name, desugar_logic(f)) for name, f in TAUTOLOGIES]
    failures = []
    count = 0
    for i in connective_family():
        count += 1
        for name, enc in encodings:
            if not models(i, enc):
                failures.append(name)
    return not failures, f"{len(encodings)} laws over {count} interpretations, {len(failures)} failures"


# -- 3: quantifiers ------------------------------------------------------------

BODY = Assertion(Apply("P", (ConceptRef("C", 1),)), Lit(TOP))


def criterion_quantifiers():
    universe = atoms(4)
    forall = desugar_logic(QForall("C", Prim(BODY)))
    exists = desugar_logic(QExists("C", Prim(BODY)))
    duality = desugar_logic(Equiv(QForall("C", Prim(BODY)), Not(QExists("C", Not(Prim(BODY))))))
    cases = bad = 0
    for size in range(5):
        for extent in combinations(universe, size):
            for bits in product((TOP, BOT), repeat=size):
                # Outside the extent P is ⊤, so a leak past C would show up.
                table = {(x,): TOP for x in universe}
                table.update({(x,): b for x, b in zip(extent, bits)})
                i = interp(universe, concepts={"C": HSet(extent)}, operators={"P": table})
                direct_all = all(b == TOP for b in bits)
                direct_any = any(b == TOP for b in bits)
                cases += 1
                if (models(i, forall) != direct_all or models(i, exists) != direct_any
                        or not models(i, duality)):
                    bad += 1
    return bad == 0, f"{cases} extent/table pairs, {bad} mismatches"


# -- 4: fixpoint ----------------------------------------------------------------

ARITHMETIC = """
individual 0;
concept N;
op Succ(N);
def 0 ::= ∅;
def Succ(N) ::= {N, {N}};
def N ::= {0} ∪ Succ(N);
"""


def naturals_oracle(k):
    """0 = ∅ and Succ(n) = {n, {n}} unfolded k times, built directly."""
    out, n = [EMPTY], EMPTY
    for _ in range(k):
        n = HSet([n, HSet([n])])
        out.append(n)
    return HSet(out)


def criterion_fixpoint():
    kb = parse_kb(ARITHMETIC)
    problems = []
    for k in range(1, 7):
        r = evaluate(kb.definitions, max_rounds=k, concept_names=kb.structure.concepts)
        ext = r.concept_extents["N"]
        if len(ext) != k + 1 or ext != naturals_oracle(k) or r.fixpoint_reached:
            problems.append(k)
        succ0 = r.operator_tables["Succ"][(EMPTY,)]
        if render(succ0) != "{∅, {∅}}":
            problems.append(f"Succ(0) at k={k}")
    return not problems, "k = 1..6 give k+1 naturals, Succ(0) = {∅, {∅}}" if not problems \
        else f"failures at {problems}"


# -- 5: flattening ----------------------------------------------------------------

FLAT_OPS = {"F": 1, "G": 2, "H": 1}
FLAT_NAMES = ("a", "b", "c", "d")


def random_term(rng, depth):
    if depth == 0 or rng.random() < 0.3:
        return Atomic(rng.choice(FLAT_NAMES))
    op = rng.choice(sorted(FLAT_OPS))
    return Apply(op, tuple(random_term(rng, depth - 1) for _ in range(FLAT_OPS[op])))


def random_tables(rng, universe):
    return {op: {args: rng.choice(universe) for args in product(universe, repeat=n)}
            for op, n in FLAT_OPS.items()}


def criterion_flattening(seed=SEED, cases=1500):
    rng = random.Random(seed)
    bad = []
    for _ in range(cases):
        universe = atoms(rng.randint(1, 3))
        i = interp(universe, {n: rng.choice(universe) for n in FLAT_NAMES},
                   operators=random_tables(rng, universe))
        a = Assertion(random_term(rng, 3), random_term(rng, 3))
        out = flatten_nested(a, FreshNamer(FLAT_NAMES))
        if not all(is_primitive(x) for x in out):
            bad.append(("not primitive", a))
            continue
        # Force each fresh individual to the value of the term it names,
        # innermost first.
        ext = interp(universe, i.individuals, operators=i.operators)
        for x in reversed(out[1:]):
            ext.individuals[x.lhs.name] = ext.evaluator().eval(x.rhs)
        if models(i, a) != all(models(ext, x) for x in out):
            bad.append(("meaning", a))
    namer = FreshNamer({"a", "b", "c", "d"}, names=["x", "y"])
    st = SyntacticStructure({"a", "b", "c", "d"}, {"D"},
                            {"Op": OperatorSig("Op", ("D", "D")), "Opp": OperatorSig("Opp", ("D",))})
    worked = flatten_nested(parse_assertion("Op(a, Op(b, Opp(c))) = Opp(d)", st), namer)
    printed = [format_assertion(x) for x in worked]
    expected = ["Op(a, x) = Opp(d)", "x = Op(b, y)", "y = Opp(c)"]
    ok = not bad and printed == expected
    return ok, f"{cases} random assertions, {len(bad)} failures; worked example {printed}"


# -- 6: multi-assertions ---------------------------------------------------------------

def criterion_multi():
    universe = atoms(2)
    cases = bad = 0
    for n in (1, 2, 3):
        parts = [Assertion(Atomic(f"a{k}"), Atomic(f"b{k}")) for k in range(n)]
        m = desugar_multi(parts)
        names = [f"a{k}" for k in range(n)] + [f"b{k}" for k in range(n)]
        for vals in product(universe, repeat=2 * n):
            i = interp(universe, dict(zip(names, vals)))
            cases += 1
            if models(i, m) != all(models(i, p) for p in parts):
                bad += 1
    return bad == 0, f"{cases} cases for n = 1..3, {bad} mismatches"


# -- 7: description logic -------------------------------------------------------------

def dl_oracle(e, domain, concepts, roles):
    """Textbook DL semantics, written independently of the library."""
    if isinstance(e, AtomicConcept):
        return frozenset(concepts.get(e.name, ()))
    if isinstance(e, Nominal):
        return frozenset({e.individual}) & frozenset(domain)
    if isinstance(e, Intersect):
        return dl_oracle(e.left, domain, concepts, roles) & dl_oracle(e.right, domain, concepts, roles)
    if isinstance(e, Union_):
        return dl_oracle(e.left, domain, concepts, roles) | dl_oracle(e.right, domain, concepts, roles)
    if isinstance(e, Complement):
        return frozenset(domain) - dl_oracle(e.arg, domain, concepts, roles)
    r = e.role
    pairs = roles.get(r.role if isinstance(r, InverseRole) else r, frozenset())
    if isinstance(r, InverseRole):
        pairs = {(y, x) for x, y in pairs}
    c = dl_oracle(e.filler, domain, concepts, roles)
    out = set()
    for x in domain:
        succ = {y for (s, y) in pairs if s == x}
        if isinstance(e, Exists) and succ & c:
            out.add(x)
        elif isinstance(e, ForallR) and succ <= c:
            out.add(x)
        elif isinstance(e, AtLeast) and len(succ & c) >= e.n:
            out.add(x)
    return frozenset(out)


A, B = AtomicConcept("A"), AtomicConcept("B")
R, S = "R", "S"

# Every DL constructor, alone and nested.
DL_FIXED = [
    A, Intersect(A, B), Union_(A, B), Complement(A), Nominal("i0"), Nominal("i1"),
    Exists(R, A), ForallR(R, A), AtLeast(0, R, A), AtLeast(1, R, B), AtLeast(2, S, A),
    Exists(InverseRole(R), B), ForallR(InverseRole(S), A), AtLeast(1, InverseRole(R), Complement(B)),
    Exists(R, Nominal("i1")), ForallR(S, Exists(R, A)), Intersect(Complement(A), Exists(S, B)),
    Union_(ForallR(R, Complement(B)), AtLeast(2, InverseRole(S), Union_(A, B))),
]


def random_dl(rng, depth, individuals):
    if depth == 0 or rng.random() < 0.25:
        r = rng.random()
        if r < 0.15:
            return Nominal(rng.choice(individuals))
        return AtomicConcept(rng.choice(("A", "B", "C")))
    kind = rng.randrange(6)
    role = rng.choice((R, S))
    if rng.random() < 0.3:
        role = InverseRole(role)
    sub = lambda: random_dl(rng, depth - 1, individuals)  # noqa: E731
    if kind == 0:
        return Intersect(sub(), sub())
    if kind == 1:
        return Union_(sub(), sub())
    if kind == 2:
        return Complement(sub())
    if kind == 3:
        return Exists(role, sub())
    if kind == 4:
        return ForallR(role, sub())
    return AtLeast(rng.randint(0, 3), role, sub())


def _translated(exprs, i: DLInterpretation):
    t = Translator({R, S})
    roots = [t.expr(e) for e in exprs]
    res = evaluate(t.definitions, seed_from(i, {R, S}), concept_names=["Ind", *i.concepts])
    return [frozenset(v.name for v in res.concept_extents.get(r, EMPTY)) for r in roots]


def _compare(exprs, i, bad):
    for e, got in zip(exprs, _translated(exprs, i)):
        if got != dl_oracle(e, i.domain, i.concepts, i.roles):
            bad.append((e, i))


def criterion_dl(seed=SEED, random_cases=500):
    bad = []
    domain = ("i0", "i1")
    subsets = [frozenset(c) for r in range(3) for c in combinations(domain, r)]
    pairs = list(product(domain, repeat=2))
    relations = [frozenset(c) for r in range(5) for c in combinations(pairs, r)]
    exhaustive = 0
    for ca, cb, rr, ss in product(subsets, subsets, relations, relations):
        i = DLInterpretation(domain, {"A": ca, "B": cb}, {R: rr, S: ss})
        _compare(DL_FIXED, i, bad)
        exhaustive += 1
    rng = random.Random(seed)
    for _ in range(random_cases):
        n = rng.randint(1, 5)
        dom = tuple(f"i{k}" for k in range(n))
        concepts = {c: frozenset(x for x in dom if rng.random() < 0.5) for c in ("A", "B", "C")}
        roles = {r: frozenset(p for p in product(dom, repeat=2) if rng.random() < 0.3) for r in (R, S)}
        i = DLInterpretation(dom, concepts, roles)
        exprs = [random_dl(rng, 3, dom) for _ in range(4)]
        _compare(exprs, i, bad)
    detail = (f"{exhaustive} exhaustive 2-individual interpretations x {len(DL_FIXED)} expressions, "
              f"{random_cases} random interpretations x 4 expressions, {len(bad)} mismatches")
    return not bad, detail


# -- 8: recursion guard ----------------------------------------------------------------

ARITHMETIC_FULL = """
individual 0, 1, 2;
concept N;
op Succ(N);
op Add(N, N);
def 0 ::= ∅;
def Succ(N) ::= {N, {N}};
def N ::= {0} ∪ Succ(N);
def 1 ::= Succ(0);
def 2 ::= Succ(1);
assert Add(1, 1) = 2;
"""


def criterion_recursion():
    self_loop = parse_kb("concept N; individual 1; op +(N, N); def a ::= a + 1;")
    two_cycle = parse_kb("concept C; op f(C); op g(C); def a ::= f(b); def b ::= g(a);")
    arithmetic = parse_kb(ARITHMETIC_FULL)
    d1 = check_nonrecursive(build_dependency_graph(self_loop.definitions))
    d2 = check_nonrecursive(build_dependency_graph(two_cycle.definitions))
    d3 = check_nonrecursive(build_dependency_graph(arithmetic.definitions))
    ok = (d1 is not None and d1.cycle == ("a", "a")
          and d2 is not None and d2.cycle == ("a", "b", "a") and d3 is None)
    shown = [None if d is None else " -> ".join(d.cycle) for d in (d1, d2, d3)]
    return ok, f"witnesses {shown[0]!r}, {shown[1]!r}; arithmetic {'ok' if d3 is None else shown[2]}"


# -- 9: database fragment -------------------------------------------------------------------

DB_OPS = {"F": 1, "G": 2}


def random_fact(rng, names):
    if rng.random() < 0.25:
        return Assertion(Apply("in", (Atomic(rng.choice(names)), Atomic(rng.choice(("C", "D"))))),
                         Lit(TOP))
    op = rng.choice(sorted(DB_OPS))
    lhs = Apply(op, tuple(Atomic(rng.choice(names)) for _ in range(DB_OPS[op])))
    r = rng.random()
    rhs = Lit(TOP) if r < 0.1 else Lit(BOT) if r < 0.2 else Atomic(rng.choice(names))
    return Assertion(lhs, rhs)


def random_database(rng):
    names = [f"n{k}" for k in range(rng.randint(1, 4))]
    facts = [random_fact(rng, names) for _ in range(rng.randint(0, 20))]
    st = SyntacticStructure(names, {"C", "D"},
                            {"F": OperatorSig("F", ("C",)), "G": OperatorSig("G", ("C", "C"))})
    query = rng.choice(facts) if facts and rng.random() < 0.4 else random_fact(rng, names)
    return KnowledgeBase(st, (), facts), query, len(names)


def scaling_database(n, rng):
    m = max(2, n // 2)
    people = [f"p{k}" for k in range(m)]
    facts = []
    for k in range(n):
        if k % 4 == 0:
            facts.append(Assertion(Apply("in", (Atomic(people[k % m]), Atomic("Person"))), Lit(TOP)))
        else:
            facts.append(Assertion(Apply("Rel", (Atomic(people[k % m]), Atomic(f"q{k}"))),
                                   Atomic(people[rng.randrange(m)])))
    st = SyntacticStructure(set(people), {"Person"}, {"Rel": OperatorSig("Rel", ("Person", "Person"))})
    return KnowledgeBase(st, (), facts), facts[rng.randrange(n)]


def measure_query(kb, q, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        gc.collect()
        start = time.perf_counter()
        query_database(kb, q)
        best = min(best, time.perf_counter() - start)
    return best


def linear_fit(ns, ts):
    """Fit t = b·n with equal weight on every size (least squares on
    log t - log n); returns b and the measured/fitted ratios."""
    ns, ts = np.asarray(ns, float), np.asarray(ts, float)
    b = float(np.exp(np.mean(np.log(ts) - np.log(ns))))
    return b, ts / (b * ns)


def criterion_database(seed=SEED, instances=600):
    rng = random.Random(seed)
    disagreements = holds = 0
    for _ in range(instances):
        kb, q, n_names = random_database(rng)
        assert classify_fragment(kb) == "database"
        fast = query_database(kb, q)
        verdict = check_entails(kb, q, SearchBound(atoms=n_names + 1, depth=0, node_limit=10 ** 7))
        if isinstance(verdict, BoundExhausted) or fast != isinstance(verdict, Holds):
            disagreements += 1
        holds += fast
    sizes = [1_000, 3_000, 10_000, 30_000, 100_000]
    times = []
    for n in sizes:
        kb, q = scaling_database(n, rng)
        times.append(measure_query(kb, q))
    b, ratios = linear_fit(sizes, times)
    slope = float(np.polyfit(np.log(sizes), np.log(times), 1)[0])
    linear = bool(np.all((ratios >= 0.5) & (ratios <= 2.0)))
    detail = (f"{instances} instances ({holds} entailed), {disagreements} disagreements; "
              f"t/(b·n) = [{', '.join(f'{r:.2f}' for r in ratios)}], "
              f"{b * 1e6:.2f} µs per fact, log-log slope {slope:.2f}")
    return disagreements == 0 and linear, detail


CRITERIA = [
    (1, "connective semantics", 5, criterion_connectives),
    (2, "tautology suite", 5, criterion_tautologies),
    (3, "quantifier semantics", 10, criterion_quantifiers),
    (4, "fixpoint reproduction", 1, criterion_fixpoint),
    (5, "flattening soundness", 30, criterion_flattening),
    (6, "multi-assertion equivalence", 5, criterion_multi),
    (7, "DL agreement", 30, criterion_dl),
    (8, "recursion guard", 1, criterion_recursion),
    (9, "database fragment", 60, criterion_database),
]


@pytest.mark.parametrize("number,title,limit,fn", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(number, title, limit, fn):
    ok, line = run_criterion(number, title, limit, fn)
    assert ok, line


def main(argv=None):
    global SEED
    argv = list(sys.argv[1:] if argv is None else argv)
    if "--seed" in argv:
        SEED = int(argv[argv.index("--seed") + 1])
    failed = 0
    for number, title, limit, fn in CRITERIA:
        ok, _ = run_criterion(number, title, limit, fn)
        failed += not ok
    print(f"{len(CRITERIA) - failed}/{len(CRITERIA)} criteria passed (seed {SEED})")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
