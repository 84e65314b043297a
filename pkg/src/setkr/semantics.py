"""Interpretations, model checking, bounded entailment and the database fragment.

Bounded entailment searches interpretations lazily: evaluation proceeds
against a partial interpretation, and whenever it touches an individual,
concept or table entry that has no value yet, the search branches over the
candidate values for exactly that entry.  A branch is pruned as soon as a
knowledge-base assertion fails, and it ends in a countermodel as soon as
every knowledge-base assertion holds while the query fails.  Values never
inspected cannot influence the outcome, so exploring only inspected entries
covers every interpretation within the bound.
"""
from __future__ import annotations

import gc
from dataclasses import dataclass, field
from itertools import combinations, permutations, product
from typing import Optional

from . import hfset
from .definitions import EvaluationResult, _replacement_expr, eval_cexpr, evaluate
from .desugar import desugar_logic
from .errors import (FragmentViolation, SetKRError, SizeLimitExceeded, UnboundName,
                     UndefinedOperatorApplication)
from .evaluator import Evaluator
from .hfset import BOT, EMPTY, TOP, Atom, HSet, Tup, Value, render, value_atoms
from .syntax import (Apply, Assertion, Atomic, ConceptComprehension, ConceptEnum, ConceptOp,
                     ConceptReplacement, IndividualDef, KnowledgeBase, Lit, OperatorDef, Prim,
                     free_placeholders, ground_schema, is_builtin, is_replacement_class,
                     subterms)


# -- interpretations ----------------------------------------------------------

@dataclass
class Interpretation:
    """Finite maps from names to Values, extents and operator tables.

    ``definitions`` holds operator definitions whose bodies are
    instantiated when a table has no entry.
    """
    universe: HSet = EMPTY
    individuals: dict = field(default_factory=dict)
    concepts: dict = field(default_factory=dict)
    operators: dict = field(default_factory=dict)
    definitions: tuple = ()

    def evaluator(self, concept_names=()):
        op_defs = {d.target: d for d in self.definitions if isinstance(d, OperatorDef)}
        return Evaluator(dict(self.individuals), dict(self.concepts),
                         {k: dict(v) for k, v in self.operators.items()}, op_defs,
                         set(concept_names) | set(self.concepts))

    def to_json(self):
        return {
            "universe": [render(v) for v in self.universe],
            "individuals": {k: render(v) for k, v in sorted(self.individuals.items())},
            "concepts": {k: [render(x) for x in v] for k, v in sorted(self.concepts.items())},
            "operators": {
                op: [{"args": [render(a) for a in args], "value": render(v)}
                     for args, v in sorted(t.items(), key=lambda kv: [a.sort_key for a in kv[0]])]
                for op, t in sorted(self.operators.items())},
        }


def _as_assertion(x) -> Assertion:
    return x if isinstance(x, Assertion) else desugar_logic(x)


def eval_term(i: Interpretation, t) -> Value:
    """Value of a term under i; raises UnboundName or PartialOperator."""
    return i.evaluator().eval(t)


def models(i: Interpretation, a) -> bool:
    """I ⊨ a.  Formulas are lowered first; placeholders range over their
    concepts' extents."""
    return i.evaluator().holds_all(_as_assertion(a))


class _StrictDefEvaluator(Evaluator):
    def missing_entry(self, op, args):
        raise UndefinedOperatorApplication(
            f"operator '{op}' has no table entry at ({', '.join(render(a) for a in args)})")


def _extend_with_definitions(i: Interpretation, kb: KnowledgeBase):
    """Evaluate kb's definitions on top of i.  Returns the extended evaluator
    and the first definition that i already contradicts (or None)."""
    if not kb.definitions:
        return i.evaluator(kb.structure.concepts), None
    seed = EvaluationResult(dict(i.individuals), dict(i.concepts),
                            {k: dict(v) for k, v in i.operators.items()})
    result = evaluate(kb.definitions, seed, evaluator_class=_StrictDefEvaluator,
                      concept_names=kb.structure.concepts)
    clash = None
    for d in kb.definitions:
        if is_replacement_class(d) or isinstance(d, OperatorDef):
            continue
        given = i.individuals.get(d.target) if isinstance(d, IndividualDef) else i.concepts.get(d.target)
        computed = (result.individual_values if isinstance(d, IndividualDef)
                    else result.concept_extents).get(d.target)
        if given is not None and given != computed:
            clash = d
            break
    op_defs = {d.target: d for d in kb.definitions if isinstance(d, OperatorDef)}
    op_defs.update({d.target: d for d in i.definitions if isinstance(d, OperatorDef)})
    ev = Evaluator(result.individual_values, result.concept_extents,
                   {k: dict(v) for k, v in i.operators.items()}, op_defs,
                   set(kb.structure.concepts) | set(result.concept_extents))
    return ev, clash


def _goals(kb: KnowledgeBase):
    yield from kb.assertions
    yield from kb.schema_assertions
    for f in kb.formulas:
        yield f.assertion if isinstance(f, Prim) else desugar_logic(f)


def find_violation(i: Interpretation, kb: KnowledgeBase):
    """The first definition or assertion of kb that i falsifies, or None.

    A failing schema assertion is reported by its first failing grounding.
    """
    ev, clash = _extend_with_definitions(i, kb)
    if clash is not None:
        return clash
    for g in _goals(kb):
        if ev.holds_all(g):
            continue
        if free_placeholders(g):
            extents = {c: ev.concept(c) for c, _ in free_placeholders(g)}
            return next(a for a in ground_schema(g, extents) if not ev.holds(a))
        return g
    return None


def models_kb(i: Interpretation, kb: KnowledgeBase) -> bool:
    return find_violation(i, kb) is None


# -- bounded entailment -----------------------------------------------------

@dataclass(frozen=True)
class SearchBound:
    atoms: int = 3
    depth: int = 1
    node_limit: int = 200_000
    max_rounds: int = 32

    def __post_init__(self):
        if self.atoms < 1 or self.depth < 0 or self.node_limit < 1:
            raise ValueError("bounds must be positive")


@dataclass
class SearchStats:
    nodes: int = 0
    max_assignments: int = 0

    def to_json(self):
        return {"nodes": self.nodes, "max_assignments": self.max_assignments}


@dataclass
class Holds:
    stats: SearchStats
    verdict: str = "holds"

    def to_json(self):
        return {"verdict": self.verdict, "stats": self.stats.to_json()}


@dataclass
class CounterModel:
    interpretation: Interpretation
    stats: SearchStats
    verdict: str = "countermodel"

    def to_json(self):
        return {"verdict": self.verdict, "stats": self.stats.to_json(),
                "countermodel": self.interpretation.to_json()}


@dataclass
class BoundExhausted:
    stats: SearchStats
    reason: str = "node limit reached"
    verdict: str = "bound_exhausted"

    def to_json(self):
        return {"verdict": self.verdict, "stats": self.stats.to_json(), "reason": self.reason}


Verdict = (Holds, CounterModel, BoundExhausted)


class _Need(Exception):
    """Raised during lazy evaluation for an entry that has no value yet.
    Deliberately not a SetKRError so no evaluator layer swallows it."""

    def __init__(self, key):
        super().__init__(key)
        self.key = key


class _Budget(Exception):
    pass


def atom_pool(n: int):
    return [Atom(f"δ{k}") for k in range(n)]


class _LazyEvaluator(Evaluator):
    def __init__(self, kb: KnowledgeBase, max_rounds):
        op_defs = {d.target: d for d in kb.definitions if isinstance(d, OperatorDef)}
        super().__init__({}, {}, {}, op_defs, kb.structure.concepts)
        self.ind_defs = {d.target: d for d in kb.definitions if isinstance(d, IndividualDef)}
        self.con_defs = {d.target: d for d in kb.definitions
                         if not isinstance(d, (IndividualDef, OperatorDef))}
        self.concept_names = self.concept_names | frozenset(self.con_defs)
        self.max_rounds = max_rounds
        self.cache = {}
        self._active = set()
        # (concept, element) -> bool for concepts whose whole extent has not
        # been chosen; membership tests only need these single bits.
        self.members = {}

    def eval(self, t, env=None):
        if isinstance(t, Apply) and t.op == "in" and len(t.args) == 2:
            c = t.args[1]
            if isinstance(c, Atomic) and c.name in self.concept_names \
                    and c.name not in self.concepts and c.name not in self.con_defs \
                    and c.name not in self.individuals:
                x = self.eval(t.args[0], env)
                bit = self.members.get((c.name, x))
                if bit is None:
                    raise _Need(("mem", c.name, x))
                return TOP if bit else BOT
        return super().eval(t, env)

    def individual(self, name):
        v = self.individuals.get(name)
        if v is not None:
            return v
        if name in self.concept_names:
            return self.concept(name)
        return self.missing_individual(name)

    def missing_individual(self, name):
        d = self.ind_defs.get(name)
        if d is None:
            raise _Need(("ind", name))
        return self._cached(("ind", name), lambda: self.eval(d.body))

    def missing_concept(self, name):
        d = self.con_defs.get(name)
        if d is None:
            raise _Need(("con", name))
        return self._cached(("con", name), lambda: self._concept_value(d))

    def missing_entry(self, op, args):
        raise _Need(("op", op, args))

    def _cached(self, key, compute):
        if key in self.cache:
            return self.cache[key]
        if key in self._active:
            raise UnboundName(f"'{key[1]}' depends on itself")
        self._active.add(key)
        try:
            v = compute()
        finally:
            self._active.discard(key)
        self.cache[key] = v
        return v

    def _concept_value(self, d):
        if isinstance(d, ConceptEnum):
            return HSet(self.eval(m) for m in d.members)
        if isinstance(d, ConceptComprehension):
            return self.comprehension(d.source, d.copy, d.filter)
        expr = _replacement_expr(d)
        if not is_replacement_class(d):
            return eval_cexpr(self, expr)
        current = eval_cexpr(self, expr, images=False)
        for _ in range(self.max_rounds):
            view = _Override(self, d.target, current)
            nxt = hfset.set_union(current, eval_cexpr(view, expr))
            if nxt == current:
                break
            current = nxt
        return current


class _Override:
    def __init__(self, ev, name, extent):
        self._ev, self._name, self._extent = ev, name, extent

    def concept(self, name):
        return self._extent if name == self._name else self._ev.concept(name)

    def eval(self, t, env=None):
        return self._ev.eval(t, env)

    def image(self, op, sets):
        return self._ev.image(op, sets)


def _literal_atoms(kb, query_assertions):
    out = set()
    terms = []
    for d in kb.definitions:
        for attr in ("body", "filter"):
            x = getattr(d, attr, None)
            if isinstance(x, Assertion):
                terms += [x.lhs, x.rhs]
            elif x is not None:
                terms.append(x)
        for m in getattr(d, "members", ()):
            terms.append(m)
    for a in list(_goals(kb)) + list(query_assertions):
        terms += [a.lhs, a.rhs]
    for t in terms:
        for s in subterms(t):
            if isinstance(s, Lit):
                out |= {x for x in value_atoms(s.value) if x not in (TOP, BOT)}
    return sorted(out)


def _nested_sets(atoms, depth):
    """All sets of nesting depth 1..depth built over ``atoms``."""
    level, sets = list(atoms), []
    for _ in range(depth):
        if len(level) > 20 or 2 ** len(level) > hfset.limits.max_set_size:
            raise SizeLimitExceeded(
                f"a search depth of {depth} needs 2^{len(level)} candidate sets; lower --depth or --atoms")
        new = [HSet(c) for r in range(len(level) + 1) for c in combinations(level, r)]
        new = [v for v in new if v not in sets]
        sets += new
        level = list(atoms) + sets
    return sets


class _Search:
    def __init__(self, kb, query, bound: SearchBound):
        self.kb = kb
        self.bound = bound
        self.goals = list(_goals(kb))
        self.query = _as_assertion(query)
        self.ev = _LazyEvaluator(kb, bound.max_rounds)
        self.atoms = atom_pool(bound.atoms)
        self.atom_index = {a: k for k, a in enumerate(self.atoms)}
        self.constants = [TOP, BOT] + _literal_atoms(kb, [self.query])
        self.pool = list(self.atoms) + self.constants + _nested_sets(self.atoms, bound.depth)
        base = list(self.atoms) + self.constants
        self.extent_pool = [HSet(c) for r in range(len(base) + 1) for c in combinations(base, r)]
        self.stats = SearchStats()
        self.trail = []

    def used_atoms(self):
        used = set()
        for v in self.ev.individuals.values():
            used |= value_atoms(v)
        for v in self.ev.concepts.values():
            used |= value_atoms(v)
        for (_c, x) in self.ev.members:
            used |= value_atoms(x)
        for table in self.ev.tables.values():
            for args, v in table.items():
                used |= value_atoms(v)
                for a in args:
                    used |= value_atoms(a)
        return {a for a in used if a in self.atom_index}

    def candidates(self, key):
        if key[0] == "mem":
            yield from (True, False)
            return
        used = self.used_atoms()
        fresh = [a for a in self.atoms if a not in used]
        pool = self.extent_pool if key[0] == "con" else self.pool
        fixed = [(x, bit) for (c, x), bit in self.ev.members.items() if c == key[1]] \
            if key[0] == "con" else ()
        for v in pool:
            if any((x in v) != bit for x, bit in fixed):
                continue
            new = [a for a in fresh if a in value_atoms(v)] if fresh else []
            # Unused atoms are interchangeable: only the first k may appear.
            if new == fresh[:len(new)]:
                yield v

    def assign(self, key, v):
        if key[0] == "ind":
            self.ev.individuals[key[1]] = v
        elif key[0] == "con":
            self.ev.concepts[key[1]] = v
        elif key[0] == "mem":
            self.ev.members[key[1:]] = v
        else:
            self.ev.tables.setdefault(key[1], {})[key[2]] = v
        self.ev.cache.clear()
        self.trail.append(key)
        self.stats.max_assignments = max(self.stats.max_assignments, len(self.trail))

    def unassign(self, key):
        if key[0] == "ind":
            del self.ev.individuals[key[1]]
        elif key[0] == "con":
            del self.ev.concepts[key[1]]
        elif key[0] == "mem":
            del self.ev.members[key[1:]]
        else:
            del self.ev.tables[key[1]][key[2]]
        self.ev.cache.clear()
        self.trail.pop()

    def holds(self, a):
        try:
            return self.ev.holds_all(a)
        except _Need:
            raise
        except SetKRError:
            # Ill-typed applications (e.g. ∪ of atoms) make the side undefined;
            # an undefined assertion is not satisfied.
            return False

    def run(self, start=0):
        self.stats.nodes += 1
        if self.stats.nodes > self.bound.node_limit:
            raise _Budget()
        # Assigned values never change further down, so a query that already
        # holds here holds in every completion: no countermodel below.
        try:
            if self.holds(self.query):
                return None
        except _Need:
            pass
        try:
            for k in range(start, len(self.goals)):
                if not self.holds(self.goals[k]):
                    return None
                start = k + 1
            if self.holds(self.query):
                return None
            return self.snapshot()
        except _Need as need:
            for v in self.candidates(need.key):
                self.assign(need.key, v)
                try:
                    found = self.run(start)
                finally:
                    self.unassign(need.key)
                if found is not None:
                    return found
            return None

    def snapshot(self):
        ev = self.ev
        used = sorted(self.used_atoms())
        concepts = dict(ev.concepts)
        for (c, x), bit in ev.members.items():
            # Undecided elements stay out of the extent.
            if c not in ev.concepts:
                concepts[c] = hfset.set_union(concepts.get(c, EMPTY), HSet([x] if bit else []))
        return Interpretation(HSet(used), dict(ev.individuals), concepts,
                              {k: dict(v) for k, v in ev.tables.items() if v},
                              tuple(d for d in self.kb.definitions if isinstance(d, OperatorDef)))


def check_entails(kb: KnowledgeBase, query, bound: SearchBound = None, **kw):
    """Does every interpretation within the bound that models kb model query?

    Returns Holds, CounterModel (with the relevant part of a falsifying
    model of kb) or BoundExhausted when the node budget runs out.
    """
    bound = bound or SearchBound(**kw)
    search = _Search(kb, query, bound)
    try:
        found = search.run()
    except _Budget:
        return BoundExhausted(search.stats)
    if found is None:
        return Holds(search.stats)
    return CounterModel(found, search.stats)


def is_tautology(query, bound: SearchBound = None, **kw) -> bool:
    return isinstance(check_entails(KnowledgeBase(), query, bound, **kw), Holds)


# -- exhaustive enumeration (orbit representatives) ---------------------------

def _canonical(n, ind_names, con_names, op_sigs, ind_vals, con_vals, tables):
    """Lexicographically least encoding over all atom permutations."""
    best = None
    for perm in permutations(range(n)):
        code = (tuple(perm[v] for v in ind_vals),
                tuple(tuple(sorted(perm[x] for x in c)) for c in con_vals),
                tuple(tuple(perm[v] for v in _permuted_table(t, perm, n, arity))
                      for t, (_, arity) in zip(tables, op_sigs)))
        if best is None or code < best:
            best = code
    return best


def _permuted_table(table, perm, n, arity):
    # table is a tuple of values indexed by argument tuples in product order;
    # σ(T)(σ(x)) = σ(T(x)), returned in product order over the new indices.
    inv = [0] * n
    for k, p in enumerate(perm):
        inv[p] = k
    out = []
    for args in product(range(n), repeat=arity):
        src = tuple(inv[a] for a in args)
        idx = 0
        for a in src:
            idx = idx * n + a
        out.append(table[idx])
    return out


def enumerate_interpretations(n_atoms: int, individuals=(), concepts=(), operators=()):
    """Every interpretation over atoms δ0..δ(n-1), one per orbit under atom
    renaming.  Individuals and table values range over the atoms, concept
    extents over their subsets; ``operators`` is a list of (name, arity).
    """
    n = n_atoms
    atoms = atom_pool(n)
    ind_names, con_names = list(individuals), list(concepts)
    op_sigs = list(operators)
    subsets = [frozenset(c) for r in range(n + 1) for c in combinations(range(n), r)]
    seen = set()
    table_spaces = [list(product(range(n), repeat=n ** arity)) for _, arity in op_sigs]
    for ind_vals in product(range(n), repeat=len(ind_names)):
        for con_vals in product(subsets, repeat=len(con_names)):
            for tables in product(*table_spaces):
                code = _canonical(n, ind_names, con_names, op_sigs, ind_vals, con_vals, tables)
                if code in seen:
                    continue
                seen.add(code)
                yield _build(atoms, ind_names, con_names, op_sigs, ind_vals, con_vals, tables)


def _build(atoms, ind_names, con_names, op_sigs, ind_vals, con_vals, tables):
    n = len(atoms)
    ops = {}
    for (name, arity), t in zip(op_sigs, tables):
        ops[name] = {tuple(atoms[a] for a in args): atoms[t[k]]
                     for k, args in enumerate(product(range(n), repeat=arity))}
    return Interpretation(HSet(atoms),
                          {name: atoms[v] for name, v in zip(ind_names, ind_vals)},
                          {name: HSet(atoms[x] for x in c) for name, c in zip(con_names, con_vals)},
                          ops)


# -- model files ----------------------------------------------------------------

def interpretation_from_kb(kb: KnowledgeBase) -> Interpretation:
    """Read a model written as a knowledge base.

    Definitions give individual values and concept extents (undeclared
    values default to the atom named after the individual); each ground
    assertion ``Op(t1, ..., tn) = t`` becomes a table entry and ``a = t``
    with an undefined individual ``a`` fixes its value.
    """
    result = evaluate(kb.definitions, concept_names=kb.structure.concepts)
    individuals = dict(result.individual_values)
    concepts = dict(result.concept_extents)
    for c in kb.structure.concepts:
        concepts.setdefault(c, EMPTY)
    ev = Evaluator(individuals, concepts, {}, {d.target: d for d in kb.definitions
                                               if isinstance(d, OperatorDef)}, kb.structure.concepts)
    defined = {d.target for d in kb.definitions}
    assigned = [a for a in kb.assertions if isinstance(a.lhs, Atomic)
                and a.lhs.name not in defined and a.lhs.name not in concepts]
    targets = {a.lhs.name for a in assigned}
    for name in kb.structure.individuals:
        if name not in individuals and name not in concepts and name not in targets:
            individuals[name] = Atom(name)
    for a in assigned:
        individuals[a.lhs.name] = ev.eval(a.rhs)
    tables = {}
    for a in kb.assertions:
        if isinstance(a.lhs, Apply) and not is_builtin(a.lhs.op):
            args = tuple(ev.eval(t) for t in a.lhs.args)
            tables.setdefault(a.lhs.op, {})[args] = ev.eval(a.rhs)
        elif not (isinstance(a.lhs, Atomic) and a.lhs.name in individuals):
            raise FragmentViolation(
                "model files contain definitions, table entries Op(...) = v and individual values a = v")
    for name, table in result.operator_tables.items():
        for args, v in table.items():
            tables.setdefault(name, {}).setdefault(args, v)
    universe = set()
    for v in list(individuals.values()) + list(concepts.values()):
        universe |= value_atoms(v)
    for t in tables.values():
        for args, v in t.items():
            universe |= value_atoms(v)
            for x in args:
                universe |= value_atoms(x)
    return Interpretation(HSet(universe), individuals, concepts, tables,
                          tuple(d for d in kb.definitions if isinstance(d, OperatorDef)))


# -- database fragment ----------------------------------------------------------

def _is_flat_value(t):
    return isinstance(t, Atomic) or (isinstance(t, Lit) and t.value in (TOP, BOT))


def _fact_shape(a: Assertion, concepts) -> Optional[str]:
    lhs, rhs = a.lhs, a.rhs
    if isinstance(lhs, Apply) and lhs.op == "in" and len(lhs.args) == 2:
        x, c = lhs.args
        if isinstance(x, Atomic) and x.name not in concepts and isinstance(c, Atomic) \
                and c.name in concepts and isinstance(rhs, Lit) and rhs.value == TOP:
            return "member"
        return None
    if isinstance(lhs, Apply) and not is_builtin(lhs.op) and lhs.args \
            and all(isinstance(x, Atomic) and x.name not in concepts for x in lhs.args) \
            and _is_flat_value(rhs) and not (isinstance(rhs, Atomic) and rhs.name in concepts):
        return "fact"
    return None


def classify_fragment(kb: KnowledgeBase) -> str:
    """"database" when kb holds only flat facts Op(a1..an) = b and
    memberships a ∈ C; "general" otherwise."""
    if kb.definitions or kb.schema_assertions or kb.formulas:
        return "general"
    concepts = kb.structure.concepts
    return "database" if all(_fact_shape(a, concepts) for a in kb.assertions) else "general"


class DatabaseIndex:
    """Congruence closure of a set of flat facts.

    Individuals, ⊤/⊥, concepts and asserted applications are numbered
    nodes; union-find with use lists merges congruent applications as their
    arguments merge.  Two flat terms are provably equal exactly when they
    end up in the same class, and the facts are inconsistent when ⊤ and ⊥
    merge.
    """

    def __init__(self, facts, concepts=frozenset()):
        # The index allocates many small objects and no cycles; pausing the
        # cyclic collector keeps construction time linear in the fact count.
        paused = gc.isenabled()
        gc.disable()
        try:
            self._build(facts, concepts)
        finally:
            if paused:
                gc.enable()

    # nodes --------------------------------------------------------------

    def _new(self):
        self.parent.append(len(self.parent))
        self.size.append(1)
        self.uses.append([])
        return len(self.parent) - 1

    def _id(self, key, create=True):
        n = self.ids.get(key)
        if n is None and create:
            n = self.ids[key] = self._new()
        return n

    def _term(self, t, create=True):
        return self._id(t.name if isinstance(t, Atomic) else t.value, create)

    def find(self, x):
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    # construction ---------------------------------------------------------

    def _build(self, facts, concepts):
        self.parent, self.size, self.uses = [], [], []
        self.ids = {}        # individual name / Value / ("concept", C) -> node
        self.sig = {}        # (op, argument roots) -> application node
        self.apps = {}       # application node -> (op, argument nodes)
        self.top = self._id(TOP)
        self.bot = self._id(BOT)
        pending = []
        for a in facts:
            shape = _fact_shape(a, concepts)
            if shape is None:
                raise FragmentViolation("not a database fact: an operator applied to "
                                        "individuals equated to an individual, ⊤ or ⊥, or a ∈ C")
            op, args = self._app_key(a.lhs, shape)
            node = self._add_app(op, args, pending)
            pending.append((node, self._term(a.rhs)))
        self._merge_all(pending)

    def _app_key(self, lhs, shape, create=True):
        if shape == "member":
            args = (self._term(lhs.args[0], create), self._id(("concept", lhs.args[1].name), create))
            return "in", args
        return lhs.op, tuple(self._term(x, create) for x in lhs.args)

    def _add_app(self, op, args, pending):
        node = self._new()
        self.apps[node] = (op, args)
        key = (op, tuple(self.find(x) for x in args))
        other = self.sig.get(key)
        if other is None:
            self.sig[key] = node
        else:
            pending.append((node, other))
        for x in set(key[1]):
            self.uses[x].append(node)
        return node

    def _merge_all(self, pending):
        find, size, uses, sig = self.find, self.size, self.uses, self.sig
        while pending:
            a, b = pending.pop()
            ra, rb = find(a), find(b)
            if ra == rb:
                continue
            if size[ra] > size[rb]:
                ra, rb = rb, ra
            # ra joins rb; applications using ra get new signatures
            self.parent[ra] = rb
            size[rb] += size[ra]
            moved, uses[ra] = uses[ra], []
            for node in moved:
                op, args = self.apps[node]
                key = (op, tuple(find(x) for x in args))
                other = sig.get(key)
                if other is None:
                    sig[key] = node
                elif find(other) != find(node):
                    pending.append((node, other))
            uses[rb].extend(moved)

    # queries ----------------------------------------------------------------

    @property
    def inconsistent(self):
        return self.find(self.top) == self.find(self.bot)

    def class_of_app(self, op, args):
        if any(x is None for x in args):
            return None
        node = self.sig.get((op, tuple(self.find(x) for x in args)))
        return None if node is None else self.find(node)

    def entails(self, q: Assertion, concepts=frozenset()) -> bool:
        shape = _fact_shape(q, concepts)
        if shape is None:
            raise FragmentViolation("queries have the shape of a database fact")
        if self.inconsistent:
            return True
        op, args = self._app_key(q.lhs, shape, create=False)
        cls = self.class_of_app(op, args)
        rhs = self._term(q.rhs, create=False)
        return cls is not None and rhs is not None and cls == self.find(rhs)


def query_database(kb: KnowledgeBase, q: Assertion) -> bool:
    """Answer a fact-shaped query against a database-fragment kb.

    The answer is True exactly when the facts force q: the query's left side
    must be congruent to an asserted application whose class contains the
    right side.  Unasserted facts are answered False, which coincides with
    open-world entailment because an unforced fact can always be falsified.
    """
    if classify_fragment(kb) != "database":
        raise FragmentViolation("the knowledge base is not in the database fragment")
    concepts = kb.structure.concepts
    return DatabaseIndex(kb.assertions, concepts).entails(q, concepts)


__all__ = [
    "Interpretation", "eval_term", "models", "models_kb", "find_violation",
    "SearchBound", "SearchStats", "Holds", "CounterModel", "BoundExhausted", "Verdict",
    "check_entails", "is_tautology", "enumerate_interpretations", "atom_pool",
    "interpretation_from_kb", "classify_fragment", "query_database", "DatabaseIndex",
]
