"""Definition dependency analysis and round-based evaluation.

Non-replacement definitions must form an acyclic dependency graph and are
evaluated in topological order.  Replacement definitions (a concept built as
the image of concepts under an operator, possibly combined with other set
operations) may be recursive; they are expanded round by round, each round
unioning the new images into the target, until nothing changes or the round
budget runs out.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from itertools import product

from . import hfset
from .errors import (DuplicateDefinition, RecursiveDefinition, SetKRError,
                     UndefinedOperatorApplication)
from .evaluator import BUILTIN_IMPLS, Evaluator, HerbrandEvaluator
from .hfset import EMPTY, HSet, render, set_union
from .syntax import (Apply, Atomic, CBin, CEnum, CImage, CName, Compr, ConceptComprehension,
                     ConceptEnum, ConceptOp, ConceptRef, ConceptReplacement, CPow, Diagnostic,
                     IndividualDef, OperatorDef, SourceSpan, free_placeholders, is_builtin,
                     is_replacement_class, subterms)

DEFAULT_MAX_ROUNDS = 32


@dataclass(frozen=True)
class DependencyGraph:
    vertices: tuple
    edges: frozenset
    # edges contributed by replacement definitions; kept for reporting but
    # ignored by the acyclicity check
    replacement_edges: frozenset = frozenset()

    def successors(self, v, include_replacement=False):
        edges = self.edges | self.replacement_edges if include_replacement else self.edges
        return sorted(b for a, b in edges if a == v)


def _cexpr_names(e, out):
    if isinstance(e, CName):
        out.add(e.name)
    elif isinstance(e, CEnum):
        for m in e.members:
            out |= _term_mentions(m)
    elif isinstance(e, CBin):
        _cexpr_names(e.left, out)
        _cexpr_names(e.right, out)
    elif isinstance(e, CPow):
        _cexpr_names(e.arg, out)
    elif isinstance(e, CImage):
        out.add(e.operator)
        for a in e.args:
            _cexpr_names(a, out)
    return out


def _term_mentions(t, params=frozenset()):
    """Names a term mentions; placeholders of parameter concepts are
    arguments (grounded into individuals) and are skipped."""
    out = set()
    for s in subterms(t):
        if isinstance(s, Atomic):
            out.add(s.name)
        elif isinstance(s, Apply):
            if not is_builtin(s.op):
                out.add(s.op)
        elif isinstance(s, Compr):
            out.add(s.concept)
        elif isinstance(s, ConceptRef) and s.name not in params:
            out.add(s.name)
    return out


def mentioned_names(d) -> set:
    """Names a definition's right side mentions."""
    if isinstance(d, IndividualDef):
        return _term_mentions(d.body)
    if isinstance(d, OperatorDef):
        return _term_mentions(d.body, frozenset(c for c, _ in d.params))
    if isinstance(d, ConceptEnum):
        out = set()
        for m in d.members:
            out |= _term_mentions(m)
        return out
    if isinstance(d, ConceptOp):
        return _cexpr_names(d.expr, set())
    if isinstance(d, ConceptReplacement):
        return {d.operator} | _cexpr_names(d.source, set())
    if isinstance(d, ConceptComprehension):
        return {d.source} | _term_mentions(d.filter.lhs) | _term_mentions(d.filter.rhs)
    raise TypeError(f"not a definition: {d!r}")


def build_dependency_graph(defs) -> DependencyGraph:
    seen = set()
    for d in defs:
        if d.target in seen:
            raise DuplicateDefinition(f"'{d.target}' is defined more than once")
        seen.add(d.target)
    vertices = []
    edges, repl = set(), set()
    for d in defs:
        if d.target not in vertices:
            vertices.append(d.target)
        bucket = repl if is_replacement_class(d) else edges
        for n in sorted(mentioned_names(d)):
            if n not in vertices:
                vertices.append(n)
            bucket.add((d.target, n))
    return DependencyGraph(tuple(vertices), frozenset(edges), frozenset(repl))


def find_cycle(g: DependencyGraph):
    """Return one cycle as a name sequence [a, ..., a], or None."""
    adj = {v: g.successors(v) for v in g.vertices}
    state = {}
    stack = []

    def dfs(v):
        state[v] = 1
        stack.append(v)
        for w in adj.get(v, ()):
            if state.get(w) == 1:
                return stack[stack.index(w):] + [w]
            if w not in state:
                found = dfs(w)
                if found:
                    return found
        stack.pop()
        state[v] = 2
        return None

    for v in g.vertices:
        if v not in state:
            found = dfs(v)
            if found:
                return found
    return None


def check_nonrecursive(g: DependencyGraph, span=None):
    """None when the non-replacement graph is acyclic, otherwise a
    Diagnostic naming one cycle."""
    cycle = find_cycle(g)
    if cycle is None:
        return None
    return Diagnostic("error", "recursive definition: " + " -> ".join(cycle),
                      span or SourceSpan(), cycle=tuple(cycle))


def topological_order(defs, g: DependencyGraph):
    """Definition targets in dependency order, ties broken by declaration
    order.  Only edges between defined targets constrain the order."""
    targets = [d.target for d in defs]
    index = {t: i for i, t in enumerate(targets)}
    deps = {t: {b for a, b in g.edges if a == t and b in index and b != t} for t in targets}
    users = {t: [] for t in targets}
    for t, ds in deps.items():
        for b in ds:
            users[b].append(t)
    remaining = {t: len(ds) for t, ds in deps.items()}
    ready = [index[t] for t in targets if remaining[t] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        t = targets[heapq.heappop(ready)]
        order.append(t)
        for u in users[t]:
            remaining[u] -= 1
            if remaining[u] == 0:
                heapq.heappush(ready, index[u])
    if len(order) != len(targets):
        raise ValueError("definition graph is cyclic")
    return order


@dataclass
class EvaluationResult:
    individual_values: dict = field(default_factory=dict)
    concept_extents: dict = field(default_factory=dict)
    operator_tables: dict = field(default_factory=dict)
    rounds_executed: int = 0
    fixpoint_reached: bool = False

    def to_json(self):
        return {
            "individual_values": {k: render(v) for k, v in sorted(self.individual_values.items())},
            "concept_extents": {k: [render(x) for x in v] for k, v in sorted(self.concept_extents.items())},
            "operator_tables": {
                op: [{"args": [render(a) for a in args], "value": render(v)}
                     for args, v in sorted(table.items(), key=lambda kv: [a.sort_key for a in kv[0]])]
                for op, table in sorted(self.operator_tables.items())},
            "rounds_executed": self.rounds_executed,
            "fixpoint_reached": self.fixpoint_reached,
        }


class _DefEvaluator(HerbrandEvaluator):
    def missing_entry(self, op, args):
        raise UndefinedOperatorApplication(
            f"operator '{op}' has no table entry or definition at "
            f"({', '.join(render(a) for a in args)})")


def eval_cexpr(ev: Evaluator, e, images=True) -> HSet:
    """Evaluate a concept expression; with images=False replacement
    sub-expressions contribute nothing."""
    if isinstance(e, CName):
        return ev.concept(e.name)
    if isinstance(e, CEnum):
        return HSet(ev.eval(m) for m in e.members)
    if isinstance(e, CBin):
        return BUILTIN_IMPLS[e.op](eval_cexpr(ev, e.left, images), eval_cexpr(ev, e.right, images))
    if isinstance(e, CPow):
        return hfset.power_set(eval_cexpr(ev, e.arg, images))
    if isinstance(e, CImage):
        if not images:
            return EMPTY
        return ev.image(e.operator, [eval_cexpr(ev, a, images) for a in e.args])
    raise TypeError(f"not a concept expression: {e!r}")


def _replacement_expr(d):
    return d.expr if isinstance(d, ConceptOp) else CImage(d.operator, (d.source,))


def evaluate_comprehension(source_extent: HSet, filter, ctx, source=None, copy=1) -> HSet:
    """Elements of source_extent for which every grounding of filter holds.

    ``source`` names the concept whose placeholder (copy ``copy``) is bound
    to each element in turn; by default it is the only concept the filter
    mentions.  ``ctx`` is an EvaluationResult or an Evaluator.
    """
    if source is None:
        mentioned = {c for c, _ in free_placeholders(filter)}
        if len(mentioned) > 1:
            raise ValueError("filter mentions more than one concept: " + ", ".join(sorted(mentioned)))
        source = next(iter(mentioned)) if mentioned else "_"
    ev = ctx if isinstance(ctx, Evaluator) else _evaluator_for(ctx)
    saved = ev.concepts.get(source)
    ev.concepts[source] = source_extent
    try:
        return ev.comprehension(source, copy, filter)
    finally:
        if saved is None:
            del ev.concepts[source]
        else:
            ev.concepts[source] = saved


def _evaluator_for(result: EvaluationResult, op_defs=None, cls=_DefEvaluator, concept_names=()):
    return cls(individuals=dict(result.individual_values),
               concepts=dict(result.concept_extents),
               tables={k: dict(v) for k, v in result.operator_tables.items()},
               op_defs=dict(op_defs or {}), concept_names=concept_names)


def evaluate(defs, seed: EvaluationResult = None, max_rounds: int = DEFAULT_MAX_ROUNDS,
             evaluator_class=_DefEvaluator, concept_names=()) -> EvaluationResult:
    """Evaluate definitions to concrete values, extents and tables.

    Start-up computes every non-replacement definition and seeds each
    replacement target with its non-replacement part.  Each round then
    (i) recomputes the non-replacement definitions in dependency order and
    (ii) applies every replacement definition once against the extents at
    the start of the step, unioning the images into its target.  Rounds
    stop when one changes nothing (fixpoint) or after max_rounds.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be at least 1")
    defs = list(defs)
    g = build_dependency_graph(defs)
    diag = check_nonrecursive(g)
    if diag is not None:
        raise RecursiveDefinition(diag.message, diag.cycle)
    seed = seed or EvaluationResult()
    by_target = {d.target: d for d in defs}
    op_defs = {d.target: d for d in defs if isinstance(d, OperatorDef)}
    replacement = [d for d in defs if is_replacement_class(d)]
    plain = [by_target[t] for t in topological_order(defs, g)
             if not is_replacement_class(by_target[t]) and not isinstance(by_target[t], OperatorDef)]
    concept_targets = {d.target for d in defs if not isinstance(d, (IndividualDef, OperatorDef))}
    ev = _evaluator_for(seed, op_defs, evaluator_class,
                        set(concept_names) | concept_targets | set(seed.concept_extents))
    for d in replacement:
        ev.concepts[d.target] = ev.concepts.get(d.target, EMPTY)

    def run_plain():
        for d in plain:
            if isinstance(d, IndividualDef):
                ev.individuals[d.target] = ev.eval(d.body)
            elif isinstance(d, ConceptEnum):
                ev.concepts[d.target] = HSet(ev.eval(m) for m in d.members)
            elif isinstance(d, ConceptOp):
                ev.concepts[d.target] = eval_cexpr(ev, d.expr)
            elif isinstance(d, ConceptComprehension):
                ev.concepts[d.target] = ev.comprehension(d.source, d.copy, d.filter)

    def snapshot():
        return dict(ev.individuals), dict(ev.concepts)

    run_plain()
    rounds = 0
    fixpoint = False
    if not replacement:
        # Plain definitions depend only on the seed, so a second round
        # cannot change anything.
        rounds, fixpoint = 1, True
    else:
        for d in replacement:
            ev.concepts[d.target] = set_union(ev.concepts[d.target],
                                              eval_cexpr(ev, _replacement_expr(d), images=False))
        run_plain()
    while not fixpoint and rounds < max_rounds:
        before = snapshot()
        run_plain()
        start = dict(ev.concepts)
        updates = {}
        for d in replacement:
            frozen = _Frozen(ev, start)
            updates[d.target] = eval_cexpr(frozen, _replacement_expr(d))
        for target, new in updates.items():
            ev.concepts[target] = set_union(ev.concepts[target], new)
        rounds += 1
        if snapshot() == before:
            fixpoint = True
            break
    if not fixpoint:
        run_plain()

    tables = {k: dict(v) for k, v in ev.tables.items()}
    for name, d in op_defs.items():
        domains = [ev.concepts.get(c) for c, _ in d.params]
        if any(dom is None for dom in domains):
            continue
        size = 1
        for dom in domains:
            size *= len(dom)
        if size > hfset.limits.max_set_size:
            continue
        table = tables.setdefault(name, {})
        for args in product(*(dom.elements for dom in domains)):
            if args not in table:
                try:
                    table[args] = ev.apply(name, args)
                except SetKRError:
                    continue
    return EvaluationResult(dict(ev.individuals), dict(ev.concepts), tables, rounds, fixpoint)


class _Frozen:
    """Evaluator view whose concept lookups read a fixed snapshot."""

    def __init__(self, ev, concepts):
        self._ev = ev
        self._concepts = concepts

    def concept(self, name):
        ext = self._concepts.get(name)
        return ext if ext is not None else self._ev.concept(name)

    def eval(self, t, env=None):
        return self._ev.eval(t, env)

    def image(self, op, sets):
        return self._ev.image(op, sets)


__all__ = [
    "DependencyGraph", "EvaluationResult", "build_dependency_graph", "check_nonrecursive",
    "find_cycle", "topological_order", "evaluate", "evaluate_comprehension", "eval_cexpr",
    "mentioned_names", "DEFAULT_MAX_ROUNDS",
]
