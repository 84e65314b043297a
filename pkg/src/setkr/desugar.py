"""Lowering of multi-assertions, nested terms and logic operators.

Every connective and quantifier is rewritten into a single equality over
set-former terms built from the component assertions' sides, so that the
result can be checked with nothing but extensional equality of sets.
"""
from __future__ import annotations

from .errors import BodyMentionsForeignConcept
from .hfset import EMPTY
from .syntax import (And, Apply, Assertion, Atomic, Compr, ConceptRef, Equiv, Exists,
                     Forall, IndividualDef, Implies, KnowledgeBase, Lit, Multi, Not, Or,
                     Prim, SyntacticStructure, apply, free_placeholders, is_atomic,
                     set_of, tuple_of)

EMPTY_TERM = Lit(EMPTY)


class FreshNamer:
    """Produces individual names that do not clash with ``taken``.

    ``names`` may supply a preferred sequence (e.g. ``["x", "y"]``); once it
    is used up, names continue as prefix + counter.
    """

    def __init__(self, taken=(), prefix="_v", names=()):
        self.taken = set(taken)
        self.prefix = prefix
        self.counter = 0
        self._preferred = list(names)
        self.issued = []

    def __call__(self):
        while self._preferred:
            name = self._preferred.pop(0)
            if name not in self.taken:
                return self._issue(name)
        while True:
            self.counter += 1
            name = f"{self.prefix}{self.counter}"
            if name not in self.taken:
                return self._issue(name)

    def _issue(self, name):
        self.taken.add(name)
        self.issued.append(name)
        return name


def desugar_multi(asserts) -> Assertion:
    """(a1=b1, ..., an=bn) becomes the single tuple equality
    (a1, ..., an) = (b1, ..., bn); a single assertion is returned as is."""
    asserts = list(asserts)
    if not asserts:
        raise ValueError("desugar_multi needs at least one assertion")
    if len(asserts) == 1:
        return asserts[0]
    return Assertion(tuple_of(*(a.lhs for a in asserts)), tuple_of(*(a.rhs for a in asserts)))


def _ground(t) -> bool:
    return not free_placeholders(t)


def flatten_nested(a: Assertion, namer: FreshNamer) -> list:
    """Replace every compound operator argument by a fresh individual.

    Returns the rewritten assertion followed by one defining assertion per
    fresh individual, outermost first.  Arguments that still contain schema
    placeholders are left in place, since no single individual can stand for
    them.
    """
    extra = []

    def flat_args(t):
        if not isinstance(t, Apply):
            return t
        args = []
        for arg in t.args:
            if is_atomic(arg) or not _ground(arg):
                args.append(arg)
                continue
            name = namer()
            args.append(Atomic(name))
            slot = len(extra)
            extra.append(None)
            extra[slot] = Assertion(Atomic(name), flat_args(arg))
        return Apply(t.op, tuple(args))

    head = Assertion(flat_args(a.lhs), flat_args(a.rhs))
    return [head] + extra


def _neg(a: Assertion) -> Assertion:
    # {a} ∩ {a'} = ∅
    return Assertion(apply("inter", set_of(a.lhs), set_of(a.rhs)), EMPTY_TERM)


def _meet(a: Assertion):
    return apply("inter", set_of(a.lhs), set_of(a.rhs))


def _nonempty(t) -> Assertion:
    # t ≠ ∅, itself lowered through the negation encoding
    return _neg(Assertion(t, EMPTY_TERM))


def desugar_quantifier(q, concepts=None) -> Assertion:
    """∀(C, A) becomes C|A = C and ∃(C, A) becomes C|A ≠ ∅.

    The body may already be a formula; it is lowered first.  ``concepts``,
    when given, is the set of known concept names used to validate the
    bound concept.
    """
    body = q.body if isinstance(q.body, Assertion) else desugar_logic(q.body)
    foreign = sorted({c for c, _ in free_placeholders(body)} - {q.concept})
    if foreign:
        raise BodyMentionsForeignConcept(
            f"quantifier over {q.concept} has a body mentioning {', '.join(foreign)}")
    if concepts is not None and q.concept not in concepts:
        raise BodyMentionsForeignConcept(f"'{q.concept}' is not a concept")
    compr = Compr(q.concept, q.copy, body)
    if isinstance(q, Forall):
        return Assertion(compr, Atomic(q.concept))
    return _nonempty(compr)


def desugar_logic(f, namer=None) -> Assertion:
    """Lower a formula to a single (possibly nested) assertion."""
    if isinstance(f, Assertion):
        return f
    if isinstance(f, Prim):
        return f.assertion
    if isinstance(f, Multi):
        return desugar_multi([desugar_logic(x) for x in f.items])
    if isinstance(f, Not):
        return _neg(desugar_logic(f.arg))
    if isinstance(f, (Forall, Exists)):
        return desugar_quantifier(f)
    if isinstance(f, Equiv):
        return desugar_logic(And(Implies(f.left, f.right), Implies(f.right, f.left)))
    a = desugar_logic(f.left)
    b = desugar_logic(f.right)
    if isinstance(f, And):
        # ({a}∩{a'}) ∪ ({b}∩{b'}) = {a, a', b, b'}
        return Assertion(apply("union", _meet(a), _meet(b)),
                         set_of(a.lhs, a.rhs, b.lhs, b.rhs))
    if isinstance(f, Or):
        return _nonempty(apply("union", _meet(a), _meet(b)))
    if isinstance(f, Implies):
        # ({a, a'} \ ({a}∩{a'})) ∪ ({b}∩{b'}) ≠ ∅
        return _nonempty(apply("union", apply("diff", set_of(a.lhs, a.rhs), _meet(a)), _meet(b)))
    raise TypeError(f"not a formula: {f!r}")


def lower(f, namer: FreshNamer) -> list:
    """Quantifiers, then connectives, then flattening: a list of primitive
    assertions whose conjunction means f."""
    return flatten_nested(desugar_logic(f), namer)


def desugar_kb(kb: KnowledgeBase, prefix="_v") -> KnowledgeBase:
    """Lower every assertion and formula of kb to primitive form.

    Fresh individuals become individual definitions of the nested terms they
    replace, so the lowered knowledge base keeps the original models.
    """
    st = kb.structure
    namer = FreshNamer(st.names() | {d.target for d in kb.definitions}, prefix)
    out, schema, fresh_defs = [], [], []
    sources = list(kb.assertions) + list(kb.schema_assertions) + list(kb.formulas)
    for item in sources:
        lowered = lower(item, namer)
        head, rest = lowered[0], lowered[1:]
        for r in rest:
            fresh_defs.append(IndividualDef(r.lhs.name, r.rhs))
        (schema if free_placeholders(head) else out).append(head)
    structure = SyntacticStructure(st.individuals | set(namer.issued), st.concepts, st.operators)
    return KnowledgeBase(structure, tuple(kb.definitions) + tuple(fresh_defs), out, schema, ())


__all__ = ["FreshNamer", "desugar_multi", "flatten_nested", "desugar_logic",
           "desugar_quantifier", "lower", "desugar_kb"]
