"""Term evaluation over concrete tables.

The :class:`Evaluator` is the single place where terms are turned into
Values.  The definitions engine and the model checker both drive it; they
differ only in what happens when a name or table entry is missing, which
subclasses control through the ``missing_*`` hooks.
"""
from __future__ import annotations

import copy as _copy
from itertools import product

from . import hfset
from .errors import NonSetOperand, PartialOperator, SetKRError, SizeLimitExceeded, UnboundName
from .hfset import BOT, TOP, Atom, HSet, Tup, Value, render
from .syntax import (SET_FORMER, TUPLE_FORMER, Apply, Assertion, Atomic, Compr,
                     ConceptRef, Lit, free_placeholders)


def _bool(flag):
    return TOP if flag else BOT


def _geq(a, b):
    # On von Neumann naturals m >= n iff n ⊆ m.
    return _bool(hfset.subset(b, a))


BUILTIN_IMPLS = {
    "union": hfset.set_union,
    "inter": hfset.set_intersect,
    "diff": hfset.set_difference,
    "prod": hfset.cartesian_product,
    "pow": hfset.power_set,
    "card": lambda s: hfset.nat(hfset.cardinality(s)),
    "in": lambda x, s: _bool(hfset.member(x, s)),
    "subseteq": lambda a, b: _bool(hfset.subset(a, b)),
    "geq": _geq,
}


_FREE_CACHE: dict = {}


def _free_of(a):
    # Filters are re-checked once per element, so remember their placeholders.
    hit = _FREE_CACHE.get(id(a))
    if hit is not None and hit[0] is a:
        return hit[1]
    if len(_FREE_CACHE) > 4096:
        _FREE_CACHE.clear()
    keys = free_placeholders(a)
    _FREE_CACHE[id(a)] = (a, keys)
    return keys


class Evaluator:
    """Evaluate terms against individual values, concept extents, operator
    tables and operator definitions.

    ``tables`` maps operator names to dicts keyed by argument tuples (plain
    Python tuples of Values).  ``op_defs`` maps operator names to
    :class:`~setkr.syntax.OperatorDef` nodes whose bodies are instantiated
    on demand.
    """

    def __init__(self, individuals=None, concepts=None, tables=None, op_defs=None,
                 concept_names=()):
        self.individuals = individuals if individuals is not None else {}
        self.concepts = concepts if concepts is not None else {}
        self.tables = tables if tables is not None else {}
        self.op_defs = op_defs if op_defs is not None else {}
        self.concept_names = frozenset(concept_names)
        self._depth = 0

    # hooks ---------------------------------------------------------------

    def missing_individual(self, name):
        raise UnboundName(f"individual '{name}' is not interpreted")

    def missing_concept(self, name):
        raise UnboundName(f"concept '{name}' has no extent")

    def missing_entry(self, op, args):
        raise PartialOperator(
            f"operator '{op}' is undefined at ({', '.join(render(a) for a in args)})")

    # lookups -------------------------------------------------------------

    def individual(self, name):
        v = self.individuals.get(name)
        if v is not None:
            return v
        if name in self.concepts or name in self.concept_names:
            return self.concept(name)
        return self.missing_individual(name)

    def concept(self, name):
        ext = self.concepts.get(name)
        if ext is not None:
            return ext
        return self.missing_concept(name)

    def apply(self, op, args):
        impl = BUILTIN_IMPLS.get(op)
        if impl is not None:
            return impl(*args)
        table = self.tables.get(op)
        if table is not None:
            v = table.get(args)
            if v is not None:
                return v
        d = self.op_defs.get(op)
        if d is not None:
            if len(d.params) != len(args):
                raise PartialOperator(f"operator '{op}' expects {len(d.params)} argument(s)")
            self._depth += 1
            try:
                if self._depth > hfset.limits.max_depth:
                    raise SizeLimitExceeded(f"operator expansion deeper than {hfset.limits.max_depth}")
                return self.eval(d.body, dict(zip(d.params, args)))
            finally:
                self._depth -= 1
        return self.missing_entry(op, args)

    # evaluation ----------------------------------------------------------

    def eval(self, t, env=None):
        env = env or {}
        if isinstance(t, Atomic):
            return self.individual(t.name)
        if isinstance(t, Lit):
            return t.value
        if isinstance(t, ConceptRef):
            try:
                return env[t.key]
            except KeyError:
                raise UnboundName(f"placeholder {t.name}^{t.copy} is not bound") from None
        if isinstance(t, Apply):
            args = tuple(self.eval(a, env) for a in t.args)
            if t.op == SET_FORMER:
                return HSet(args)
            if t.op == TUPLE_FORMER:
                return Tup(args) if len(args) > 1 else args[0]
            return self.apply(t.op, args)
        if isinstance(t, Compr):
            return self.comprehension(t.concept, t.copy, t.filter, env)
        raise TypeError(f"not a term: {t!r}")

    def holds(self, a: Assertion, env=None) -> bool:
        return self.eval(a.lhs, env) == self.eval(a.rhs, env)

    def holds_all(self, a: Assertion, env=None) -> bool:
        """True iff every grounding of a's unbound placeholders holds."""
        env = env or {}
        free = [k for k in _free_of(a) if k not in env]
        if not free:
            return self.holds(a, env)
        pools = [self.concept(c).elements for c, _ in free]
        for choice in product(*pools):
            if not self.holds(a, {**env, **dict(zip(free, choice))}):
                return False
        return True

    def comprehension(self, concept, copy, filt, env=None) -> HSet:
        env = env or {}
        source = self.concept(concept)
        kept = []
        for x in source.elements:
            try:
                if self.holds_all(filt, {**env, (concept, copy): x}):
                    kept.append(x)
            except SetKRError as e:
                err = _copy.copy(e)
                err.args = (f"{e} (while filtering element {render(x)} of {concept})",)
                raise err from e
        return HSet(kept)

    def image(self, op, sets) -> HSet:
        for s in sets:
            if not isinstance(s, HSet):
                raise NonSetOperand(f"image of '{op}' over a non-set")
        return HSet(self.apply(op, args) for args in product(*(s.elements for s in sets)))


class HerbrandEvaluator(Evaluator):
    """Undefined individuals evaluate to the atom carrying their name."""

    def missing_individual(self, name):
        return Atom(name)


__all__ = ["Evaluator", "HerbrandEvaluator", "BUILTIN_IMPLS", "Value"]
