"""Syntax of knowledge bases: structures, terms, assertions, definitions.

Terms come in five shapes:

* ``Atomic(name)``: an individual.  If the name is a concept it denotes the
  concept's extent when evaluated.
* ``Lit(value)``: an anonymous constant (∅, ⊤, ⊥, folded set/tuple literals).
* ``ConceptRef(name, copy)``: a schema placeholder standing for any element
  of the concept; equal (name, copy) pairs are grounded together.
* ``Apply(op, args)``: operator application.  ``{}`` and ``()`` are the
  set-former and tuple-former; the other built-ins are listed in BUILTINS.
* ``Compr(concept, copy, filter)``: the set of elements of a concept that
  satisfy a schema assertion.

A schema assertion is simply an Assertion mentioning placeholders.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from itertools import product
from typing import Iterator, Mapping, Optional, Union

from .errors import MissingExtent
from .hfset import EMPTY, HSet, Tup, Value, parse_value, render

SET_FORMER = "{}"
TUPLE_FORMER = "()"

# Built-in operator name -> (arity or None for variadic, argument indices that
# are set positions).  In a set position a bare concept name denotes the
# concept itself rather than a placeholder.
BUILTINS = {
    SET_FORMER: (None, ()),
    TUPLE_FORMER: (None, ()),
    "union": (2, (0, 1)),
    "inter": (2, (0, 1)),
    "diff": (2, (0, 1)),
    "prod": (2, (0, 1)),
    "pow": (1, (0,)),
    "card": (1, (0,)),
    "in": (2, (1,)),
    "subseteq": (2, (0, 1)),
    "geq": (2, ()),
}


def is_builtin(op: str) -> bool:
    return op in BUILTINS


def set_positions(op: str) -> tuple:
    return BUILTINS[op][1] if op in BUILTINS else ()


@dataclass(frozen=True)
class SourceSpan:
    file: str = "<input>"
    line: int = 1
    column: int = 1
    length: int = 0

    def __str__(self):
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    message: str
    span: SourceSpan = field(default_factory=SourceSpan)
    cycle: tuple = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "cycle", tuple(self.cycle))
        if self.severity not in ("error", "warning"):
            raise ValueError(f"bad severity {self.severity!r}")
        if not self.message:
            raise ValueError("diagnostic message must be non-empty")

    def __str__(self):
        return f"{self.span}: {self.severity}: {self.message}"


def _span():
    return field(default=None, compare=False, repr=False, kw_only=True)


class Node:
    """Mixin for AST dataclasses."""

    def with_span(self, span):
        return dataclasses.replace(self, span=span)


# -- terms ------------------------------------------------------------------

@dataclass(frozen=True)
class Atomic(Node):
    name: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Lit(Node):
    value: Value
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class ConceptRef(Node):
    name: str
    copy: int = 1
    span: Optional[SourceSpan] = _span()

    def __post_init__(self):
        if self.copy < 1:
            raise ValueError("copy indices are positive")

    @property
    def key(self):
        return (self.name, self.copy)


@dataclass(frozen=True)
class Apply(Node):
    op: str
    args: tuple
    span: Optional[SourceSpan] = _span()

    def __post_init__(self):
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class Compr(Node):
    concept: str
    copy: int
    filter: "Assertion"
    span: Optional[SourceSpan] = _span()

    @property
    def key(self):
        return (self.concept, self.copy)


Term = Union[Atomic, Lit, ConceptRef, Apply, Compr]
SchemaTerm = Term


@dataclass(frozen=True)
class Assertion(Node):
    lhs: Term
    rhs: Term
    span: Optional[SourceSpan] = _span()


SchemaAssertion = Assertion


def set_of(*items) -> Term:
    """Set-former; folds to a literal when every item is a literal."""
    if all(isinstance(t, Lit) for t in items):
        return Lit(HSet(t.value for t in items))
    return Apply(SET_FORMER, tuple(items))


def tuple_of(*items) -> Term:
    if len(items) == 1:
        return items[0]
    if all(isinstance(t, Lit) for t in items):
        return Lit(Tup(t.value for t in items))
    return Apply(TUPLE_FORMER, tuple(items))


def apply(op, *args) -> Term:
    if op == SET_FORMER:
        return set_of(*args)
    if op == TUPLE_FORMER:
        return tuple_of(*args)
    return Apply(op, tuple(args))


def is_atomic(t) -> bool:
    return isinstance(t, (Atomic, Lit, ConceptRef))


def is_primitive(x) -> bool:
    """A term (or assertion) is primitive when every operator argument is atomic."""
    if isinstance(x, Assertion):
        return is_primitive(x.lhs) and is_primitive(x.rhs)
    if isinstance(x, Apply):
        return all(is_atomic(a) for a in x.args)
    return not isinstance(x, Compr)


# -- formulas (logic sugar over assertions) ---------------------------------

@dataclass(frozen=True)
class Prim(Node):
    assertion: Assertion
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Multi(Node):
    items: tuple
    span: Optional[SourceSpan] = _span()

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        if not self.items:
            raise ValueError("a multi-assertion has at least one component")


@dataclass(frozen=True)
class Not(Node):
    arg: "Formula"
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class And(Node):
    left: "Formula"
    right: "Formula"
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Or(Node):
    left: "Formula"
    right: "Formula"
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Implies(Node):
    left: "Formula"
    right: "Formula"
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Equiv(Node):
    left: "Formula"
    right: "Formula"
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Forall(Node):
    concept: str
    body: "Formula"
    copy: int = 1
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Exists(Node):
    concept: str
    body: "Formula"
    copy: int = 1
    span: Optional[SourceSpan] = _span()


Formula = Union[Prim, Multi, Not, And, Or, Implies, Equiv, Forall, Exists]


def ne(lhs, rhs) -> Not:
    return Not(Prim(Assertion(lhs, rhs)))


# -- concept expressions and definitions ------------------------------------

@dataclass(frozen=True)
class CName(Node):
    name: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class CEnum(Node):
    members: tuple
    span: Optional[SourceSpan] = _span()

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))


@dataclass(frozen=True)
class CBin(Node):
    op: str  # union | inter | diff | prod
    left: "CExpr"
    right: "CExpr"
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class CPow(Node):
    arg: "CExpr"
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class CImage(Node):
    """Replacement: the image of concept expressions under an operator."""
    operator: str
    args: tuple
    span: Optional[SourceSpan] = _span()

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))


CExpr = Union[CName, CEnum, CBin, CPow, CImage]


@dataclass(frozen=True)
class IndividualDef(Node):
    target: str
    body: Term
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class OperatorDef(Node):
    target: str
    params: tuple  # ((concept, copy), ...)
    body: Term
    span: Optional[SourceSpan] = _span()

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(tuple(p) for p in self.params))


@dataclass(frozen=True)
class ConceptEnum(Node):
    target: str
    members: tuple
    span: Optional[SourceSpan] = _span()

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))


@dataclass(frozen=True)
class ConceptOp(Node):
    target: str
    expr: CExpr
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class ConceptComprehension(Node):
    target: str
    source: str
    filter: Assertion
    copy: int = 1
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class ConceptReplacement(Node):
    target: str
    operator: str
    source: CExpr
    span: Optional[SourceSpan] = _span()


Definition = Union[IndividualDef, OperatorDef, ConceptEnum, ConceptOp,
                   ConceptComprehension, ConceptReplacement]
CONCEPT_DEFS = (ConceptEnum, ConceptOp, ConceptComprehension, ConceptReplacement)


def has_image(expr) -> bool:
    if isinstance(expr, CImage):
        return True
    if isinstance(expr, CBin):
        return has_image(expr.left) or has_image(expr.right)
    if isinstance(expr, CPow):
        return has_image(expr.arg)
    return False


def is_replacement_class(d) -> bool:
    """Replacement definitions are the only ones allowed to be recursive."""
    return isinstance(d, ConceptReplacement) or (isinstance(d, ConceptOp) and has_image(d.expr))


# -- structures and knowledge bases -----------------------------------------

@dataclass(frozen=True)
class OperatorSig(Node):
    name: str
    domain: tuple
    declared_range: Optional[str] = None
    span: Optional[SourceSpan] = _span()

    def __post_init__(self):
        object.__setattr__(self, "domain", tuple(self.domain))
        if not self.domain:
            raise ValueError("operators have arity >= 1")

    @property
    def arity(self):
        return len(self.domain)


@dataclass(frozen=True)
class SyntacticStructure:
    individuals: frozenset = frozenset()
    concepts: frozenset = frozenset()
    operators: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "individuals", frozenset(self.individuals))
        object.__setattr__(self, "concepts", frozenset(self.concepts))
        object.__setattr__(self, "operators", dict(self.operators))

    def is_concept_only(self, name):
        return name in self.concepts and name not in self.individuals

    def names(self):
        return set(self.individuals) | set(self.concepts) | set(self.operators)


@dataclass(frozen=True)
class KnowledgeBase:
    structure: SyntacticStructure = field(default_factory=SyntacticStructure)
    definitions: tuple = ()
    assertions: tuple = ()
    schema_assertions: tuple = ()
    formulas: tuple = ()

    def __post_init__(self):
        for name in ("definitions", "assertions", "schema_assertions", "formulas"):
            object.__setattr__(self, name, tuple(getattr(self, name)))


# -- traversal helpers ------------------------------------------------------

def subterms(t) -> Iterator:
    """Pre-order walk over a term, descending into comprehension filters."""
    yield t
    if isinstance(t, Apply):
        for a in t.args:
            yield from subterms(a)
    elif isinstance(t, Compr):
        yield from subterms(t.filter.lhs)
        yield from subterms(t.filter.rhs)


def free_placeholders(x, bound=frozenset()) -> list:
    """Distinct (concept, copy) placeholders not bound by an enclosing
    comprehension, in order of first occurrence."""
    out = []

    def walk(t, bound):
        if isinstance(t, ConceptRef):
            if t.key not in bound and t.key not in out:
                out.append(t.key)
        elif isinstance(t, Apply):
            for a in t.args:
                walk(a, bound)
        elif isinstance(t, Compr):
            inner = bound | {t.key}
            walk(t.filter.lhs, inner)
            walk(t.filter.rhs, inner)

    if isinstance(x, Assertion):
        walk(x.lhs, bound)
        walk(x.rhs, bound)
    else:
        walk(x, bound)
    return out


def names_in(x) -> set:
    """Individual, concept and operator names mentioned (built-ins excluded)."""
    out = set()

    def walk(t):
        if isinstance(t, Atomic):
            out.add(t.name)
        elif isinstance(t, ConceptRef):
            out.add(t.name)
        elif isinstance(t, Apply):
            if not is_builtin(t.op):
                out.add(t.op)
            for a in t.args:
                walk(a)
        elif isinstance(t, Compr):
            out.add(t.concept)
            walk(t.filter.lhs)
            walk(t.filter.rhs)

    if isinstance(x, Assertion):
        walk(x.lhs)
        walk(x.rhs)
    else:
        walk(x)
    return out


def substitute(t, binding: Mapping):
    """Replace free placeholders by terms."""
    if isinstance(t, ConceptRef):
        return binding.get(t.key, t)
    if isinstance(t, Apply):
        return apply(t.op, *(substitute(a, binding) for a in t.args))
    if isinstance(t, Compr):
        inner = {k: v for k, v in binding.items() if k != t.key}
        return Compr(t.concept, t.copy, substitute_assertion(t.filter, inner))
    return t


def substitute_assertion(a, binding):
    return Assertion(substitute(a.lhs, binding), substitute(a.rhs, binding))


def _as_term(element):
    if isinstance(element, str):
        return Atomic(element)
    if isinstance(element, Value):
        return Lit(element)
    if isinstance(element, (Atomic, Lit)):
        return element
    raise TypeError(f"cannot ground with {element!r}")


def ground_schema(sa: Assertion, extents: Mapping) -> Iterator[Assertion]:
    """Expand a schema assertion into the assertions it stands for.

    Each distinct (concept, copy) placeholder is bound to every element of
    its concept's extent; equal pairs share the binding.  Extent elements
    given as strings become individuals, Values become literals.
    """
    keys = free_placeholders(sa)
    pools = []
    for concept, _copy in keys:
        if concept not in extents:
            raise MissingExtent(f"no extent for concept {concept!r}")
        ext = extents[concept]
        pools.append([_as_term(e) for e in (ext.elements if isinstance(ext, HSet) else ext)])
    if not keys:
        yield sa
        return
    for choice in product(*pools):
        yield substitute_assertion(sa, dict(zip(keys, choice)))


# -- validation -------------------------------------------------------------

def _diag(message, node=None, severity="error"):
    span = getattr(node, "span", None) or SourceSpan()
    return Diagnostic(severity, message, span)


def _term_diagnostics(t, structure, defined_ops, out, allowed_concepts=None):
    for sub in subterms(t):
        if isinstance(sub, Apply):
            if is_builtin(sub.op):
                arity = BUILTINS[sub.op][0]
                if arity is not None and len(sub.args) != arity:
                    out.append(_diag(f"built-in '{sub.op}' takes {arity} argument(s), got {len(sub.args)}", sub))
                continue
            sig = structure.operators.get(sub.op)
            if sig is None:
                if sub.op not in defined_ops:
                    out.append(_diag(f"unknown operator '{sub.op}'", sub))
            elif sig.arity != len(sub.args):
                out.append(_diag(
                    f"operator '{sub.op}' has arity {sig.arity} but is applied to {len(sub.args)} argument(s)", sub))
        elif isinstance(sub, (ConceptRef, Compr)):
            name = sub.name if isinstance(sub, ConceptRef) else sub.concept
            if name not in structure.concepts:
                out.append(_diag(f"unknown concept '{name}'", sub))
            elif isinstance(sub, ConceptRef) and allowed_concepts is not None and name not in allowed_concepts:
                out.append(_diag(f"'{name}' is not among the concepts this definition may mention", sub))


def validate_structure(kb: KnowledgeBase) -> list:
    """Return every well-formedness violation in kb; empty iff well-formed."""
    out = []
    st = kb.structure
    for sig in st.operators.values():
        if is_builtin(sig.name) or sig.name == "ext":
            out.append(_diag(f"operator '{sig.name}' is built in and cannot be redeclared", sig))
        for c in sig.domain:
            if c not in st.concepts:
                out.append(_diag(f"operator '{sig.name}' has unknown domain concept '{c}'", sig))
        if sig.declared_range is not None and sig.declared_range not in st.concepts:
            out.append(_diag(f"operator '{sig.name}' has unknown range concept '{sig.declared_range}'", sig))
    seen = {}
    defined_ops = {d.target for d in kb.definitions if isinstance(d, OperatorDef)}
    for d in kb.definitions:
        if d.target in seen:
            out.append(_diag(f"'{d.target}' is defined more than once "
                             f"(first definition at {seen[d.target]})", d))
        else:
            seen[d.target] = getattr(d, "span", None) or SourceSpan()
        if isinstance(d, IndividualDef):
            _term_diagnostics(d.body, st, defined_ops, out)
        elif isinstance(d, OperatorDef):
            sig = st.operators.get(d.target)
            if sig is not None and sig.arity != len(d.params):
                out.append(_diag(f"definition of '{d.target}' has {len(d.params)} parameter(s) "
                                 f"but the operator has arity {sig.arity}", d))
            keys = [tuple(p) for p in d.params]
            if len(set(keys)) != len(keys):
                out.append(_diag(f"parameters of '{d.target}' repeat a concept copy", d))
            allowed = {c for c, _ in keys}
            _term_diagnostics(d.body, st, defined_ops, out, allowed)
            for key in free_placeholders(d.body):
                if key not in keys and key[0] in allowed:
                    out.append(_diag(f"placeholder {key[0]}^{key[1]} is not a parameter of '{d.target}'", d))
        elif isinstance(d, ConceptEnum):
            for m in d.members:
                _term_diagnostics(m, st, defined_ops, out)
        elif isinstance(d, (ConceptOp, ConceptReplacement)):
            expr = d.expr if isinstance(d, ConceptOp) else CImage(d.operator, (d.source,))
            _cexpr_diagnostics(expr, st, defined_ops, out)
        elif isinstance(d, ConceptComprehension):
            if d.source not in st.concepts:
                out.append(_diag(f"unknown concept '{d.source}'", d))
            for t in (d.filter.lhs, d.filter.rhs):
                _term_diagnostics(t, st, defined_ops, out)
            foreign = {c for c, _ in free_placeholders(d.filter) if c != d.source}
            if foreign:
                out.append(_diag(f"comprehension filter of '{d.target}' mentions other concepts: "
                                 + ", ".join(sorted(foreign)), d))
    for a in kb.assertions + kb.schema_assertions:
        for t in (a.lhs, a.rhs):
            _term_diagnostics(t, st, defined_ops, out)
    return out


def _cexpr_diagnostics(e, st, defined_ops, out):
    if isinstance(e, CName):
        if e.name not in st.concepts:
            out.append(_diag(f"unknown concept '{e.name}'", e))
    elif isinstance(e, CEnum):
        for m in e.members:
            _term_diagnostics(m, st, defined_ops, out)
    elif isinstance(e, CBin):
        _cexpr_diagnostics(e.left, st, defined_ops, out)
        _cexpr_diagnostics(e.right, st, defined_ops, out)
    elif isinstance(e, CPow):
        _cexpr_diagnostics(e.arg, st, defined_ops, out)
    elif isinstance(e, CImage):
        sig = st.operators.get(e.operator)
        if sig is None and e.operator not in defined_ops:
            out.append(_diag(f"unknown operator '{e.operator}'", e))
        elif sig is not None and sig.arity != len(e.args):
            out.append(_diag(f"operator '{e.operator}' has arity {sig.arity} "
                             f"but is applied to {len(e.args)} argument(s)", e))
        for a in e.args:
            _cexpr_diagnostics(a, st, defined_ops, out)


# -- canonical JSON ---------------------------------------------------------

_NODE_TYPES = {cls.__name__: cls for cls in (
    Atomic, Lit, ConceptRef, Apply, Compr, Assertion, Prim, Multi, Not, And, Or,
    Implies, Equiv, Forall, Exists, CName, CEnum, CBin, CPow, CImage,
    IndividualDef, OperatorDef, ConceptEnum, ConceptOp, ConceptComprehension,
    ConceptReplacement, OperatorSig, SourceSpan, Diagnostic)}


def to_json(x):
    """Canonical JSON form: dataclass nodes become {"kind": ..., fields}."""
    if isinstance(x, Value):
        return {"kind": "Value", "text": render(x)}
    if isinstance(x, KnowledgeBase):
        st = x.structure
        return {
            "kind": "KnowledgeBase",
            "structure": {
                "individuals": sorted(st.individuals),
                "concepts": sorted(st.concepts),
                "operators": [to_json(st.operators[k]) for k in sorted(st.operators)],
            },
            "definitions": [to_json(d) for d in x.definitions],
            "assertions": [to_json(a) for a in x.assertions],
            "schema_assertions": [to_json(a) for a in x.schema_assertions],
            "formulas": [to_json(f) for f in x.formulas],
        }
    if dataclasses.is_dataclass(x):
        out = {"kind": type(x).__name__}
        for f in dataclasses.fields(x):
            if f.name == "span" and type(x) is not Diagnostic:
                continue
            out[f.name] = to_json(getattr(x, f.name))
        return out
    if isinstance(x, (tuple, list)):
        return [to_json(v) for v in x]
    return x


def from_json(data):
    if isinstance(data, list):
        return tuple(from_json(v) for v in data)
    if not isinstance(data, dict):
        return data
    kind = data["kind"]
    if kind == "Value":
        return parse_value(data["text"])
    if kind == "KnowledgeBase":
        st = data["structure"]
        ops = [from_json(o) for o in st["operators"]]
        return KnowledgeBase(
            SyntacticStructure(st["individuals"], st["concepts"], {o.name: o for o in ops}),
            from_json(data["definitions"]), from_json(data["assertions"]),
            from_json(data["schema_assertions"]), from_json(data["formulas"]))
    cls = _NODE_TYPES[kind]
    kwargs = {k: from_json(v) for k, v in data.items() if k != "kind"}
    return cls(**kwargs)


EMPTY_TERM = Lit(EMPTY)
