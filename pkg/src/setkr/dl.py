"""Description-logic constructs rewritten into concepts, operators and assertions.

Roles become binary Boolean operators over the universe concept ``Ind``.
Restrictions go through a hat operator mapping an individual to the set of
its role successors::

    hat_R(Ind^1) ::= {Ind^2 | R(Ind^1, Ind^2)}

so that, for example, ``some R. C`` is the comprehension
``{Ind | hat_R(Ind) ∩ C ≠ ∅}``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import product
from typing import Union

from .definitions import EvaluationResult, evaluate
from .desugar import desugar_logic
from .errors import ParseError, UndeclaredRole
from .hfset import BOT, EMPTY, TOP, Atom, HSet, nat
from .syntax import (Apply, Assertion, Atomic, CBin, CEnum, CName, Compr, ConceptComprehension,
                     ConceptEnum, ConceptOp, ConceptRef, Diagnostic, KnowledgeBase, Lit,
                     OperatorDef, OperatorSig, Prim, SourceSpan, SyntacticStructure, ne)

UNIVERSE = "Ind"


# -- DL syntax -------------------------------------------------------------

@dataclass(frozen=True)
class InverseRole:
    role: str


Role = Union[str, InverseRole]


@dataclass(frozen=True)
class AtomicConcept:
    name: str


@dataclass(frozen=True)
class Nominal:
    individual: str


@dataclass(frozen=True)
class Intersect:
    left: "DlExpr"
    right: "DlExpr"


@dataclass(frozen=True)
class Union_:
    left: "DlExpr"
    right: "DlExpr"


@dataclass(frozen=True)
class Complement:
    arg: "DlExpr"


@dataclass(frozen=True)
class Exists:
    role: Role
    filler: "DlExpr"


@dataclass(frozen=True)
class ForallR:
    role: Role
    filler: "DlExpr"


@dataclass(frozen=True)
class AtLeast:
    n: int
    role: Role
    filler: "DlExpr"

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("at-least restrictions take n >= 0")


DlExpr = Union[AtomicConcept, Nominal, Intersect, Union_, Complement, Exists, ForallR, AtLeast]


@dataclass(frozen=True)
class ConceptAssertion:
    concept: DlExpr
    individual: str


@dataclass(frozen=True)
class RoleAssertion:
    role: Role
    subject: str
    object: str


@dataclass(frozen=True)
class IndividualEquality:
    left: str
    right: str


@dataclass(frozen=True)
class ConceptInclusion:
    sub: DlExpr
    sup: DlExpr


DlAxiom = Union[ConceptAssertion, RoleAssertion, IndividualEquality, ConceptInclusion]


def role_name(r: Role) -> str:
    return r.role if isinstance(r, InverseRole) else r


# -- translation -------------------------------------------------------------

def hat_transform(role: str, direction: str = "forward", roles=None) -> OperatorDef:
    """hat_R(Ind^1) ::= {Ind^2 | R(Ind^1, Ind^2)} (forward) or the same with
    the role's arguments swapped (inverse)."""
    if roles is not None and role not in roles:
        raise UndeclaredRole(f"role '{role}' is not declared")
    x, y = ConceptRef(UNIVERSE, 1), ConceptRef(UNIVERSE, 2)
    args = (x, y) if direction == "forward" else (y, x)
    if direction not in ("forward", "inverse"):
        raise ValueError("direction is 'forward' or 'inverse'")
    body = Compr(UNIVERSE, 2, Assertion(Apply(role, args), Lit(TOP)))
    return OperatorDef(hat_name(role, direction), ((UNIVERSE, 1),), body)


def hat_name(role: str, direction: str = "forward") -> str:
    return f"hat_{role}" if direction == "forward" else f"hatinv_{role}"


@dataclass
class Translator:
    """Accumulates the definitions generated while translating expressions.

    Structurally equal sub-expressions share one generated concept.
    """
    roles: set
    prefix: str = "_c"
    definitions: list = field(default_factory=list)
    concepts: set = field(default_factory=set)
    individuals: set = field(default_factory=set)
    _memo: dict = field(default_factory=dict)
    _hats: dict = field(default_factory=dict)
    _counter: int = 0

    def fresh(self):
        self._counter += 1
        return f"{self.prefix}{self._counter}"

    def hat(self, r: Role) -> str:
        name = role_name(r)
        if name not in self.roles:
            raise UndeclaredRole(f"role '{name}' is not declared")
        direction = "inverse" if isinstance(r, InverseRole) else "forward"
        key = (name, direction)
        if key not in self._hats:
            d = hat_transform(name, direction)
            self._hats[key] = d.target
            self.definitions.append(d)
        return self._hats[key]

    def expr(self, e) -> str:
        """Name of a concept whose extent is e's extension."""
        if isinstance(e, AtomicConcept):
            self.concepts.add(e.name)
            return e.name
        if e in self._memo:
            return self._memo[e]
        target = None
        if isinstance(e, (Intersect, Union_)):
            left, right = self.expr(e.left), self.expr(e.right)
            op = "inter" if isinstance(e, Intersect) else "union"
            d = ConceptOp(self.fresh(), CBin(op, CName(left), CName(right)))
        elif isinstance(e, Complement):
            d = ConceptOp(self.fresh(), CBin("diff", CName(UNIVERSE), CName(self.expr(e.arg))))
        elif isinstance(e, Nominal):
            self.individuals.add(e.individual)
            d = ConceptEnum(self.fresh(), (Atomic(e.individual),))
        elif isinstance(e, (Exists, ForallR, AtLeast)):
            filler = self.expr(e.filler)
            succ = Apply(self.hat(e.role), (ConceptRef(UNIVERSE, 1),))
            if isinstance(e, Exists):
                f = ne(Apply("inter", (succ, Atomic(filler))), Lit(EMPTY))
            elif isinstance(e, ForallR):
                f = Prim(Assertion(Apply("subseteq", (succ, Atomic(filler))), Lit(TOP)))
            else:
                count = Apply("card", (Apply("inter", (succ, Atomic(filler))),))
                f = Prim(Assertion(Apply("geq", (count, Lit(nat(e.n)))), Lit(TOP)))
            d = ConceptComprehension(self.fresh(), UNIVERSE, desugar_logic(f), 1)
        else:
            raise TypeError(f"not a DL expression: {e!r}")
        target = d.target
        self.definitions.append(d)
        self.concepts.add(target)
        self._memo[e] = target
        return target

    def axiom(self, ax) -> Assertion:
        if isinstance(ax, ConceptAssertion):
            self.individuals.add(ax.individual)
            c = self.expr(ax.concept)
            return Assertion(Apply("in", (Atomic(ax.individual), Atomic(c))), Lit(TOP))
        if isinstance(ax, RoleAssertion):
            name = role_name(ax.role)
            if name not in self.roles:
                raise UndeclaredRole(f"role '{name}' is not declared")
            a, b = ax.subject, ax.object
            self.individuals |= {a, b}
            if isinstance(ax.role, InverseRole):
                a, b = b, a
            return Assertion(Apply(name, (Atomic(a), Atomic(b))), Lit(TOP))
        if isinstance(ax, IndividualEquality):
            self.individuals |= {ax.left, ax.right}
            return Assertion(Atomic(ax.left), Atomic(ax.right))
        if isinstance(ax, ConceptInclusion):
            sub, sup = self.expr(ax.sub), self.expr(ax.sup)
            return Assertion(Apply("subseteq", (Atomic(sub), Atomic(sup))), Lit(TOP))
        raise TypeError(f"not a DL axiom: {ax!r}")

    def structure(self):
        ops = {r: OperatorSig(r, (UNIVERSE, UNIVERSE)) for r in self.roles}
        for d in self.definitions:
            if isinstance(d, OperatorDef):
                ops[d.target] = OperatorSig(d.target, (UNIVERSE,))
        return SyntacticStructure(self.individuals, self.concepts | {UNIVERSE}, ops)


def translate_expr(e, roles, translator: Translator = None):
    """Definitions plus the root concept name for e."""
    t = translator or Translator(set(roles))
    root = t.expr(e)
    return list(t.definitions), root


def translate_axiom(ax, roles, translator: Translator = None):
    t = translator or Translator(set(roles))
    a = t.axiom(ax)
    return list(t.definitions), a


def translate_ontology(axioms, roles, concepts=(), individuals=()) -> KnowledgeBase:
    t = Translator(set(roles))
    t.concepts |= set(concepts)
    t.individuals |= set(individuals)
    assertions = [t.axiom(ax) for ax in axioms]
    return KnowledgeBase(t.structure(), t.definitions, assertions)


# -- direct DL semantics --------------------------------------------------------

@dataclass
class DLInterpretation:
    """A finite DL interpretation over named individuals (standard names)."""
    domain: tuple
    concepts: dict = field(default_factory=dict)   # name -> frozenset of individuals
    roles: dict = field(default_factory=dict)      # name -> frozenset of pairs

    def role_pairs(self, r: Role):
        pairs = self.roles.get(role_name(r), frozenset())
        if isinstance(r, InverseRole):
            return frozenset((b, a) for a, b in pairs)
        return pairs


def dl_extension(e, i: DLInterpretation) -> frozenset:
    """Extension of e under the textbook DL semantics."""
    dom = frozenset(i.domain)
    if isinstance(e, AtomicConcept):
        return frozenset(i.concepts.get(e.name, ()))
    if isinstance(e, Nominal):
        return frozenset({e.individual}) & dom
    if isinstance(e, Intersect):
        return dl_extension(e.left, i) & dl_extension(e.right, i)
    if isinstance(e, Union_):
        return dl_extension(e.left, i) | dl_extension(e.right, i)
    if isinstance(e, Complement):
        return dom - dl_extension(e.arg, i)
    filler = dl_extension(e.filler, i)
    pairs = i.role_pairs(e.role)
    succ = {x: {y for (a, y) in pairs if a == x} for x in dom}
    if isinstance(e, Exists):
        return frozenset(x for x in dom if succ[x] & filler)
    if isinstance(e, ForallR):
        return frozenset(x for x in dom if succ[x] <= filler)
    if isinstance(e, AtLeast):
        return frozenset(x for x in dom if len(succ[x] & filler) >= e.n)
    raise TypeError(f"not a DL expression: {e!r}")


def seed_from(i: DLInterpretation, roles=None) -> EvaluationResult:
    """The set-theoretic counterpart of a DL interpretation: each individual
    is the atom of its name, roles are total ⊤/⊥ tables (⊥ when unlisted)."""
    atoms = {x: Atom(x) for x in i.domain}
    concepts = {UNIVERSE: HSet(atoms.values())}
    for name, ext in i.concepts.items():
        concepts[name] = HSet(atoms[x] for x in ext)
    tables = {}
    for r in set(roles or ()) | set(i.roles):
        pairs = i.roles.get(r, frozenset())
        tables[r] = {(atoms[a], atoms[b]): TOP if (a, b) in pairs else BOT
                     for a, b in product(i.domain, repeat=2)}
    return EvaluationResult(dict(atoms), concepts, tables)


def translated_extension(e, i: DLInterpretation, roles=None) -> frozenset:
    """Extension of e computed through the translation and the definitions
    engine."""
    roles = set(roles if roles is not None else i.roles)
    defs, root = translate_expr(e, roles)
    result = evaluate(defs, seed_from(i, roles), concept_names=[UNIVERSE, *i.concepts])
    ext = result.concept_extents.get(root, EMPTY)
    return frozenset(v.name for v in ext)


# -- text format --------------------------------------------------------------------

_DL_TOKEN = re.compile(r"\s*(\[=|==|[():.,{}]|\w+)")
_DL_KEYWORDS = {"and", "or", "not", "some", "only", "atleast", "inv"}


@dataclass
class Ontology:
    roles: list
    concepts: list
    individuals: list
    axioms: list

    def to_kb(self) -> KnowledgeBase:
        return translate_ontology(self.axioms, self.roles, self.concepts, self.individuals)


class _DlParser:
    def __init__(self, text, file, line):
        self.toks, self.k = [], 0
        self.file, self.line = file, line
        pos = 0
        text = text.rstrip()
        while pos < len(text):
            m = _DL_TOKEN.match(text, pos)
            if not m:
                raise self.error(f"unexpected character {text[pos:].strip()[:1]!r}", pos + 1)
            self.toks.append((m.group(1), m.start(1) + 1))
            pos = m.end()

    def error(self, message, col=None):
        if col is None:
            col = self.toks[self.k][1] if self.k < len(self.toks) else 1
        return ParseError([Diagnostic("error", message, SourceSpan(self.file, self.line, col))])

    def peek(self):
        return self.toks[self.k][0] if self.k < len(self.toks) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise self.error(f"expected {expected or 'more input'}, found {tok or 'end of line'}")
        self.k += 1
        return tok

    def name(self):
        tok = self.peek()
        if tok is None or not re.fullmatch(r"\w+", tok) or tok in _DL_KEYWORDS:
            raise self.error(f"expected a name, found {tok or 'end of line'}")
        self.k += 1
        return tok

    def done(self):
        if self.peek() is not None:
            raise self.error(f"unexpected {self.peek()!r}")

    def role(self):
        if self.peek() == "inv":
            self.take()
            self.take("(")
            r = self.name()
            self.take(")")
            return InverseRole(r)
        return self.name()

    def expr(self):
        left = self.conj()
        while self.peek() == "or":
            self.take()
            left = Union_(left, self.conj())
        return left

    def conj(self):
        left = self.unary()
        while self.peek() == "and":
            self.take()
            left = Intersect(left, self.unary())
        return left

    def unary(self):
        tok = self.peek()
        if tok == "not":
            self.take()
            return Complement(self.unary())
        if tok in ("some", "only"):
            self.take()
            r = self.role()
            self.take(".")
            filler = self.unary()
            return Exists(r, filler) if tok == "some" else ForallR(r, filler)
        if tok == "atleast":
            self.take()
            n = self.take()
            if not n.isdigit():
                raise self.error(f"expected a number after 'atleast', found {n!r}")
            r = self.role()
            self.take(".")
            return AtLeast(int(n), r, self.unary())
        if tok == "(":
            self.take()
            e = self.expr()
            self.take(")")
            return e
        if tok == "{":
            self.take()
            a = self.name()
            self.take("}")
            return Nominal(a)
        return AtomicConcept(self.name())


def _statements(text):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        for part in line.split(";"):
            if part.strip():
                yield lineno, part


def parse_dl(text: str, file="<input>") -> Ontology:
    """Parse the DL text format.

    Statements (one per line or separated by ``;``)::

        role R, S          concept A, B          individual a, b
        a : C              (a, b) : R            a == b          C [= D

    Expressions: ``C and D``, ``C or D``, ``not C``, ``some R. C``,
    ``only R. C``, ``atleast n R. C``, ``{a}``, roles ``R`` or ``inv(R)``.
    """
    roles, concepts, individuals, axioms, lines = [], [], [], [], []
    diagnostics = []
    for lineno, part in _statements(text):
        try:
            p = _DlParser(part, file, lineno)
            head = p.peek()
            if head in ("role", "concept", "individual"):
                p.take()
                names = [p.name()]
                while p.peek() == ",":
                    p.take()
                    names.append(p.name())
                p.done()
                {"role": roles, "concept": concepts, "individual": individuals}[head].extend(names)
                continue
            if head == "(":
                save = p.k
                p.take()
                a = p.name()
                if p.peek() == ",":
                    p.take()
                    b = p.name()
                    p.take(")")
                    p.take(":")
                    r = p.role()
                    p.done()
                    if role_name(r) not in roles:
                        raise p.error(f"role '{role_name(r)}' is not declared")
                    axioms.append(RoleAssertion(r, a, b))
                    lines.append(lineno)
                    continue
                p.k = save
            if len(p.toks) > 1 and p.toks[1][0] == ":" and re.fullmatch(r"\w+", head or ""):
                a = p.name()
                p.take(":")
                e = p.expr()
                p.done()
                axioms.append(ConceptAssertion(e, a))
                lines.append(lineno)
                continue
            if len(p.toks) > 1 and p.toks[1][0] == "==":
                a = p.name()
                p.take("==")
                b = p.name()
                p.done()
                axioms.append(IndividualEquality(a, b))
                lines.append(lineno)
                continue
            sub = p.expr()
            p.take("[=")
            sup = p.expr()
            p.done()
            axioms.append(ConceptInclusion(sub, sup))
            lines.append(lineno)
        except ParseError as e:
            diagnostics.extend(e.diagnostics)
    if diagnostics:
        raise ParseError(diagnostics)
    for ax, lineno in zip(axioms, lines):
        for r in _roles_in(ax):
            if r not in roles:
                diagnostics.append(Diagnostic("error", f"role '{r}' is not declared",
                                              SourceSpan(file, lineno)))
    if diagnostics:
        raise ParseError(diagnostics)
    return Ontology(roles, concepts, individuals, axioms)


def _roles_in(x):
    if isinstance(x, RoleAssertion):
        yield role_name(x.role)
    elif isinstance(x, ConceptAssertion):
        yield from _roles_in(x.concept)
    elif isinstance(x, ConceptInclusion):
        yield from _roles_in(x.sub)
        yield from _roles_in(x.sup)
    elif isinstance(x, (Exists, ForallR, AtLeast)):
        yield role_name(x.role)
        yield from _roles_in(x.filler)
    elif isinstance(x, (Intersect, Union_)):
        yield from _roles_in(x.left)
        yield from _roles_in(x.right)
    elif isinstance(x, Complement):
        yield from _roles_in(x.arg)


def _role_text(r):
    return f"inv({r.role})" if isinstance(r, InverseRole) else r


def format_dl(e) -> str:
    """Text-format rendering of an expression or axiom; parse_dl reads it back."""
    if isinstance(e, ConceptAssertion):
        return f"{e.individual} : {format_dl(e.concept)}"
    if isinstance(e, RoleAssertion):
        return f"({e.subject}, {e.object}) : {_role_text(e.role)}"
    if isinstance(e, IndividualEquality):
        return f"{e.left} == {e.right}"
    if isinstance(e, ConceptInclusion):
        return f"{format_dl(e.sub)} [= {format_dl(e.sup)}"
    if isinstance(e, AtomicConcept):
        return e.name
    if isinstance(e, Nominal):
        return "{" + e.individual + "}"
    if isinstance(e, Intersect):
        return f"({format_dl(e.left)} and {format_dl(e.right)})"
    if isinstance(e, Union_):
        return f"({format_dl(e.left)} or {format_dl(e.right)})"
    if isinstance(e, Complement):
        return f"not {format_dl(e.arg)}"
    rs = _role_text(e.role)
    if isinstance(e, Exists):
        return f"(some {rs}. {format_dl(e.filler)})"
    if isinstance(e, ForallR):
        return f"(only {rs}. {format_dl(e.filler)})"
    return f"(atleast {e.n} {rs}. {format_dl(e.filler)})"


__all__ = [
    "UNIVERSE", "InverseRole", "AtomicConcept", "Nominal", "Intersect", "Union_", "Complement",
    "Exists", "ForallR", "AtLeast", "ConceptAssertion", "RoleAssertion", "IndividualEquality",
    "ConceptInclusion", "hat_transform", "hat_name", "Translator", "translate_expr",
    "translate_axiom", "translate_ontology", "DLInterpretation", "dl_extension", "seed_from",
    "translated_extension", "parse_dl", "format_dl", "Ontology",
]
