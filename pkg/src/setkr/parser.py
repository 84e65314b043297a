"""Parser and printer for the ``.skr`` knowledge-base language.

Grammar (informal BNF; Unicode and ASCII spellings are interchangeable)::

    kb        ::= stmt*
    stmt      ::= "individual" names ";" | "concept" names ";"
                | "op" opname "(" names ")" ["->" name] ";"
                | "def" name ["(" params ")"] "::=" defbody ";"
                | ["assert"] formula {"," formula} ";"
    defbody   ::= term | name [copy] "|" formula
    formula   ::= quant | equiv
    quant     ::= ("forall"|"∀"|"exists"|"∃") name [copy] ":" formula
                | ("forall"|"exists") "(" name [copy] "," formula ")"
    equiv     ::= implies {("equiv"|"≡"|"<->") implies}
    implies   ::= or ["implies"|"→"|"->" implies]
    or        ::= and {("or"|"∨") and}
    and       ::= unary {("and"|"∧") unary}
    unary     ::= ("not"|"¬") unary | quant | "(" formula {"," formula} ")" | atom
    atom      ::= term [("=" | "!=" | "≠") term]
    term      ::= union [("in"|"∈"|"subseteq"|"⊆"|">="|"≥") union]
    union     ::= inter {("\\/"|"∪") inter}
    inter     ::= prod {("/\\"|"∩"|"\\"|"∖") prod}
    prod      ::= infix {("×"|"x") infix}
    infix     ::= post {binop post}
    post      ::= primary {"." opname}
    primary   ::= name [copy] | "'" name | "∅" | "⊤" | "⊥" | "true" | "false"
                | opname "(" term {"," term} ")" | "ext" "(" name ")"
                | "(" term {"," term} ")" | "{" [term {"," term}] "}"
                | "{" name [copy] "|" formula "}"
    copy      ::= "^" digits | superscript digits

A bare concept name in an element position is a placeholder (copy 1); in a
set position (operands of ∪ ∩ \\ × pow card ⊆ and the right of ∈) it denotes
the concept itself.  ``ext(C)`` forces the latter anywhere.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .desugar import desugar_logic
from .errors import ParseError, SetKRError
from .hfset import BOT, EMPTY, TOP, Atom, HSet, Tup
from .syntax import (SET_FORMER, TUPLE_FORMER, And, Apply, Assertion, Atomic, CBin, CEnum,
                     CImage, CName, Compr, ConceptComprehension, ConceptEnum, ConceptOp,
                     ConceptRef, ConceptReplacement, CPow, Diagnostic, Equiv, Exists, Forall,
                     Implies, IndividualDef, KnowledgeBase, Lit, Multi, Not, OperatorDef,
                     OperatorSig, Or, Prim, SourceSpan, SyntacticStructure, apply,
                     free_placeholders, is_builtin, set_positions)

# -- lexer ------------------------------------------------------------------

_SUPERSCRIPTS = "⁰¹²³⁴⁵⁶⁷⁸⁹"
_SUPER_VALUE = {c: str(i) for i, c in enumerate(_SUPERSCRIPTS)}

_KEYWORDS = {
    "individual": "individual", "concept": "concept", "op": "op", "def": "def",
    "assert": "assert",
    "forall": "∀", "exists": "∃", "not": "¬", "and": "∧", "or": "∨",
    "implies": "→", "equiv": "≡", "in": "∈", "subseteq": "⊆",
    "true": "⊤", "false": "⊥",
}
_RESERVED_CALLS = {"pow", "card", "ext"}

# Runs of operator characters that are punctuation rather than user operators.
_SYM_PUNCT = {"->": "->", ">=": "≥", "<->": "≡"}

# Longest spellings first.
_PUNCT = [
    ("::=", "::="), ("!=", "≠"),
    ("\\/", "∪"), ("/\\", "∩"),
    ("∪", "∪"), ("∩", "∩"), ("\\", "\\"), ("∖", "\\"), ("×", "×"),
    ("∈", "∈"), ("⊆", "⊆"), ("≥", "≥"), ("≠", "≠"), ("∅", "∅"), ("⊤", "⊤"), ("⊥", "⊥"),
    ("¬", "¬"), ("∧", "∧"), ("∨", "∨"), ("→", "→"), ("≡", "≡"), ("∀", "∀"), ("∃", "∃"),
    ("=", "="), ("(", "("), (")", ")"), ("{", "{"), ("}", "}"), (",", ","), (";", ";"),
    ("|", "|"), (".", "."), (":", ":"),
]

_NAME_RE = re.compile(r"[^\W" + _SUPERSCRIPTS + r"]+")
_SYM_RE = re.compile(r"[+\-*<>@&~%]+")
_COPY_RE = re.compile(r"\^(\d+)|([" + _SUPERSCRIPTS + r"]+)")
_SPACE_RE = re.compile(r"(?:\s+|#[^\n]*)+")


class Token(NamedTuple):
    kind: str  # name | sym | atom | copy | punct | eof
    text: str
    line: int
    col: int
    length: int


def tokenize(text: str, file="<input>", diagnostics=None):
    """Split text into tokens; unknown characters become diagnostics."""
    tokens = []
    pos, line, line_start = 0, 1, 0
    n = len(text)

    def advance(to):
        nonlocal pos, line, line_start
        chunk = text[pos:to]
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rfind("\n") + 1
        pos = to

    while pos < n:
        m = _SPACE_RE.match(text, pos)
        if m:
            advance(m.end())
            continue
        col = pos - line_start + 1
        m = _COPY_RE.match(text, pos)
        if m:
            digits = m.group(1) or "".join(_SUPER_VALUE[c] for c in m.group(2))
            tokens.append(Token("copy", digits, line, col, m.end() - pos))
            advance(m.end())
            continue
        if text[pos] == "'":
            m = _NAME_RE.match(text, pos + 1)
            if m:
                tokens.append(Token("atom", m.group(), line, col, m.end() - pos))
                advance(m.end())
                continue
        m = _SYM_RE.match(text, pos)
        if m:
            run = m.group()
            if run in _SYM_PUNCT:
                tokens.append(Token("punct", _SYM_PUNCT[run], line, col, len(run)))
            else:
                tokens.append(Token("sym", run, line, col, len(run)))
            advance(m.end())
            continue
        m = _NAME_RE.match(text, pos)
        if m:
            word = m.group()
            kind = "punct" if word in _KEYWORDS else "name"
            tokens.append(Token(kind, _KEYWORDS.get(word, word), line, col, len(word)))
            advance(m.end())
            continue
        for spelling, canon in _PUNCT:
            if text.startswith(spelling, pos):
                tokens.append(Token("punct", canon, line, col, len(spelling)))
                advance(pos + len(spelling))
                break
        else:
            if diagnostics is not None:
                diagnostics.append(Diagnostic("error", f"unexpected character {text[pos]!r}",
                                              SourceSpan(file, line, col, 1)))
            advance(pos + 1)
    col = pos - line_start + 1
    tokens.append(Token("eof", "", line, max(col, 1), 0))
    return tokens


# -- raw (unresolved) nodes --------------------------------------------------

@dataclass(frozen=True)
class _Name:
    name: str
    copy: Optional[int] = None
    span: Optional[SourceSpan] = field(default=None, compare=False)


@dataclass(frozen=True)
class _RawCompr:
    concept: str
    copy: int
    filter: object
    span: Optional[SourceSpan] = field(default=None, compare=False)


class _Fail(Exception):
    def __init__(self, message, token, file):
        super().__init__(message)
        self.diagnostic = Diagnostic("error", message,
                                     SourceSpan(file, token.line, token.col, token.length))


_FORMULA_FOLLOW = {")", ";", ",", "∧", "∨", "→", "->", "≡", "}", ":"}


class _Parser:
    def __init__(self, tokens, file, binary_ops):
        self.toks = tokens
        self.i = 0
        self.file = file
        self.binary_ops = set(binary_ops)
        self._formula_memo = {}

    # token helpers
    @property
    def tok(self):
        return self.toks[self.i]

    def peek(self, k=1):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text, kind="punct"):
        t = self.tok
        return t.kind == kind and t.text == text

    def take(self):
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, text, what=None):
        if not self.at(text):
            self.fail(f"expected {what or repr(text)}, found {self.describe(self.tok)}")
        return self.take()

    def expect_name(self, what="a name"):
        if self.tok.kind != "name":
            self.fail(f"expected {what}, found {self.describe(self.tok)}")
        return self.take()

    def fail(self, message, token=None):
        raise _Fail(message, token or self.tok, self.file)

    def span(self, t):
        return SourceSpan(self.file, t.line, t.col, t.length)

    @staticmethod
    def describe(t):
        return "end of input" if t.kind == "eof" else repr(t.text)

    def copy_suffix(self):
        if self.tok.kind == "copy":
            t = self.take()
            k = int(t.text)
            if k < 1:
                self.fail("copy indices are positive", t)
            return k
        return None

    # statements
    def statement(self):
        t = self.tok
        if self.at("individual") or self.at("concept"):
            self.take()
            names = self.name_list()
            self.expect(";")
            return (t.text, names, self.span(t))
        if self.at("op"):
            self.take()
            name = self.opname()
            self.expect("(")
            domain = self.name_list()
            self.expect(")")
            rng = None
            if self.at("->") or self.at("→"):
                self.take()
                rng = self.expect_name("a range concept").text
            self.expect(";")
            return ("op", name, domain, rng, self.span(t))
        if self.at("def"):
            self.take()
            target_tok = self.tok
            if target_tok.kind not in ("name", "sym"):
                self.fail(f"expected a definition target, found {self.describe(target_tok)}")
            self.take()
            params = None
            if self.at("("):
                self.take()
                params = []
                while True:
                    p = self.expect_name("a parameter concept")
                    params.append((p.text, self.copy_suffix() or 1))
                    if not self.at(","):
                        break
                    self.take()
                self.expect(")")
            self.expect("::=", "'::='")
            body = self.def_body(params is None)
            self.expect(";")
            return ("def", target_tok.text, params, body, self.span(target_tok))
        if self.at("assert"):
            self.take()
        items = [self.formula()]
        while self.at(","):
            self.take()
            items.append(self.formula())
        self.expect(";")
        return ("assert", items, self.span(t))

    def name_list(self):
        names = [self.expect_name().text]
        while self.at(","):
            self.take()
            names.append(self.expect_name().text)
        return names

    def opname(self):
        if self.tok.kind in ("name", "sym"):
            return self.take().text
        self.fail(f"expected an operator name, found {self.describe(self.tok)}")

    def def_body(self, allow_bar):
        t = self.tok
        if allow_bar and t.kind == "name" and (
                self.peek().text == "|" or (self.peek().kind == "copy" and self.peek(2).text == "|")):
            name = self.take().text
            copy = self.copy_suffix() or 1
            self.expect("|")
            return _RawCompr(name, copy, self.formula(), span=self.span(t))
        return self.term()

    # formulas
    def formula(self):
        if self.at("∀") or self.at("∃"):
            return self.quantifier()
        return self.equiv()

    def quantifier(self):
        q = self.take()
        cls = Forall if q.text == "∀" else Exists
        if self.at("("):
            self.take()
            c = self.expect_name("a concept")
            copy = self.copy_suffix() or 1
            self.expect(",")
            body = self.formula()
            self.expect(")")
        else:
            c = self.expect_name("a concept")
            copy = self.copy_suffix() or 1
            if not (self.at(":") or self.at(".")):
                self.fail(f"expected ':' after quantified concept, found {self.describe(self.tok)}")
            self.take()
            body = self.formula()
        return cls(c.text, body, copy, span=self.span(q))

    def equiv(self):
        left = self.implies()
        while self.at("≡"):
            t = self.take()
            left = Equiv(left, self.implies(), span=self.span(t))
        return left

    def implies(self):
        left = self.disj()
        if self.at("→") or self.at("->"):
            t = self.take()
            right = self.formula() if (self.at("∀") or self.at("∃")) else self.implies()
            return Implies(left, right, span=self.span(t))
        return left

    def disj(self):
        left = self.conj()
        while self.at("∨"):
            t = self.take()
            left = Or(left, self.conj(), span=self.span(t))
        return left

    def conj(self):
        left = self.unary()
        while self.at("∧"):
            t = self.take()
            left = And(left, self.unary(), span=self.span(t))
        return left

    def unary(self):
        if self.at("¬"):
            t = self.take()
            return Not(self.unary(), span=self.span(t))
        if self.at("∀") or self.at("∃"):
            return self.quantifier()
        if self.at("("):
            grouped = self.try_grouped_formula()
            if grouped is not None:
                return grouped
        return self.atom_formula()

    def try_grouped_formula(self):
        start = self.i
        if start in self._formula_memo:
            result = self._formula_memo[start]
            if result is None:
                return None
            f, end = result
            self.i = end
            return f
        try:
            self.take()
            items = [self.formula()]
            while self.at(","):
                self.take()
                items.append(self.formula())
            self.expect(")")
            ok = self.tok.kind == "eof" or (self.tok.kind == "punct" and self.tok.text in _FORMULA_FOLLOW)
        except _Fail:
            ok = False
        if not ok:
            self._formula_memo[start] = None
            self.i = start
            return None
        f = items[0] if len(items) == 1 else Multi(items, span=self.span(self.toks[start]))
        self._formula_memo[start] = (f, self.i)
        return f

    def atom_formula(self):
        t = self.tok
        lhs = self.term()
        if self.at("="):
            self.take()
            return Prim(Assertion(lhs, self.term(), span=self.span(t)), span=self.span(t))
        if self.at("≠"):
            self.take()
            return Not(Prim(Assertion(lhs, self.term(), span=self.span(t)), span=self.span(t)),
                       span=self.span(t))
        return Prim(Assertion(lhs, Lit(TOP), span=self.span(t)), span=self.span(t))

    # terms
    def term(self):
        left = self.union()
        if self.tok.kind == "punct" and self.tok.text in ("∈", "⊆", "≥"):
            t = self.take()
            op = {"∈": "in", "⊆": "subseteq", "≥": "geq"}[t.text]
            left = Apply(op, (left, self.union()), span=self.span(t))
        return left

    def union(self):
        left = self.inter()
        while self.at("∪"):
            t = self.take()
            left = Apply("union", (left, self.inter()), span=self.span(t))
        return left

    def inter(self):
        left = self.prod()
        while self.at("∩") or self.at("\\"):
            t = self.take()
            op = "inter" if t.text == "∩" else "diff"
            left = Apply(op, (left, self.prod()), span=self.span(t))
        return left

    def starts_primary(self, t):
        if t.kind in ("name", "sym", "atom"):
            return True
        return t.kind == "punct" and t.text in ("(", "{", "∅", "⊤", "⊥")

    def prod(self):
        left = self.infix()
        while self.at("×") or (self.at("x", "name") and "x" not in self.binary_ops
                               and self.starts_primary(self.peek())):
            t = self.take()
            left = Apply("prod", (left, self.infix()), span=self.span(t))
        return left

    def infix(self):
        left = self.postfix()
        while True:
            t = self.tok
            if t.kind == "sym" or (t.kind == "name" and t.text in self.binary_ops
                                   and self.starts_primary(self.peek())):
                if t.text not in self.binary_ops:
                    self.fail(f"operator '{t.text}' is not declared with arity 2, so it cannot be used infix")
                self.take()
                left = Apply(t.text, (left, self.postfix()), span=self.span(t))
            else:
                return left

    def postfix(self):
        left = self.primary()
        while self.at(".") and self.peek().kind in ("name", "sym"):
            self.take()
            t = self.take()
            left = Apply(t.text, (left,), span=self.span(t))
        return left

    def args(self):
        self.expect("(")
        items = [self.term()]
        while self.at(","):
            self.take()
            items.append(self.term())
        self.expect(")")
        return items

    def primary(self):
        t = self.tok
        if t.kind == "atom":
            self.take()
            return Lit(Atom(t.text), span=self.span(t))
        if t.kind == "punct":
            if t.text in ("∅", "⊤", "⊥"):
                self.take()
                return Lit({"∅": EMPTY, "⊤": TOP, "⊥": BOT}[t.text], span=self.span(t))
            if t.text == "(":
                items = self.args()
                if len(items) == 1:
                    return items[0]
                return Apply(TUPLE_FORMER, tuple(items), span=self.span(t))
            if t.text == "{":
                return self.braces()
        if t.kind == "sym":
            self.take()
            if not self.at("("):
                self.fail(f"operator '{t.text}' must be applied to arguments", t)
            return Apply(t.text, tuple(self.args()), span=self.span(t))
        if t.kind == "name":
            self.take()
            if self.at("("):
                if t.text == "ext":
                    self.take()
                    c = self.expect_name("a concept")
                    self.expect(")")
                    return Atomic(c.text, span=self.span(c))
                args = tuple(self.args())
                return Apply(t.text, args, span=self.span(t))
            if t.text in _RESERVED_CALLS:
                self.fail(f"'{t.text}' must be applied to an argument", t)
            return _Name(t.text, self.copy_suffix(), span=self.span(t))
        self.fail(f"expected a term, found {self.describe(t)}")

    def braces(self):
        open_tok = self.take()
        if self.at("}"):
            self.take()
            return Apply(SET_FORMER, (), span=self.span(open_tok))
        if self.tok.kind == "name" and (self.peek().text == "|" or (
                self.peek().kind == "copy" and self.peek(2).text == "|")):
            c = self.take()
            copy = self.copy_suffix() or 1
            self.expect("|")
            filt = self.formula()
            self.expect("}")
            return _RawCompr(c.text, copy, filt, span=self.span(c))
        items = [self.term()]
        while self.at(","):
            self.take()
            items.append(self.term())
        self.expect("}")
        return Apply(SET_FORMER, tuple(items), span=self.span(open_tok))

    # recovery
    def skip_statement(self):
        depth = 0
        while self.tok.kind != "eof":
            t = self.take()
            if t.text in ("(", "{") and t.kind == "punct":
                depth += 1
            elif t.text in (")", "}") and t.kind == "punct":
                depth = max(0, depth - 1)
            elif t.text == ";" and t.kind == "punct":
                return


def _prescan_binary_ops(tokens):
    """Names declared (or defined) with two parameters, usable infix."""
    out = set()
    for k, t in enumerate(tokens[:-2]):
        if t.kind == "punct" and t.text in ("op", "def") and tokens[k + 1].kind in ("name", "sym") \
                and tokens[k + 2].text == "(":
            depth, commas, j = 0, 0, k + 2
            while j < len(tokens) and tokens[j].kind != "eof":
                tx = tokens[j]
                if tx.kind == "punct" and tx.text in ("(", "{"):
                    depth += 1
                elif tx.kind == "punct" and tx.text in (")", "}"):
                    depth -= 1
                    if depth == 0:
                        break
                elif tx.kind == "punct" and tx.text == "," and depth == 1:
                    commas += 1
                elif tx.kind == "punct" and tx.text == ";":
                    break
                j += 1
            if commas == 1:
                out.add(tokens[k + 1].text)
    return out


# -- resolution ---------------------------------------------------------------

class _Resolver:
    def __init__(self, structure_like, file, diagnostics):
        self.individuals = set(structure_like["individuals"])
        self.concepts = set(structure_like["concepts"])
        self.operators = structure_like["operators"]
        self.file = file
        self.diagnostics = diagnostics
        self.implicit = []

    def concept_only(self, name):
        return name in self.concepts and name not in self.individuals

    def error(self, message, node):
        span = getattr(node, "span", None) or SourceSpan(self.file)
        self.diagnostics.append(Diagnostic("error", message, span))

    def term(self, t, set_pos=False):
        if isinstance(t, _Name):
            if t.copy is not None:
                if t.name not in self.concepts:
                    self.error(f"'{t.name}' carries a copy index but is not a concept", t)
                return ConceptRef(t.name, t.copy, span=t.span)
            if set_pos or not self.concept_only(t.name):
                if t.name not in self.concepts and t.name not in self.individuals \
                        and t.name not in self.operators:
                    self.individuals.add(t.name)
                    self.implicit.append(t.name)
                return Atomic(t.name, span=t.span)
            return ConceptRef(t.name, 1, span=t.span)
        if isinstance(t, Apply):
            positions = set_positions(t.op)
            args = [self.term(a, k in positions) for k, a in enumerate(t.args)]
            if t.op in (SET_FORMER, TUPLE_FORMER):
                out = apply(t.op, *args)
                return out if not isinstance(out, Apply) else Apply(out.op, out.args, span=t.span)
            return Apply(t.op, tuple(args), span=t.span)
        if isinstance(t, _RawCompr):
            if t.concept not in self.concepts:
                self.error(f"comprehension over '{t.concept}', which is not a concept", t)
            return Compr(t.concept, t.copy, self.filter(t.filter), span=t.span)
        return t

    def filter(self, f):
        resolved = self.formula(f)
        try:
            return desugar_logic(resolved)
        except SetKRError as e:
            self.error(str(e), f)
            return Assertion(Lit(TOP), Lit(TOP))

    def formula(self, f):
        if isinstance(f, Prim):
            a = f.assertion
            return Prim(Assertion(self.term(a.lhs), self.term(a.rhs), span=a.span), span=f.span)
        if isinstance(f, Multi):
            return Multi([self.formula(x) for x in f.items], span=f.span)
        if isinstance(f, Not):
            return Not(self.formula(f.arg), span=f.span)
        if isinstance(f, (Forall, Exists)):
            if f.concept not in self.concepts:
                self.error(f"quantifier over '{f.concept}', which is not a concept", f)
            return type(f)(f.concept, self.formula(f.body), f.copy, span=f.span)
        return type(f)(self.formula(f.left), self.formula(f.right), span=f.span)

    def cexpr(self, t):
        """Concept expression reading of a raw term, or None."""
        if isinstance(t, _Name):
            return CName(t.name, span=t.span) if t.name in self.concepts else None
        if isinstance(t, Atomic):
            return CName(t.name, span=t.span) if t.name in self.concepts else None
        if isinstance(t, Lit) and t.value == EMPTY:
            return CEnum((), span=t.span)
        if isinstance(t, Apply):
            if t.op == SET_FORMER:
                return CEnum(tuple(self.term(a) for a in t.args), span=t.span)
            if t.op in ("union", "inter", "diff", "prod"):
                left, right = self.cexpr(t.args[0]), self.cexpr(t.args[1])
                return None if left is None or right is None else CBin(t.op, left, right, span=t.span)
            if t.op == "pow" and len(t.args) == 1:
                arg = self.cexpr(t.args[0])
                return None if arg is None else CPow(arg, span=t.span)
            if not is_builtin(t.op):
                args = [self.cexpr(a) for a in t.args]
                return None if any(a is None for a in args) else CImage(t.op, tuple(args), span=t.span)
        return None

    def looks_conceptual(self, t):
        """Inference for undeclared definition targets."""
        if isinstance(t, _RawCompr):
            return True
        if isinstance(t, Apply) and t.op == SET_FORMER:
            return True
        return self.cexpr_shape(t)

    def cexpr_shape(self, t):
        if isinstance(t, (_Name, Atomic)):
            return t.name in self.concepts
        if isinstance(t, Lit):
            return False
        if isinstance(t, Apply):
            if t.op == SET_FORMER:
                return True
            if t.op in ("union", "inter", "diff", "prod", "pow") or not is_builtin(t.op):
                return bool(t.args) and all(self.cexpr_shape(a) for a in t.args)
        return False


def _resolve_kb(stmts, file, diagnostics, base=None):
    base = base or SyntacticStructure()
    individuals = set(base.individuals)
    concepts = set(base.concepts)
    operators = dict(base.operators)
    for s in stmts:
        if s[0] == "individual":
            individuals.update(s[1])
        elif s[0] == "concept":
            concepts.update(s[1])
        elif s[0] == "op":
            _, name, domain, rng, span = s
            if name in operators and operators[name].span is not None:
                diagnostics.append(Diagnostic("error", f"operator '{name}' is declared more than once", span))
                continue
            operators[name] = OperatorSig(name, tuple(domain), rng, span=span)
    declared_ind, declared_con = set(individuals), set(concepts)
    for s in stmts:
        if s[0] == "def" and s[2] is not None and s[1] not in operators:
            operators[s[1]] = OperatorSig(s[1], tuple(c for c, _ in s[2]), span=s[4])

    r = _Resolver({"individuals": individuals, "concepts": concepts, "operators": operators},
                  file, diagnostics)
    kinds = {}
    for s in stmts:
        if s[0] == "def" and s[2] is None:
            target = s[1]
            if target in declared_con:
                kinds[target] = "concept"
            elif target in declared_ind:
                kinds[target] = "individual"
    changed = True
    while changed:
        changed = False
        for s in stmts:
            if s[0] == "def" and s[2] is None and s[1] not in kinds:
                if r.looks_conceptual(s[3]):
                    kinds[s[1]] = "concept"
                    r.concepts.add(s[1])
                    changed = True
    for s in stmts:
        if s[0] == "def" and s[2] is None and s[1] not in kinds:
            kinds[s[1]] = "individual"
            r.individuals.add(s[1])

    definitions, assertions, schema, formulas = [], [], [], []
    for s in stmts:
        if s[0] == "def":
            _, target, params, body, span = s
            if params is not None:
                for c, _k in params:
                    if c not in r.concepts:
                        diagnostics.append(Diagnostic("error", f"parameter '{c}' of '{target}' is not a concept", span))
                definitions.append(OperatorDef(target, tuple(params), r.term(body), span=span))
            elif kinds[target] == "individual":
                definitions.append(IndividualDef(target, r.term(body), span=span))
            else:
                d = _concept_def(r, target, body, span)
                if d is None:
                    diagnostics.append(Diagnostic(
                        "error", f"the body of concept '{target}' is not a concept expression", span))
                else:
                    definitions.append(d)
        elif s[0] == "assert":
            items = [r.formula(f) for f in s[1]]
            if len(items) == 1 and isinstance(items[0], Prim):
                a = items[0].assertion
                (schema if free_placeholders(a) else assertions).append(a)
            elif len(items) == 1:
                formulas.append(items[0])
            else:
                formulas.append(Multi(items, span=s[2]))
    structure = SyntacticStructure(r.individuals, r.concepts, operators)
    return KnowledgeBase(structure, definitions, assertions, schema, formulas)


def _concept_def(r, target, body, span):
    if isinstance(body, _RawCompr):
        if body.concept not in r.concepts:
            r.error(f"comprehension over '{body.concept}', which is not a concept", body)
        return ConceptComprehension(target, body.concept, r.filter(body.filter), body.copy, span=span)
    if isinstance(body, Apply) and body.op == SET_FORMER:
        return ConceptEnum(target, tuple(r.term(a) for a in body.args), span=span)
    e = r.cexpr(body)
    if e is None:
        return None
    if isinstance(e, CImage) and len(e.args) == 1:
        return ConceptReplacement(target, e.operator, e.args[0], span=span)
    return ConceptOp(target, e, span=span)


# -- entry points ---------------------------------------------------------------

def _parse_statements(text, file, diagnostics, binary_ops=()):
    tokens = tokenize(text, file, diagnostics)
    p = _Parser(tokens, file, _prescan_binary_ops(tokens) | set(binary_ops))
    stmts = []
    while p.tok.kind != "eof":
        start = p.i
        try:
            stmts.append(p.statement())
        except _Fail as e:
            diagnostics.append(e.diagnostic)
            p.i = start
            p.skip_statement()
    return stmts


def parse_kb(source: str, file: str = "<input>", structure: SyntacticStructure = None) -> KnowledgeBase:
    """Parse a whole knowledge base.

    Raises :class:`ParseError` carrying every diagnostic when the source is
    malformed; no partial knowledge base is returned.  Names used as
    individuals without a declaration are added to the structure.
    """
    diagnostics = []
    base_ops = {n for n, s in (structure.operators.items() if structure else ()) if s.arity == 2}
    stmts = _parse_statements(source, file, diagnostics, base_ops)
    kb = _resolve_kb(stmts, file, diagnostics, structure) if not diagnostics else None
    if diagnostics:
        raise ParseError(diagnostics)
    return kb


def _single(source, file, structure, what):
    diagnostics = []
    tokens = tokenize(source, file, diagnostics)
    binary = {n for n, s in structure.operators.items() if s.arity == 2} if structure else set()
    binary |= _prescan_binary_ops(tokens)
    p = _Parser(tokens, file, binary)
    raw = None
    try:
        raw = what(p)
        if p.at(";"):
            p.take()
        if p.tok.kind != "eof":
            p.fail(f"unexpected {p.describe(p.tok)} after the end of the input")
    except _Fail as e:
        diagnostics.append(e.diagnostic)
    if diagnostics:
        raise ParseError(diagnostics)
    st = structure or SyntacticStructure()
    r = _Resolver({"individuals": st.individuals, "concepts": st.concepts, "operators": st.operators},
                  file, diagnostics)
    return r, raw, diagnostics


def parse_formula(source: str, structure: SyntacticStructure = None, file="<input>"):
    """Parse one formula (assertions with optional logic sugar)."""
    r, raw, diagnostics = _single(source, file, structure, lambda p: p.formula())
    f = r.formula(raw)
    if diagnostics:
        raise ParseError(diagnostics)
    return f


def parse_assertion(source: str, structure: SyntacticStructure = None, file="<input>") -> Assertion:
    """Parse one assertion; logic sugar and multi-assertions are lowered
    to a single (possibly nested) assertion."""
    def items(p):
        out = [p.formula()]
        while p.at(","):
            p.take()
            out.append(p.formula())
        return out[0] if len(out) == 1 else Multi(out)

    r, raw, diagnostics = _single(source, file, structure, items)
    f = r.formula(raw)
    if diagnostics:
        raise ParseError(diagnostics)
    if isinstance(f, Prim):
        return f.assertion
    try:
        return desugar_logic(f)
    except SetKRError as e:
        raise ParseError([Diagnostic("error", str(e), SourceSpan(file))]) from e


def parse_term(source: str, structure: SyntacticStructure = None, file="<input>"):
    r, raw, diagnostics = _single(source, file, structure, lambda p: p.term())
    t = r.term(raw)
    if diagnostics:
        raise ParseError(diagnostics)
    return t


# -- printer ----------------------------------------------------------------

_INFIX = {"union": "∪", "inter": "∩", "diff": "\\", "prod": "×", "in": "∈",
          "subseteq": "⊆", "geq": "≥"}


def _copy(k):
    return f"^{k}"


def format_value(v) -> str:
    if isinstance(v, Atom):
        if v == TOP:
            return "⊤"
        if v == BOT:
            return "⊥"
        return "'" + v.name
    if isinstance(v, Tup):
        return "(" + ", ".join(format_value(x) for x in v.items) + ")"
    if not v.elements:
        return "∅"
    return "{" + ", ".join(format_value(x) for x in v.elements) + "}"


def format_term(t, structure: SyntacticStructure = None, set_pos=False) -> str:
    """Concrete syntax for a term; reparses to an equal term under the same
    structure."""
    def fmt(t, set_pos):
        if isinstance(t, Atomic):
            if not set_pos and structure is not None and structure.is_concept_only(t.name):
                return f"ext({t.name})"
            return t.name
        if isinstance(t, Lit):
            return format_value(t.value)
        if isinstance(t, ConceptRef):
            if t.copy == 1 and not set_pos and structure is not None and structure.is_concept_only(t.name):
                return t.name
            return t.name + _copy(t.copy)
        if isinstance(t, Compr):
            return "{" + t.concept + _copy(t.copy) + " | " + format_assertion(t.filter, structure) + "}"
        if isinstance(t, Apply):
            positions = set_positions(t.op)
            args = [fmt(a, k in positions) for k, a in enumerate(t.args)]
            if t.op == SET_FORMER:
                return "{" + ", ".join(args) + "}"
            if t.op == TUPLE_FORMER:
                return "(" + ", ".join(args) + ")"
            if t.op in _INFIX and len(args) == 2:
                return f"({args[0]} {_INFIX[t.op]} {args[1]})"
            return f"{t.op}(" + ", ".join(args) + ")"
        raise TypeError(f"not a term: {t!r}")

    return fmt(t, set_pos)


def format_assertion(a: Assertion, structure=None) -> str:
    return f"{format_term(a.lhs, structure)} = {format_term(a.rhs, structure)}"


def format_formula(f, structure=None) -> str:
    if isinstance(f, Assertion):
        return format_assertion(f, structure)
    if isinstance(f, Prim):
        return format_assertion(f.assertion, structure)
    if isinstance(f, Multi):
        return "(" + ", ".join(format_formula(x, structure) for x in f.items) + ")"
    if isinstance(f, Not):
        if isinstance(f.arg, Prim):
            a = f.arg.assertion
            return f"{format_term(a.lhs, structure)} ≠ {format_term(a.rhs, structure)}"
        return f"¬{_grouped(f.arg, structure)}"
    if isinstance(f, (Forall, Exists)):
        q = "∀" if isinstance(f, Forall) else "∃"
        return f"({q} {f.concept}{_copy(f.copy)}: {format_formula(f.body, structure)})"
    sym = {And: "∧", Or: "∨", Implies: "→", Equiv: "≡"}[type(f)]
    return f"({format_formula(f.left, structure)} {sym} {format_formula(f.right, structure)})"


def _grouped(f, structure):
    text = format_formula(f, structure)
    return text if text.startswith("(") and isinstance(f, (And, Or, Implies, Equiv, Forall, Exists, Multi)) \
        else f"({text})"


def format_cexpr(e, structure=None) -> str:
    if isinstance(e, CName):
        return e.name
    if isinstance(e, CEnum):
        return "{" + ", ".join(format_term(m, structure) for m in e.members) + "}"
    if isinstance(e, CBin):
        return f"({format_cexpr(e.left, structure)} {_INFIX[e.op]} {format_cexpr(e.right, structure)})"
    if isinstance(e, CPow):
        return f"pow({format_cexpr(e.arg, structure)})"
    if isinstance(e, CImage):
        return f"{e.operator}(" + ", ".join(format_cexpr(a, structure) for a in e.args) + ")"
    raise TypeError(f"not a concept expression: {e!r}")


def format_definition(d, structure=None) -> str:
    if isinstance(d, IndividualDef):
        return f"def {d.target} ::= {format_term(d.body, structure)};"
    if isinstance(d, OperatorDef):
        params = ", ".join(c + _copy(k) for c, k in d.params)
        return f"def {d.target}({params}) ::= {format_term(d.body, structure)};"
    if isinstance(d, ConceptEnum):
        return f"def {d.target} ::= {{" + ", ".join(format_term(m, structure) for m in d.members) + "};"
    if isinstance(d, ConceptOp):
        return f"def {d.target} ::= {format_cexpr(d.expr, structure)};"
    if isinstance(d, ConceptComprehension):
        return (f"def {d.target} ::= {{{d.source}{_copy(d.copy)} | "
                f"{format_assertion(d.filter, structure)}}};")
    if isinstance(d, ConceptReplacement):
        return f"def {d.target} ::= {d.operator}({format_cexpr(d.source, structure)});"
    raise TypeError(f"not a definition: {d!r}")


def format_kb(kb: KnowledgeBase) -> str:
    """Canonical concrete syntax; ``parse_kb(format_kb(kb)) == kb``."""
    st = kb.structure
    lines = []
    if st.individuals:
        lines.append("individual " + ", ".join(sorted(st.individuals, key=_name_key)) + ";")
    if st.concepts:
        lines.append("concept " + ", ".join(sorted(st.concepts, key=_name_key)) + ";")
    for name in sorted(st.operators, key=_name_key):
        sig = st.operators[name]
        rng = f" -> {sig.declared_range}" if sig.declared_range else ""
        lines.append(f"op {name}({', '.join(sig.domain)}){rng};")
    for d in kb.definitions:
        lines.append(format_definition(d, st))
    for a in kb.assertions:
        lines.append(f"assert {format_assertion(a, st)};")
    for a in kb.schema_assertions:
        lines.append(f"assert {format_assertion(a, st)};")
    for f in kb.formulas:
        if isinstance(f, Multi):
            lines.append("assert " + ", ".join(format_formula(x, st) for x in f.items) + ";")
        else:
            lines.append(f"assert {format_formula(f, st)};")
    return "\n".join(lines) + "\n"


def _name_key(name):
    return (0, int(name), name) if name.isdigit() else (1, 0, name)


__all__ = ["tokenize", "parse_kb", "parse_assertion", "parse_formula", "parse_term",
           "format_kb", "format_term", "format_assertion", "format_formula",
           "format_definition", "format_cexpr", "format_value", "Token"]
