"""Hereditarily finite sets over atoms and tuples.

This is the concrete value domain everything else is evaluated in.  Values
are immutable and canonical: a set keeps its elements sorted under a total
order (atoms < tuples < sets, lexicographic within a kind), so extensional
equality and hashing reduce to comparing sort keys.
"""
from __future__ import annotations

import os
import re
from contextlib import contextmanager
from dataclasses import dataclass, replace
from itertools import combinations, product
from weakref import WeakValueDictionary

from .errors import NonSetOperand, SizeLimitExceeded

__all__ = [
    "Value", "Atom", "HSet", "Tup", "TOP", "BOT", "EMPTY", "Limits", "limits",
    "override_limits", "set_union", "set_intersect", "set_difference",
    "cartesian_product", "power_set", "member", "subset", "cardinality",
    "nat", "nat_value", "render", "rendered_length", "parse_value", "value_atoms", "rename_atoms",
]


@dataclass(frozen=True)
class Limits:
    max_set_size: int = 1 << 16
    max_depth: int = 64
    max_powerset_base: int = 16
    max_render_chars: int = 1 << 22


def _limits_from_env():
    raw = os.environ.get("SETKR_MAX_SET_SIZE")
    return Limits(max_set_size=int(raw)) if raw else Limits()


limits = _limits_from_env()


@contextmanager
def override_limits(**changes):
    """Temporarily replace fields of the module-wide :data:`limits`."""
    global limits
    saved = limits
    limits = replace(limits, **changes)
    try:
        yield limits
    finally:
        limits = saved


# Values are hash-consed: structurally equal values are the same object, so
# equality is identity and the hash is built from the children's hashes.
# Without this, von Neumann numerals (whose trees double at each step) make
# hashing and comparison exponential.
_interned: "WeakValueDictionary" = WeakValueDictionary()


class Value:
    __slots__ = ("_key", "_hash", "depth", "_rlen", "__weakref__")

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Value):
            return NotImplemented
        return False

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return self is not other and self._key < other._key

    def __le__(self, other):
        return self is other or self._key <= other._key

    def __gt__(self, other):
        return self is not other and self._key > other._key

    def __ge__(self, other):
        return self is other or self._key >= other._key

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self

    def __str__(self):
        return render(self)

    @property
    def sort_key(self):
        return self._key


def _make(cls, ident, key, hashed, depth, **fields):
    obj = _interned.get(ident)
    if obj is not None:
        return obj
    if depth > limits.max_depth:
        raise SizeLimitExceeded(f"value nesting depth {depth} exceeds limit {limits.max_depth}")
    obj = object.__new__(cls)
    object.__setattr__(obj, "_key", key)
    object.__setattr__(obj, "_hash", hashed)
    object.__setattr__(obj, "depth", depth)
    object.__setattr__(obj, "_rlen", None)
    for name, value in fields.items():
        object.__setattr__(obj, name, value)
    _interned[ident] = obj
    return obj


class Atom(Value):
    __slots__ = ("name",)

    def __new__(cls, name: str):
        if not isinstance(name, str) or not name:
            raise ValueError("atom names are non-empty strings")
        return _make(cls, (0, name), (0, name), hash((0, name)), 0, name=name)

    def __repr__(self):
        return f"Atom({self.name!r})"

    def __reduce__(self):
        return (Atom, (self.name,))


class Tup(Value):
    __slots__ = ("items",)

    def __new__(cls, items):
        items = tuple(items)
        if len(items) < 2:
            raise ValueError("tuples have at least two components")
        for item in items:
            if not isinstance(item, Value):
                raise TypeError(f"tuple component {item!r} is not a Value")
        ident = (1,) + tuple(map(id, items))
        depth = max(item.depth for item in items)
        return _make(cls, ident, (1, tuple(item._key for item in items)),
                     hash((1, tuple(item._hash for item in items))), depth, items=items)

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __getitem__(self, i):
        return self.items[i]

    def __repr__(self):
        if rendered_length(self) > 2000:
            return f"<Tup depth={self.depth} rendered_length={rendered_length(self)}>"
        return f"Tup({list(self.items)!r})"

    def __reduce__(self):
        return (Tup, (self.items,))


class HSet(Value):
    """A finite extensional set of Values."""

    __slots__ = ("elements", "_members")

    def __new__(cls, elements=()):
        members = elements if isinstance(elements, frozenset) else frozenset(elements)
        if len(members) > limits.max_set_size:
            raise SizeLimitExceeded(
                f"set of {len(members)} elements exceeds limit {limits.max_set_size}")
        for e in members:
            if not isinstance(e, Value):
                raise TypeError(f"set element {e!r} is not a Value")
        ordered = tuple(sorted(members, key=_sort_key))
        ident = (2,) + tuple(map(id, ordered))
        depth = 1 + max((e.depth for e in ordered), default=0)
        return _make(cls, ident, (2, tuple(e._key for e in ordered)),
                     hash((2, tuple(e._hash for e in ordered))), depth,
                     elements=ordered, _members=members)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, x):
        return x in self._members

    def __bool__(self):
        return bool(self.elements)

    def __repr__(self):
        if rendered_length(self) > 2000:
            return f"<HSet depth={self.depth} rendered_length={rendered_length(self)}>"
        return f"HSet({list(self.elements)!r})"

    def __reduce__(self):
        return (HSet, (self.elements,))


def _sort_key(v):
    return v._key


TOP = Atom("⊤")
BOT = Atom("⊥")
EMPTY = HSet()


def _require_set(*values):
    for v in values:
        if not isinstance(v, HSet):
            raise NonSetOperand(f"expected a set, got {render(v) if isinstance(v, Value) else v!r}")


def set_union(a, b):
    _require_set(a, b)
    return HSet(a._members | b._members)


def set_intersect(a, b):
    _require_set(a, b)
    return HSet(a._members & b._members)


def set_difference(a, b):
    _require_set(a, b)
    return HSet(a._members - b._members)


def cartesian_product(a, b):
    _require_set(a, b)
    if len(a) * len(b) > limits.max_set_size:
        raise SizeLimitExceeded(f"product of {len(a)}x{len(b)} elements exceeds set size limit")
    return HSet(Tup(pair) for pair in product(a.elements, b.elements))


def power_set(a):
    _require_set(a)
    n = len(a)
    if n > limits.max_powerset_base or (1 << n) > limits.max_set_size:
        raise SizeLimitExceeded(f"power set of a {n}-element set exceeds limits")
    return HSet(HSet(c) for r in range(n + 1) for c in combinations(a.elements, r))


def member(x, s):
    _require_set(s)
    return x in s._members


def subset(a, b):
    _require_set(a, b)
    return a._members <= b._members


def cardinality(s):
    _require_set(s)
    return len(s.elements)


def nat(n: int) -> HSet:
    """Von Neumann encoding of the natural number n (0 = ∅, n+1 = n ∪ {n})."""
    if n < 0:
        raise ValueError("naturals are non-negative")
    v = EMPTY
    for _ in range(n):
        v = HSet(v._members | {v})
    return v


def nat_value(v):
    """Inverse of :func:`nat`; None when v is not a von Neumann natural."""
    if not isinstance(v, HSet):
        return None
    n = len(v)
    return n if v == nat(n) else None


def value_atoms(v):
    """All atoms occurring anywhere inside v."""
    out = set()
    stack = [v]
    while stack:
        x = stack.pop()
        if isinstance(x, Atom):
            out.add(x)
        elif isinstance(x, Tup):
            stack.extend(x.items)
        else:
            stack.extend(x.elements)
    return out


def rename_atoms(v, mapping):
    """Apply an atom-to-atom mapping throughout v."""
    if isinstance(v, Atom):
        return mapping.get(v, v)
    if isinstance(v, Tup):
        return Tup(rename_atoms(x, mapping) for x in v.items)
    return HSet(rename_atoms(x, mapping) for x in v.elements)


def rendered_length(v) -> int:
    """Length of ``render(v)``, computed without building the string."""
    n = v._rlen
    if n is None:
        if isinstance(v, Atom):
            n = len(v.name)
        elif isinstance(v, Tup):
            n = 2 + sum(rendered_length(x) for x in v.items) + 2 * (len(v.items) - 1)
        elif not v.elements:
            n = 1
        else:
            n = 2 + sum(rendered_length(x) for x in v.elements) + 2 * (len(v.elements) - 1)
        object.__setattr__(v, "_rlen", n)
    return n


def render(v) -> str:
    n = rendered_length(v)
    if n > limits.max_render_chars:
        raise SizeLimitExceeded(
            f"rendering a value would take {n} characters (limit {limits.max_render_chars})")
    return _render(v)


def _render(v) -> str:
    if isinstance(v, Atom):
        return v.name
    if isinstance(v, Tup):
        return "(" + ", ".join(_render(x) for x in v.items) + ")"
    if not v.elements:
        return "∅"
    return "{" + ", ".join(_render(x) for x in v.elements) + "}"


_VALUE_TOKEN = re.compile(r"\s*(?:([{}(),∅])|([^\s{}(),∅]+))")


def parse_value(text: str) -> Value:
    """Parse the canonical rendering produced by :func:`render`."""
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _VALUE_TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"bad value text at offset {pos}: {text!r}")
        tokens.append(m.group(1) or m.group(2))
        pos = m.end()
    tokens = [t for t in tokens if t]
    value, rest = _parse_value_tokens(tokens, 0)
    if rest != len(tokens):
        raise ValueError(f"trailing input in value text {text!r}")
    return value


def _parse_value_tokens(tokens, i):
    if i >= len(tokens):
        raise ValueError("unexpected end of value text")
    tok = tokens[i]
    if tok == "∅":
        return EMPTY, i + 1
    if tok in "{(":
        close = "}" if tok == "{" else ")"
        items = []
        i += 1
        if tokens[i:i + 1] == [close]:
            i += 1
        else:
            while True:
                item, i = _parse_value_tokens(tokens, i)
                items.append(item)
                if i < len(tokens) and tokens[i] == ",":
                    i += 1
                    continue
                if i < len(tokens) and tokens[i] == close:
                    i += 1
                    break
                raise ValueError(f"expected ',' or {close!r} in value text")
        return (HSet(items) if close == "}" else Tup(items)), i
    if tok in "}),":
        raise ValueError(f"unexpected {tok!r} in value text")
    return Atom(tok), i + 1
