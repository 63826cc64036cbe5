"""First-order terms, signatures, substitutions, strands and contexts.

Terms are immutable trees.  A leaf is either a variable (``is_var``), a
constant declared in a signature, or a *free constant*: any nullary name the
signature does not declare.  Hole variables of contexts live in the reserved
``x_<i>`` namespace and frame variables in ``v_<i>``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

__all__ = [
    "Term",
    "Symbol",
    "Signature",
    "Step",
    "TermSyntaxError",
    "ArityError",
    "var",
    "const",
    "hole",
    "frame_var",
    "hole_index",
    "parse_term",
    "apply_substitution",
    "instantiate_context",
    "subterms",
    "dag_size",
    "size",
    "is_context",
    "constants",
    "variables",
    "term_key",
    "rename_holes",
    "is_positive",
    "positive",
]


class Term:
    """An immutable first-order term with a cached hash."""

    __slots__ = ("name", "args", "is_var", "_hash", "_text")

    def __init__(self, name: str, args: Sequence["Term"] = (), is_var: bool = False):
        self.name = name
        self.args = tuple(args)
        self.is_var = is_var
        self._hash = hash((name, self.args, is_var))
        self._text = None

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, Term) or self._hash != other._hash:
            return False
        return self.name == other.name and self.is_var == other.is_var and self.args == other.args

    def __ne__(self, other) -> bool:
        return not self == other

    def __str__(self) -> str:
        if self._text is None:
            if self.args:
                text = "%s(%s)" % (self.name, ",".join(str(a) for a in self.args))
            else:
                text = self.name
            self._text = text
        return self._text

    def __repr__(self) -> str:
        return "Term(%s)" % self

    @property
    def is_ground(self) -> bool:
        return not any(t.is_var for t in _walk(self))


def _walk(t: Term) -> Iterator[Term]:
    stack = [t]
    while stack:
        u = stack.pop()
        yield u
        stack.extend(u.args)


def var(name: str) -> Term:
    return Term(name, (), True)


def const(name: str) -> Term:
    return Term(name)


def hole(i: int) -> Term:
    return Term("x_%d" % i, (), True)


def frame_var(i: int) -> Term:
    return Term("v_%d" % i, (), True)


_RESERVED = re.compile(r"^[xv]_(\d+)$")


def hole_index(t: Term) -> int | None:
    """Index of a hole/frame variable, or None for anything else."""
    if not t.is_var:
        return None
    m = _RESERVED.match(t.name)
    return int(m.group(1)) if m else None


@dataclass(frozen=True)
class Symbol:
    name: str
    arity: int
    public: bool = True


@dataclass
class Signature:
    """Declared function symbols; undeclared nullary names are free constants."""

    symbols: dict[str, Symbol] = field(default_factory=dict)

    @classmethod
    def of(cls, public: Mapping[str, int] = (), private: Mapping[str, int] = ()) -> "Signature":
        sig = cls()
        for name, arity in dict(public).items():
            sig.declare(name, arity, True)
        for name, arity in dict(private).items():
            sig.declare(name, arity, False)
        return sig

    def declare(self, name: str, arity: int, public: bool = True) -> None:
        old = self.symbols.get(name)
        if old is not None and old.arity != arity:
            raise ArityError("symbol %s redeclared with arity %d (was %d)" % (name, arity, old.arity))
        self.symbols[name] = Symbol(name, arity, public)

    def __contains__(self, name: str) -> bool:
        return name in self.symbols

    def arity(self, name: str) -> int | None:
        sym = self.symbols.get(name)
        return None if sym is None else sym.arity

    def is_public(self, name: str) -> bool:
        sym = self.symbols.get(name)
        return sym is not None and sym.public

    def is_free_constant(self, t: Term) -> bool:
        return not t.is_var and not t.args and t.name not in self.symbols

    def public_symbols(self) -> list[Symbol]:
        return sorted((s for s in self.symbols.values() if s.public), key=lambda s: (s.arity, s.name))

    def copy(self) -> "Signature":
        return Signature(dict(self.symbols))


class Step(NamedTuple):
    polarity: str  # "!" send, "?" receive
    message: Term

    def __str__(self) -> str:
        return "%s%s" % (self.polarity, self.message)


def is_positive(strand: Iterable[Step]) -> bool:
    return all(step.polarity == "!" for step in strand)


def positive(messages: Iterable[Term]) -> tuple[Step, ...]:
    return tuple(Step("!", m) for m in messages)


# --------------------------------------------------------------------------
# concrete syntax


class TermSyntaxError(ValueError):
    def __init__(self, message: str, text: str = "", pos: int = 0):
        self.text = text
        self.pos = pos
        super().__init__("%s at position %d" % (message, pos) if text else message)


class ArityError(ValueError):
    pass


_TOKEN = re.compile(r"\s*(?:(?P<ident>[A-Za-z][A-Za-z0-9_]*|0)|(?P<xor>\(\+\))|(?P<punct>[(),]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise TermSyntaxError("unexpected character %r" % text[pos], text, pos)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, sig: Signature, variables: frozenset[str], lenient: bool = False):
        self.text = text
        self.lenient = lenient
        self.sig = sig
        self.variables = variables
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind: str, value: str | None = None):
        tok = self.tokens[self.i]
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value or kind
            got = tok[1] or "end of input"
            raise TermSyntaxError("expected %s, got %s" % (want, got), self.text, tok[2])
        self.i += 1
        return tok

    def term(self) -> Term:
        left = self.atom()
        while self.peek()[0] == "xor":
            self.i += 1
            right = self.atom()
            left = self.build("xor", [left, right], self.tokens[self.i - 1][2])
        return left

    def atom(self) -> Term:
        kind, value, pos = self.peek()
        if kind == "punct" and value == "(":
            self.i += 1
            t = self.term()
            self.take("punct", ")")
            return t
        _, name, pos = self.take("ident")
        if self.peek()[:2] == ("punct", "("):
            self.i += 1
            args = [self.term()]
            while self.peek()[:2] == ("punct", ","):
                self.i += 1
                args.append(self.term())
            self.take("punct", ")")
            return self.build(name, args, pos)
        if name in self.variables or _RESERVED.match(name):
            return var(name)
        return self.build(name, [], pos)

    def build(self, name: str, args: list[Term], pos: int) -> Term:
        arity = self.sig.arity(name)
        if arity is None:
            if args and self.lenient:
                return Term(name, args)
            if args:
                raise ArityError("unknown function symbol %s/%d" % (name, len(args)))
            return const(name)
        if arity != len(args):
            raise ArityError("symbol %s expects %d argument(s), got %d" % (name, arity, len(args)))
        return Term(name, args)


def parse_term(text: str, sig: Signature, variables: Iterable[str] = (), lenient: bool = False) -> Term:
    """Parse ``ident`` / ``ident(t1,...,tk)`` / ``t (+) u`` against ``sig``.

    Identifiers listed in ``variables`` and the reserved ``x_<i>``/``v_<i>``
    names become variables; other undeclared nullary names are free constants.
    With ``lenient`` an undeclared applied symbol is kept instead of rejected
    (theory files report those through validation).
    """
    p = _Parser(text, sig, frozenset(variables), lenient)
    t = p.term()
    p.take("eof")
    return t


# --------------------------------------------------------------------------
# operations


def apply_substitution(t: Term, sigma: Mapping[Term, Term]) -> Term:
    if not sigma:
        return t
    if t.is_var:
        return sigma.get(t, t)
    if not t.args:
        return t
    args = tuple(apply_substitution(a, sigma) for a in t.args)
    if all(a is b for a, b in zip(args, t.args)):
        return t
    return Term(t.name, args)


def _messages(s: Sequence) -> list[Term]:
    return [m.message if isinstance(m, Step) else m for m in s]


def instantiate_context(context: Term, s: Sequence) -> Term:
    """Plug the i-th message of the positive strand ``s`` into hole ``x_i``.

    ``v_<i>`` frame variables are accepted as holes too.  No rewriting happens.
    """
    msgs = _messages(s)
    sigma = {}
    for t in variables(context):
        i = hole_index(t)
        if i is None:
            raise ValueError("%s is not a hole variable" % t)
        if not 1 <= i <= len(msgs):
            raise IndexError("hole %s exceeds strand length %d" % (t, len(msgs)))
        sigma[t] = msgs[i - 1]
    return apply_substitution(context, sigma)


def subterms(t: Term) -> set[Term]:
    out: set[Term] = set()
    stack = [t]
    while stack:
        u = stack.pop()
        if u in out:
            continue
        out.add(u)
        stack.extend(u.args)
    return out


def dag_size(t: Term) -> int:
    return len(subterms(t))


def size(t: Term) -> int:
    """Tree size (number of nodes, no sharing)."""
    return 1 + sum(size(a) for a in t.args)


def variables(t: Term) -> list[Term]:
    seen: dict[Term, None] = {}
    for u in _preorder(t):
        if u.is_var:
            seen.setdefault(u, None)
    return list(seen)


def constants(t: Term, sig: Signature | None = None) -> list[Term]:
    """Free constants of ``t`` in left-to-right preorder (with ``sig``), or all nullary non-variables."""
    seen: dict[Term, None] = {}
    for u in _preorder(t):
        if not u.is_var and not u.args and (sig is None or sig.is_free_constant(u)):
            seen.setdefault(u, None)
    return list(seen)


def _preorder(t: Term) -> Iterator[Term]:
    stack = [t]
    while stack:
        u = stack.pop()
        yield u
        stack.extend(reversed(u.args))


def is_context(t: Term, sig: Signature) -> bool:
    for u in _walk(t):
        if u.is_var:
            continue
        if not sig.is_public(u.name):
            return False
    return True


def term_key(t: Term) -> tuple[int, str]:
    """Deterministic total order: size first, then text."""
    return (size(t), str(t))


def rename_holes(t: Term, prefix: str = "v", offset: int = 0, mapping: Mapping[int, int] | None = None) -> Term:
    """Rename ``x_i`` holes to ``<prefix>_j`` where ``j = mapping[i]`` (default ``i + offset``)."""
    sigma = {}
    for v in variables(t):
        i = hole_index(v)
        if i is None:
            continue
        j = mapping[i] if mapping is not None else i + offset
        sigma[v] = Term("%s_%d" % (prefix, j), (), True)
    return apply_substitution(t, sigma)
