"""Alice&Bob narrations: parsing, printing and validation.

Grammar (``#`` starts a comment)::

    protocol <name>
    theory <name>
    <S> -> <R> : <term>
    <A> knows <term>, <term>, ...
    end
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping

from .terms import ArityError, Signature, Term, TermSyntaxError, parse_term, subterms, variables

__all__ = [
    "Line",
    "Narration",
    "Diagnostic",
    "NarrationError",
    "TheoryStore",
    "parse_narration",
    "format_narration",
    "validate_narration",
]


@dataclass(frozen=True)
class Line:
    sender: Term
    receiver: Term
    message: Term
    lineno: int = 0

    def __str__(self) -> str:
        return "%s -> %s : %s" % (self.sender, self.receiver, self.message)


@dataclass
class Narration:
    name: str
    theory_name: str
    lines: list[Line]
    knowledge: dict[Term, list[Term]]
    knows_lineno: dict[Term, int] = field(default_factory=dict, compare=False)
    sig: Signature | None = field(default=None, compare=False, repr=False)

    def agents(self) -> list[Term]:
        """Agents in declaration order, then any that only appear in lines."""
        out = list(self.knowledge)
        for line in self.lines:
            for a in (line.sender, line.receiver):
                if a not in out:
                    out.append(a)
        return out


@dataclass(frozen=True, order=True)
class Diagnostic:
    lineno: int
    severity: str  # "error" | "warning"
    message: str

    def __str__(self) -> str:
        return "line %d: %s: %s" % (self.lineno, self.severity, self.message)


class NarrationError(ValueError):
    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        super().__init__("line %d: %s" % (lineno, message) if lineno else message)


TheoryStore = Mapping[str, object]

_IDENT = r"[A-Za-z][A-Za-z0-9_]*"
_LINE = re.compile(r"^(%s)\s*->\s*(%s)\s*:\s*(.+)$" % (_IDENT, _IDENT))
_KNOWS = re.compile(r"^(%s)\s+knows(?:\s+(.*))?$" % _IDENT)


def _split_args(text: str) -> list[str]:
    """Split on top-level commas."""
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [p.strip() for p in parts]


def _ground(text: str, sig, lineno: int) -> Term:
    try:
        t = parse_term(text, sig)
    except (TermSyntaxError, ArityError) as exc:
        raise NarrationError(str(exc), lineno) from exc
    if variables(t):
        raise NarrationError("narration terms must be ground; %s is reserved" % variables(t)[0], lineno)
    return t


def parse_narration(text: str, theories: TheoryStore, allow_empty: bool = False) -> Narration:
    name = theory_name = None
    system = None
    lines: list[Line] = []
    knowledge: dict[Term, list[Term]] = {}
    knows_lineno: dict[Term, int] = {}
    ended = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ended:
            raise NarrationError("content after 'end'", lineno)
        if line.startswith("protocol ") or line == "protocol":
            if name is not None:
                raise NarrationError("duplicate protocol header", lineno)
            name = line[len("protocol"):].strip()
            if not re.fullmatch(_IDENT, name):
                raise NarrationError("bad protocol name", lineno)
            continue
        if name is None:
            raise NarrationError("expected 'protocol <name>' first", lineno)
        if line.startswith("theory ") or line == "theory":
            theory_name = line[len("theory"):].strip()
            if theory_name not in theories:
                raise NarrationError("unknown theory %r" % theory_name, lineno)
            system = theories[theory_name]
            continue
        if line == "end":
            ended = True
            continue
        if system is None:
            raise NarrationError("expected 'theory <name>' before message lines", lineno)
        m = _LINE.match(line)
        if m:
            sender = _ground(m.group(1), system.sig, lineno)
            receiver = _ground(m.group(2), system.sig, lineno)
            if sender == receiver:
                raise NarrationError("self-communication: %s -> %s" % (sender, receiver), lineno)
            message = _ground(m.group(3), system.sig, lineno)
            check = getattr(system, "check_message", None)
            if check is not None:
                try:
                    check(message)
                except ValueError as exc:
                    raise NarrationError("mixed term rejected: %s" % exc, lineno) from exc
            lines.append(Line(sender, receiver, message, lineno))
            continue
        m = _KNOWS.match(line)
        if m:
            agent = _ground(m.group(1), system.sig, lineno)
            if agent in knowledge:
                raise NarrationError("duplicate knows line for %s" % agent, lineno)
            items = m.group(2)
            terms = [] if not items or not items.strip() else [_ground(p, system.sig, lineno) for p in _split_args(items)]
            knowledge[agent] = terms
            knows_lineno[agent] = lineno
            continue
        raise NarrationError("syntax error: %r" % line, lineno)
    if name is None:
        raise NarrationError("empty narration")
    if not ended:
        raise NarrationError("missing 'end'")
    if theory_name is None:
        raise NarrationError("missing 'theory <name>'")
    if not lines and not allow_empty:
        raise NarrationError("no message lines")
    for line in lines:
        for agent in (line.sender, line.receiver):
            if agent not in knowledge:
                raise NarrationError("agent %s has no knows line" % agent, line.lineno)
    return Narration(name, theory_name, lines, knowledge, knows_lineno, system.sig)


def format_narration(n: Narration) -> str:
    out = ["protocol %s" % n.name, "theory %s" % n.theory_name]
    out.extend(str(line) for line in n.lines)
    for agent, terms in n.knowledge.items():
        out.append(("%s knows %s" % (agent, ", ".join(str(t) for t in terms))).rstrip())
    out.append("end")
    return "\n".join(out) + "\n"


def validate_narration(n: Narration, theories: TheoryStore | None = None) -> list[Diagnostic]:
    """Unique-origination errors and unused-knowledge warnings, sorted by line."""
    from .roles import first_senders

    diags: list[Diagnostic] = []
    origins = first_senders(n)
    for const, claims in origins.items():
        if len(claims) > 1:
            lineno = sorted(claims.values())[1]
            agents = ", ".join(str(a) for a in claims)
            diags.append(Diagnostic(lineno, "error", "shared nonce %s (originated by %s)" % (const, agents)))
    used: set[Term] = set()
    for line in n.lines:
        used |= subterms(line.message)
        used.add(line.sender)
        used.add(line.receiver)
    for agent, terms in n.knowledge.items():
        for t in terms:
            leaves = {u for u in subterms(t) if not u.args}
            if not leaves & used:
                diags.append(Diagnostic(n.knows_lineno.get(agent, 0), "warning", "%s knows %s but it is never used" % (agent, t)))
    return sorted(diags)
