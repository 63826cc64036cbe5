"""Convergent rewriting modulo a subterm-convergent theory.

A :class:`DeductionSystem` bundles a signature (with public/private symbols)
and a list of oriented rules.  :func:`validate_subterm_convergent` checks the
shape condition on every rule and joinability of every critical pair.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterator, Mapping

from .terms import (
    ArityError,
    Signature,
    Term,
    TermSyntaxError,
    apply_substitution,
    dag_size,
    parse_term,
    subterms,
    var,
    variables,
)

__all__ = [
    "RewriteRule",
    "DeductionSystem",
    "ValidationReport",
    "RuleCheck",
    "TheoryParseError",
    "match",
    "unify",
    "normalize",
    "equal_mod",
    "critical_pairs",
    "validate_subterm_convergent",
    "parse_theory",
    "load_theory",
    "dolev_yao",
    "with_message_layer",
    "MESSAGE_RULES",
]


@dataclass(frozen=True)
class RewriteRule:
    lhs: Term
    rhs: Term

    def __str__(self) -> str:
        return "%s -> %s" % (self.lhs, self.rhs)


def match(pattern: Term, t: Term, theta: Mapping[Term, Term] | None = None) -> dict[Term, Term] | None:
    """Syntactic matching of ``pattern`` onto ``t`` extending ``theta``."""
    sigma = dict(theta) if theta else {}
    stack = [(pattern, t)]
    while stack:
        p, u = stack.pop()
        if p.is_var:
            bound = sigma.get(p)
            if bound is None:
                sigma[p] = u
            elif bound != u:
                return None
            continue
        if u.is_var or p.name != u.name or len(p.args) != len(u.args):
            return None
        stack.extend(zip(p.args, u.args))
    return sigma


def _resolve(t: Term, sigma: dict[Term, Term]) -> Term:
    while t.is_var and t in sigma:
        t = sigma[t]
    return t


def _occurs(v: Term, t: Term, sigma: dict[Term, Term]) -> bool:
    t = _resolve(t, sigma)
    if t == v:
        return True
    return any(_occurs(v, a, sigma) for a in t.args)


def _fully(t: Term, sigma: dict[Term, Term]) -> Term:
    t = _resolve(t, sigma)
    if not t.args:
        return t
    return Term(t.name, [_fully(a, sigma) for a in t.args])


def unify(s: Term, t: Term) -> dict[Term, Term] | None:
    """Syntactic most general unifier (used for critical pairs only)."""
    sigma: dict[Term, Term] = {}
    stack = [(s, t)]
    while stack:
        a, b = stack.pop()
        a, b = _resolve(a, sigma), _resolve(b, sigma)
        if a == b:
            continue
        if a.is_var:
            if _occurs(a, b, sigma):
                return None
            sigma[a] = b
        elif b.is_var:
            if _occurs(b, a, sigma):
                return None
            sigma[b] = a
        elif a.name != b.name or len(a.args) != len(b.args):
            return None
        else:
            stack.extend(zip(a.args, b.args))
    return {v: _fully(v, sigma) for v in sigma}


class DeductionSystem:
    """Signature, public symbols and convergent rules (E, F, F_p)."""

    kind = "rewrite"

    def __init__(self, name: str, sig: Signature, rules: list[RewriteRule] | tuple = ()):
        self.name = name
        self.sig = sig
        self.rules = list(rules)
        self._by_head: dict[str, list[RewriteRule]] = {}
        for rule in self.rules:
            self._by_head.setdefault(rule.lhs.name, []).append(rule)
        self._nf: dict[Term, Term] = {}

    def __repr__(self) -> str:
        return "DeductionSystem(%r, %d rules)" % (self.name, len(self.rules))

    def default_bound(self) -> int:
        return max((dag_size(r.lhs) for r in self.rules), default=1)

    def step_root(self, t: Term) -> Term | None:
        for rule in self._by_head.get(t.name, ()):
            sigma = match(rule.lhs, t)
            if sigma is not None:
                return apply_substitution(rule.rhs, sigma)
        return None

    def normalize(self, t: Term) -> Term:
        """Innermost normal form (memoised)."""
        cached = self._nf.get(t)
        if cached is not None:
            return cached
        if t.args:
            args = tuple(self.normalize(a) for a in t.args)
            u = t if all(a is b for a, b in zip(args, t.args)) else Term(t.name, args)
            reduct = self.step_root(u)
            result = u if reduct is None else self.normalize(reduct)
        else:
            reduct = self.step_root(t)
            result = t if reduct is None else self.normalize(reduct)
        if len(self._nf) > 500_000:
            self._nf.clear()
        self._nf[t] = result
        return result

    def equal_mod(self, t: Term, u: Term) -> bool:
        return self.normalize(t) == self.normalize(u)

    def parse(self, text: str, variables=()) -> Term:
        return parse_term(text, self.sig, variables)


def normalize(t: Term, d: DeductionSystem) -> Term:
    return d.normalize(t)


def equal_mod(t: Term, u: Term, d: DeductionSystem) -> bool:
    return d.equal_mod(t, u)


# --------------------------------------------------------------------------
# validation


@dataclass
class RuleCheck:
    rule: RewriteRule
    ok: bool
    problems: list[str] = field(default_factory=list)


@dataclass
class ValidationReport:
    theory: str
    rules: list[RuleCheck]
    critical_pairs: list[tuple[Term, Term, bool]]
    problems: list[str]

    @property
    def accepted(self) -> bool:
        return not self.problems and all(r.ok for r in self.rules) and all(j for _, _, j in self.critical_pairs)

    def format(self) -> str:
        lines = ["theory %s" % self.theory]
        for rc in self.rules:
            status = "ok" if rc.ok else "FAIL"
            lines.append("  rule %s: %s" % (rc.rule, status))
            lines.extend("    - %s" % p for p in rc.problems)
        for left, right, joinable in self.critical_pairs:
            lines.append("  critical pair <%s, %s>: %s" % (left, right, "joinable" if joinable else "NOT joinable"))
        lines.extend("  %s" % p for p in self.problems)
        lines.append("verdict: %s" % ("accepted" if self.accepted else "rejected"))
        return "\n".join(lines)


def _positions(t: Term, path: tuple = ()) -> Iterator[tuple[tuple, Term]]:
    yield path, t
    for i, a in enumerate(t.args):
        yield from _positions(a, path + (i,))


def _replace_at(t: Term, path: tuple, new: Term) -> Term:
    if not path:
        return new
    i = path[0]
    args = list(t.args)
    args[i] = _replace_at(args[i], path[1:], new)
    return Term(t.name, args)


def _rename(rule: RewriteRule, suffix: str) -> RewriteRule:
    sigma = {v: var(v.name + suffix) for v in variables(rule.lhs)}
    return RewriteRule(apply_substitution(rule.lhs, sigma), apply_substitution(rule.rhs, sigma))


def critical_pairs(rules: list[RewriteRule]) -> list[tuple[Term, Term]]:
    """All critical pairs <r1 sigma, l1[r2]_p sigma> between (renamed) rules."""
    out = []
    for (i, r1), (j, r2) in itertools.product(enumerate(rules), repeat=2):
        a = _rename(r1, "'1")
        b = _rename(r2, "'2")
        for path, sub in _positions(a.lhs):
            if sub.is_var or (i == j and not path):
                continue
            sigma = unify(sub, b.lhs)
            if sigma is None:
                continue
            left = apply_substitution(a.rhs, sigma)
            right = apply_substitution(_replace_at(a.lhs, path, b.rhs), sigma)
            out.append((left, right))
    return out


def _is_proper_subterm(small: Term, big: Term) -> bool:
    return small != big and small in subterms(big)


def validate_subterm_convergent(d: DeductionSystem) -> ValidationReport:
    checks = []
    problems = []
    for rule in d.rules:
        rc = RuleCheck(rule, True)
        if rule.lhs.is_var:
            rc.problems.append("left-hand side is a variable")
        if not set(variables(rule.rhs)) <= set(variables(rule.lhs)):
            rc.problems.append("right-hand side has variables not in the left-hand side")
        for t in subterms(rule.lhs) | subterms(rule.rhs):
            if not t.is_var and t.name not in d.sig:
                rc.problems.append("undeclared symbol %s" % t.name)
            elif not t.is_var and d.sig.arity(t.name) != len(t.args):
                rc.problems.append("arity mismatch for %s" % t.name)
        subterm_ok = _is_proper_subterm(rule.rhs, rule.lhs)
        ground_ok = not variables(rule.rhs)
        if not (subterm_ok or ground_ok):
            rc.problems.append("right-hand side is neither a proper subterm of the left-hand side nor ground")
        rc.ok = not rc.problems
        checks.append(rc)
    pairs: list[tuple[Term, Term, bool]] = []
    if all(rc.ok for rc in checks):
        for rule in d.rules:
            if not variables(rule.rhs) and d.normalize(rule.rhs) != rule.rhs:
                problems.append("ground right-hand side of %s is not in normal form" % rule)
        if not problems:
            for left, right in critical_pairs(d.rules):
                pairs.append((left, right, d.normalize(left) == d.normalize(right)))
    else:
        problems.append("critical pairs not checked: some rules are not subterm-convergent")
    return ValidationReport(d.name, checks, pairs, problems)


# --------------------------------------------------------------------------
# theory files


class TheoryParseError(ValueError):
    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        super().__init__("line %d: %s" % (lineno, message) if lineno else message)


_DECL = re.compile(r"^([A-Za-z0-9][A-Za-z0-9_]*)/(\d+)$")


def parse_theory(text: str) -> DeductionSystem:
    """Parse the line-oriented ``theory``/``public``/``private``/``vars``/``rule``/``end`` format."""
    name = None
    sig = Signature()
    rule_vars: set[str] = set()
    rules = []
    ended = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ended:
            raise TheoryParseError("content after 'end'", lineno)
        keyword, _, rest = line.partition(" ")
        rest = rest.strip()
        if keyword == "theory":
            if name is not None or not re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*", rest):
                raise TheoryParseError("bad theory header", lineno)
            name = rest
        elif name is None:
            raise TheoryParseError("expected 'theory <name>' first", lineno)
        elif keyword in ("public", "private"):
            for item in rest.split():
                m = _DECL.match(item)
                if not m:
                    raise TheoryParseError("bad symbol declaration %r" % item, lineno)
                try:
                    sig.declare(m.group(1), int(m.group(2)), keyword == "public")
                except ArityError as exc:
                    raise TheoryParseError(str(exc), lineno) from exc
        elif keyword == "vars":
            rule_vars.update(rest.split())
        elif keyword == "rule":
            lhs_text, arrow, rhs_text = rest.partition("->")
            if not arrow:
                raise TheoryParseError("rule without '->'", lineno)
            try:
                lhs = parse_term(lhs_text, sig, rule_vars, lenient=True)
                rhs = parse_term(rhs_text, sig, rule_vars, lenient=True)
            except (TermSyntaxError, ArityError) as exc:
                raise TheoryParseError(str(exc), lineno) from exc
            rules.append(RewriteRule(lhs, rhs))
        elif keyword == "end" and not rest:
            ended = True
        else:
            raise TheoryParseError("unknown directive %r" % keyword, lineno)
    if name is None:
        raise TheoryParseError("empty theory file")
    if not ended:
        raise TheoryParseError("missing 'end'")
    return DeductionSystem(name, sig, rules)


def load_theory(path) -> DeductionSystem:
    with open(path, encoding="utf-8") as fh:
        return parse_theory(fh.read())


_X, _Y = var("X"), var("Y")
MESSAGE_RULES = (
    RewriteRule(Term("partner", [Term("msg", [_X, _Y])]), _X),
    RewriteRule(Term("payload", [Term("msg", [_X, _Y])]), _Y),
)


def with_message_layer(d: DeductionSystem) -> DeductionSystem:
    """Add public msg/2, partner/1, payload/1 and their two projection rules if absent."""
    if all(n in d.sig for n in ("msg", "partner", "payload")):
        return d
    sig = d.sig.copy()
    sig.declare("msg", 2, True)
    sig.declare("partner", 1, True)
    sig.declare("payload", 1, True)
    return DeductionSystem(d.name, sig, list(d.rules) + list(MESSAGE_RULES))


def dolev_yao() -> DeductionSystem:
    text = resources.files("prudent.data").joinpath("dolev_yao.thy").read_text(encoding="utf-8")
    return parse_theory(text)
