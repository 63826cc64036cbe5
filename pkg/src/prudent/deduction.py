"""Saturated knowledge and reachability for subterm-convergent theories.

``saturate`` closes the (normalised) messages of a positive strand under

1. the messages themselves (recipe ``x_i``),
2. public composition of known terms that are subterms of the strand,
3. one rewrite step at the root of a small public context whose leaves are
   known terms, when the result is a subterm of the strand (or a ground
   right-hand side that cannot simply be composed).

Rule 3 is found by matching rule left-hand sides against the knowledge
rather than by enumerating contexts blindly; ``bound`` caps the size of the
context skeleton (known leaves counted once each).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .rewriting import DeductionSystem, RewriteRule, match
from .terms import (
    Step,
    Term,
    apply_substitution,
    dag_size,
    hole,
    subterms,
    term_key,
    variables,
)

__all__ = [
    "KnowledgeBase",
    "RuleInstance",
    "saturate",
    "recipe_of",
    "reach",
    "compose",
    "rule_instances",
    "strand_messages",
]


def strand_messages(s: Sequence) -> list[Term]:
    return [m.message if isinstance(m, Step) else m for m in s]


@dataclass
class KnowledgeBase:
    source: tuple[Term, ...]
    sat: dict[Term, Term]  # element -> recipe, in insertion order
    bound: int
    system: DeductionSystem = field(repr=False)
    _composed: dict[Term, Term | None] = field(default_factory=dict, repr=False)

    def __contains__(self, t: Term) -> bool:
        return t in self.sat

    def items(self) -> list[tuple[Term, Term]]:
        return list(self.sat.items())

    def compose(self, t: Term) -> Term | None:
        """Recipe for ``t`` (a normal form): stored recipe, else public composition."""
        if t in self._composed:
            return self._composed[t]
        recipe = self.sat.get(t)
        if recipe is None and not t.is_var and self.system.sig.is_public(t.name):
            parts = [self.compose(a) for a in t.args]
            if all(p is not None for p in parts):
                recipe = Term(t.name, parts)
        self._composed[t] = recipe
        return recipe


def compose(kb: KnowledgeBase, t: Term) -> Term | None:
    return kb.compose(t)


@dataclass(frozen=True)
class RuleInstance:
    """A root redex ``lhs theta`` assembled from known terms.

    ``left`` is its recipe, ``value`` the rewritten term, ``right`` a recipe
    for the value (when one exists) and ``complete`` says whether every rule
    variable was pinned down by a known term (otherwise a default filler
    stands in for the free ones).
    """

    rule: RewriteRule
    left: Term
    value: Term
    right: Term | None
    complete: bool
    skeleton_size: int


_LEAF = "\x00leaf%d"


def _embed(p: Term, theta: dict, kb: KnowledgeBase, known: list[tuple[Term, Term]], leaves: dict):
    """Ways to realise pattern ``p``: yield (theta, recipe-with-vars, skeleton, matched)."""
    if p.is_var:
        yield theta, p, p, 0
        return
    for value, recipe in known:
        if value.name != p.name:
            continue
        th = match(p, value, theta)
        if th is not None:
            leaf = leaves.setdefault(value, Term(_LEAF % len(leaves)))
            yield th, recipe, leaf, 1
    if kb.system.sig.is_public(p.name):
        for th, recipes, skels, matched in _embed_args(p.args, theta, kb, known, leaves):
            yield th, Term(p.name, recipes), Term(p.name, skels), matched


def _embed_args(args, theta, kb, known, leaves):
    if not args:
        yield theta, [], [], 0
        return
    for th, r, sk, m in _embed(args[0], theta, kb, known, leaves):
        for th2, rs, sks, m2 in _embed_args(args[1:], th, kb, known, leaves):
            yield th2, [r] + rs, [sk] + sks, m + m2


def rule_instances(kb: KnowledgeBase, bound: int | None = None, free_rhs: bool = False) -> Iterator[RuleInstance]:
    """Root redexes built from the knowledge with at least one known leaf.

    Instances where no leaf is a known term are identities of the theory and
    are skipped.  Rule variables not fixed by a known leaf are filled with the
    first known term; when such a variable also occurs on the right-hand
    side the instance is only produced if ``free_rhs`` is set.
    """
    bound = kb.bound if bound is None else bound
    known = kb.items()
    if not known:
        return
    d = kb.system
    default_value, default_recipe = known[0]
    for rule in d.rules:
        if not d.sig.is_public(rule.lhs.name):
            continue
        rhs_vars = set(variables(rule.rhs))
        rule_vars = variables(rule.lhs)
        leaves: dict = {}
        for theta, recipes, skels, matched in _embed_args(rule.lhs.args, {}, kb, known, leaves):
            if matched == 0:
                continue
            skeleton = Term(rule.lhs.name, skels)
            if dag_size(skeleton) > bound:
                continue
            left = Term(rule.lhs.name, recipes)
            values: dict[Term, Term] = dict(theta)
            fillers: dict[Term, Term] = {}
            complete = True
            # only variables at constructed positions need a recipe
            placed = set(variables(left))
            for v in (v for v in rule_vars if v in placed):
                if v in theta:
                    r = kb.compose(theta[v])
                    if r is None:
                        break
                    fillers[v] = r
                else:
                    complete = False
                    if v in rhs_vars and not free_rhs:
                        break
                    values[v], fillers[v] = default_value, default_recipe
            else:
                left = apply_substitution(left, fillers)
                value = apply_substitution(rule.rhs, values)
                yield RuleInstance(rule, left, value, kb.compose(value), complete, dag_size(skeleton))


def saturate(s: Sequence, d: DeductionSystem, bound: int | None = None) -> KnowledgeBase:
    if bound is None:
        bound = d.default_bound()
    msgs = tuple(d.normalize(m) for m in strand_messages(s))
    kb = KnowledgeBase(msgs, {}, bound, d)
    for i, m in enumerate(msgs, 1):
        kb.sat.setdefault(m, hole(i))
    st: set[Term] = set()
    for m in msgs:
        st |= subterms(m)
    ordered_st = sorted(st, key=term_key)
    ground_rhs = {r.rhs for r in d.rules if not variables(r.rhs)}

    def add(t: Term, recipe: Term) -> bool:
        if t in kb.sat:
            return False
        kb.sat[t] = recipe
        kb._composed.clear()
        return True

    changed = True
    while changed:
        changed = False
        for t in ordered_st:
            if t in kb.sat or t.is_var or not d.sig.is_public(t.name):
                continue
            parts = [kb.sat.get(a) for a in t.args]
            if all(p is not None for p in parts):
                changed |= add(t, Term(t.name, parts))
        if not msgs:
            break
        for inst in list(rule_instances(kb)):
            value = inst.value
            if value in kb.sat:
                continue
            if value in st:
                changed |= add(value, inst.left)
            elif value in ground_rhs and kb.compose(value) is None:
                changed |= add(value, inst.left)
    kb._composed.clear()
    return kb


def recipe_of(kb: KnowledgeBase, m: Term) -> Term | None:
    return kb.sat.get(kb.system.normalize(m))


def reach(s: Sequence, t: Term, d, bound: int | None = None) -> Term | None:
    """A context C with C applied to ``s`` equal to ``t`` modulo the theory, or None."""
    if getattr(d, "kind", None) == "xor":
        return d.reach(strand_messages(s), t)
    kb = saturate(s, d, bound)
    return kb.compose(d.normalize(t))
