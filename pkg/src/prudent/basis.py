"""Finite equality basis of a positive strand and the derived check systems.

The basis collects three kinds of context pairs over the saturated
knowledge, each checked to hold on the source strand:

* ``x_i`` against the stored recipe of message i, when they differ;
* ``f(recipe(N1), ..., recipe(Nk))`` against the recipe of ``f(N1..Nk)``
  for every known composite with known arguments;
* every root redex assembled from known leaves (see
  :func:`prudent.deduction.rule_instances`) against a recipe of its reduct.

Any strand satisfying these pairs satisfies every equality between contexts
that holds on the source strand.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .deduction import rule_instances, saturate, strand_messages
from .terms import Term, hole, hole_index, instantiate_context, rename_holes, size, variables

__all__ = [
    "ContextPair",
    "Equation",
    "canonical_pair",
    "equality_basis",
    "unification_system_of",
    "refines",
    "holds",
]


@dataclass(frozen=True, order=True)
class ContextPair:
    left: Term
    right: Term

    def __str__(self) -> str:
        return "%s = %s" % (self.left, self.right)


@dataclass(frozen=True)
class Equation:
    lhs: Term
    rhs: Term

    def __str__(self) -> str:
        return "%s =? %s" % (self.lhs, self.rhs)


def _orient_key(t: Term):
    return (-size(t), str(t))


def canonical_pair(a: Term, b: Term) -> ContextPair | None:
    """Larger side on the left (ties: lexicographically smaller left); None if reflexive."""
    if a == b:
        return None
    if _orient_key(b) < _orient_key(a):
        a, b = b, a
    return ContextPair(a, b)


def holds(pair, s: Sequence, d) -> bool:
    msgs = strand_messages(s)
    left, right = (pair.left, pair.right) if isinstance(pair, ContextPair) else pair
    return d.equal_mod(instantiate_context(left, msgs), instantiate_context(right, msgs))


def _dedupe(pairs: Iterable[tuple[Term, Term]]) -> list[ContextPair]:
    seen: dict[ContextPair, None] = {}
    for a, b in pairs:
        p = canonical_pair(a, b)
        if p is not None:
            seen.setdefault(p, None)
    return list(seen)


def equality_basis(s: Sequence, d, bound: int | None = None) -> list[ContextPair]:
    msgs = strand_messages(s)
    if getattr(d, "kind", None) == "xor":
        return _dedupe(d.basis(msgs))
    kb = saturate(msgs, d, bound)
    candidates: list[tuple[Term, Term]] = []
    for i, m in enumerate(kb.source, 1):
        candidates.append((hole(i), kb.sat[m]))
    for value, recipe in kb.items():
        if value.is_var or not d.sig.is_public(value.name):
            continue
        parts = [kb.sat.get(a) for a in value.args]
        if all(p is not None for p in parts):
            candidates.append((Term(value.name, parts), recipe))
    for inst in rule_instances(kb, free_rhs=True):
        if inst.right is not None:
            candidates.append((inst.left, inst.right))
    out = []
    for pair in _dedupe(candidates):
        if holds(pair, msgs, d):
            out.append(pair)
    return out


def unification_system_of(s: Sequence, d, bound: int | None = None) -> list[Equation]:
    """Basis pairs of ``s`` as equations over frame variables ``v_i``."""
    return [Equation(rename_holes(p.left), rename_holes(p.right)) for p in equality_basis(s, d, bound)]


def refines(candidate: Sequence, basis: Iterable, d) -> bool:
    msgs = strand_messages(candidate)
    basis = list(basis)
    for pair in basis:
        left, right = (pair.left, pair.right) if isinstance(pair, ContextPair) else pair
        for t in variables(left) + variables(right):
            i = hole_index(t)
            if i is None or i > len(msgs):
                raise ValueError("basis refers to %s but the candidate has %d messages" % (t, len(msgs)))
    return all(holds(pair, msgs, d) for pair in basis)
