"""Brute-force ground truth: context enumeration, reachability and equal pairs.

Everything here is exponential and only meant for small budgets.  Contexts
are produced by dag size and then by their printed form; a context is
dropped when its normal form (holes read as variables) was already produced,
so E-equal duplicates do not swamp the stream.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .basis import ContextPair, canonical_pair
from .deduction import strand_messages
from .roles import role_input
from .runtime import accepts
from .terms import Step, Term, apply_substitution, hole, instantiate_context, subterms

__all__ = [
    "EnumerationBudget",
    "enumerate_contexts",
    "brute_reach",
    "brute_pairs",
    "mutants",
    "AuditReport",
    "audit_role",
]


@dataclass(frozen=True)
class EnumerationBudget:
    max_dag_size: int = 6
    max_count: int = 200_000

    def __post_init__(self):
        if self.max_dag_size < 1 or self.max_count < 1:
            raise ValueError("budget bounds must be positive")


class _Pool:
    """Kept contexts grouped by dag size, with cached subterm sets."""

    def __init__(self):
        self.by_size: dict[int, list[Term]] = {}
        self.subs: dict[Term, frozenset] = {}
        self.sharing: dict[Term, list[Term]] = {}

    def add(self, k: int, contexts: list[Term]) -> None:
        self.by_size[k] = contexts
        for c in contexts:
            sub = frozenset().union(*(self.subs[a] for a in c.args)) | {c} if c.args else frozenset((c,))
            self.subs[c] = sub
            for st in sub:
                self.sharing.setdefault(st, []).append(c)

    def extensions(self, sym, k: int) -> Iterator[Term]:
        """Terms ``sym(args)`` over kept contexts whose dag size is exactly ``k``."""
        if sym.arity == 1:
            for c in self.by_size.get(k - 1, []):
                yield Term(sym.name, [c])
            return
        kept = [c for n in sorted(self.by_size) if n < k for c in self.by_size[n]]
        subs = self.subs
        if sym.arity == 2:
            for u in kept:
                su = subs[u]
                for v in self.by_size.get(k - 1 - len(su), []):
                    if len(su | subs[v]) == k - 1:
                        yield Term(sym.name, [u, v])
                # right arguments sharing structure with u
                near: dict[Term, None] = {}
                for st in su:
                    for v in self.sharing.get(st, ()):
                        near[v] = None
                for v in near:
                    sv = subs[v]
                    if len(su) + len(sv) > k - 1 and len(su | sv) == k - 1:
                        yield Term(sym.name, [u, v])
            return
        for args in itertools.product(kept, repeat=sym.arity):
            if len(frozenset().union(*(subs[a] for a in args))) == k - 1:
                yield Term(sym.name, list(args))


_STREAMS: dict = {}


def _stream(holes: int, budget: EnumerationBudget, d) -> list[Term]:
    key = (id(d), holes, budget.max_dag_size)
    hit = _STREAMS.get(key)
    if hit is not None and hit[0] is d:
        return hit[1]
    symbols = sorted((s for s in d.sig.public_symbols()), key=lambda s: s.name)
    pool = _Pool()
    seen: set[Term] = set()
    out: list[Term] = []
    for k in range(1, budget.max_dag_size + 1):
        if k == 1:
            candidates = [hole(i) for i in range(1, holes + 1)]
            candidates += [Term(s.name) for s in symbols if s.arity == 0]
        else:
            candidates = [t for s in symbols if 0 < s.arity for t in pool.extensions(s, k)]
        fresh: list[Term] = []
        for c in sorted(set(candidates), key=str):
            nf = d.normalize(c)
            if nf in seen:
                continue
            seen.add(nf)
            fresh.append(c)
        pool.add(k, fresh)
        out.extend(fresh)
        if len(out) >= budget.max_count:
            break
    if len(_STREAMS) > 32:
        _STREAMS.clear()
    _STREAMS[key] = (d, out)
    return out


def enumerate_contexts(holes: int, budget: EnumerationBudget, d) -> Iterator[Term]:
    return iter(_stream(holes, budget, d)[: budget.max_count])


def _values(contexts: Sequence[Term], msgs: Sequence[Term], d) -> Iterator[tuple[Term, Term]]:
    """(context, normalised value on ``msgs``), reusing the values of arguments."""
    vals: dict[Term, Term] = {}
    for c in contexts:
        if c.is_var:
            v = d.normalize(msgs[int(c.name[2:]) - 1])
        elif c.args:
            v = d.normalize(Term(c.name, [vals[a] for a in c.args]))
        else:
            v = d.normalize(c)
        vals[c] = v
        yield c, v


def brute_reach(s: Sequence, t: Term, budget: EnumerationBudget, d) -> Term | None:
    msgs = strand_messages(s)
    target = d.normalize(t)
    for c, value in _values(list(enumerate_contexts(len(msgs), budget, d)), msgs, d):
        if value == target:
            return c
    return None


def brute_pairs(s: Sequence, budget: EnumerationBudget, d) -> set[ContextPair]:
    """Pairs of enumerated contexts agreeing on ``s``.

    Each context is paired with the first context of the same value, which
    generates every agreeing pair within the budget by transitivity.
    """
    msgs = strand_messages(s)
    first: dict[Term, Term] = {}
    out: set[ContextPair] = set()
    for c, value in _values(list(enumerate_contexts(len(msgs), budget, d)), msgs, d):
        rep = first.setdefault(value, c)
        p = canonical_pair(rep, c)
        if p is not None:
            out.add(p)
    return out


def _positions(t: Term, path=()):
    yield path, t
    for i, a in enumerate(t.args):
        yield from _positions(a, path + (i,))


def _replace(t: Term, path, new: Term) -> Term:
    if not path:
        return new
    args = list(t.args)
    args[path[0]] = _replace(args[path[0]], path[1:], new)
    return Term(t.name, args)


def mutants(s: Sequence, rng: random.Random, pool: Sequence[Term] = (), fresh: Term = Term("zz_fresh")) -> Iterator[list[Term]]:
    """Endless stream of single-position mutations of ``s``.

    One subterm of one message is swapped for a different term drawn from
    ``pool``, the subterms of ``s`` and a fresh constant.
    """
    msgs = strand_messages(s)
    choices: dict[Term, None] = dict.fromkeys(pool)
    for m in msgs:
        choices.update(dict.fromkeys(sorted(subterms(m), key=str)))
    choices[fresh] = None
    replacements = list(choices)
    sites = [(i, path, u) for i, m in enumerate(msgs) for path, u in _positions(m)]
    while True:
        i, path, old = rng.choice(sites)
        new = rng.choice(replacements)
        if new == old:
            continue
        out = list(msgs)
        out[i] = _replace(out[i], path, new)
        yield out


@dataclass
class AuditReport:
    role: str
    oracle_pairs: int
    included: int
    sampled: int
    accepted: int
    breaking: int
    rejected_breaking: int
    violations: list[tuple[ContextPair, list[Term]]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def audit_role(frame, r, d, depth: int = 3, samples: int = 200, seed: int = 0,
               budget: EnumerationBudget | None = None) -> AuditReport:
    """Look for strands the frame accepts that break an oracle equality of input(r)."""
    inputs = strand_messages(role_input(r))
    budget = budget or EnumerationBudget(depth, 200_000)
    pairs = sorted(brute_pairs(inputs, budget, d), key=lambda p: (str(p.left), str(p.right)))
    # oracle pairs over input positions, read against frame positions
    positions = [step.index for step in frame.receives()]
    mapping = {hole(k): Term("v_%d" % idx, (), True) for k, idx in enumerate(positions, 1)}
    equations = {(eq.lhs, eq.rhs) for eq in frame.equations()}
    equations |= {(b, a) for a, b in equations}
    included = sum(
        1 for p in pairs
        if (apply_substitution(p.left, mapping), apply_substitution(p.right, mapping)) in equations
    )
    report = AuditReport(str(r.name), len(pairs), included, 0, 0, 0, 0)
    if not pairs:
        return report
    rng = random.Random(seed)
    stream = mutants(inputs, rng, pool=r.params)
    tried: set[tuple[Term, ...]] = set()
    attempts = 0
    while report.sampled < samples and attempts < samples * 20:
        attempts += 1
        cand = next(stream)
        key = tuple(cand)
        if key in tried:
            continue
        tried.add(key)
        report.sampled += 1
        broken = [p for p in pairs if not d.equal_mod(instantiate_context(p.left, cand), instantiate_context(p.right, cand))]
        ok = bool(accepts(frame, [Step("!", m) for m in cand], d))
        if broken:
            report.breaking += 1
            if not ok:
                report.rejected_breaking += 1
        if ok:
            report.accepted += 1
            for p in broken:
                report.violations.append((p, cand))
    return report
