"""Exclusive-or over free constants, handled as linear algebra over GF(2).

A term ``a (+) b (+) a`` is the bit vector with a 1 at every atom of odd
multiplicity.  Reachability is solvability of a linear system; the equality
basis is a basis of the nullspace of the message matrix.
"""

from __future__ import annotations

from collections import Counter
from typing import Iterable, Sequence

from .terms import Signature, Step, Term, hole, term_key

__all__ = [
    "XorTerm",
    "MixedTermError",
    "XorSystem",
    "ZERO",
    "xor_canonicalize",
    "xor_of",
    "to_term",
    "xor_sum",
    "xor_reach",
    "xor_basis",
    "solve",
    "nullspace",
]

ZERO = Term("0")
XorTerm = frozenset  # frozenset[Term] of atoms with odd multiplicity


class MixedTermError(ValueError):
    pass


def xor_canonicalize(atoms: Iterable[Term]) -> frozenset:
    """Keep the atoms of odd multiplicity; ``0`` entries are dropped."""
    counts = Counter(a for a in atoms if a != ZERO)
    return frozenset(a for a, n in counts.items() if n % 2)


def xor_of(t: Term) -> frozenset:
    """Read a term over {xor, 0} and free constants as a canonical XorTerm."""
    atoms: list[Term] = []
    stack = [t]
    while stack:
        u = stack.pop()
        if u.name == "xor" and len(u.args) == 2:
            stack.extend(u.args)
        elif u == ZERO:
            continue
        elif u.args or u.is_var:
            raise MixedTermError("%s is not a sum of free constants" % u)
        else:
            atoms.append(u)
    return xor_canonicalize(atoms)


def xor_sum(parts: Sequence[Term]) -> Term:
    """Right-nested xor of ``parts`` in the given order; ``0`` when empty."""
    if not parts:
        return ZERO
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Term("xor", [p, out])
    return out


def to_term(x: frozenset) -> Term:
    return xor_sum(sorted(x, key=term_key))


# --------------------------------------------------------------------------
# GF(2) elimination on int bitsets


def _index(vectors: Sequence[frozenset], extra: Iterable[frozenset] = ()) -> dict[Term, int]:
    atoms = set()
    for v in list(vectors) + list(extra):
        atoms |= v
    return {a: i for i, a in enumerate(sorted(atoms, key=term_key))}


def _bits(v: frozenset, index: dict[Term, int]) -> int:
    out = 0
    for a in v:
        out |= 1 << index[a]
    return out


class _Echelon:
    """Incremental row echelon form; each row remembers which inputs it combines."""

    def __init__(self):
        self.pivots: dict[int, tuple[int, int]] = {}  # pivot bit -> (row, combo)

    def reduce(self, row: int, combo: int) -> tuple[int, int]:
        while row:
            top = row.bit_length() - 1
            entry = self.pivots.get(top)
            if entry is None:
                break
            row ^= entry[0]
            combo ^= entry[1]
        return row, combo

    def insert(self, row: int, combo: int) -> int | None:
        """Add a row; returns the dependency combo if it reduced to zero."""
        row, combo = self.reduce(row, combo)
        if row == 0:
            return combo
        self.pivots[row.bit_length() - 1] = (row, combo)
        return None


def solve(columns: Sequence[frozenset], target: frozenset) -> list[int] | None:
    """Indices i (0-based) with sum of columns[i] == target, or None."""
    index = _index(columns, [target])
    ech = _Echelon()
    for i, col in enumerate(columns):
        ech.insert(_bits(col, index), 1 << i)
    rest, combo = ech.reduce(_bits(target, index), 0)
    if rest:
        return None
    return [i for i in range(len(columns)) if combo >> i & 1]


def nullspace(columns: Sequence[frozenset]) -> list[list[int]]:
    """A basis of {c : sum c_i columns[i] = 0}, each vector as its support (0-based)."""
    index = _index(columns)
    ech = _Echelon()
    out = []
    for i, col in enumerate(columns):
        dep = ech.insert(_bits(col, index), 1 << i)
        if dep is not None:
            out.append([j for j in range(len(columns)) if dep >> j & 1])
    return out


def _messages(s) -> list[frozenset]:
    out = []
    for m in s:
        m = m.message if isinstance(m, Step) else m
        out.append(m if isinstance(m, frozenset) else xor_of(m))
    return out


def xor_reach(s: Sequence, t) -> Term | None:
    """Context ``x_i (+) ...`` over the strand reaching ``t``, ``0`` for the empty sum, else None."""
    cols = _messages(s)
    target = t if isinstance(t, frozenset) else xor_of(t)
    support = solve(cols, target)
    if support is None:
        return None
    return xor_sum([hole(i + 1) for i in support])


def xor_basis(s: Sequence) -> list[tuple[Term, Term]]:
    """One pair (sum of holes, 0) per nullspace basis vector of the strand's columns."""
    cols = _messages(s)
    return [(xor_sum([hole(i + 1) for i in support]), ZERO) for support in nullspace(cols)]


# --------------------------------------------------------------------------
# theory object used by the compiler and runtime


class XorSystem:
    """Exclusive-or over free constants plus the msg/partner/payload envelope.

    Normal forms flatten ``xor``, cancel pairs, drop ``0`` and sort the
    remaining summands; ``partner``/``payload`` project ``msg``.
    """

    kind = "xor"

    def __init__(self, name: str = "xor"):
        self.name = name
        self.sig = Signature.of(public={"xor": 2, "0": 0, "msg": 2, "partner": 1, "payload": 1})
        self.rules: list = []
        self._nf: dict[Term, Term] = {}

    def __repr__(self) -> str:
        return "XorSystem(%r)" % self.name

    def default_bound(self) -> int:
        return 1

    def normalize(self, t: Term) -> Term:
        cached = self._nf.get(t)
        if cached is not None:
            return cached
        if not t.args:
            result = t
        else:
            args = [self.normalize(a) for a in t.args]
            if t.name == "xor":
                summands: list[Term] = []
                for a in args:
                    while a.name == "xor" and len(a.args) == 2:
                        summands.append(a.args[0])
                        a = a.args[1]
                    summands.append(a)
                counts = Counter(u for u in summands if u != ZERO)
                kept = sorted((u for u, n in counts.items() if n % 2), key=term_key)
                result = xor_sum(kept)
            elif t.name in ("partner", "payload") and args[0].name == "msg" and len(args[0].args) == 2:
                result = args[0].args[0 if t.name == "partner" else 1]
            else:
                result = Term(t.name, args)
        if len(self._nf) > 500_000:
            self._nf.clear()
        self._nf[t] = result
        return result

    def equal_mod(self, t: Term, u: Term) -> bool:
        return self.normalize(t) == self.normalize(u)

    def check_message(self, t: Term) -> None:
        """Narration messages must be sums of free constants."""
        xor_of(t)

    # A strand for this theory holds plain sums and msg(agent, sum) envelopes.
    # Each message contributes linear "components" addressed by small contexts.
    def components(self, s: Sequence[Term]) -> list[tuple[Term, frozenset]]:
        out = []
        for i, m in enumerate(s, 1):
            m = self.normalize(m)
            x = hole(i)
            if m.name == "msg" and len(m.args) == 2:
                out.append((Term("partner", [x]), xor_of(m.args[0])))
                out.append((Term("payload", [x]), xor_of(m.args[1])))
            else:
                out.append((x, xor_of(m)))
        return out

    def reach(self, s: Sequence[Term], t: Term) -> Term | None:
        t = self.normalize(t)
        if t.name == "msg" and len(t.args) == 2:
            left = self.reach(s, t.args[0])
            right = self.reach(s, t.args[1])
            if left is None or right is None:
                return None
            return Term("msg", [left, right])
        try:
            target = xor_of(t)
        except MixedTermError:
            return None
        comps = self.components(s)
        support = solve([v for _, v in comps], target)
        if support is None:
            return None
        return xor_sum([comps[i][0] for i in support])

    def basis(self, s: Sequence[Term]) -> list[tuple[Term, Term]]:
        comps = self.components(s)
        pairs = []
        for i, m in enumerate(s, 1):
            m = self.normalize(m)
            if m.name == "msg" and len(m.args) == 2:
                x = hole(i)
                pairs.append((Term("msg", [Term("partner", [x]), Term("payload", [x])]), x))
        for support in nullspace([v for _, v in comps]):
            pairs.append((xor_sum([comps[j][0] for j in support]), ZERO))
        return pairs
