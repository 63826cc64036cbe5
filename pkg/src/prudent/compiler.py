"""Compile role specifications into prudent active frames."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .basis import Equation, unification_system_of
from .deduction import reach
from .roles import RoleSpec
from .terms import Term, rename_holes

__all__ = [
    "SendStep",
    "ReceiveStep",
    "ActiveFrame",
    "NotExecutable",
    "Executability",
    "compile_role",
    "executability_check",
    "alias_names",
    "EMIT_MODES",
]

EMIT_MODES = ("delta", "full", "none")


@dataclass(frozen=True)
class SendStep:
    index: int
    recipe: Term
    alias: str = ""
    ideal: Term | None = None

    polarity = "!"


@dataclass(frozen=True)
class ReceiveStep:
    index: int
    checks: tuple[Equation, ...] = ()
    alias: str = ""
    ideal: Term | None = None

    polarity = "?"


Step = Union[SendStep, ReceiveStep]


@dataclass(frozen=True)
class ActiveFrame:
    role: str
    steps: tuple[Step, ...]
    theory: str = ""
    emit: str = "delta"
    aliases: dict[str, str] = field(default_factory=dict, compare=False, hash=False)

    def receives(self) -> list[ReceiveStep]:
        return [s for s in self.steps if isinstance(s, ReceiveStep)]

    def sends(self) -> list[SendStep]:
        return [s for s in self.steps if isinstance(s, SendStep)]

    def equations(self) -> list[Equation]:
        return [eq for s in self.receives() for eq in s.checks]

    def with_checks_stripped(self) -> "ActiveFrame":
        steps = tuple(ReceiveStep(s.index, (), s.alias, s.ideal) if isinstance(s, ReceiveStep) else s for s in self.steps)
        return ActiveFrame(self.role, steps, self.theory, "none", self.aliases)


class NotExecutable(Exception):
    def __init__(self, role, index: int, message: Term):
        self.role = role
        self.index = index
        self.message = message
        super().__init__("role %s cannot produce step %d: %s is not reachable from its prefix" % (role, index, message))


@dataclass
class Executability:
    executable: bool
    witnesses: list[Term]
    failed_step: int | None = None


def _label(t: Term) -> str:
    if not t.args:
        return t.name
    return t.name + "".join(_label(a) for a in t.args)


def alias_names(r: RoleSpec) -> dict[str, str]:
    """Display names for frame variables: v_Na, v_invKA, v_r, v_msg1, ..."""
    out: dict[str, str] = {}
    used: set[str] = set()
    received = sent = 0
    for i, step in enumerate(r.strand, 1):
        m = step.message
        if step.polarity == "!":
            sent += 1
            base = "v_msg%d" % sent
        elif m.name == "msg" and len(m.args) == 2:
            received += 1
            base = "v_r" if received == 1 else "v_r%d" % received
        else:
            base = "v_" + _label(m)
        name = base
        if name in used:
            name = "%s_%d" % (base, i)
        used.add(name)
        out["v_%d" % i] = name
    return out


def executability_check(r: RoleSpec, d, bound: int | None = None) -> Executability:
    msgs = r.messages()
    witnesses = []
    for i, step in enumerate(r.strand, 1):
        if step.polarity != "!":
            continue
        recipe = reach(msgs[: i - 1], step.message, d, bound)
        if recipe is None:
            return Executability(False, witnesses, i)
        witnesses.append(recipe)
    return Executability(True, witnesses)


def compile_role(r: RoleSpec, d, bound: int | None = None, emit: str = "delta") -> ActiveFrame:
    """Send steps get a reachability recipe over their prefix; receive steps
    get the equality basis of the prefix ending at them as checks."""
    if emit not in EMIT_MODES:
        raise ValueError("emit mode must be one of %s" % (EMIT_MODES,))
    msgs = r.messages()
    aliases = alias_names(r)
    emitted: set[Equation] = set()
    steps: list[Step] = []
    for i, step in enumerate(r.strand, 1):
        alias = aliases["v_%d" % i]
        if step.polarity == "!":
            recipe = reach(msgs[: i - 1], step.message, d, bound)
            if recipe is None:
                raise NotExecutable(r.name, i, step.message)
            steps.append(SendStep(i, rename_holes(recipe), alias, step.message))
            continue
        if emit == "none":
            checks: list[Equation] = []
        else:
            checks = unification_system_of(msgs[:i], d, bound)
            if emit == "delta":
                checks = [eq for eq in checks if eq not in emitted]
            emitted.update(checks)
        steps.append(ReceiveStep(i, tuple(checks), alias, step.message))
    return ActiveFrame(str(r.name), tuple(steps), getattr(d, "name", ""), emit, aliases)
