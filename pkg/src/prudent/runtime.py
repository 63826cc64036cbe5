"""Evaluating active frames, acceptance, and an honest-run simulator."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .basis import Equation
from .compiler import ActiveFrame, ReceiveStep, SendStep
from .deduction import strand_messages
from .narration import Narration
from .roles import RoleSpec, extract_roles, role_input
from .terms import Step, Term, apply_substitution, constants, frame_var

__all__ = [
    "LengthMismatch",
    "Acceptance",
    "Event",
    "Transcript",
    "Mutation",
    "evaluate",
    "accepts",
    "verify_implementation",
    "simulate",
]


class LengthMismatch(ValueError):
    pass


def _bind(f: ActiveFrame, s: Sequence, d) -> dict[Term, Term]:
    inputs = strand_messages(s)
    receives = f.receives()
    if len(inputs) != len(receives):
        raise LengthMismatch("frame %s expects %d inputs, got %d" % (f.role, len(receives), len(inputs)))
    env: dict[Term, Term] = {}
    it = iter(inputs)
    for step in f.steps:
        v = frame_var(step.index)
        if isinstance(step, SendStep):
            env[v] = d.normalize(apply_substitution(step.recipe, env))
        else:
            env[v] = d.normalize(next(it))
    return env


def evaluate(f: ActiveFrame, s: Sequence, d) -> list[Step]:
    env = _bind(f, s, d)
    return [Step(step.polarity, env[frame_var(step.index)]) for step in f.steps]


@dataclass
class Acceptance:
    accepted: bool
    failed: list[Equation] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.accepted


def _failed(checks, env, d) -> list[Equation]:
    return [eq for eq in checks if not d.equal_mod(apply_substitution(eq.lhs, env), apply_substitution(eq.rhs, env))]


def accepts(f: ActiveFrame, s: Sequence, d) -> Acceptance:
    env = _bind(f, s, d)
    failed = []
    for step in f.receives():
        failed += _failed(step.checks, env, d)
    return Acceptance(not failed, failed)


def verify_implementation(f: ActiveFrame, r: RoleSpec, d) -> bool:
    inputs = role_input(r)
    try:
        if not accepts(f, inputs, d):
            return False
        out = evaluate(f, inputs, d)
    except LengthMismatch:
        return False
    if len(out) != len(r.strand):
        return False
    return all(a.polarity == b.polarity and d.equal_mod(a.message, b.message) for a, b in zip(out, r.strand))


@dataclass(frozen=True)
class Event:
    role: str
    step: int
    polarity: str
    term: Term | None
    accepted: bool = True
    failed: tuple[Equation, ...] = ()
    kind: str = "recv"  # init | send | recv | deadlock
    note: str = ""


@dataclass
class Transcript:
    protocol: str
    events: list[Event]
    complete: bool
    delivered: int

    def rejected(self) -> list[Event]:
        return [e for e in self.events if not e.accepted]


@dataclass(frozen=True)
class Mutation:
    """Replace a constant inside the ``step``-th wire message (1-based)."""

    step: int
    replace: Term
    target: Term | None = None


def _mutate(m: Term, mut: Mutation, sig) -> Term:
    target = mut.target
    if target is None:
        target = next((c for c in constants(m, sig) if c != mut.replace), None)
    if target is None:
        return m
    return _swap(m, target, mut.replace)


def _swap(t: Term, old: Term, new: Term) -> Term:
    if t == old:
        return new
    if not t.args:
        return t
    return Term(t.name, [_swap(a, old, new) for a in t.args])


class _Runner:
    """One role's frame being executed step by step."""

    def __init__(self, name: str, frame: ActiveFrame, d):
        self.name = name
        self.frame = frame
        self.d = d
        self.env: dict[Term, Term] = {}
        self.pos = 0
        self.alive = True

    def next_step(self):
        return self.frame.steps[self.pos] if self.pos < len(self.frame.steps) else None

    def receive(self, m: Term) -> tuple[bool, list[Equation]]:
        step = self.frame.steps[self.pos]
        self.env[frame_var(step.index)] = self.d.normalize(m)
        self.pos += 1
        failed = _failed(step.checks, self.env, self.d)
        if failed:
            self.alive = False
        return not failed, failed

    def send(self) -> Term:
        step = self.frame.steps[self.pos]
        value = self.d.normalize(apply_substitution(step.recipe, self.env))
        self.env[frame_var(step.index)] = value
        self.pos += 1
        return value


def simulate(n: Narration, frames: Mapping[str, ActiveFrame], d, mutate: Mutation | None = None,
             roles: Sequence[RoleSpec] | None = None) -> Transcript:
    """Run every role honestly, following the narration's line order."""
    roles = list(roles) if roles is not None else extract_roles(n)
    events: list[Event] = []
    runners: dict[Term, _Runner] = {}
    for r in roles:
        runner = _Runner(str(r.name), frames[str(r.name)], d)
        runners[r.name] = runner
        # seed nonces and knowledge
        for m in r.messages()[: len(r.nonces) + len(n.knowledge.get(r.name, []))]:
            step = runner.next_step()
            ok, failed = runner.receive(m)
            events.append(Event(runner.name, step.index, "?", m, ok, tuple(failed), "init"))
    delivered = 0
    complete = True
    for k, line in enumerate(n.lines, 1):
        sender, receiver = runners[line.sender], runners[line.receiver]
        if not sender.alive or not receiver.alive:
            complete = False
            continue
        step = sender.next_step()
        if not isinstance(step, SendStep):
            events.append(Event(sender.name, step.index if step else 0, "!", None, False, (), "deadlock",
                                "expected to send line %d" % k))
            sender.alive = False
            complete = False
            continue
        out = sender.send()
        events.append(Event(sender.name, step.index, "!", out, True, (), "send"))
        if out.name != "msg" or len(out.args) != 2 or out.args[0] != line.receiver:
            events.append(Event(sender.name, step.index, "!", out, False, (), "deadlock",
                                "addressed to %s, not %s" % (out.args[0] if out.args else out, line.receiver)))
            sender.alive = False
            complete = False
            continue
        payload = out.args[1]
        if mutate is not None and mutate.step == k:
            payload = d.normalize(_mutate(payload, mutate, n.sig))
        rstep = receiver.next_step()
        if not isinstance(rstep, ReceiveStep):
            events.append(Event(receiver.name, rstep.index if rstep else 0, "?", None, False, (), "deadlock",
                                "not ready to receive line %d" % k))
            receiver.alive = False
            complete = False
            continue
        wrapped = Term("msg", [line.sender, payload])
        ok, failed = receiver.receive(wrapped)
        delivered += 1
        events.append(Event(receiver.name, rstep.index, "?", wrapped, ok, tuple(failed), "recv"))
        if not ok:
            complete = False
    if any(not e.accepted for e in events):
        complete = False
    return Transcript(n.name, events, complete, delivered)
