"""Plain role extraction from a narration, and role inputs."""

from __future__ import annotations

from dataclasses import dataclass

from .narration import Narration
from .terms import Step, Term, constants

__all__ = ["RoleSpec", "SharedNonceError", "project", "first_senders", "extract_roles", "role_input", "format_role"]


@dataclass(frozen=True)
class RoleSpec:
    name: Term
    params: tuple[Term, ...]
    nonces: tuple[Term, ...]
    strand: tuple[Step, ...]

    def messages(self) -> list[Term]:
        return [step.message for step in self.strand]


class SharedNonceError(ValueError):
    pass


def _msg(agent: Term, m: Term) -> Term:
    return Term("msg", [agent, m])


def project(n: Narration, agent: Term) -> list[tuple[Step, int]]:
    """The agent's view of the narration lines, with source line numbers."""
    out = []
    for line in n.lines:
        if line.sender == agent:
            out.append((Step("!", _msg(line.receiver, line.message)), line.lineno))
        elif line.receiver == agent:
            out.append((Step("?", _msg(line.sender, line.message)), line.lineno))
    return out


def _nonces(knowledge: list[Term], view: list[tuple[Step, int]], sig, agents=()) -> list[tuple[Term, int]]:
    # agent identities are never fresh, even when only the envelope names them
    seen: set[Term] = set(agents)
    for t in knowledge:
        seen.update(constants(t, sig))
    out = []
    for step, lineno in view:
        for c in constants(step.message, sig):
            if c not in seen and step.polarity == "!":
                out.append((c, lineno))
                seen.add(c)
        seen.update(constants(step.message, sig))
    return out


def first_senders(n: Narration) -> dict[Term, dict[Term, int]]:
    """constant -> {agent: line number} for every agent whose strand originates it."""
    out: dict[Term, dict[Term, int]] = {}
    for agent in n.agents():
        for c, lineno in _nonces(n.knowledge.get(agent, []), project(n, agent), n.sig, n.agents()):
            out.setdefault(c, {})[agent] = lineno
    return out


def extract_roles(n: Narration) -> list[RoleSpec]:
    roles = []
    claimed: dict[Term, Term] = {}
    for agent in n.agents():
        knowledge = n.knowledge.get(agent, [])
        view = project(n, agent)
        nonces = [c for c, _ in _nonces(knowledge, view, n.sig, n.agents())]
        for c in nonces:
            if c in claimed:
                raise SharedNonceError("nonce %s originates in both %s and %s" % (c, claimed[c], agent))
            claimed[c] = agent
        params: dict[Term, None] = {}
        for t in knowledge:
            for c in constants(t, n.sig):
                params.setdefault(c, None)
        strand = [Step("?", c) for c in nonces]
        strand += [Step("?", t) for t in knowledge]
        strand += [step for step, _ in view]
        roles.append(RoleSpec(agent, tuple(params), tuple(nonces), tuple(strand)))
    return roles


def role_input(r: RoleSpec) -> tuple[Step, ...]:
    return tuple(Step("!", step.message) for step in r.strand if step.polarity == "?")


def format_role(r: RoleSpec) -> str:
    nu = "ν %s." % ", ".join(str(c) for c in r.nonces) if r.nonces else ""
    params = ", ".join(str(p) for p in r.params)
    return "%s(%s): %s(%s)" % (r.name, params, nu, ", ".join(str(s) for s in r.strand))
