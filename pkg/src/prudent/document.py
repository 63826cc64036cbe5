"""JSON documents for compiled roles, frames and transcripts, plus a pretty printer."""

from __future__ import annotations

import json
import re
from typing import Any

from .basis import Equation
from .compiler import ActiveFrame, ReceiveStep, SendStep
from .roles import RoleSpec, format_role
from .runtime import Transcript
from .terms import Signature, Step, Term, parse_term

__all__ = [
    "dumps",
    "role_to_doc",
    "role_from_doc",
    "frame_to_doc",
    "frame_from_doc",
    "transcript_to_doc",
    "compile_document",
    "pretty_frame",
    "pretty_roles",
    "pretty_transcript",
]


def dumps(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _t(t: Term | None) -> str | None:
    return None if t is None else str(t)


def role_to_doc(r: RoleSpec) -> dict:
    return {
        "name": str(r.name),
        "params": [str(p) for p in r.params],
        "nonces": [str(c) for c in r.nonces],
        "strand": ["%s%s" % (s.polarity, s.message) for s in r.strand],
    }


def role_from_doc(doc: dict, sig: Signature) -> RoleSpec:
    strand = tuple(Step(s[0], parse_term(s[1:], sig)) for s in doc["strand"])
    return RoleSpec(
        parse_term(doc["name"], sig),
        tuple(parse_term(p, sig) for p in doc["params"]),
        tuple(parse_term(c, sig) for c in doc["nonces"]),
        strand,
    )


def frame_to_doc(f: ActiveFrame) -> dict:
    steps = []
    for s in f.steps:
        entry = {"index": s.index, "polarity": s.polarity, "var": "v_%d" % s.index, "alias": s.alias, "ideal": _t(s.ideal)}
        if isinstance(s, SendStep):
            entry["recipe"] = str(s.recipe)
        else:
            entry["checks"] = [{"lhs": str(e.lhs), "rhs": str(e.rhs)} for e in s.checks]
        steps.append(entry)
    return {"role": f.role, "theory": f.theory, "emit": f.emit, "steps": steps}


def frame_from_doc(doc: dict, sig: Signature) -> ActiveFrame:
    def ctx(text: str) -> Term:
        names = sorted(set(_frame_vars(text)))
        return parse_term(text, sig, names)

    steps = []
    aliases = {}
    for s in doc["steps"]:
        ideal = parse_term(s["ideal"], sig) if s.get("ideal") else None
        aliases[s["var"]] = s.get("alias", "")
        if s["polarity"] == "!":
            steps.append(SendStep(s["index"], ctx(s["recipe"]), s.get("alias", ""), ideal))
        else:
            checks = tuple(Equation(ctx(e["lhs"]), ctx(e["rhs"])) for e in s["checks"])
            steps.append(ReceiveStep(s["index"], checks, s.get("alias", ""), ideal))
    return ActiveFrame(doc["role"], tuple(steps), doc.get("theory", ""), doc.get("emit", "delta"), aliases)


def _frame_vars(text: str) -> list[str]:
    return re.findall(r"\bv_\d+\b", text)


def transcript_to_doc(t: Transcript) -> dict:
    return {
        "protocol": t.protocol,
        "complete": t.complete,
        "delivered": t.delivered,
        "events": [
            {
                "role": e.role,
                "step": e.step,
                "polarity": e.polarity,
                "term": _t(e.term),
                "accepted": e.accepted,
                "failed": ["%s =? %s" % (q.lhs, q.rhs) for q in e.failed],
                "kind": e.kind,
                "note": e.note,
            }
            for e in t.events
        ],
    }


def compile_document(narration_text: str, theory_name: str, theory_source: str | None,
                     roles: list[RoleSpec], frames: list[ActiveFrame], options: dict) -> dict:
    return {
        "format": "prudent/1",
        "narration": narration_text,
        "theory": theory_name,
        "theory_source": theory_source,
        "options": options,
        "roles": [role_to_doc(r) for r in roles],
        "frames": [frame_to_doc(f) for f in frames],
    }


def _alias(t: Term, aliases: dict[str, str]) -> str:
    if t.is_var:
        return aliases.get(t.name, t.name)
    if not t.args:
        return t.name
    return "%s(%s)" % (t.name, ",".join(_alias(a, aliases) for a in t.args))


def pretty_frame(f: ActiveFrame) -> str:
    lines = ["frame %s:" % f.role]
    for s in f.steps:
        name = f.aliases.get("v_%d" % s.index) or "v_%d" % s.index
        if isinstance(s, SendStep):
            lines.append("  !%s with %s ≟ %s" % (name, name, _alias(s.recipe, f.aliases)))
        elif s.checks:
            eqs = ", ".join("%s ≟ %s" % (_alias(e.lhs, f.aliases), _alias(e.rhs, f.aliases)) for e in s.checks)
            lines.append("  ?%s with {%s}" % (name, eqs))
        else:
            lines.append("  ?%s" % name)
    return "\n".join(lines)


def pretty_roles(roles: list[RoleSpec]) -> str:
    return "\n".join(format_role(r) for r in roles)


def pretty_transcript(t: Transcript) -> str:
    lines = ["transcript %s (%s, %d delivered):" % (t.protocol, "complete" if t.complete else "incomplete", t.delivered)]
    for e in t.events:
        mark = "ok" if e.accepted else "REJECTED"
        lines.append("  %s.%d %s%s [%s] %s" % (e.role, e.step, e.polarity, e.term if e.term is not None else "-", e.kind, mark))
        for q in e.failed:
            lines.append("      failed: %s ≟ %s" % (q.lhs, q.rhs))
        if e.note:
            lines.append("      %s" % e.note)
    return "\n".join(lines)
