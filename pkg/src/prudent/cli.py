"""``prudent`` command line: check, compile, simulate, audit.

Exit codes: 0 success, 1 rejection (theory not accepted, role not
executable, run rejected, audit violation), 2 input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .compiler import EMIT_MODES, NotExecutable, compile_role
from .document import (
    compile_document,
    dumps,
    frame_from_doc,
    pretty_frame,
    pretty_roles,
    pretty_transcript,
    role_from_doc,
    transcript_to_doc,
)
from .narration import NarrationError, parse_narration, validate_narration
from .oracle import audit_role
from .rewriting import TheoryParseError, parse_theory, validate_subterm_convergent, with_message_layer
from .roles import SharedNonceError, extract_roles
from .runtime import Mutation, simulate
from .terms import ArityError, TermSyntaxError, parse_term
from .theories import theory_store

__all__ = ["main", "build_parser"]


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError("cannot read %s: %s" % (path, exc.strerror)) from exc


def _store(args):
    try:
        return theory_store(args.theory or ())
    except OSError as exc:
        raise UsageError("cannot read theory: %s" % exc) from exc


def _pipeline(args, allow_empty: bool = False):
    """Parse, validate and extract; returns (text, narration, system, roles, source)."""
    text = _read(args.narration)
    store = _store(args)
    n = parse_narration(text, store, allow_empty=allow_empty)
    d = store[n.theory_name]
    if getattr(d, "kind", "rewrite") == "rewrite":
        report = validate_subterm_convergent(d)
        if not report.accepted:
            print(report.format(), file=sys.stderr)
            return None
    problems = validate_narration(n)
    for diag in problems:
        print(str(diag), file=sys.stderr)
    if any(diag.severity == "error" for diag in problems):
        return None
    roles = extract_roles(n)
    source = None
    for p in args.theory or ():
        if d.name == parse_theory(_read(p)).name:
            source = _read(p)
    return text, n, d, roles, source


def _compile_all(roles, d, args):
    frames, failures = [], []
    for r in roles:
        try:
            frames.append(compile_role(r, d, args.bound, args.emit))
        except NotExecutable as exc:
            failures.append(exc)
    return frames, failures


def cmd_check(args) -> int:
    d = parse_theory(_read(args.file))
    report = validate_subterm_convergent(d)
    print(report.format())
    return 0 if report.accepted else 1


def _options(args) -> dict:
    return {"bound": args.bound, "emit": args.emit}


def cmd_compile(args) -> int:
    result = _pipeline(args)
    if result is None:
        return 1
    text, n, d, roles, source = result
    frames, failures = _compile_all(roles, d, args)
    for exc in failures:
        print("error: %s" % exc, file=sys.stderr)
    if failures:
        return 1
    if args.format == "pretty":
        print(pretty_roles(roles))
        for f in frames:
            print(pretty_frame(f))
    else:
        sys.stdout.write(dumps(compile_document(text, n.theory_name, source, roles, frames, _options(args))))
    return 0


def _parse_mutation(tokens, sig) -> Mutation | None:
    if not tokens:
        return None
    fields = {}
    for tok in tokens:
        for part in tok.split(","):
            if "=" not in part:
                raise UsageError("bad --mutate item %r (expected key=value)" % part)
            k, v = part.split("=", 1)
            fields[k.strip()] = v.strip()
    unknown = set(fields) - {"step", "replace", "target"}
    if unknown or "step" not in fields or "replace" not in fields:
        raise UsageError("--mutate needs step=<i> replace=<const> [target=<const>]")
    try:
        step = int(fields["step"])
    except ValueError as exc:
        raise UsageError("--mutate step must be an integer") from exc
    target = parse_term(fields["target"], sig) if "target" in fields else None
    return Mutation(step, parse_term(fields["replace"], sig), target)


def cmd_simulate(args) -> int:
    if args.document:
        doc = json.loads(_read(args.document))
        store = _store(args)
        if doc.get("theory_source"):
            extra = with_message_layer(parse_theory(doc["theory_source"]))
            store[extra.name] = extra
        n = parse_narration(doc["narration"], store, allow_empty=True)
        d = store[n.theory_name]
        roles = [role_from_doc(r, n.sig) for r in doc["roles"]]
        frames = {f["role"]: frame_from_doc(f, n.sig) for f in doc["frames"]}
    else:
        if args.narration is None:
            raise UsageError("simulate needs a narration file or --document")
        result = _pipeline(args, allow_empty=True)
        if result is None:
            return 1
        _, n, d, roles, _ = result
        compiled, failures = _compile_all(roles, d, args)
        for exc in failures:
            print("error: %s" % exc, file=sys.stderr)
        if failures:
            return 1
        frames = {f.role: f for f in compiled}
    mutation = _parse_mutation(args.mutate, n.sig)
    if mutation is not None and not 1 <= mutation.step <= len(n.lines):
        raise UsageError("--mutate step must name a wire message between 1 and %d" % len(n.lines))
    transcript = simulate(n, frames, d, mutation, roles)
    if args.format == "pretty":
        print(pretty_transcript(transcript))
    else:
        sys.stdout.write(dumps(transcript_to_doc(transcript)))
    for e in transcript.rejected():
        for q in e.failed:
            print("rejected: %s at step %d failed %s =? %s" % (e.role, e.step, q.lhs, q.rhs), file=sys.stderr)
        if e.note:
            print("%s: %s at step %d: %s" % (e.kind, e.role, e.step, e.note), file=sys.stderr)
    return 0 if transcript.complete else 1


def cmd_audit(args) -> int:
    result = _pipeline(args)
    if result is None:
        return 1
    _, n, d, roles, _ = result
    frames, failures = _compile_all(roles, d, args)
    for exc in failures:
        print("error: %s" % exc, file=sys.stderr)
    if failures:
        return 1
    doc = {"protocol": n.name, "depth": args.depth, "roles": []}
    violated = False
    for r, f in zip(roles, frames):
        rep = audit_role(f, r, d, args.depth, args.samples, args.seed)
        violated |= not rep.ok
        doc["roles"].append({
            "role": rep.role,
            "oracle_pairs": rep.oracle_pairs,
            "included": rep.included,
            "sampled": rep.sampled,
            "accepted": rep.accepted,
            "breaking": rep.breaking,
            "rejected_breaking": rep.rejected_breaking,
            "violations": [
                {"pair": "%s = %s" % (p.left, p.right), "strand": [str(m) for m in cand]}
                for p, cand in rep.violations[:20]
            ],
            "violation_count": len(rep.violations),
        })
    if args.format == "pretty":
        for entry in doc["roles"]:
            print("%s: %d oracle pairs, %d sampled, %d accepted, %d violations" % (
                entry["role"], entry["oracle_pairs"], entry["sampled"], entry["accepted"], entry["violation_count"]))
            for v in entry["violations"]:
                print("  violated %s" % v["pair"])
    else:
        sys.stdout.write(dumps(doc))
    return 1 if violated else 0


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--theory", action="append", metavar="FILE.thy", help="extra theory file (repeatable)")
    p.add_argument("--bound", type=int, default=None, help="context size bound for saturation")
    p.add_argument("--emit", choices=EMIT_MODES, default="delta",
                   help="checks per reception: new only (delta), all (full), none (debug)")
    p.add_argument("--format", choices=("doc", "pretty"), default="doc")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prudent", description="Compile narrations into prudent role implementations.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="validate a theory file")
    p.add_argument("file")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("compile", help="extract and compile every role")
    p.add_argument("narration")
    _common(p)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("simulate", help="run the compiled roles honestly")
    p.add_argument("narration", nargs="?")
    p.add_argument("--document", help="compiled document to run instead of compiling")
    p.add_argument("--mutate", nargs="+", metavar="KEY=VALUE",
                   help="tamper with a wire message: step=<i> replace=<const> [target=<const>]")
    _common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("audit", help="compare compiled checks against the brute-force oracle")
    p.add_argument("narration")
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    _common(p)
    p.set_defaults(func=cmd_audit)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, NarrationError, TheoryParseError, TermSyntaxError, ArityError, SharedNonceError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except (KeyError, ValueError, json.JSONDecodeError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
