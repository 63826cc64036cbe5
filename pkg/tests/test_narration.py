import random

import pytest
from hypothesis import given, settings, strategies as st

from gen import narration_text
from prudent.narration import NarrationError, format_narration, parse_narration, validate_narration
from prudent.terms import Term


def T(name, *args):
    return Term(name, list(args))


def test_nspk_parses(nspk):
    assert nspk.name == "NSPK" and nspk.theory_name == "dolev_yao"
    assert len(nspk.lines) == 3
    first = nspk.lines[0]
    assert (first.sender, first.receiver) == (T("A"), T("B"))
    assert first.message == T("enc", T("pair", T("A"), T("Na")), T("KB"))
    assert nspk.knowledge[T("A")][-1] == T("inv", T("KA"))


def test_nspk_validates_clean(nspk):
    assert validate_narration(nspk) == []


@pytest.mark.parametrize(
    "body, message",
    [
        ("A knows A\n", "no message lines"),
        ("A -> A : Na\nA knows A\n", "self-communication"),
        ("A -> B : Na\nA knows A\n", "no knows line"),
        ("A -> B : dec(Na)\nA knows A\nB knows B\n", "dec"),
        ("A -> B : x_1\nA knows A\nB knows B\n", "ground"),
        ("A -> B : Na\nA knows A\nB knows B\nfoo\n", "syntax error"),
    ],
)
def test_parse_errors(theories, body, message):
    with pytest.raises(NarrationError, match=message):
        parse_narration("protocol P\ntheory dolev_yao\n" + body + "end\n", theories)


def test_unknown_theory(theories):
    with pytest.raises(NarrationError, match="unknown theory"):
        parse_narration("protocol P\ntheory nope\nend\n", theories)


def test_missing_end(theories):
    with pytest.raises(NarrationError, match="missing 'end'"):
        parse_narration("protocol P\ntheory dolev_yao\nA -> B : a\nA knows A\nB knows B\n", theories)


def test_empty_knows_line_allowed(theories):
    n = parse_narration("protocol P\ntheory dolev_yao\nA -> B : A\nA knows A\nB knows\nend\n", theories)
    assert n.knowledge[T("B")] == []


def test_allow_empty_for_simulation(theories):
    n = parse_narration("protocol E\ntheory dolev_yao\nend\n", theories, allow_empty=True)
    assert n.lines == []


def test_mixed_xor_term_rejected(theories):
    with pytest.raises(NarrationError, match="mixed"):
        parse_narration("protocol X\ntheory xor\nA -> B : msg(a,b) (+) c\nA knows a, b, c\nB knows\nend\n", theories)


def test_shared_nonce_error(theories):
    text = "protocol S\ntheory dolev_yao\nA -> C : N\nB -> C : N\nA knows A\nB knows B\nC knows C\nend\n"
    diags = validate_narration(parse_narration(text, theories))
    errors = [d for d in diags if d.severity == "error"]
    assert len(errors) == 1 and "shared nonce N" in errors[0].message


def test_unused_knowledge_warning(theories):
    text = "protocol U\ntheory dolev_yao\nA -> B : A\nA knows A, Kextra\nB knows B\nend\n"
    diags = validate_narration(parse_narration(text, theories))
    assert [(d.lineno, d.severity) for d in diags] == [(4, "warning")]
    assert "Kextra" in diags[0].message


def test_diagnostics_sorted_by_line(theories):
    text = ("protocol U\ntheory dolev_yao\nA -> C : N\nB -> C : N\nA knows A, Z1\nB knows B, Z2\nC knows\nend\n")
    diags = validate_narration(parse_narration(text, theories))
    assert [d.lineno for d in diags] == sorted(d.lineno for d in diags)
    assert {d.severity for d in diags} == {"error", "warning"}


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_format_parse_round_trip(theories, seed):
    text = narration_text(random.Random(seed))
    try:
        n = parse_narration(text, theories)
    except NarrationError:
        return
    again = parse_narration(format_narration(n), theories)
    assert again == n
    assert format_narration(again) == format_narration(n)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_validation_deterministic(theories, seed):
    text = narration_text(random.Random(seed))
    try:
        n = parse_narration(text, theories)
    except NarrationError:
        return
    assert validate_narration(n) == validate_narration(parse_narration(text, theories))
