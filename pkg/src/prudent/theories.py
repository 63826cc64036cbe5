"""Built-in theory store."""

from __future__ import annotations

from importlib import resources

from .rewriting import dolev_yao, load_theory, with_message_layer
from .xor import XorSystem

__all__ = ["builtin_theories", "theory_store", "nspk_text"]


def builtin_theories() -> dict:
    return {"dolev_yao": dolev_yao(), "xor": XorSystem()}


def theory_store(paths=()) -> dict:
    """Built-ins plus any extra ``.thy`` files, keyed by their theory name.

    Extra theories get the msg/partner/payload layer roles rely on.
    """
    store = builtin_theories()
    for p in paths:
        d = with_message_layer(load_theory(p))
        store[d.name] = d
    return store


def nspk_text() -> str:
    return resources.files("prudent.protocols").joinpath("nspk.spec").read_text(encoding="utf-8")
