"""Broad phonetic class lookup for phone symbols.

The mapping table ships with the package (``data/ipa_classes.tsv``) and
covers IPA base symbols; anything unresolved maps to ``"other"`` so the
function is total over arbitrary aligner output.
"""

from __future__ import annotations

import unicodedata
from functools import lru_cache
from importlib import resources

BROAD_CLASSES = ("vowel", "plosive", "fricative", "nasal", "approximant", "affricate", "other")

# Length marks, stress marks, syllabicity and common secondary-articulation
# modifiers that aligners attach to base symbols.
_MODIFIERS = {
    "\u02c8",  # primary stress
    "\u02cc",  # secondary stress
    "\u02d0",  # long
    "\u02d1",  # half-long
    "\u0306",  # extra-short
    "\u02b0",  # aspirated
    "\u02b7",  # labialized
    "\u02b2",  # palatalized
    "\u02e0",  # velarized
    "\u02e4",  # pharyngealized
    "\u0325",  # voiceless
    "\u032c",  # voiced
    "\u0329",  # syllabic
    "\u032f",  # non-syllabic
    "\u0303",  # nasalized
    "\u031a",  # no audible release
}


@lru_cache(maxsize=1)
def _class_table() -> dict[str, str]:
    table: dict[str, str] = {}
    text = resources.files("phonoprint").joinpath("data/ipa_classes.tsv").read_text(encoding="utf-8")
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        symbol, cls = line.split("\t")
        table[symbol] = cls
    return table


def _strip_modifiers(label: str) -> str:
    decomposed = unicodedata.normalize("NFD", label)
    return "".join(ch for ch in decomposed if ch not in _MODIFIERS)


def broad_class(phoneme_label: str) -> str:
    """Map a phone symbol to its broad phonetic class; unknown symbols are ``other``."""
    table = _class_table()
    label = phoneme_label.strip()
    for candidate in (label, label.lower(), _strip_modifiers(label), _strip_modifiers(label).lower()):
        if candidate in table:
            return table[candidate]
    stripped = _strip_modifiers(label).lower()
    if stripped and stripped[0] in table:
        return table[stripped[0]]
    return "other"
