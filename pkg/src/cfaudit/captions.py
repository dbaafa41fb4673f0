"""Rule-based gender counterfactual caption editing.

Captions are scanned for keywords that state a gender explicitly (man,
woman, he, she, ...) or imply it through an occupation or role (waiter,
policewoman, king, ...). Each keyword set carries a mapping to its
opposite-gender counterpart; editing substitutes whole words through that
mapping and leaves every other character untouched.

Matching is whole-word and case-insensitive over maximal runs of letters;
a replacement keeps a leading capital if the matched word had one.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path

from .errors import LexiconError

_TOKEN = re.compile(r"[^\W\d_]+", re.UNICODE)


class CaptionGender(str, Enum):
    MASCULINE = "masculine"
    FEMININE = "feminine"
    NEUTRAL = "neutral"
    MIXED = "mixed"


@dataclass(frozen=True)
class GenderLexicon:
    """Keyword sets for both genders plus the substitution mappings.

    ``masculine_only`` / ``feminine_only`` hold detection-only keywords
    that have no usable counterpart; they count toward gender detection
    but survive editing unchanged.
    """

    to_feminine: dict[str, str]
    to_masculine: dict[str, str]
    masculine_only: frozenset[str] = field(default_factory=frozenset)
    feminine_only: frozenset[str] = field(default_factory=frozenset)

    @property
    def masculine_terms(self) -> frozenset[str]:
        return frozenset(self.to_feminine) | self.masculine_only

    @property
    def feminine_terms(self) -> frozenset[str]:
        return frozenset(self.to_masculine) | self.feminine_only


@dataclass(frozen=True)
class CaptionPair:
    original: str
    masculine: str
    feminine: str
    detected_gender: CaptionGender


@dataclass(frozen=True)
class LexiconReport:
    """Round-trip audit: which masculine keywords map back to themselves."""

    bijective_pairs: list[str]
    asymmetric_pairs: list[str]


def load_lexicon(path: str | Path) -> GenderLexicon:
    """Load and validate a lexicon JSON file.

    Schema: ``{"pairs": [[masculine, feminine], ...],
    "masculine_only": [...], "feminine_only": [...]}``. Pairs populate the
    mappings in both directions; a later pair overrides the reverse entry
    of an earlier pair sharing its feminine side.
    """
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise LexiconError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(payload, dict) or "pairs" not in payload:
        raise LexiconError(f"{path}: expected an object with a 'pairs' array")

    to_feminine: dict[str, str] = {}
    to_masculine: dict[str, str] = {}
    for entry in payload["pairs"]:
        if (
            not isinstance(entry, (list, tuple))
            or len(entry) != 2
            or not all(isinstance(term, str) and term for term in entry)
        ):
            raise LexiconError(
                f"{path}: each pair must be [masculine, feminine], got {entry!r}"
            )
        masculine, feminine = (term.lower() for term in entry)
        to_feminine[masculine] = feminine
        to_masculine[feminine] = masculine

    def _term_set(key: str) -> frozenset[str]:
        terms = payload.get(key, [])
        if not isinstance(terms, list) or not all(isinstance(t, str) for t in terms):
            raise LexiconError(f"{path}: {key} must be an array of strings")
        return frozenset(t.lower() for t in terms)

    lexicon = GenderLexicon(
        to_feminine=to_feminine,
        to_masculine=to_masculine,
        masculine_only=_term_set("masculine_only"),
        feminine_only=_term_set("feminine_only"),
    )
    validate_lexicon(lexicon)
    return lexicon


def default_lexicon() -> GenderLexicon:
    """The lexicon shipped with the package (editable extension point)."""
    with resources.as_file(
        resources.files("cfaudit").joinpath("data/lexicon.json")
    ) as path:
        return load_lexicon(path)


def validate_lexicon(lexicon: GenderLexicon) -> LexiconReport:
    """Check structural invariants and report mapping symmetry.

    Raises on overlapping keyword sets, keywords that are not single
    lowercase words, or mappings whose image falls outside the opposite
    keyword set. Returns which paired masculine terms round-trip
    (f2(f1(w)) == w) and which do not.
    """
    for term in (
        set(lexicon.to_feminine) | set(lexicon.to_masculine)
        | set(lexicon.to_feminine.values()) | set(lexicon.to_masculine.values())
        | lexicon.masculine_only | lexicon.feminine_only
    ):
        if term != term.lower() or not _TOKEN.fullmatch(term):
            raise LexiconError(f"keyword {term!r} must be a single lowercase word")

    overlap = lexicon.masculine_terms & lexicon.feminine_terms
    if overlap:
        raise LexiconError(
            f"keywords in both gender sets: {sorted(overlap)}"
        )
    for word, image in lexicon.to_feminine.items():
        if image not in lexicon.feminine_terms:
            raise LexiconError(
                f"mapping {word!r} -> {image!r} falls outside the feminine keyword set"
            )
    for word, image in lexicon.to_masculine.items():
        if image not in lexicon.masculine_terms:
            raise LexiconError(
                f"mapping {word!r} -> {image!r} falls outside the masculine keyword set"
            )

    bijective = [
        w for w in lexicon.to_feminine
        if lexicon.to_masculine.get(lexicon.to_feminine[w]) == w
    ]
    asymmetric = [w for w in lexicon.to_feminine if w not in set(bijective)]
    return LexiconReport(
        bijective_pairs=sorted(bijective),
        asymmetric_pairs=sorted(asymmetric),
    )


def detect_gender(caption: str, lexicon: GenderLexicon) -> CaptionGender:
    """Classify a caption by which gender keyword sets it touches."""
    masculine_hit = feminine_hit = False
    for token in _TOKEN.findall(caption):
        word = token.lower()
        if word in lexicon.masculine_terms:
            masculine_hit = True
        elif word in lexicon.feminine_terms:
            feminine_hit = True
    if masculine_hit and feminine_hit:
        return CaptionGender.MIXED
    if masculine_hit:
        return CaptionGender.MASCULINE
    if feminine_hit:
        return CaptionGender.FEMININE
    return CaptionGender.NEUTRAL


def _recase(replacement: str, matched: str) -> str:
    if matched[:1].isupper():
        return replacement[:1].upper() + replacement[1:]
    return replacement


def edit_caption(caption: str, target: CaptionGender, lexicon: GenderLexicon) -> str:
    """Rewrite every opposite-gender keyword toward ``target``.

    All other characters, including spacing and punctuation, are copied
    byte for byte.
    """
    if target is CaptionGender.FEMININE:
        mapping = lexicon.to_feminine
    elif target is CaptionGender.MASCULINE:
        mapping = lexicon.to_masculine
    else:
        raise LexiconError(f"target must be masculine or feminine, got {target.value}")

    def substitute(match: re.Match[str]) -> str:
        word = match.group(0)
        replacement = mapping.get(word.lower())
        if replacement is None:
            return word
        return _recase(replacement, word)

    return _TOKEN.sub(substitute, caption)


def make_counterfactual_pair(caption: str, lexicon: GenderLexicon) -> CaptionPair:
    """Produce the (masculine, feminine) caption pair for one caption.

    A caption already describing one gender is kept verbatim on that side
    and edited on the other; a neutral caption is kept on both sides; a
    mixed caption is edited toward each side independently.
    """
    detected = detect_gender(caption, lexicon)
    if detected is CaptionGender.NEUTRAL:
        masculine = feminine = caption
    elif detected is CaptionGender.MASCULINE:
        masculine = caption
        feminine = edit_caption(caption, CaptionGender.FEMININE, lexicon)
    elif detected is CaptionGender.FEMININE:
        feminine = caption
        masculine = edit_caption(caption, CaptionGender.MASCULINE, lexicon)
    else:
        masculine = edit_caption(caption, CaptionGender.MASCULINE, lexicon)
        feminine = edit_caption(caption, CaptionGender.FEMININE, lexicon)
    return CaptionPair(
        original=caption,
        masculine=masculine,
        feminine=feminine,
        detected_gender=detected,
    )
