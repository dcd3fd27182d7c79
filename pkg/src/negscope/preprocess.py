"""Noise stripping, letter normalization and tokenization of raw reviews.

The pipeline is ``strip_noise -> normalize_letters -> tokenize``.  Sentence
final punctuation is removed like any other punctuation, but its position is
kept as a boundary mark so that sentence-scoped negation can still find the
end of a sentence once the text is flattened into tokens.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import TYPE_CHECKING, Mapping, Optional

if TYPE_CHECKING:
    from negscope.corpus import PolarityLabel, Review

TATWEEL = "ـ"
SENTENCE_FINAL = frozenset(".!?؟،؛")  # . ! ? ؟ ، ؛

DEFAULT_NORMALIZATION = MappingProxyType(
    {
        "أ": "ا",  # أ -> ا
        "إ": "ا",  # إ -> ا
        "آ": "ا",  # آ -> ا
        "ة": "ه",  # ة -> ه
        "ى": "ي",  # ى -> ي
        "ؤ": "و",  # ؤ -> و
        "ئ": "ي",  # ئ -> ي
    }
)


def is_diacritic(ch: str) -> bool:
    """Harakat, tanween, shadda, sukun and the other combining Arabic marks."""
    cp = ord(ch)
    return 0x064B <= cp <= 0x065F or cp == 0x0670


def is_arabic_letter(ch: str) -> bool:
    cp = ord(ch)
    if cp == 0x0640:
        return False
    return 0x0621 <= cp <= 0x064A or 0x0671 <= cp <= 0x06D3


@dataclass(frozen=True)
class PreprocessOptions:
    collapse_repeats_to: int = 2
    normalization_table: Mapping[str, str] = field(
        default_factory=lambda: dict(DEFAULT_NORMALIZATION)
    )
    strip_diacritics: bool = True

    def __post_init__(self):
        if self.collapse_repeats_to < 1:
            raise ValueError("collapse_repeats_to must be >= 1")
        for src, dst in self.normalization_table.items():
            if len(src) != 1 or len(dst) != 1:
                raise ValueError(
                    f"normalization entries must map one character to one "
                    f"character, got {src!r} -> {dst!r}"
                )


@dataclass(frozen=True, slots=True)
class Token:
    surface: str
    position: int
    negated: bool = False


@dataclass(frozen=True)
class TokenizedReview:
    """A preprocessed review.

    ``sentence_breaks`` holds token indices ``i`` such that a sentence
    boundary falls immediately before token ``i``.
    """

    id: str
    tokens: tuple[Token, ...]
    sentence_breaks: tuple[int, ...] = ()
    label: Optional["PolarityLabel"] = None

    @property
    def surfaces(self) -> list[str]:
        return [t.surface for t in self.tokens]

    @property
    def negated_positions(self) -> frozenset[int]:
        return frozenset(t.position for t in self.tokens if t.negated)

    def __len__(self) -> int:
        return len(self.tokens)


def strip_noise(
    text: str, options: PreprocessOptions = PreprocessOptions()
) -> tuple[str, tuple[int, ...]]:
    """Remove everything that is not an Arabic letter.

    Returns the cleaned text and the character offsets (into the cleaned
    text) at which a token following a sentence-final mark starts.  Removed
    punctuation, digits and Latin letters act as word separators; diacritics
    and tatweel are deleted in place so they never split a word.
    """
    keep = options.collapse_repeats_to
    out: list[str] = []
    marks: list[int] = []
    pending_space = False
    run = 0
    for ch in text:
        if ch == TATWEEL or (options.strip_diacritics and is_diacritic(ch)):
            continue
        if is_arabic_letter(ch) or (not options.strip_diacritics and is_diacritic(ch)):
            if pending_space and out:
                out.append(" ")
                run = 0
            pending_space = False
            if out and out[-1] == ch:
                if run >= keep:
                    continue
                run += 1
            else:
                run = 1
            out.append(ch)
            continue
        if ch in SENTENCE_FINAL:
            mark = len(out) + 1 if out else 0
            if not marks or marks[-1] != mark:
                marks.append(mark)
        pending_space = True
    return "".join(out), tuple(marks)


def normalize_letters(text: str, options: PreprocessOptions = PreprocessOptions()) -> str:
    table = options.normalization_table
    if not table:
        return text
    return text.translate(str.maketrans(dict(table)))


def tokenize(text: str, marks: tuple[int, ...] = ()) -> tuple[list[Token], tuple[int, ...]]:
    """Whitespace split; each boundary mark moves to the first token at or after it."""
    tokens: list[Token] = []
    starts: list[int] = []
    offset = 0
    for piece in text.split(" "):
        if piece:
            tokens.append(Token(piece, len(tokens)))
            starts.append(offset)
        offset += len(piece) + 1
    breaks = {bisect_left(starts, mark) for mark in marks}
    return tokens, tuple(sorted(i for i in breaks if 0 < i < len(tokens)))


def preprocess_text(
    text: str, options: PreprocessOptions = PreprocessOptions()
) -> tuple[list[Token], tuple[int, ...]]:
    stripped, marks = strip_noise(text, options)
    # normalization maps one code point to one code point, so offsets survive
    return tokenize(normalize_letters(stripped, options), marks)


def preprocess_review(
    review: "Review", options: PreprocessOptions = PreprocessOptions()
) -> TokenizedReview:
    tokens, breaks = preprocess_text(review.text, options)
    return TokenizedReview(review.id, tuple(tokens), breaks, review.label)


def normalize_word(word: str, options: PreprocessOptions = PreprocessOptions()) -> str:
    """Normalize a single resource entry (lexicon word, trigger, stop word).

    Resource entries may be multi-word (e.g. an after-context such as
    ``شاء الله``); the words are returned joined by single spaces.
    """
    tokens, _ = preprocess_text(word, options)
    return " ".join(t.surface for t in tokens)
