"""Corpora, sentiment lexicons, negation configuration and stop-word lists.

File formats
------------
Corpus (TSV)
    ``id<TAB>text<TAB>label`` per line, no header.  The label column may be
    omitted for unlabeled input.
Corpus (JSONL)
    ``{"id": ..., "text": ..., "label": ...}`` per line.
Lexicon
    ``word<TAB>polarity`` per line; blank lines and ``#`` comments skipped.
Stop words
    one token per line.
Negation config
    See :func:`load_negation_config`.
"""

from __future__ import annotations

import enum
import json
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from negscope.preprocess import (
    PreprocessOptions,
    TokenizedReview,
    normalize_word,
    preprocess_review,
)


class ResourceError(ValueError):
    """A corpus or resource file is malformed or inconsistent."""

    def __init__(self, message: str, path: Optional[Path] = None, line: Optional[int] = None):
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(where + message)
        self.path = path
        self.line = line


class PolarityLabel(str, enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"

    @classmethod
    def parse(cls, value: str) -> "PolarityLabel":
        try:
            return cls(value.strip())
        except ValueError:
            raise ResourceError(f"unknown polarity label {value!r}") from None

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Review:
    id: str
    text: str
    label: Optional[PolarityLabel] = None

    def __post_init__(self):
        if not self.id:
            raise ResourceError("review id must be non-empty")
        if not self.text.strip():
            raise ResourceError(f"review {self.id!r} has empty text")


@dataclass(frozen=True)
class LabeledCorpus:
    reviews: tuple[Review, ...]

    def __post_init__(self):
        seen: set[str] = set()
        for r in self.reviews:
            if r.id in seen:
                raise ResourceError(f"duplicate review id {r.id!r}")
            seen.add(r.id)

    @property
    def class_counts(self) -> dict[PolarityLabel, int]:
        counts = Counter(r.label for r in self.reviews if r.label is not None)
        return {label: counts.get(label, 0) for label in PolarityLabel}

    @property
    def is_labeled(self) -> bool:
        return all(r.label is not None for r in self.reviews)

    def __len__(self) -> int:
        return len(self.reviews)

    def __iter__(self) -> Iterator[Review]:
        return iter(self.reviews)


@dataclass(frozen=True)
class SentimentLexicon:
    entries: Mapping[str, PolarityLabel] = field(default_factory=dict)

    def polarity(self, word: str) -> Optional[PolarityLabel]:
        return self.entries.get(word)

    def __contains__(self, word: object) -> bool:
        return word in self.entries

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class ContextExceptions:
    """Words that cancel a trigger's negating sense when adjacent to it.

    ``before`` holds single tokens seen immediately before the trigger,
    ``after`` holds token sequences starting immediately after it.
    """

    before: frozenset[str] = frozenset()
    after: frozenset[tuple[str, ...]] = frozenset()


@dataclass(frozen=True)
class NegationConfig:
    triggers: frozenset[str]
    exceptional_words: frozenset[str] = frozenset({"الا"})
    superlatives: frozenset[str] = frozenset()
    context_exceptions: Mapping[str, ContextExceptions] = field(default_factory=dict)
    window_length: int = 5

    def __post_init__(self):
        if not self.triggers:
            raise ResourceError("negation config has no triggers")
        if self.window_length < 1:
            raise ResourceError(f"window_length must be >= 1, got {self.window_length}")
        for trigger in self.context_exceptions:
            if trigger not in self.triggers:
                raise ResourceError(f"context exceptions given for non-trigger {trigger!r}")


@dataclass(frozen=True)
class NegationStats:
    total_reviews: int
    reviews_with_trigger: int
    prevalence: float
    negative_share: Optional[float]
    positive_share: Optional[float]

    def to_dict(self) -> dict:
        return {
            "total_reviews": self.total_reviews,
            "reviews_with_trigger": self.reviews_with_trigger,
            "prevalence": self.prevalence,
            "negative_share": self.negative_share,
            "positive_share": self.positive_share,
        }


def _read_lines(path: Path) -> list[str]:
    try:
        return Path(path).read_text(encoding="utf-8").splitlines()
    except UnicodeDecodeError as exc:
        raise ResourceError(f"not valid UTF-8 ({exc.reason})", Path(path)) from None
    except OSError as exc:
        raise ResourceError(f"cannot read file ({exc.strerror})", Path(path)) from None


def load_corpus(path, format: str = "tsv") -> LabeledCorpus:
    path = Path(path)
    if format not in ("tsv", "jsonl"):
        raise ValueError(f"unknown corpus format {format!r}")
    reviews: list[Review] = []
    seen: set[str] = set()
    for lineno, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            continue
        if format == "tsv":
            cols = line.split("\t")
            if len(cols) not in (2, 3):
                raise ResourceError(f"expected 2 or 3 tab-separated columns, got {len(cols)}", path, lineno)
            rid, text = cols[0].strip(), cols[1]
            raw_label = cols[2] if len(cols) == 3 else None
        else:
            try:
                record = json.loads(line)
                rid, text = str(record["id"]), record["text"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ResourceError(f"bad JSON record ({exc})", path, lineno) from None
            raw_label = record.get("label")
        if rid in seen:
            raise ResourceError(f"duplicate review id {rid!r}", path, lineno)
        seen.add(rid)
        try:
            label = PolarityLabel.parse(raw_label) if raw_label not in (None, "") else None
            reviews.append(Review(rid, text, label))
        except ResourceError as exc:
            raise ResourceError(str(exc), path, lineno) from None
    return LabeledCorpus(tuple(reviews))


def save_corpus(corpus: LabeledCorpus, path, format: str = "tsv") -> None:
    lines = []
    for r in corpus:
        if format == "tsv":
            if "\t" in r.text or "\n" in r.text:
                raise ResourceError(f"review {r.id!r} text cannot be stored as TSV")
            cols = [r.id, r.text] + ([r.label.value] if r.label else [])
            lines.append("\t".join(cols))
        else:
            record = {"id": r.id, "text": r.text}
            if r.label:
                record["label"] = r.label.value
            lines.append(json.dumps(record, ensure_ascii=False))
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def _single_token(word: str, options: PreprocessOptions, path: Path, lineno: int) -> str:
    norm = normalize_word(word, options)
    if not norm or " " in norm:
        raise ResourceError(f"entry {word!r} does not normalize to a single token", path, lineno)
    return norm


def load_sentiment_lexicon(path, options: PreprocessOptions = PreprocessOptions()) -> SentimentLexicon:
    path = Path(path)
    entries: dict[str, PolarityLabel] = {}
    for lineno, line in enumerate(_read_lines(path), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 2:
            raise ResourceError("expected `word<TAB>polarity`", path, lineno)
        try:
            polarity = PolarityLabel.parse(cols[1])
        except ResourceError as exc:
            raise ResourceError(str(exc), path, lineno) from None
        word = _single_token(cols[0], options, path, lineno)
        if entries.get(word, polarity) is not polarity:
            raise ResourceError(f"{word!r} listed as both positive and negative", path, lineno)
        entries[word] = polarity
    return SentimentLexicon(entries)


def load_stopwords(path, options: PreprocessOptions = PreprocessOptions()) -> frozenset[str]:
    path = Path(path)
    words = set()
    for line in _read_lines(path):
        norm = normalize_word(line, options)
        if norm:
            words.update(norm.split(" "))
    return frozenset(words)


_SECTION = re.compile(r"^\[\s*(\w+)(?:\s+(.+?))?\s*\]$")


def parse_config_sections(path) -> tuple[dict[str, str], list[tuple[str, Optional[str], list[tuple[int, str]]]]]:
    """Split a sectioned config file into top-level settings and sections.

    Returns ``(settings, sections)`` where each section is
    ``(name, argument, [(lineno, line), ...])``.
    """
    path = Path(path)
    settings: dict[str, str] = {}
    sections: list[tuple[str, Optional[str], list[tuple[int, str]]]] = []
    for lineno, raw in enumerate(_read_lines(path), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _SECTION.match(line)
        if m:
            sections.append((m.group(1).lower(), m.group(2), []))
        elif sections:
            sections[-1][2].append((lineno, line))
        elif "=" in line:
            key, _, value = line.partition("=")
            settings[key.strip()] = value.strip()
        else:
            raise ResourceError(f"line outside any section: {line!r}", path, lineno)
    return settings, sections


def _parse_int(value: str, key: str, path: Path, lineno: Optional[int] = None) -> int:
    try:
        return int(value)
    except ValueError:
        raise ResourceError(f"{key} must be an integer, got {value!r}", path, lineno) from None


def load_preprocess_options(path) -> PreprocessOptions:
    """Read the ``[preprocess]`` section of a config file (defaults if absent).

    Lines are ``collapse_repeats_to = N``, ``strip_diacritics = true|false``,
    or ``<char> = <char>`` table overrides.  ``normalization = none`` clears
    the default table before overrides apply.
    """
    path = Path(path)
    _, sections = parse_config_sections(path)
    kwargs: dict = {}
    table = dict(PreprocessOptions().normalization_table)
    for name, _, lines in sections:
        if name != "preprocess":
            continue
        for lineno, line in lines:
            key, sep, value = (s.strip() for s in line.partition("="))
            if not sep:
                raise ResourceError(f"expected `key = value`, got {line!r}", path, lineno)
            if key == "collapse_repeats_to":
                kwargs["collapse_repeats_to"] = _parse_int(value, key, path, lineno)
            elif key == "strip_diacritics":
                if value.lower() not in ("true", "false"):
                    raise ResourceError(f"strip_diacritics must be true or false", path, lineno)
                kwargs["strip_diacritics"] = value.lower() == "true"
            elif key == "normalization" and value.lower() == "none":
                table = {}
            elif len(key) == 1 and len(value) == 1:
                table[key] = value
            else:
                raise ResourceError(f"unknown preprocess setting {line!r}", path, lineno)
    try:
        return PreprocessOptions(normalization_table=table, **kwargs)
    except ValueError as exc:
        raise ResourceError(str(exc), path) from None


def load_negation_config(path, options: Optional[PreprocessOptions] = None) -> NegationConfig:
    """Load trigger terms and exception lists.

    Grammar (UTF-8, ``#`` comments)::

        window_length = 5
        [triggers]          one term per line
        [exceptional]       one term per line (default: إلا)
        [superlatives]      one term per line
        [before <trigger>]  one token per line
        [after <trigger>]   one token sequence per line
        [preprocess]        see load_preprocess_options
        [resources]         see negscope.cli

    Every entry is normalized with the same pipeline as review text.
    """
    path = Path(path)
    if options is None:
        options = load_preprocess_options(path)
    settings, sections = parse_config_sections(path)
    triggers: set[str] = set()
    exceptional: Optional[set[str]] = None
    superlatives: set[str] = set()
    before: dict[str, set[str]] = {}
    after: dict[str, set[tuple[str, ...]]] = {}
    for key, value in settings.items():
        if key != "window_length":
            raise ResourceError(f"unknown setting {key!r}", path)
    window_length = _parse_int(settings.get("window_length", "5"), "window_length", path)

    for name, arg, lines in sections:
        if name in ("preprocess", "resources"):
            continue
        if name not in ("triggers", "exceptional", "superlatives", "before", "after"):
            raise ResourceError(f"unknown section [{name}]", path)
        words = [(lineno, normalize_word(line, options)) for lineno, line in lines]
        for lineno, w in words:
            if not w:
                raise ResourceError("entry is empty after normalization", path, lineno)
        if name in ("triggers", "exceptional", "superlatives") and arg:
            raise ResourceError(f"section [{name}] takes no argument", path)
        if name == "triggers":
            for lineno, w in words:
                if " " in w:
                    raise ResourceError(f"trigger {w!r} must be a single token", path, lineno)
                triggers.add(w)
        elif name == "exceptional":
            exceptional = (exceptional or set()) | {w for _, w in words}
        elif name == "superlatives":
            superlatives.update(w for _, w in words)
        elif name in ("before", "after"):
            if not arg:
                raise ResourceError(f"section [{name}] needs a trigger argument", path)
            trigger = normalize_word(arg, options)
            if name == "before":
                for lineno, w in words:
                    if " " in w:
                        raise ResourceError(f"before-context {w!r} must be a single token", path, lineno)
                    before.setdefault(trigger, set()).add(w)
            else:
                after.setdefault(trigger, set()).update(tuple(w.split(" ")) for _, w in words)

    contexts = {
        t: ContextExceptions(frozenset(before.get(t, ())), frozenset(after.get(t, ())))
        for t in sorted(set(before) | set(after))
    }
    try:
        return NegationConfig(
            triggers=frozenset(triggers),
            exceptional_words=frozenset({"الا"}) if exceptional is None else frozenset(exceptional),
            superlatives=frozenset(superlatives),
            context_exceptions=contexts,
            window_length=window_length,
        )
    except ResourceError as exc:
        raise ResourceError(str(exc), path) from None


def has_trigger(review: TokenizedReview, config: NegationConfig) -> bool:
    return any(t.surface in config.triggers for t in review.tokens)


def corpus_stats(
    corpus: LabeledCorpus | Sequence[TokenizedReview],
    config: NegationConfig,
    options: PreprocessOptions = PreprocessOptions(),
) -> NegationStats:
    """Share of reviews containing at least one raw trigger, split by class.

    Accepts a raw corpus (preprocessed here) or already tokenized reviews.
    """
    tokenized: Iterable[TokenizedReview]
    if isinstance(corpus, LabeledCorpus):
        tokenized = (preprocess_review(r, options) for r in corpus)
    else:
        tokenized = corpus
    total = 0
    by_label: Counter = Counter()
    for review in tokenized:
        if review.label is None:
            raise ResourceError(f"review {review.id!r} is unlabeled; stats need labels")
        total += 1
        if has_trigger(review, config):
            by_label[review.label] += 1
    with_trigger = sum(by_label.values())
    neg = pos = None
    if with_trigger:
        neg = by_label[PolarityLabel.NEGATIVE] / with_trigger
        pos = by_label[PolarityLabel.POSITIVE] / with_trigger
    return NegationStats(
        total_reviews=total,
        reviews_with_trigger=with_trigger,
        prevalence=with_trigger / total if total else 0.0,
        negative_share=neg,
        positive_share=pos,
    )
