"""Planted-negation corpus generator.

Every generated review holds exactly one opinion word among neutral filler
words.  Its gold label is the lexicon polarity of that word, flipped when a
negation trigger is planted 1 to ``window`` tokens before it.  Triggers occur
in negated reviews only, so the share of reviews containing a trigger equals
the planted rate exactly.

Without negation tags a bag of words cannot separate a negated review from a
plain one with the same opinion word (the trigger is equally common in both
classes), while tagging the negated opinion word makes the classes linearly
separable.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from negscope.corpus import LabeledCorpus, NegationConfig, PolarityLabel, Review, SentimentLexicon
from negscope.preprocess import normalize_word

POSITIVE_WORDS = ("حلو", "نظيف", "جيد", "رائع", "لذيذ", "ممتاز", "مريح", "سريع")
NEGATIVE_WORDS = ("وسخ", "سيء", "غالي", "بطيء", "مزعج", "تعبان", "ازعاج", "كذابين")
TRIGGERS = ("لا", "مش", "مو", "ما", "مافي", "ليس", "لم", "مفيش")
FILLERS = (
    "المطعم", "المكان", "الاكل", "الخدمه", "الموظفين", "السعر", "الفندق", "الغرفه",
    "الطاولات", "القهوه", "الشاي", "الموقع", "الطريق", "الصاله", "الحمام", "الاسبوع",
    "امس", "اليوم", "المساء", "العيله", "الاصحاب", "زرنا", "طلبنا", "جربنا",
    "الوجبه", "البيتزا", "الشاورما", "الدجاج", "السلطه", "العصير", "المحل", "البائع",
)


@dataclass(frozen=True)
class PlantedCorpus:
    corpus: LabeledCorpus
    negated_ids: frozenset[str]

    @property
    def planted_rate(self) -> float:
        return len(self.negated_ids) / len(self.corpus)


def check_vocabulary(config: NegationConfig, lexicon: SentimentLexicon) -> None:
    """Fail loudly if the generator's word lists clash with the given resources."""
    for w in map(normalize_word, POSITIVE_WORDS):
        if lexicon.polarity(w) is not PolarityLabel.POSITIVE:
            raise ValueError(f"{w!r} is not a positive lexicon word")
    for w in map(normalize_word, NEGATIVE_WORDS):
        if lexicon.polarity(w) is not PolarityLabel.NEGATIVE:
            raise ValueError(f"{w!r} is not a negative lexicon word")
    context_words = set()
    for ctx in config.context_exceptions.values():
        context_words |= ctx.before
        context_words |= {seq[0] for seq in ctx.after}
    for w in map(normalize_word, FILLERS):
        if w in lexicon or w in config.triggers or w in config.superlatives or w in config.exceptional_words:
            raise ValueError(f"filler {w!r} is not neutral")
        if w in context_words:
            raise ValueError(f"filler {w!r} appears in a trigger context list")
    for t in map(normalize_word, TRIGGERS):
        if t not in config.triggers:
            raise ValueError(f"{t!r} is not a configured trigger")


def generate_planted_corpus(
    n_reviews: int = 400,
    negated_fraction: float = 0.25,
    seed: int = 0,
    window: int = 5,
    min_fillers: int = 4,
    max_fillers: int = 8,
) -> PlantedCorpus:
    """Balanced corpus with ``round(n_reviews * negated_fraction)`` negated reviews.

    Negated reviews are split evenly between positive and negative opinion
    words, so both gold classes receive the same number of them.
    """
    if n_reviews % 4:
        raise ValueError("n_reviews must be a multiple of 4 (balanced classes and negation)")
    n_neg_reviews = round(n_reviews * negated_fraction)
    if n_neg_reviews % 2 or not 0 <= n_neg_reviews <= n_reviews:
        raise ValueError("the negated count must be even and within the corpus size")
    rng = random.Random(seed)
    half = n_reviews // 2
    plans = []
    # (opinion polarity, negated)
    plans += [(PolarityLabel.POSITIVE, True)] * (n_neg_reviews // 2)
    plans += [(PolarityLabel.NEGATIVE, True)] * (n_neg_reviews // 2)
    plans += [(PolarityLabel.POSITIVE, False)] * (half - n_neg_reviews // 2)
    plans += [(PolarityLabel.NEGATIVE, False)] * (half - n_neg_reviews // 2)
    rng.shuffle(plans)

    reviews, negated_ids = [], set()
    for i, (polarity, negated) in enumerate(plans):
        words = POSITIVE_WORDS if polarity is PolarityLabel.POSITIVE else NEGATIVE_WORDS
        opinion = rng.choice(words)
        tokens = [rng.choice(FILLERS) for _ in range(rng.randint(min_fillers, max_fillers))]
        at = rng.randint(0, len(tokens))
        if negated:
            gap = rng.randint(0, min(window - 1, len(tokens)))
            at = min(at, len(tokens) - gap)
            tokens.insert(at, rng.choice(TRIGGERS))
            at += 1 + gap
        tokens.insert(at, opinion)
        label = polarity
        if negated:
            label = PolarityLabel.NEGATIVE if polarity is PolarityLabel.POSITIVE else PolarityLabel.POSITIVE
        rid = f"s{i:04d}"
        if negated:
            negated_ids.add(rid)
        text = " ".join(tokens) + rng.choice(("", ".", "!", " !!"))
        reviews.append(Review(rid, text, label))
    return PlantedCorpus(LabeledCorpus(tuple(reviews)), frozenset(negated_ids))
