"""Negation scope tagging: the lexicon-guided rule engine and the baseline scopes.

Four scope policies are supported:

``none``
    no tagging at all (plain uni-grams).
``window``
    every token in the ``window_length`` tokens after any trigger is tagged.
``sentence``
    every token from a trigger up to the end of its sentence is tagged.
``rules``
    the rule engine.  A trigger is first checked against its adjacent
    context (cases 4-6: the word is not used as a negation there).  Its
    window is then checked for an exceptional word or a superlative ahead of
    the first opinion word (cases 1-2: the negation emphasises rather than
    flips).  Otherwise only the opinion words that share the polarity of the
    first opinion word in the window are tagged (case 3).

All taggers are pure; they return a new :class:`TokenizedReview` whose
tokens carry ``negated=True`` where tagged.  Trigger tokens are never tagged.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Optional

from negscope.corpus import NegationConfig, SentimentLexicon
from negscope.preprocess import TokenizedReview

NEGATION_SUFFIX = "_!"


class PolicyKind(str, enum.Enum):
    NONE = "none"
    WINDOW = "window"
    SENTENCE = "sentence"
    RULES = "rules"

    def __str__(self) -> str:
        return self.value


POLICY_LABELS = {
    PolicyKind.NONE: "baseline1 (no negation)",
    PolicyKind.WINDOW: "baseline2 (5-token window)",
    PolicyKind.SENTENCE: "baseline3 (to sentence end)",
    PolicyKind.RULES: "rule-based",
}


@dataclass(frozen=True)
class ScopePolicy:
    kind: PolicyKind
    window_length: int = 5

    def __post_init__(self):
        object.__setattr__(self, "kind", PolicyKind(self.kind))
        if self.window_length < 1:
            raise ValueError("window_length must be >= 1")

    @classmethod
    def parse(cls, name: str, window_length: int = 5) -> "ScopePolicy":
        try:
            return cls(PolicyKind(name), window_length)
        except ValueError:
            choices = ", ".join(k.value for k in PolicyKind)
            raise ValueError(f"unknown policy {name!r} (choose from {choices})") from None

    def __str__(self) -> str:
        return self.kind.value


class Case(enum.IntEnum):
    EXCEPTIONAL_WORD = 1
    SUPERLATIVE = 2
    MIXED_POLARITY = 3
    MA_NOT_NEGATION = 4
    GHAIR_NOT_NEGATION = 5
    OTHER_NOT_NEGATION = 6


SUPPRESSING_CASES = frozenset(Case) - {Case.MIXED_POLARITY}


@dataclass(frozen=True)
class TriggerOccurrence:
    token_index: int
    trigger: str
    kind: str = "raw"


@dataclass(frozen=True)
class ContextVerdict:
    is_negation: bool
    fired_case: Optional[Case] = None


@dataclass(frozen=True)
class ScopeVerdict:
    suppress: bool
    fired_case: Optional[Case] = None


@dataclass(frozen=True)
class TriggerRecord:
    trigger_index: int
    trigger: str
    fired_case: Optional[Case]
    tagged_indices: tuple[int, ...]
    skipped: tuple[tuple[int, str], ...] = ()

    def describe(self) -> str:
        case = "none" if self.fired_case is None else str(int(self.fired_case))
        tagged = ",".join(str(i) for i in self.tagged_indices)
        return f"{self.trigger}@{self.trigger_index} case={case} tagged=[{tagged}]"

    def to_dict(self) -> dict:
        return {
            "trigger": self.trigger,
            "index": self.trigger_index,
            "case": None if self.fired_case is None else int(self.fired_case),
            "tagged": list(self.tagged_indices),
            "skipped": [[i, reason] for i, reason in self.skipped],
        }


@dataclass(frozen=True)
class RuleTrace:
    records: tuple[TriggerRecord, ...] = ()

    @property
    def tagged_indices(self) -> frozenset[int]:
        return frozenset(i for r in self.records for i in r.tagged_indices)


def match_raw_triggers(review: TokenizedReview, config: NegationConfig) -> list[TriggerOccurrence]:
    return [
        TriggerOccurrence(t.position, t.surface)
        for t in review.tokens
        if t.surface in config.triggers
    ]


def _case_for_trigger(trigger: str) -> Case:
    if trigger == "ما":
        return Case.MA_NOT_NEGATION
    if trigger == "غير":
        return Case.GHAIR_NOT_NEGATION
    return Case.OTHER_NOT_NEGATION


def filter_trigger_context(
    review: TokenizedReview, occ: TriggerOccurrence, config: NegationConfig
) -> ContextVerdict:
    """Reject a trigger whose neighbours show it is not a negation here."""
    ctx = config.context_exceptions.get(occ.trigger)
    if ctx is None:
        return ContextVerdict(True)
    surfaces = review.surfaces
    i = occ.token_index
    hit = i > 0 and surfaces[i - 1] in ctx.before
    if not hit:
        following = tuple(surfaces[i + 1 :])
        hit = any(following[: len(seq)] == seq for seq in ctx.after)
    if hit:
        return ContextVerdict(False, _case_for_trigger(occ.trigger))
    return ContextVerdict(True)


def scope_of(review: TokenizedReview, trigger_index: int, policy: ScopePolicy) -> range:
    n = len(review.tokens)
    start = trigger_index + 1
    if policy.kind is PolicyKind.SENTENCE:
        end = next((b for b in review.sentence_breaks if b > trigger_index), n)
        return range(start, end)
    if policy.kind is PolicyKind.NONE:
        return range(start, start)
    return range(start, min(trigger_index + policy.window_length + 1, n))


def _opinion_index(
    review: TokenizedReview, scope: range, config: NegationConfig, lexicon: SentimentLexicon
) -> Optional[int]:
    """Index of the first opinion word in scope; superlatives and triggers do not count."""
    for i in scope:
        s = review.tokens[i].surface
        if s in lexicon and s not in config.superlatives and s not in config.triggers:
            return i
    return None


def check_scope_exceptions(
    review: TokenizedReview,
    trigger_index: int,
    scope: range,
    config: NegationConfig,
    lexicon: SentimentLexicon,
) -> ScopeVerdict:
    first = _opinion_index(review, scope, config, lexicon)
    limit = scope.stop if first is None else first
    ahead = {review.tokens[i].surface for i in range(scope.start, limit)}
    if ahead & config.exceptional_words:
        return ScopeVerdict(True, Case.EXCEPTIONAL_WORD)
    if ahead & config.superlatives:
        return ScopeVerdict(True, Case.SUPERLATIVE)
    return ScopeVerdict(False)


def _with_tags(review: TokenizedReview, positions) -> TokenizedReview:
    positions = set(positions)
    if not positions:
        return review
    tokens = tuple(
        replace(t, negated=True) if t.position in positions and not t.negated else t
        for t in review.tokens
    )
    return replace(review, tokens=tokens)


def tag_rule_based(
    review: TokenizedReview, config: NegationConfig, lexicon: SentimentLexicon
) -> tuple[TokenizedReview, RuleTrace]:
    policy = ScopePolicy(PolicyKind.RULES, config.window_length)
    tagged = set(review.negated_positions)
    records = []
    for occ in match_raw_triggers(review, config):
        context = filter_trigger_context(review, occ, config)
        if not context.is_negation:
            records.append(TriggerRecord(occ.token_index, occ.trigger, context.fired_case, ()))
            continue
        scope = scope_of(review, occ.token_index, policy)
        verdict = check_scope_exceptions(review, occ.token_index, scope, config, lexicon)
        if verdict.suppress:
            records.append(TriggerRecord(occ.token_index, occ.trigger, verdict.fired_case, ()))
            continue
        first = _opinion_index(review, scope, config, lexicon)
        target = None if first is None else lexicon.polarity(review.tokens[first].surface)
        fired = None
        hits, skipped = [], []
        for i in scope:
            s = review.tokens[i].surface
            if s in config.triggers:
                skipped.append((i, "trigger"))
            elif s in config.superlatives:
                skipped.append((i, "superlative"))
            elif s not in lexicon:
                skipped.append((i, "not-opinion"))
            elif lexicon.polarity(s) is not target:
                fired = Case.MIXED_POLARITY
                skipped.append((i, "other-polarity"))
            elif i in tagged:
                skipped.append((i, "already-tagged"))
            else:
                hits.append(i)
        tagged.update(hits)
        records.append(TriggerRecord(occ.token_index, occ.trigger, fired, tuple(hits), tuple(skipped)))
    return _with_tags(review, tagged), RuleTrace(tuple(records))


def _tag_scopes(review: TokenizedReview, config: NegationConfig, policy: ScopePolicy) -> TokenizedReview:
    positions = set()
    for occ in match_raw_triggers(review, config):
        for i in scope_of(review, occ.token_index, policy):
            if review.tokens[i].surface not in config.triggers:
                positions.add(i)
    return _with_tags(review, positions)


def tag_window(review: TokenizedReview, config: NegationConfig) -> TokenizedReview:
    return _tag_scopes(review, config, ScopePolicy(PolicyKind.WINDOW, config.window_length))


def tag_to_sentence_end(review: TokenizedReview, config: NegationConfig) -> TokenizedReview:
    return _tag_scopes(review, config, ScopePolicy(PolicyKind.SENTENCE, config.window_length))


def apply_policy(
    review: TokenizedReview,
    policy: ScopePolicy,
    config: NegationConfig,
    lexicon: SentimentLexicon,
) -> tuple[TokenizedReview, Optional[RuleTrace]]:
    if policy.window_length != config.window_length:
        config = replace(config, window_length=policy.window_length)
    kind = policy.kind
    if kind is PolicyKind.NONE:
        return review, None
    if kind is PolicyKind.WINDOW:
        return tag_window(review, config), None
    if kind is PolicyKind.SENTENCE:
        return tag_to_sentence_end(review, config), None
    return tag_rule_based(review, config, lexicon)


def render_tagged(review: TokenizedReview) -> str:
    return " ".join(t.surface + NEGATION_SUFFIX if t.negated else t.surface for t in review.tokens)
