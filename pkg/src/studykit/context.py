"""Token-budgeted context selection for quiz generation.

Long sections cannot be shipped to a model wholesale, so the selector keeps
the first k sentences of each paragraph, shrinking k until the estimated
token count fits the budget. If even k=1 is too large, per-paragraph sentence
groups are ranked by co-occurrence relevance against the section title and
kept greedily (in document order) while the budget holds.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .errors import BudgetTooSmallError
from .indexer import Section, count_tokens, normalize

DEFAULT_LIMIT_TOKENS = 5000
DEFAULT_RESERVED_TOKENS = 600
DEFAULT_K_INIT = 5
DEFAULT_COOCCURRENCE_WINDOW = 4

# Sentence boundary: terminal punctuation followed by whitespace, on raw text.
_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+")


@dataclass(frozen=True)
class ContextBudget:
    limit_tokens: int = DEFAULT_LIMIT_TOKENS
    reserved_tokens: int = DEFAULT_RESERVED_TOKENS

    def __post_init__(self):
        if self.limit_tokens <= 0:
            raise ValueError("limit_tokens must be positive")
        if self.reserved_tokens < 0:
            raise ValueError("reserved_tokens must be nonnegative")
        if self.limit_tokens < self.reserved_tokens:
            raise ValueError("limit_tokens must be >= reserved_tokens")

    @property
    def usable_tokens(self) -> int:
        return self.limit_tokens - self.reserved_tokens


@dataclass(frozen=True)
class CooccurrenceVector:
    """Sparse unordered-word-pair counts plus the contributing vocabulary."""

    pairs: dict[tuple[str, str], int]
    vocabulary: frozenset[str]

    def __bool__(self) -> bool:
        return bool(self.pairs)


def split_sentences(text: str) -> list[str]:
    return [s for s in _SENTENCE_SPLIT.split(text) if s.strip()]


def vectorize(text: str, window: int = DEFAULT_COOCCURRENCE_WINDOW) -> CooccurrenceVector:
    """Count word pairs whose positions are at most ``window`` apart."""
    if window < 1:
        raise ValueError("window must be positive")
    words = normalize(text).split()
    pairs: dict[tuple[str, str], int] = {}
    for i, first in enumerate(words):
        for j in range(i + 1, min(i + window, len(words) - 1) + 1):
            key = (first, words[j]) if first <= words[j] else (words[j], first)
            pairs[key] = pairs.get(key, 0) + 1
    return CooccurrenceVector(pairs=pairs, vocabulary=frozenset(words))


def relevance(a: CooccurrenceVector, b: CooccurrenceVector) -> float:
    """Cosine similarity over the sparse pair space; 0 for empty vectors."""
    if not a or not b:
        return 0.0
    dot = sum(count * b.pairs.get(pair, 0) for pair, count in a.pairs.items())
    if dot == 0:
        return 0.0
    norm_a = math.sqrt(sum(c * c for c in a.pairs.values()))
    norm_b = math.sqrt(sum(c * c for c in b.pairs.values()))
    return dot / (norm_a * norm_b)


def _first_k_groups(section: Section, k: int) -> list[str]:
    """First ``k`` sentences of each paragraph, one joined group per paragraph."""
    groups = []
    for para in section.paragraphs:
        sentences = split_sentences(para.raw_text)
        if sentences:
            groups.append(" ".join(sentences[:k]))
    return groups


def select_context(
    section: Section,
    budget: ContextBudget,
    k_init: int = DEFAULT_K_INIT,
) -> str:
    """Select section text that fits the budget, preferring early sentences.

    The result is always a subsequence of the section's sentences in document
    order, and its estimated token count never exceeds
    ``budget.limit_tokens - budget.reserved_tokens``.
    """
    if k_init < 1:
        raise ValueError("k_init must be positive")
    usable = budget.usable_tokens
    if count_tokens(section.title) > usable:
        raise BudgetTooSmallError(
            f"budget of {usable} tokens cannot hold the section title",
        )

    full_text = section.text
    if count_tokens(full_text) <= usable:
        return full_text

    for k in range(k_init, 0, -1):
        candidate = "\n\n".join(_first_k_groups(section, k))
        if count_tokens(candidate) <= usable:
            return candidate

    # Even one sentence per paragraph is too much: rank the k=1 groups by
    # relevance to the title and keep the best ones that still fit.
    groups = _first_k_groups(section, 1)
    title_vec = vectorize(section.title)
    ranked = sorted(
        range(len(groups)),
        key=lambda i: (-relevance(vectorize(groups[i]), title_vec), i),
    )
    kept: set[int] = set()
    for idx in ranked:
        trial = "\n\n".join(groups[i] for i in sorted(kept | {idx}))
        if count_tokens(trial) <= usable:
            kept.add(idx)
    return "\n\n".join(groups[i] for i in sorted(kept))
