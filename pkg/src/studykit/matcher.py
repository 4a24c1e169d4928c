"""Fuzzy paragraph matching: fingerprint candidates, edit-distance ranking.

Lookup is two-stage. A query's fingerprint is binary-searched in the
chapter's sorted fingerprint map and the positional neighborhood around the
nearest entry becomes the candidate set; candidates are then scored by
normalized Levenshtein similarity and the top k returned.

The neighborhood is widened to include every entry whose fingerprint equals
the query's exactly, so a verbatim query always reaches its source paragraph
even when many paragraphs collide on one fingerprint value. Candidates much
longer than the query are scored chunk-wise (query-sized windows, half-query
stride) and keep their best chunk score.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass

import numpy as np

from .errors import BothEmptyError, EmptyIndexError, EmptyQueryError
from .indexer import FingerprintEntry, SectionIndex, fingerprint, normalize

DEFAULT_WINDOW = 16

# Above this ratio of candidate length to query length, score chunk-wise.
_CHUNK_RATIO = 4


@dataclass(frozen=True)
class MatchResult:
    paragraph_id: str
    similarity: float
    candidate_rank: int


def levenshtein(a: str, b: str, cap: int | None = None) -> int:
    """Exact edit distance (insert/delete/substitute, unit costs).

    With ``cap`` set, any distance above it is reported as ``cap + 1``: row
    minima of the distance table never decrease, so the scan can stop as soon
    as a whole row exceeds the cap. Results at or below the cap stay exact.
    """
    def clamp(distance: int) -> int:
        if cap is not None and distance > cap:
            return cap + 1
        return distance

    if cap is not None and abs(len(a) - len(b)) > cap:
        return cap + 1
    if not a:
        return clamp(len(b))
    if not b:
        return clamp(len(a))
    if len(a) < len(b):
        a, b = b, a  # iterate over the longer string, vectorize the shorter

    codes_b = np.fromiter(map(ord, b), dtype=np.int64, count=len(b))
    offsets = np.arange(len(b) + 1, dtype=np.int64)
    prev = offsets.copy()
    cur = np.empty(len(b) + 1, dtype=np.int64)
    for i, ch in enumerate(a, start=1):
        cur[0] = i
        np.minimum(prev[:-1] + (codes_b != ord(ch)), prev[1:] + 1, out=cur[1:])
        # Fold in insertions: min over j' <= j of cur[j'] + (j - j').
        np.minimum.accumulate(cur - offsets, out=cur)
        cur += offsets
        prev, cur = cur, prev
        if cap is not None and int(prev.min()) > cap:
            return cap + 1
    return clamp(int(prev[-1]))


def similarity(q: str, c: str) -> float:
    """1 - levenshtein(q, c) / max(|q|, |c|); undefined for two empties."""
    longest = max(len(q), len(c))
    if longest == 0:
        raise BothEmptyError("similarity undefined for two empty strings")
    return 1.0 - levenshtein(q, c) / longest


def _capped_similarity(q: str, c: str, threshold: float) -> float | None:
    """similarity(q, c), or None when it provably falls below ``threshold``.

    The cap leaves a one-edit margin, so every candidate whose similarity
    could reach the threshold (ties included) is scored exactly.
    """
    longest = max(len(q), len(c))
    if threshold <= 0.0:
        return similarity(q, c)
    cap = int((1.0 - threshold) * longest) + 1
    distance = levenshtein(q, c, cap=cap)
    if distance > cap:
        return None
    return 1.0 - distance / longest


def _chunked_similarity(q: str, c: str, threshold: float = 0.0) -> float | None:
    """Best query-sized-chunk similarity for candidates much longer than q."""
    if len(c) <= _CHUNK_RATIO * len(q):
        return _capped_similarity(q, c, threshold)
    size = len(q)
    stride = max(1, size // 2)
    starts = list(range(0, len(c) - size + 1, stride))
    if starts[-1] != len(c) - size:
        starts.append(len(c) - size)  # always score the tail
    best = None
    for start in starts:
        score = _capped_similarity(q, c[start : start + size], threshold)
        if score is not None and (best is None or score > best):
            best = score
    return best


def find_candidates(
    query_fp: float, index: SectionIndex, window: int = DEFAULT_WINDOW
) -> list[FingerprintEntry]:
    """Nearest fingerprint entry plus ``window`` neighbors on each side.

    Clipped at the array bounds, then extended to cover every entry whose
    fingerprint equals ``query_fp`` exactly.
    """
    fp_map = index.fingerprint_map
    if not fp_map:
        raise EmptyIndexError(f"chapter {index.chapter_id!r} has no fingerprints")

    values = index.fingerprint_values
    pos = bisect_left(values, query_fp)
    if pos >= len(values):
        nearest = len(values) - 1
    elif pos == 0:
        nearest = 0
    else:
        nearest = pos if values[pos] - query_fp < query_fp - values[pos - 1] else pos - 1

    lo = max(0, nearest - window)
    hi = min(len(values) - 1, nearest + window)
    while lo > 0 and values[lo - 1] == query_fp:
        lo -= 1
    while hi < len(values) - 1 and values[hi + 1] == query_fp:
        hi += 1
    return list(fp_map[lo : hi + 1])


def match_top_k(
    query: str,
    index: SectionIndex,
    k: int = 3,
    window: int = DEFAULT_WINDOW,
) -> list[MatchResult]:
    """Top ``k`` paragraphs most similar to ``query`` (fewer if fewer exist)."""
    norm = normalize(query)
    if not norm:
        raise EmptyQueryError("query is empty after normalization")
    candidates = find_candidates(fingerprint(norm), index, window=window)

    # Visit length-plausible candidates first so the running kth-best score
    # prunes the rest cheaply; pruning is exact (see _capped_similarity).
    candidates = sorted(candidates, key=lambda c: abs(len(c.normalized_text) - len(norm)))
    scored: list[tuple[float, FingerprintEntry]] = []
    threshold = 0.0
    for candidate in candidates:
        score = _chunked_similarity(norm, candidate.normalized_text, threshold)
        if score is None:
            continue
        scored.append((score, candidate))
        if len(scored) >= k:
            threshold = sorted(scored, key=lambda pair: -pair[0])[k - 1][0]
    ranked = sorted(scored, key=lambda pair: (-pair[0], pair[1].paragraph_id))
    return [
        MatchResult(paragraph_id=c.paragraph_id, similarity=score, candidate_rank=rank)
        for rank, (score, c) in enumerate(ranked[:k], start=1)
    ]
