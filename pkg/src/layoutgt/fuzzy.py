"""Bounded approximate string matching under unit-cost Levenshtein distance.

Three searches, each a small dynamic program:

* :func:`levenshtein` -- global distance between two strings.
* :func:`find_near_match` -- best substring of ``source`` for ``target``
  (free start and end on the source side).
* :func:`match_prefix` -- best prefix of ``source`` for ``target``
  (start pinned at 0, free end). This is what the sequential matcher uses to
  consume a textline at the current position of a node's text.

The anchored search evaluates only the diagonal band that can still finish
inside the budget, O(len(target) * budget). The free search is the classic
Sellers column DP, O(len(source) * len(target)).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

__all__ = [
    "MatchBudget",
    "PrefixMatch",
    "SpanMatch",
    "find_near_match",
    "levenshtein",
    "match_prefix",
    "max_distance",
]


def max_distance(length: int) -> int:
    """Largest edit distance accepted for a target of ``length`` characters.

    20% of the length up to 20 characters, 15% up to 40, 10% beyond, floored.
    Integer arithmetic keeps the piece boundaries exact (0.15 * 40 == 6).
    """
    if length < 0:
        raise ValueError(f"target length must be non-negative, got {length}")
    if length <= 20:
        return length // 5
    if length <= 40:
        return (3 * length) // 20
    return length // 10


@dataclass(frozen=True)
class MatchBudget:
    length: int
    limit: int

    @classmethod
    def for_target(cls, target: str) -> "MatchBudget":
        return cls(len(target), max_distance(len(target)))


class SpanMatch(NamedTuple):
    start: int
    end: int
    dist: int


class PrefixMatch(NamedTuple):
    end: int
    dist: int


def levenshtein(a: str, b: str, max_dist: int | None = None) -> int:
    """Unit-cost edit distance between ``a`` and ``b``.

    With ``max_dist`` set, any value above the bound is reported as
    ``max_dist + 1`` and the computation stops early.
    """
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        d = len(a)
        return d if max_dist is None or d <= max_dist else max_dist + 1
    if max_dist is not None and len(a) - len(b) > max_dist:
        return max_dist + 1

    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        current = [i]
        row_min = i
        for j, cb in enumerate(b, 1):
            v = previous[j - 1] + (ca != cb)
            if previous[j] + 1 < v:
                v = previous[j] + 1
            if current[j - 1] + 1 < v:
                v = current[j - 1] + 1
            current.append(v)
            if v < row_min:
                row_min = v
        if max_dist is not None and row_min > max_dist:
            return max_dist + 1
        previous = current
    d = previous[-1]
    if max_dist is not None and d > max_dist:
        return max_dist + 1
    return d


def find_near_match(target: str, source: str, budget: MatchBudget | int | None = None) -> SpanMatch | None:
    """Closest occurrence of ``target`` inside ``source``.

    Returns the minimum-distance span; among equal distances the smallest
    start wins, then the smallest end. ``None`` when every substring is more
    than ``limit`` edits away. ``budget`` defaults to :func:`max_distance` of
    the target length.
    """
    limit = _budget_value(target, budget)
    m = len(target)
    n = len(source)
    if m == 0:
        return SpanMatch(0, 0, 0)

    # Column-major Sellers DP: cost[i] is the distance of target[:i] against
    # the best substring ending at the current source position; first[i] is
    # the smallest start among the optimal alignments reaching that cell.
    cost = list(range(m + 1))
    first = [0] * (m + 1)
    best: SpanMatch | None = None
    if m <= limit:
        best = SpanMatch(0, 0, m)

    for j in range(1, n + 1):
        c = source[j - 1]
        new_cost = [0] * (m + 1)
        new_first = [j] * (m + 1)
        for i in range(1, m + 1):
            # candidates: substitution/match (diag), target char skipped (up),
            # source char skipped (left); keep min cost, then min start
            v = cost[i - 1] + (target[i - 1] != c)
            f = first[i - 1]
            up = new_cost[i - 1] + 1
            if up < v or (up == v and new_first[i - 1] < f):
                v, f = up, new_first[i - 1]
            left = cost[i] + 1
            if left < v or (left == v and first[i] < f):
                v, f = left, first[i]
            new_cost[i] = v
            new_first[i] = f
        cost, first = new_cost, new_first
        d = cost[m]
        if d <= limit:
            cand = SpanMatch(first[m], j, d)
            if best is None or (cand.dist, cand.start, cand.end) < (best.dist, best.start, best.end):
                best = cand
    return best


def match_prefix(target: str, source: str, max_dist: int | None = None) -> PrefixMatch | None:
    """Best alignment of ``target`` against a prefix of ``source``.

    Minimises ``levenshtein(target, source[:end])`` over ``end``; ties go to
    the longest prefix, so a line that drops a letter still consumes the
    whole word it was printed from. ``None`` when the minimum exceeds ``max_dist``
    (default :func:`max_distance` of the target length).
    """
    limit = max_distance(len(target)) if max_dist is None else max_dist
    m = len(target)
    if source.startswith(target):
        return PrefixMatch(m, 0)
    n = min(len(source), m + limit)
    inf = limit + 1

    # Row i covers target[:i]; only columns with |i - j| <= limit can finish
    # inside the budget.
    prev = [j if j <= limit else inf for j in range(n + 1)]
    for i in range(1, m + 1):
        t = target[i - 1]
        lo = max(0, i - limit)
        hi = min(n, i + limit)
        cur = [inf] * (n + 1)
        if lo == 0:
            cur[0] = i if i <= limit else inf
        row_min = cur[0] if lo == 0 else inf
        for j in range(max(1, lo), hi + 1):
            v = prev[j - 1] + (t != source[j - 1])
            w = prev[j] + 1
            if w < v:
                v = w
            w = cur[j - 1] + 1
            if w < v:
                v = w
            if v > inf:
                v = inf
            cur[j] = v
            if v < row_min:
                row_min = v
        if row_min > limit:
            return None
        prev = cur

    best_end = -1
    best_d = inf
    for j in range(max(0, m - limit), n + 1):
        if prev[j] <= best_d:
            best_d = prev[j]
            best_end = j
    if best_d > limit:
        return None
    return PrefixMatch(best_end, best_d)


def _budget_value(target: str, budget: MatchBudget | int | None) -> int:
    if budget is None:
        return max_distance(len(target))
    if isinstance(budget, MatchBudget):
        return budget.limit
    return int(budget)
