"""Slow, obviously-correct reference implementations used by the tests.

None of these import the code under test beyond plain data holders.
"""

from __future__ import annotations

import itertools
import math


# ---------------------------------------------------------------- distances

def budget_formula(l: int) -> int:
    """The piecewise budget written out with floats and floor."""
    if l <= 20:
        return math.floor(0.2 * l + 1e-9)
    if l <= 40:
        return math.floor(0.15 * l + 1e-9)
    return math.floor(0.1 * l + 1e-9)


def edit_distance(a: str, b: str) -> int:
    """Textbook Levenshtein distance, one full row at a time."""
    prev = list(range(len(b) + 1))
    for i in range(1, len(a) + 1):
        cur = [i] + [0] * len(b)
        for j in range(1, len(b) + 1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] != b[j - 1]))
        prev = cur
    return prev[-1]


def min_substring_distance(target: str, source: str) -> int:
    """min over every substring ``source[i:j]`` of edit_distance(target, it).

    For each start ``i`` one full DP table of ``source[i:]`` against
    ``target`` gives the distance to every ``source[i:j]`` at once (its last
    row), so every substring is still visited.
    """
    best = len(target)
    m = len(target)
    for i in range(len(source) + 1):
        col = list(range(m + 1))          # distances of target[:r] to source[i:i]
        best = min(best, col[m])
        for j in range(i, len(source)):
            new = [col[0] + 1] + [0] * m
            for r in range(1, m + 1):
                new[r] = min(col[r] + 1, new[r - 1] + 1, col[r - 1] + (target[r - 1] != source[j]))
            col = new
            best = min(best, col[m])
    return best


def brute_min_substring_distance(target: str, source: str) -> int:
    """The same minimum by calling edit_distance on each substring separately."""
    return min(edit_distance(target, source[i:j])
               for i in range(len(source) + 1) for j in range(i, len(source) + 1))


# ------------------------------------------------------------- rasterization

def raster_contour(boxes):
    """Outline of the union of axis-aligned boxes, by rasterizing.

    Boxes are ``(x0, y0, x1, y1)`` tuples with y pointing up. Coordinates are
    compressed to a grid of the distinct values; every cell whose centre lies
    in some box is filled, boundary unit edges are collected and chained,
    and collinear vertices are dropped. Returns the vertex cycle clockwise
    (as seen with y up) starting at the top-left vertex. Assumes the union is
    one simply connected region.
    """
    xs = sorted({v for b in boxes for v in (b[0], b[2])})
    ys = sorted({v for b in boxes for v in (b[1], b[3])})
    filled = set()
    for i in range(len(xs) - 1):
        cx = (xs[i] + xs[i + 1]) / 2
        for j in range(len(ys) - 1):
            cy = (ys[j] + ys[j + 1]) / 2
            if any(b[0] <= cx <= b[2] and b[1] <= cy <= b[3] for b in boxes):
                filled.add((i, j))
    # directed boundary edges with the filled cell on the right-hand side
    # (walking clockwise in a y-up frame)
    nxt = {}
    for (i, j) in filled:
        if (i, j + 1) not in filled:  # top edge, walk left -> right
            nxt[(i, j + 1)] = (i + 1, j + 1)
        if (i + 1, j) not in filled:  # right edge, walk top -> bottom
            nxt[(i + 1, j + 1)] = (i + 1, j)
        if (i, j - 1) not in filled:  # bottom edge, walk right -> left
            nxt[(i + 1, j)] = (i, j)
        if (i - 1, j) not in filled:  # left edge, walk bottom -> top
            nxt[(i, j)] = (i, j + 1)
    start = min(nxt, key=lambda p: (-p[1], p[0]))
    cycle = [start]
    p = nxt[start]
    while p != start:
        cycle.append(p)
        p = nxt[p]
    if len(cycle) != len(nxt):
        raise ValueError("union is not a single simple region")
    pts = [(xs[i], ys[j]) for i, j in cycle]
    # drop collinear vertices
    out = []
    n = len(pts)
    for k in range(n):
        a, b, c = pts[k - 1], pts[k], pts[(k + 1) % n]
        if (a[0] == b[0] == c[0]) or (a[1] == b[1] == c[1]):
            continue
        out.append(b)
    s = min(range(len(out)), key=lambda k: (-out[k][1], out[k][0]))
    return out[s:] + out[:s]


# ---------------------------------------------------------------- detection

def box_iou(a, b) -> float:
    ix = max(0.0, min(a[2], b[2]) - max(a[0], b[0]))
    iy = max(0.0, min(a[3], b[3]) - max(a[1], b[1]))
    inter = ix * iy
    union = (a[2] - a[0]) * (a[3] - a[1]) + (b[2] - b[0]) * (b[3] - b[1]) - inter
    return inter / union if union > 0 else 0.0


def greedy_hits(dets, golds, thr):
    """Rank detections by score (stable) and let each grab its best free gold.

    ``dets`` are ``(box, score)``; returns hit flags in rank order.
    """
    order = sorted(range(len(dets)), key=lambda i: -dets[i][1])
    free = set(range(len(golds)))
    flags = []
    for i in order:
        scored = [(box_iou(dets[i][0], golds[g]), -g, g) for g in free]
        scored = [s for s in scored if s[0] >= thr - 1e-12]
        if scored:
            free.discard(max(scored)[2])
            flags.append(True)
        else:
            flags.append(False)
    return flags


def pr_curve_ap(flags, n_gold: int) -> float:
    """101-point AP straight from the definition, enumerating every cutoff.

    For each recall level r the interpolated precision is the largest
    precision over all cutoffs k whose recall is at least r.
    """
    cut = []
    for k in range(1, len(flags) + 1):
        tp = sum(flags[:k])
        cut.append((tp / n_gold, tp / k))
    total = 0.0
    for step in range(101):
        r = step / 100
        ps = [p for (rec, p) in cut if rec >= r - 1e-12]
        total += max(ps) if ps else 0.0
    return total / 101


def all_matchings_equal_greedy(dets, golds, thr) -> bool:
    """True when every maximum matching agrees with greedy on hit count.

    Used to pick instances where the greedy choice is unambiguous enough for
    an exhaustive enumeration to stand as a second opinion.
    """
    n_hits = sum(greedy_hits(dets, golds, thr))
    best = 0
    for perm in itertools.permutations(range(len(golds)), min(len(dets), len(golds))):
        hits = sum(box_iou(dets[i][0], golds[g]) >= thr - 1e-12 for i, g in enumerate(perm))
        best = max(best, hits)
    return best == n_hits
