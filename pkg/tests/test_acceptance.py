"""The ten acceptance criteria, one test each, at their stated tolerances."""

from __future__ import annotations

import itertools
import json
import random
import string
import time
from collections import Counter
from pathlib import Path

import pytest

from acceptance_log import criterion
from body_fixtures import FIXTURES
from golden_corpus import CORPUS
from oracles import (
    brute_min_substring_distance, budget_formula, greedy_hits, min_substring_distance, pr_curve_ap, raster_contour,
)
from partition_corpus import SCALED, synthetic_pages
from synth import random_document

from layoutgt.article import parse_article
from layoutgt.categories import LayoutCategory
from layoutgt.cli import main
from layoutgt.elements import BBox, PageElements, Textbox, Textline
from layoutgt.evaluate import Detection, average_precision, map_50_95
from layoutgt.fuzzy import find_near_match, max_distance
from layoutgt.geometry import figure_body_box, main_text_box, search_bound, table_body_box, textline_segmentation
from layoutgt.partition import make_split, primary_kind
from layoutgt.pipeline import annotate_document
from layoutgt.quality import accept_page, annotation_quality

GOLDEN = Path(__file__).parent / "golden"
ALPHABET = string.ascii_lowercase + "  "


# 1 -------------------------------------------------------------------------

def test_c01_distance_budget():
    with criterion(1, "distance budget formula", budget_s=1):
        assert (max_distance(20), max_distance(40), max_distance(41)) == (4, 6, 4)
        for n in range(0, 501):
            assert max_distance(n) == budget_formula(n), n


# 2 -------------------------------------------------------------------------

ORACLE_CASES = json.loads((Path(__file__).parent / "fixtures" / "substring_oracle.json").read_text())


def test_c02_levenshtein_oracle():
    assert len(ORACLE_CASES) == 1000
    with criterion(2, "substring distance equals exhaustive oracle", budget_s=10):
        for case in ORACLE_CASES:
            target, source = case["target"], case["source"]
            got = find_near_match(target, source, len(target))   # budget wide enough never to cut
            assert got is not None
            assert got.dist == case["dist"], (target, source)


def test_frozen_oracle_values_are_current():
    for case in ORACLE_CASES[::20]:
        t, s = case["target"], case["source"]
        assert min_substring_distance(t, s) == brute_min_substring_distance(t, s) == case["dist"]


# 3 -------------------------------------------------------------------------

def mutate(rng: random.Random, s: str, k: int) -> str:
    chars = list(s)
    for _ in range(k):
        op = rng.choice("sid") if chars else "i"
        i = rng.randrange(len(chars) + (op == "i")) if chars or op == "i" else 0
        if op == "s":
            chars[i] = rng.choice(ALPHABET)
        elif op == "i":
            chars.insert(i, rng.choice(ALPHABET))
        else:
            del chars[i]
    return "".join(chars)


def test_c03_noise_recovery():
    rng = random.Random(3)
    with criterion(3, "recovery of targets under injected edits", budget_s=10):
        for _ in range(500):
            target = "".join(rng.choice(ALPHABET) for _ in range(rng.randint(1, 60)))
            k = rng.randint(0, max_distance(len(target)))
            noisy = mutate(rng, target, k)
            left = "".join(rng.choice(ALPHABET) for _ in range(rng.randint(0, 80)))
            right = "".join(rng.choice(ALPHABET) for _ in range(rng.randint(0, 80)))
            m = find_near_match(target, left + noisy + right)
            assert m is not None and m.dist <= k, (target, noisy, k)


# 4 -------------------------------------------------------------------------

def random_stack(rng: random.Random) -> list[tuple[float, float, float, float]]:
    out, y, prev = [], 1000.0, None
    for _ in range(rng.randint(1, 10)):
        h = rng.randint(8, 14)
        while True:
            x0 = rng.randint(0, 80)
            x1 = rng.randint(x0 + 20, 320)
            if prev is None or min(prev[2], x1) - max(prev[0], x0) > 0:
                break
        box = (x0, y - h, x1, y)
        out.append(box)
        prev = box
        mode = rng.choice("tgo")
        y -= h if mode == "t" else h + rng.randint(1, 5) if mode == "g" else h - rng.randint(1, 3)
    return out


def midpoint_closed(boxes):
    out = [list(b) for b in boxes]
    for i in range(len(out) - 1):
        if out[i][1] > out[i + 1][3]:
            out[i][1] = out[i + 1][3] = (out[i][1] + out[i + 1][3]) / 2
    return [tuple(b) for b in out]


def inside(vertices, x, y) -> bool:
    """Even-odd ray cast to +x; points on an edge count as inside."""
    n, hit = len(vertices), False
    for i in range(n):
        (ax, ay), (bx, by) = vertices[i], vertices[(i + 1) % n]
        if min(ax, bx) <= x <= max(ax, bx) and min(ay, by) <= y <= max(ay, by):
            return True
        if ax == bx and min(ay, by) <= y < max(ay, by) and ax > x:
            hit = not hit
    return hit


def simple_alternating(vertices) -> bool:
    n = len(vertices)
    if n < 4 or n % 2 or len(set(vertices)) != n:
        return False
    edges = [(vertices[i], vertices[(i + 1) % n]) for i in range(n)]
    kinds = []
    for (ax, ay), (bx, by) in edges:
        if ay == by and ax != bx:
            kinds.append("h")
        elif ax == bx and ay != by:
            kinds.append("v")
        else:
            return False
    if any(kinds[i] == kinds[i - 1] for i in range(n)):
        return False
    for i, j in itertools.combinations(range(n), 2):
        if j == i + 1 or (i == 0 and j == n - 1):
            continue
        (a, b), (c, d) = edges[i], edges[j]
        if (min(a[0], b[0]) <= max(c[0], d[0]) and min(c[0], d[0]) <= max(a[0], b[0])
                and min(a[1], b[1]) <= max(c[1], d[1]) and min(c[1], d[1]) <= max(a[1], b[1])):
            return False
    return True


def test_c04_segmentation_polygons():
    rng = random.Random(4)
    with criterion(4, "segmentation equals raster contour", budget_s=30):
        for _ in range(500):
            boxes = random_stack(rng)
            poly = textline_segmentation([BBox(*b) for b in boxes])
            v = poly.vertices
            assert simple_alternating(v), v
            for x0, y0, x1, y1 in boxes:
                for px, py in ((x0, y0), (x1, y0), (x0, y1), (x1, y1), ((x0 + x1) / 2, (y0 + y1) / 2)):
                    assert inside(v, px, py), ((px, py), v)
            expected = raster_contour(midpoint_closed(boxes))
            assert len(v) == len(expected), (v, expected)
            assert all(abs(a - c) <= 0.5 and abs(b - d) <= 0.5 for (a, b), (c, d) in zip(v, expected))


# 5 -------------------------------------------------------------------------

def test_c05_body_fixtures():
    with criterion(5, "figure and table body fixtures"):
        for fx in FIXTURES:
            text = [fx["caption"], *fx["text"]]
            graphics = fx.get("images", []) + fx.get("shapes", [])
            elements = text + fx.get("free", []) + graphics
            bound = search_bound(main_text_box(text), graphics=graphics)
            finder = figure_body_box if fx["kind"] == "figure" else table_body_box
            got = finder(fx["caption"], text, bound, elements)
            if fx["expected"] is None:
                assert got is None, fx["name"]
            else:
                assert got is not None, fx["name"]
                assert all(abs(a - b) <= 1e-6 for a, b in zip(got, fx["expected"])), (fx["name"], got)


# 6 -------------------------------------------------------------------------

def gate(share: int, title: bool) -> bool:
    covered, missed = BBox(0, 0, share, 1), BBox(0, 10, 1000 - share, 11)
    page = PageElements("p", 2000, 2000, tuple(Textbox.from_lines([Textline("x", b)]) for b in (covered, missed)))
    ratio = annotation_quality(page, [covered], BBox(0, 0, 1000, 20))
    assert ratio == share / 1000
    return accept_page(ratio, title)


def test_c06_quality_gate():
    with criterion(6, "quality gate boundaries"):
        assert [gate(s, False) for s in (989, 990, 992)] == [False, True, True]
        assert [gate(s, True) for s in (899, 900, 920)] == [False, True, True]


# 7 -------------------------------------------------------------------------

def test_c07_partition():
    pages = synthetic_pages(50)
    with criterion(7, "journal-level partition"):
        split = make_split(None, pages, seed=7, quotas=SCALED)
        tr, dv, te = (split.journals(n) for n in ("train", "dev", "test"))
        assert len({p.journal_id for p in pages}) == 50
        assert dv and te and not (tr & dv) and not (tr & te) and not (dv & te)
        for name in ("dev", "test"):
            counts = Counter(primary_kind(p.kinds) for p in getattr(split, name).values())
            assert all(counts[k] <= cap for k, cap in SCALED.pool.items())
        per_journal = Counter((p.journal_id, primary_kind(p.kinds)) for p in split.train.values())
        assert all(n <= SCALED.train[k] for (_, k), n in per_journal.items())
        pool = dv | te
        lists = [p for p in pages if "list" in p.kinds and p.journal_id in pool]
        assert lists and all(split.split_of(p.page_id) in ("dev", "test") for p in lists)
        assert make_split(None, pages, seed=7, quotas=SCALED).dumps().encode() == split.dumps().encode()


# 8 -------------------------------------------------------------------------

def test_c08_golden_run(tmp_path):
    with criterion(8, "end-to-end golden documents"):
        assert len(CORPUS) == 12
        code = main(["annotate", "--elements-dir", str(GOLDEN / "elements"), "--xml-dir", str(GOLDEN / "xml"),
                     "--out", str(tmp_path)])
        assert code == 0
        for name, _, _ in CORPUS:
            f = f"{name}.annotations.json"
            assert json.loads((tmp_path / f).read_text()) == json.loads((GOLDEN / "expected" / f).read_text()), name
        rows = [r.split("\t") for r in (tmp_path / "quality.tsv").read_text().splitlines()[1:]]
        rejected = [(pid, float(ratio)) for pid, ratio, _, acc in rows if acc == "0"]
        assert [pid for pid, _ in rejected] == ["g08_corrupted/2"]
        assert rejected[0][1] < 0.99


# 9 -------------------------------------------------------------------------

DET_BOXES = [BBox(0, 0, 10, 10), BBox(0, 0, 7, 10)]
GOLD_BOXES = [BBox(0, 0, 10, 10), BBox(0, 0, 8, 10), BBox(20, 0, 30, 10)]


def test_c09_evaluator():
    with criterion(9, "evaluator against gold and the PR oracle"):
        gold = [("a", LayoutCategory.TEXT, BBox(0, 0, 10, 10)), ("a", LayoutCategory.TABLE, BBox(0, 20, 50, 60)),
                ("b", LayoutCategory.FIGURE, BBox(5, 5, 25, 30))]
        assert map_50_95([Detection(*g) for g in gold], gold).macro == 1.0
        one = map_50_95([Detection("p", LayoutCategory.TEXT, BBox(0, 0, 6, 10), 0.5)],
                        [("p", LayoutCategory.TEXT, BBox(0, 0, 10, 10))])
        assert abs(one.macro - 0.30) <= 1e-9
        # every instance with up to four detections (two boxes x two scores, any
        # order) and up to four golds (multisets of three boxes)
        det_options = [(b, s) for b in DET_BOXES for s in (0.4, 0.8)]
        n = 0
        for nd in range(0, 5):
            for dets in itertools.product(det_options, repeat=nd):
                for ng in range(1, 5):
                    for golds in itertools.combinations_with_replacement(GOLD_BOXES, ng):
                        for thr in (0.5, 0.75):
                            got = average_precision([Detection("p", LayoutCategory.TEXT, b, s) for b, s in dets],
                                                    [("p", g) for g in golds], thr)
                            flags = greedy_hits([(tuple(b), s) for b, s in dets], [tuple(g) for g in golds], thr)
                            assert abs(got - pr_curve_ap(flags, len(golds))) <= 1e-12
                            n += 1
        assert n == 341 * 34 * 2


# 10 ------------------------------------------------------------------------

def test_c10_throughput():
    docs, n_pages, seed = [], 0, 0
    while n_pages < 1000:
        rng = random.Random(seed)
        d = random_document(seed, n_sections=rng.randint(2, 6), figures=rng.randint(0, 2),
                            tables=rng.randint(0, 2), lists=rng.randint(0, 2), inline_titles=rng.random() < 0.5,
                            footnotes=rng.randint(0, 2))
        pages = d.pages()
        docs.append((d.doc_id, pages, d.xml().encode()))
        n_pages += len(pages)
        seed += 1
    with criterion(10, f"annotate {n_pages} synthetic pages single-worker", budget_s=60):
        accepted = 0
        for doc_id, pages, xml in docs:
            res = annotate_document(pages, parse_article(xml), doc_id)
            accepted += len(res.accepted)
    assert accepted >= 0.95 * n_pages
