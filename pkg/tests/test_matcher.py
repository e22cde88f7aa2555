import random
import textwrap

import pytest
from hypothesis import given, settings, strategies as st

from layoutgt.article import GroupNode, NodeGroups, parse_article
from layoutgt.categories import LayoutCategory
from layoutgt.elements import BBox, PageElements, Textbox, Textline
from layoutgt.matcher import (
    MatchCursor, PageWorkspace, annotate_page, detect_inline_title, match_sorted, match_unsorted, split_textbox,
)
from layoutgt.pipeline import annotate_document
from synth import random_document


def box(lines, x0=72.0, top=700.0, h=10.0, lead=2.0, cw=5.0):
    tls = []
    for i, t in enumerate(lines):
        y1 = top - i * (h + lead)
        tls.append(Textline(t, BBox(x0, y1 - h, x0 + cw * len(t), y1)))
    return Textbox.from_lines(tls)


def wrap(text, width=40):
    """Break at spaces like an extractor does; keep the trailing space on each line."""
    parts = textwrap.wrap(text, width)
    return [p + " " for p in parts[:-1]] + parts[-1:]


def page(*boxes, page_id="1"):
    return PageElements(page_id, 612, 792, tuple(boxes))


P1 = "The quick brown fox jumps over the lazy dog near the river bank today."
P2 = "Measurements were repeated three times under identical laboratory conditions."


def node(i, text, role="paragraph"):
    return GroupNode(f"n{i}", role, text)


def test_two_paragraphs_in_one_textbox():
    tb = box([P1[:40], P1[40:], P2[:45], P2[45:]])
    regions = match_sorted([node(1, P1), node(2, P2)], [page(tb)])
    assert [r.complete for r in regions] == [True, True]
    assert [len(r.lines) for r in regions] == [2, 2]
    assert regions[0].bbox.y0 > regions[1].bbox.y1
    top, bottom = regions[0].textboxes(page(tb))[0], regions[1].textboxes(page(tb))[0]
    assert top.lines == tb.lines[:2] and bottom.lines == tb.lines[2:]


def test_noisy_lines_still_match():
    noisy = P1.replace("quick", "qu1ck").replace("lazy", "1azy")
    regions = match_sorted([node(1, P1)], [page(box([noisy[:40], noisy[40:]]))])
    assert regions[0].complete
    assert regions[0].distance == 2


def test_too_many_errors_fail():
    garbled = "".join("#" if i % 3 == 0 else c for i, c in enumerate(P1))
    regions = match_sorted([node(1, P1)], [page(box([garbled[:40], garbled[40:]]))])
    assert not any(r.complete for r in regions)


def test_paragraph_spanning_pages():
    p1 = page(box([P1[:40]], top=100), page_id="1")
    p2 = page(box([P1[40:]], top=740), page_id="2")
    regions = match_sorted([node(1, P1)], [p1, p2])
    assert [r.page_id for r in regions] == ["1", "2"]
    assert all(r.complete for r in regions)
    assert regions[0].continues


def test_inline_title_merges_into_paragraph():
    title = "2. Methods"
    first, *rest = wrap(P2)
    tb = box([f"{title} {first}", *rest])
    groups = NodeGroups(sorted=[node(1, title, "section-title"), node(2, P2)])
    regions, _ = annotate_page(page(tb), groups)
    assert len(regions) == 1
    (r,) = regions
    assert r.category is LayoutCategory.TEXT
    assert r.merged_from == ["n1"] and r.merged_roles == ["section-title"]
    assert len(r.lines) == 2


def test_standalone_title_stays_title():
    title = "2. Methods"
    groups = NodeGroups(sorted=[node(1, title, "section-title"), node(2, P2)])
    regions, _ = annotate_page(page(box([title]), box(wrap(P2), top=680)), groups)
    assert [r.category for r in regions] == [LayoutCategory.TITLE, LayoutCategory.TEXT]
    assert not detect_inline_title(regions[0])


def test_unsorted_node_found_anywhere():
    fn = "Corresponding author email address is given on the journal website."
    groups = NodeGroups(sorted=[node(1, P1)], unsorted=[node(2, fn, "footnote")])
    pg = page(box([fn[:35], fn[35:]], top=100), box([P1[:40], P1[40:]]))
    regions, cursor = annotate_page(pg, groups)
    by_id = {r.node.node_id: r for r in regions}
    assert by_id["n2"].complete and by_id["n2"].bbox.y1 <= 100
    assert "n2" in cursor.done


def test_missing_unsorted_node_is_incomplete():
    (r,) = match_unsorted([node(9, "This sentence is nowhere on the page at all, really.")], [page(box([P1]))])
    assert not r.complete and r.spans == []


def test_table_cells_do_not_start_a_paragraph():
    # cells repeat the paragraph's first words; the paragraph itself is printed below
    cells = [box([w], x0=72 + 110 * i, top=500) for i, w in enumerate(P2.split()[:4])]
    pg = page(box(wrap(P1)), *cells, box(wrap(P2), top=400))
    regions, _ = annotate_page(pg, NodeGroups(sorted=[node(1, P1), node(2, P2)]))
    by_id = {r.node.node_id: r for r in regions}
    assert by_id["n2"].complete
    assert {s.box for s in by_id["n2"].spans if s.owner} == {5}


def test_split_textbox():
    tb = box(["one", "two", "three"])
    a, b = split_textbox(tb, 1)
    assert [l.text for l in a.lines] == ["one"] and [l.text for l in b.lines] == ["two", "three"]
    assert a.bbox.y0 > b.bbox.y1
    with pytest.raises(IndexError):
        split_textbox(tb, 0)


def test_cursor_carries_position():
    _, cursor = annotate_page(page(box([P1[:40]], top=100)), NodeGroups(sorted=[node(1, P1), node(2, P2)]))
    assert isinstance(cursor, MatchCursor)
    assert cursor.node_index == 0 and cursor.node_pos > 0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 100_000))
def test_random_documents_lines_owned_once(seed):
    rng = random.Random(seed)
    doc = random_document(seed, n_sections=rng.randint(1, 4), figures=rng.randint(0, 1), tables=rng.randint(0, 1),
                          lists=rng.randint(0, 1), inline_titles=rng.random() < 0.5, footnotes=rng.randint(0, 1))
    result = annotate_document(doc.pages(), parse_article(doc.xml().encode()), doc.doc_id)
    for p in result.pages:
        keys = [s.key for r in p.regions if r.complete for s in r.spans if s.owner]
        assert len(keys) == len(set(keys))
        assert p.report.accepted


def test_title_split_across_pages_marks_both_title_pages():
    title = "A remarkably long article title that does not fit on the first page of the journal issue"
    first, *rest = wrap(title, 60)
    groups = NodeGroups(sorted=[node(1, title, "article-title"), node(2, P2)])
    pages = [page(box([first], top=80), page_id="1"), page(box(rest, top=740), box(wrap(P2), top=700), page_id="2")]
    res = annotate_document(pages, groups, "d")
    assert [p.report.is_title_page for p in res.pages] == [True, True]
