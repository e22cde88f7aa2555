"""Document-level orchestration: match, build annotations, infer bodies, score."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

from .article import Article, NodeGroups, TagMap, parse_article, prepare_groups
from .categories import LayoutCategory, category_from_name
from .elements import BBox, PageElements, Textline, load_page_elements
from .geometry import (
    CONTAIN_FRACTION,
    LayoutAnnotation,
    RectilinearPolygon,
    body_box,
    fraction_inside,
    main_text_box,
    potential_box,
    rect_polygon,
    search_bound,
    table_potential_box,
    textline_segmentation,
    union_bbox,
)
from .matcher import MatchCursor, MatchedRegion, PageWorkspace, annotate_page
from .partition import classify_page
from .quality import THRESHOLD, TITLE_THRESHOLD, QualityReport, accept_page, annotation_quality, is_title_page

__all__ = [
    "AnnotateConfig",
    "DocumentResult",
    "PageResult",
    "annotate_document",
    "annotation_from_json",
    "region_to_annotation",
    "region_to_annotations",
]

TEXT_LIKE = (LayoutCategory.TEXT, LayoutCategory.TITLE, LayoutCategory.LIST)
PIECE_TOLERANCE = 1.0


@dataclass(frozen=True)
class AnnotateConfig:
    threshold: float = THRESHOLD
    title_threshold: float = TITLE_THRESHOLD
    removal: frozenset[str] | None = None
    lookahead_pages: int = 1
    tagmap: TagMap | None = None

    def __post_init__(self) -> None:
        for name in ("threshold", "title_threshold"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.lookahead_pages < 0:
            raise ValueError("lookahead_pages must be >= 0")


@dataclass
class PageResult:
    page: PageElements
    regions: list[MatchedRegion]
    annotations: list[LayoutAnnotation]
    main: BBox | None
    report: QualityReport

    @property
    def kinds(self) -> frozenset[str]:
        return classify_page(self.annotations, self.report.is_title_page)


@dataclass
class DocumentResult:
    doc_id: str
    journal_id: str
    pages: list[PageResult] = field(default_factory=list)
    article_id: str | None = None

    @property
    def accepted(self) -> list[PageResult]:
        return [p for p in self.pages if p.report.accepted]

    def page_key(self, page: PageResult) -> str:
        return f"{self.doc_id}/{page.page.page_id}"

    def reports(self) -> list[QualityReport]:
        return [QualityReport(self.page_key(p), p.report.ratio, p.report.is_title_page, p.report.accepted)
                for p in self.pages]

    def to_json(self) -> dict[str, Any]:
        """Annotation file content: accepted pages only."""
        return {
            "doc_id": self.doc_id,
            "journal_id": self.journal_id,
            "article_id": self.article_id,
            "pages": [
                {
                    "page_id": p.page.page_id,
                    "width": p.page.width,
                    "height": p.page.height,
                    "quality": {
                        "ratio": round(p.report.ratio, 6),
                        "is_title_page": p.report.is_title_page,
                        "accepted": p.report.accepted,
                    },
                    "kinds": sorted(p.kinds),
                    "annotations": [annotation_to_json(a) for a in p.annotations],
                }
                for p in self.accepted
            ],
        }


def annotation_to_json(a: LayoutAnnotation) -> dict[str, Any]:
    return {
        "category": a.category.value,
        "bbox": a.bbox.to_list(),
        "segmentation": [list(v) for v in a.segmentation.vertices],
        "node_id": a.source_node,
        "role": a.role,
    }


def annotation_from_json(raw: dict[str, Any], page_id: str | None = None) -> LayoutAnnotation:
    return LayoutAnnotation(
        category_from_name(raw["category"]),
        BBox.from_list(raw["bbox"]),
        RectilinearPolygon(tuple((float(x), float(y)) for x, y in raw["segmentation"])),
        raw.get("node_id"),
        page_id,
        raw.get("role"),
    )


# --------------------------------------------------------------------------
# regions -> annotations


def _column_pieces(lines: Sequence[tuple[int, Textline]]) -> list[list[Textline]]:
    """Cut a region's lines where reading jumps to another column or block.

    Lines of one textbox always stay together. Across textboxes a new piece
    starts when the next line is not below the previous one, does not
    overlap it horizontally, or sits more than 1.5 line heights lower.
    """
    pieces: list[list[Textline]] = []
    prev_box = None
    prev: Textline | None = None
    for box, ln in lines:
        if prev is not None and box == prev_box:
            pieces[-1].append(ln)
        elif prev is not None:
            a, b = prev.bbox, ln.bbox
            below = b.y1 <= a.y0 + PIECE_TOLERANCE
            overlap = min(a.x1, b.x1) - max(a.x0, b.x0) > 0
            gap = a.y0 - b.y1
            near = gap <= 1.5 * max(a.height, b.height)
            if below and overlap and near:
                pieces[-1].append(ln)
            else:
                pieces.append([ln])
        else:
            pieces.append([ln])
        prev_box, prev = box, ln
    return pieces


def _text_annotation(lines: Sequence[Textline], region: MatchedRegion) -> LayoutAnnotation:
    return LayoutAnnotation(
        region.category,
        union_bbox(ln.bbox for ln in lines),
        textline_segmentation(lines),
        region.node.node_id,
        region.page_id,
        region.node.role,
    )


def region_to_annotations(region: MatchedRegion) -> list[LayoutAnnotation]:
    """One annotation per column piece of a complete region; none otherwise."""
    if not region.complete:
        return []
    owned = [(s.box, s.textline) for s in region.spans if s.owner]
    if not owned:
        return []
    return [_text_annotation(piece, region) for piece in _column_pieces(owned)]


def region_to_annotation(region: MatchedRegion | None = None, *, body: BBox | None = None,
                         category: LayoutCategory | None = None, node_id: str | None = None,
                         page_id: str | None = None) -> LayoutAnnotation | None:
    """Annotation for a matched text region, or for an inferred body box.

    Text, title and list regions get the union of their line boxes and a
    stepped segmentation; figure and table bodies reuse their box as the
    segmentation. Incomplete regions give ``None``.
    """
    if body is not None:
        if category not in (LayoutCategory.FIGURE, LayoutCategory.TABLE):
            raise ValueError("a body annotation needs category figure or table")
        role = "figure-body" if category is LayoutCategory.FIGURE else "table-body"
        return LayoutAnnotation(category, body, rect_polygon(body), node_id, page_id, role)
    if region is None or not region.complete or not region.lines:
        return None
    return _text_annotation(region.lines, region)


# --------------------------------------------------------------------------
# bodies


def _caption_boxes(groups: NodeGroups, regions: Sequence[MatchedRegion]
                   ) -> list[tuple[BBox, LayoutCategory, str]]:
    out = []
    entries = [(f, LayoutCategory.FIGURE, (f.label, f.caption)) for f in groups.figures]
    entries += [(t, LayoutCategory.TABLE, (t.label, t.caption)) for t in groups.tables]
    for entry, cat, parts in entries:
        ids = {p.node_id for p in parts if p is not None}
        boxes = [r.bbox for r in regions
                 if r.complete and r.bbox is not None
                 and (r.node.node_id in ids or ids.intersection(r.merged_from))]
        if boxes:
            out.append((union_bbox(boxes), cat, entry.body.node_id))
    out.sort(key=lambda t: (-t[0].y1, t[0].x0))
    return out


def infer_bodies(ws: PageWorkspace, groups: NodeGroups, regions: Sequence[MatchedRegion],
                 text_annotations: Sequence[LayoutAnnotation]) -> list[LayoutAnnotation]:
    """Figure and table bodies of one page, caption by caption, top to bottom."""
    if not text_annotations:
        return []
    graphics = list(ws.page.images) + list(ws.page.shapes)
    bound = search_bound(main_text_box(text_annotations), ws.page)
    annotated = [a.bbox for a in text_annotations]
    free = graphics + ws.free_boxes()
    out = []
    for cap, cat, node_id in _caption_boxes(groups, regions):
        finder = potential_box if cat is LayoutCategory.FIGURE else table_potential_box
        pot = finder(cap, annotated, bound, free)
        body = body_box(pot, free)
        if body is None:
            continue
        out.append(region_to_annotation(body=body, category=cat, node_id=node_id, page_id=ws.page.page_id))
        annotated.append(body)
        free = [e for e in free if fraction_inside(e, pot) < CONTAIN_FRACTION]
    return out


# --------------------------------------------------------------------------
# driver


def annotate_document(pages: Sequence[PageElements], article: Article | NodeGroups,
                      doc_id: str = "", config: AnnotateConfig | None = None,
                      journal_id: str | None = None) -> DocumentResult:
    config = config or AnnotateConfig()
    if isinstance(article, Article):
        groups = prepare_groups(article, config.removal, config.tagmap)
        journal_id = journal_id or article.journal_id
        article_id = article.article_id
    else:
        groups = article
        article_id = None
    result = DocumentResult(doc_id, journal_id or "", article_id=article_id)
    cursor = MatchCursor()
    for idx, page in enumerate(pages):
        ws = PageWorkspace(page, idx)
        regions, cursor = annotate_page(ws, groups, cursor, config.lookahead_pages)
        text_anns = [a for r in regions for a in region_to_annotations(r)]
        bodies = infer_bodies(ws, groups, regions, text_anns)
        annotations = text_anns + bodies
        main = main_text_box(text_anns) if text_anns else None
        ratio = annotation_quality(page, annotations, main)
        title = is_title_page(regions)
        report = QualityReport(page.page_id, ratio, title,
                               accept_page(ratio, title, config.threshold, config.title_threshold))
        result.pages.append(PageResult(page, regions, annotations, main, report))
    return result


def annotate_files(elements_path, xml_path, doc_id: str, config: AnnotateConfig | None = None) -> DocumentResult:
    config = config or AnnotateConfig()
    pages = load_page_elements(elements_path)
    article = parse_article(xml_path, config.tagmap)
    return annotate_document(pages, article, doc_id, config)


def load_annotation_file(path) -> dict[str, Any]:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def iter_page_annotations(doc: dict[str, Any]) -> Iterable[tuple[dict[str, Any], list[LayoutAnnotation]]]:
    for page in doc.get("pages", []):
        yield page, [annotation_from_json(a, page["page_id"]) for a in page.get("annotations", [])]
