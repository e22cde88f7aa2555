"""Page-level annotation coverage and the accept/reject gate."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .elements import BBox, PageElements
from .geometry import CONTAIN_FRACTION, LayoutAnnotation, coverage_fraction, fraction_inside

__all__ = [
    "ANNOTATED_FRACTION",
    "QualityReport",
    "TITLE_THRESHOLD",
    "THRESHOLD",
    "accept_page",
    "annotation_quality",
    "format_report",
    "is_title_page",
]

THRESHOLD = 0.99
TITLE_THRESHOLD = 0.90
ANNOTATED_FRACTION = 0.95


@dataclass(frozen=True)
class QualityReport:
    page_id: str
    ratio: float
    is_title_page: bool
    accepted: bool

    def tsv(self) -> str:
        return format_report(self)


def annotation_quality(page: PageElements, annotations: Iterable[LayoutAnnotation | BBox],
                       main: BBox | None) -> float:
    """Annotated share of the element area inside the main text box.

    Elements are the page's textboxes, images and shapes with at least half
    their area inside ``main``; one counts as annotated when the union of the
    annotation boxes covers at least 95% of it. Zero-area elements are left
    out of both sums.
    """
    if main is None:
        return 0.0
    covers = [a.bbox if isinstance(a, LayoutAnnotation) else a for a in annotations]
    total = 0.0
    annotated = 0.0
    for box in page.element_boxes():
        area = box.area
        if area <= 0.0 or fraction_inside(box, main) < CONTAIN_FRACTION:
            continue
        total += area
        if covers and coverage_fraction(box, covers) >= ANNOTATED_FRACTION:
            annotated += area
    if total <= 0.0:
        return 0.0
    return min(1.0, annotated / total)


def accept_page(ratio: float, is_title_page: bool, threshold: float = THRESHOLD,
                title_threshold: float = TITLE_THRESHOLD) -> bool:
    """Pages are rejected only when strictly below their threshold."""
    return ratio >= (title_threshold if is_title_page else threshold)


def is_title_page(regions: Sequence) -> bool:
    """True when one of the page's matched regions is the article title."""
    for r in regions:
        node = getattr(r, "node", None)
        role = getattr(node, "role", None) if node is not None else getattr(r, "role", None)
        merged = getattr(r, "merged_roles", ())
        if getattr(r, "complete", True) and (role == "article-title" or "article-title" in merged):
            return True
    return False


def format_report(report: QualityReport) -> str:
    return f"{report.page_id}\t{report.ratio:.6f}\t{int(report.is_title_page)}\t{int(report.accepted)}"
