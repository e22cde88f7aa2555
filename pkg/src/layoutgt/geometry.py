"""Box algebra, figure/table body inference and textline segmentation polygons.

All geometry is in bottom-left page coordinates (points).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .categories import LayoutCategory
from .elements import BBox, PageElements, Textline

__all__ = [
    "CONTAIN_FRACTION",
    "COORD_TOLERANCE",
    "LayoutAnnotation",
    "RectilinearPolygon",
    "STEP_TOLERANCE",
    "body_box",
    "figure_body_box",
    "search_bound",
    "coverage_fraction",
    "fraction_inside",
    "main_text_box",
    "polygon_area",
    "potential_box",
    "rect_polygon",
    "table_body_box",
    "table_potential_box",
    "textline_segmentation",
    "union_area",
    "union_bbox",
]

COORD_TOLERANCE = 1.0
STEP_TOLERANCE = 0.5
CONTAIN_FRACTION = 0.5

Point = tuple[float, float]


@dataclass(frozen=True)
class RectilinearPolygon:
    """Closed loop of vertices, first vertex not repeated at the end.

    Vertices run clockwise (in y-up coordinates) starting at the top-left.
    """

    vertices: tuple[Point, ...]

    @property
    def bbox(self) -> BBox:
        xs = [p[0] for p in self.vertices]
        ys = [p[1] for p in self.vertices]
        return BBox(min(xs), min(ys), max(xs), max(ys))

    @property
    def area(self) -> float:
        return polygon_area(self.vertices)

    def edges(self) -> list[tuple[Point, Point]]:
        v = self.vertices
        return [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]

    def problems(self) -> list[str]:
        """Broken invariants: axis alignment, alternation, simplicity."""
        out = []
        v = self.vertices
        if len(v) < 4 or len(v) % 2:
            out.append(f"vertex count {len(v)} is not even and >= 4")
            return out
        orient = []
        for a, b in self.edges():
            if a == b:
                out.append(f"zero-length edge at {a}")
                orient.append("?")
            elif a[1] == b[1]:
                orient.append("h")
            elif a[0] == b[0]:
                orient.append("v")
            else:
                out.append(f"edge {a}->{b} is not axis-aligned")
                orient.append("?")
        for i in range(len(orient)):
            if orient[i] == orient[i - 1] and orient[i] != "?":
                out.append(f"edges {i - 1} and {i} do not alternate")
        if not out and not _is_simple(self.edges()):
            out.append("polygon self-intersects")
        return out

    def contains_point(self, x: float, y: float, tol: float = 1e-9) -> bool:
        """Point-in-polygon with boundary counted as inside."""
        for (ax, ay), (bx, by) in self.edges():
            if ay == by and abs(y - ay) <= tol and min(ax, bx) - tol <= x <= max(ax, bx) + tol:
                return True
            if ax == bx and abs(x - ax) <= tol and min(ay, by) - tol <= y <= max(ay, by) + tol:
                return True
        inside = False
        for (ax, ay), (bx, by) in self.edges():
            if ax == bx and (ay > y) != (by > y) and x < ax:
                inside = not inside
        return inside

    def translate(self, dx: float, dy: float) -> "RectilinearPolygon":
        return RectilinearPolygon(tuple((x + dx, y + dy) for x, y in self.vertices))


@dataclass(frozen=True)
class LayoutAnnotation:
    category: LayoutCategory
    bbox: BBox
    segmentation: RectilinearPolygon
    source_node: str | None = None
    page_id: str | None = None
    role: str | None = None
    extra: dict = field(default_factory=dict, compare=False)


def union_bbox(boxes: Iterable[BBox]) -> BBox:
    """Smallest box enclosing every box in ``boxes``."""
    it = iter(boxes)
    try:
        out = next(it)
    except StopIteration:
        raise ValueError("union_bbox needs at least one box") from None
    for b in it:
        out = out.union(b)
    return out


def rect_polygon(box: BBox) -> RectilinearPolygon:
    return RectilinearPolygon(((box.x0, box.y1), (box.x1, box.y1), (box.x1, box.y0), (box.x0, box.y0)))


def polygon_area(vertices: Sequence[Point]) -> float:
    """Shoelace area, always non-negative."""
    s = 0.0
    n = len(vertices)
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return abs(s) / 2.0


def fraction_inside(element: BBox, region: BBox, tol: float = COORD_TOLERANCE) -> float:
    """Share of ``element``'s area inside ``region`` grown by ``tol``.

    Degenerate (zero-area) elements count as fully inside or not at all.
    """
    grown = region.expand(tol)
    if element.area <= 0.0:
        return 1.0 if grown.contains(element) else 0.0
    return grown.intersection_area(element) / element.area


def union_area(boxes: Sequence[BBox]) -> float:
    """Area of the union of ``boxes`` (overlaps counted once)."""
    boxes = [b for b in boxes if b.area > 0]
    if not boxes:
        return 0.0
    xs = sorted({v for b in boxes for v in (b.x0, b.x1)})
    total = 0.0
    for xa, xb in zip(xs, xs[1:]):
        spans = sorted((b.y0, b.y1) for b in boxes if b.x0 <= xa and b.x1 >= xb)
        covered = 0.0
        cur0 = cur1 = None
        for y0, y1 in spans:
            if cur1 is None or y0 > cur1:
                if cur1 is not None:
                    covered += cur1 - cur0
                cur0, cur1 = y0, y1
            elif y1 > cur1:
                cur1 = y1
        if cur1 is not None:
            covered += cur1 - cur0
        total += covered * (xb - xa)
    return total


def coverage_fraction(element: BBox, covers: Sequence[BBox]) -> float:
    """Fraction of ``element``'s area covered by the union of ``covers``."""
    if element.area <= 0.0:
        return 0.0
    clipped = [c for c in (element.intersection(b) for b in covers) if c is not None and c.area > 0]
    return union_area(clipped) / element.area


def main_text_box(text_annotations: Iterable[LayoutAnnotation | BBox]) -> BBox:
    """Smallest box around all annotated text elements of a page."""
    boxes = [a.bbox if isinstance(a, LayoutAnnotation) else a for a in text_annotations]
    if not boxes:
        raise ValueError("no annotated text elements on the page")
    return union_bbox(boxes)


def _overlaps_x(a: BBox, x0: float, x1: float, tol: float = 0.0) -> bool:
    return min(a.x1, x1) - max(a.x0, x0) > tol


def potential_box(caption: BBox, annotated: Sequence[BBox], main: BBox,
                  candidates: Sequence[BBox] = ()) -> BBox | None:
    """Margin box above a figure caption where the figure body may sit.

    The box spans from the caption's top up to the lowest annotated box above
    the caption that overlaps it horizontally, or to the top of ``main``.
    Its horizontal extent starts as the caption's and is widened to take in
    any un-annotated ``candidates`` lying mostly inside that margin and
    overlapping the caption horizontally. Returns ``None`` when the margin
    has no height.
    """
    return _margin_box(caption, annotated, main, candidates, above=True)


def table_potential_box(caption: BBox, annotated: Sequence[BBox], main: BBox,
                        candidates: Sequence[BBox] = ()) -> BBox | None:
    """Mirror of :func:`potential_box`: the margin below a table caption."""
    return _margin_box(caption, annotated, main, candidates, above=False)


def _margin_limit(caption: BBox, annotated: Sequence[BBox], main: BBox,
                  x0: float, x1: float, above: bool) -> float:
    if above:
        limit = main.y1
        for b in annotated:
            if b.y0 >= caption.y1 - 1e-9 and _overlaps_x(b, x0, x1) and b.y0 < limit:
                limit = b.y0
        return limit
    limit = main.y0
    for b in annotated:
        if b.y1 <= caption.y0 + 1e-9 and _overlaps_x(b, x0, x1) and b.y1 > limit:
            limit = b.y1
    return limit


def _margin_box(caption: BBox, annotated: Sequence[BBox], main: BBox,
                candidates: Sequence[BBox], above: bool) -> BBox | None:
    x0, x1 = caption.x0, caption.x1
    limit = _margin_limit(caption, annotated, main, x0, x1, above)
    if above:
        band = BBox(main.x0, caption.y1, main.x1, max(limit, caption.y1))
    else:
        band = BBox(main.x0, min(limit, caption.y0), main.x1, caption.y0)
    for c in candidates:
        if _overlaps_x(c, caption.x0, caption.x1) and fraction_inside(c, band) >= CONTAIN_FRACTION:
            x0 = min(x0, c.x0)
            x1 = max(x1, c.x1)
    x0 = max(x0, main.x0)
    x1 = min(x1, main.x1)
    if (x0, x1) != (caption.x0, caption.x1):
        limit = _margin_limit(caption, annotated, main, x0, x1, above)
    if above:
        box = BBox(x0, caption.y1, x1, limit)
    else:
        box = BBox(x0, limit, x1, caption.y0)
    if box.height <= 0 or box.width <= 0:
        return None
    return box


def body_box(potential: BBox | None, page: PageElements | Iterable[BBox]) -> BBox | None:
    """Smallest box around the elements lying within ``potential``.

    ``page`` is either a :class:`PageElements` (all its textboxes, images and
    shapes are candidates) or an explicit iterable of element boxes. An
    element counts when at least half its area is inside the potential box
    grown by 1pt; the result is clipped to the potential box.
    """
    if potential is None:
        return None
    boxes = page.element_boxes() if isinstance(page, PageElements) else list(page)
    inside = [b for b in boxes if fraction_inside(b, potential) >= CONTAIN_FRACTION]
    if not inside:
        return None
    out = union_bbox(inside).intersection(potential)
    if out is None or out.width <= 0 or out.height <= 0:
        return None
    return out


def search_bound(main: BBox, page: PageElements | None = None, graphics: Iterable[BBox] = ()) -> BBox:
    """The main text box grown to take in the page's images and shapes.

    A figure printed above every line of text (top of a page) lies outside
    the main text box; its graphics, but not unannotated text such as a
    running header, still bound the search for bodies.
    """
    boxes = [main, *graphics]
    if page is not None:
        boxes += list(page.images) + list(page.shapes)
    return union_bbox(boxes)


def figure_body_box(caption: BBox, annotated: Sequence[BBox], main: BBox,
                    page: PageElements | Iterable[BBox]) -> BBox | None:
    """Figure body: elements in the margin above the caption."""
    elements = page.element_boxes() if isinstance(page, PageElements) else list(page)
    return body_box(potential_box(caption, annotated, main, elements), elements)


def table_body_box(caption: BBox, annotated: Sequence[BBox], main: BBox,
                   page: PageElements | Iterable[BBox]) -> BBox | None:
    """Table body: elements in the margin below the caption."""
    elements = page.element_boxes() if isinstance(page, PageElements) else list(page)
    return body_box(table_potential_box(caption, annotated, main, elements), elements)


# --------------------------------------------------------------------------
# segmentation


def _close_gaps(boxes: list[BBox]) -> list[BBox]:
    """Split each vertical gap between consecutive lines at its midpoint."""
    out = list(boxes)
    for i in range(len(out) - 1):
        upper, lower = out[i], out[i + 1]
        if upper.y0 > lower.y1:
            mid = (upper.y0 + lower.y1) / 2.0
            out[i] = BBox(upper.x0, mid, upper.x1, upper.y1)
            out[i + 1] = BBox(lower.x0, lower.y0, lower.x1, mid)
    return out


def _is_staircase(boxes: list[BBox]) -> bool:
    for b in boxes:
        if b.height <= 0 or b.width <= 0:
            return False
    for i in range(len(boxes) - 1):
        a, b = boxes[i], boxes[i + 1]
        if not (b.y1 < a.y1 and b.y0 < a.y0):
            return False
        if not _overlaps_x(a, b.x0, b.x1):
            return False
        if i + 2 < len(boxes) and not boxes[i + 2].y1 < a.y0:
            return False
    return True


def _runs(values: list[float], tol: float, pick) -> list[tuple[int, int, float]]:
    """Group adjacent near-equal values: (first index, last index, value)."""
    runs: list[list] = []
    for i, v in enumerate(values):
        if runs and abs(v - values[i - 1]) <= tol:
            runs[-1][1] = i
            runs[-1][2] = pick(runs[-1][2], v)
        else:
            runs.append([i, i, v])
    merged: list[list] = []
    for r in runs:
        if merged and abs(merged[-1][2] - r[2]) <= tol:
            merged[-1][1] = r[1]
            merged[-1][2] = pick(merged[-1][2], r[2])
        else:
            merged.append(r)
    return [tuple(r) for r in merged]


def textline_segmentation(lines: Sequence[Textline | BBox], tol: float = STEP_TOLERANCE) -> RectilinearPolygon:
    """Step polygon tracing a stack of textlines.

    The top edge comes from the top line, the bottom edge from the bottom
    line. The right side is walked top to bottom and steps wherever the
    right edge changes between adjacent lines (edges within ``tol`` count as
    flush); the left side is walked bottom to top the same way. A step sits
    on the bottom of the upper line when that line is the wider one on that
    side and on the top of the lower line otherwise, so the polygon is the
    outline of the union of the line boxes. Vertical gaps between lines are
    first closed at their midpoint.

    Lines that do not form a proper top-to-bottom stack (overlapping out of
    order, or horizontally disjoint neighbours) fall back to their bounding
    rectangle.
    """
    if not lines:
        raise ValueError("textline_segmentation needs at least one line")
    boxes = [ln.bbox if isinstance(ln, Textline) else ln for ln in lines]
    boxes = sorted(boxes, key=lambda b: (-b.y1, -b.y0))
    if len(boxes) == 1:
        return rect_polygon(boxes[0])
    closed = _close_gaps(boxes)
    if not _is_staircase(closed):
        return rect_polygon(union_bbox(boxes))

    top = closed[0].y1
    bottom = closed[-1].y0

    right = _runs([b.x1 for b in closed], tol, max)
    verts: list[Point] = []
    left = _runs([b.x0 for b in closed], tol, min)
    verts.append((left[0][2], top))
    verts.append((right[0][2], top))
    for (_, last, xa), (nxt, _, xb) in zip(right, right[1:]):
        y = closed[last].y0 if xa > xb else closed[nxt].y1
        verts.append((xa, y))
        verts.append((xb, y))
    verts.append((right[-1][2], bottom))
    verts.append((left[-1][2], bottom))
    for (_, last, xa), (nxt, _, xb) in reversed(list(zip(left, left[1:]))):
        # walking upwards: from the run below (xb) to the run above (xa)
        y = closed[nxt].y1 if xb < xa else closed[last].y0
        verts.append((xb, y))
        verts.append((xa, y))
    return RectilinearPolygon(tuple(verts))


def _is_simple(edges: list[tuple[Point, Point]]) -> bool:
    n = len(edges)
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if _segments_touch(edges[i], edges[j]):
                return False
    return True


def _segments_touch(e: tuple[Point, Point], f: tuple[Point, Point]) -> bool:
    (ax, ay), (bx, by) = e
    (cx, cy), (dx, dy) = f
    ex0, ex1 = sorted((ax, bx))
    ey0, ey1 = sorted((ay, by))
    fx0, fx1 = sorted((cx, dx))
    fy0, fy1 = sorted((cy, dy))
    return ex0 <= fx1 and fx0 <= ex1 and ey0 <= fy1 and fy0 <= ey1
