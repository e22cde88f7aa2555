"""Page-element model and the JSON interchange format it is loaded from.

Coordinates are PDF points with the origin at the bottom-left corner of the
page, so "above" means a larger ``y``. A PDF extraction backend is expected to
emit the interchange layout::

    {"pages": [{"page_id": "1", "width": 612, "height": 792,
                "textboxes": [{"bbox": [x0, y0, x1, y1],
                               "lines": [{"bbox": [...], "text": "..."}]}],
                "images": [[x0, y0, x1, y1]],
                "shapes": [[x0, y0, x1, y1]]}]}

See :class:`ElementsBackend` for the adapter contract.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import IO, Any, Iterable, Iterator, Protocol, Sequence, Union

__all__ = [
    "BBox",
    "ElementsBackend",
    "ElementsParseError",
    "ElementsValidationError",
    "PageElements",
    "Textbox",
    "Textline",
    "dump_page_elements",
    "dumps_page_elements",
    "load_page_elements",
    "validate_page",
]

PAGE_TOLERANCE = 1.0
LINE_SEPARATOR = " "

Source = Union[str, bytes, os.PathLike, IO[bytes], IO[str]]


class ElementsParseError(ValueError):
    """Interchange document does not follow the schema."""

    def __init__(self, message: str, page: int | str | None = None, field: str | None = None):
        self.page = page
        self.field = field
        where = []
        if page is not None:
            where.append(f"page {page}")
        if field is not None:
            where.append(f"field {field!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


class ElementsValidationError(ValueError):
    """Interchange document parsed but broke one or more invariants."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("invalid page elements:\n  " + "\n  ".join(self.violations))


@dataclass(frozen=True)
class BBox:
    x0: float
    y0: float
    x1: float
    y1: float

    @classmethod
    def from_list(cls, values: Sequence[float]) -> "BBox":
        x0, y0, x1, y1 = values
        return cls(float(x0), float(y0), float(x1), float(y1))

    def to_list(self) -> list[float]:
        return [self.x0, self.y0, self.x1, self.y1]

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def area(self) -> float:
        return max(self.width, 0.0) * max(self.height, 0.0)

    def problems(self) -> list[str]:
        out = []
        if not all(math.isfinite(v) for v in (self.x0, self.y0, self.x1, self.y1)):
            out.append("non-finite coordinate")
        else:
            if self.x0 > self.x1:
                out.append(f"x0 > x1 ({self.x0} > {self.x1})")
            if self.y0 > self.y1:
                out.append(f"y0 > y1 ({self.y0} > {self.y1})")
        return out

    @property
    def is_valid(self) -> bool:
        return not self.problems()

    def union(self, other: "BBox") -> "BBox":
        return BBox(min(self.x0, other.x0), min(self.y0, other.y0),
                    max(self.x1, other.x1), max(self.y1, other.y1))

    def intersection(self, other: "BBox") -> "BBox | None":
        x0, y0 = max(self.x0, other.x0), max(self.y0, other.y0)
        x1, y1 = min(self.x1, other.x1), min(self.y1, other.y1)
        if x0 > x1 or y0 > y1:
            return None
        return BBox(x0, y0, x1, y1)

    def intersection_area(self, other: "BBox") -> float:
        w = min(self.x1, other.x1) - max(self.x0, other.x0)
        h = min(self.y1, other.y1) - max(self.y0, other.y0)
        return w * h if w > 0 and h > 0 else 0.0

    def contains(self, other: "BBox", tol: float = 0.0) -> bool:
        return (other.x0 >= self.x0 - tol and other.y0 >= self.y0 - tol
                and other.x1 <= self.x1 + tol and other.y1 <= self.y1 + tol)

    def expand(self, d: float) -> "BBox":
        return BBox(self.x0 - d, self.y0 - d, self.x1 + d, self.y1 + d)

    def translate(self, dx: float, dy: float) -> "BBox":
        return BBox(self.x0 + dx, self.y0 + dy, self.x1 + dx, self.y1 + dy)

    def __iter__(self) -> Iterator[float]:
        return iter((self.x0, self.y0, self.x1, self.y1))


@dataclass(frozen=True)
class Textline:
    text: str
    bbox: BBox


@dataclass(frozen=True)
class Textbox:
    bbox: BBox
    lines: tuple[Textline, ...]

    @property
    def text(self) -> str:
        return LINE_SEPARATOR.join(line.text for line in self.lines)

    @classmethod
    def from_lines(cls, lines: Iterable[Textline]) -> "Textbox":
        lines = tuple(lines)
        if not lines:
            raise ValueError("a textbox needs at least one line")
        box = lines[0].bbox
        for line in lines[1:]:
            box = box.union(line.bbox)
        return cls(box, lines)


@dataclass(frozen=True)
class PageElements:
    page_id: str
    width: float
    height: float
    textboxes: tuple[Textbox, ...] = ()
    images: tuple[BBox, ...] = ()
    shapes: tuple[BBox, ...] = ()

    @property
    def page_box(self) -> BBox:
        return BBox(0.0, 0.0, self.width, self.height)

    def element_boxes(self) -> list[BBox]:
        """Textbox, image and shape boxes, in that order."""
        return [tb.bbox for tb in self.textboxes] + list(self.images) + list(self.shapes)


class ElementsBackend(Protocol):
    """What a PDF extraction adapter must provide.

    ``extract`` returns one :class:`PageElements` per page in page order, with
    textboxes in the extractor's emission order and bottom-left coordinates.
    """

    def extract(self, pdf_path: str | os.PathLike) -> list[PageElements]:
        ...


def validate_page(page: PageElements) -> list[str]:
    """Describe every invariant ``page`` breaks; empty when it is well formed."""
    out: list[str] = []
    pid = page.page_id
    if not (math.isfinite(page.width) and math.isfinite(page.height)) or page.width <= 0 or page.height <= 0:
        out.append(f"page {pid}: bad page size {page.width}x{page.height}")
        return out
    frame = page.page_box

    def check_box(box: BBox, where: str) -> bool:
        probs = box.problems()
        for p in probs:
            out.append(f"page {pid}: {where} bbox {box.to_list()}: {p}")
        if not probs and not frame.contains(box, PAGE_TOLERANCE):
            out.append(f"page {pid}: {where} bbox {box.to_list()} lies outside the page")
            return False
        return not probs

    for ti, tb in enumerate(page.textboxes):
        where = f"textbox {ti}"
        tb_ok = check_box(tb.bbox, where)
        if not tb.lines:
            out.append(f"page {pid}: {where} has no lines")
        for li, line in enumerate(tb.lines):
            lwhere = f"{where} line {li}"
            if not line.text.strip():
                out.append(f"page {pid}: {lwhere} has empty text")
            line_ok = check_box(line.bbox, lwhere)
            if tb_ok and line_ok and not tb.bbox.contains(line.bbox, 1e-6):
                out.append(f"page {pid}: {lwhere} bbox {line.bbox.to_list()} is outside its textbox "
                           f"{tb.bbox.to_list()}")
    for ii, box in enumerate(page.images):
        check_box(box, f"image {ii}")
    for si, box in enumerate(page.shapes):
        check_box(box, f"shape {si}")
    return out


def load_page_elements(source: Source, validate: bool = True) -> list[PageElements]:
    """Read an interchange document (path, bytes, text or file object)."""
    doc = _read_json(source)
    if not isinstance(doc, dict) or not isinstance(doc.get("pages"), list):
        raise ElementsParseError("top level must be an object with a 'pages' list", field="pages")
    pages = [_parse_page(raw, i) for i, raw in enumerate(doc["pages"])]
    if validate:
        violations = [v for page in pages for v in validate_page(page)]
        if violations:
            raise ElementsValidationError(violations)
    return pages


def dump_page_elements(pages: Sequence[PageElements]) -> dict[str, Any]:
    """Inverse of :func:`load_page_elements` (returns the JSON-ready object)."""
    return {"pages": [
        {
            "page_id": p.page_id,
            "width": p.width,
            "height": p.height,
            "textboxes": [
                {"bbox": tb.bbox.to_list(),
                 "lines": [{"bbox": ln.bbox.to_list(), "text": ln.text} for ln in tb.lines]}
                for tb in p.textboxes
            ],
            "images": [b.to_list() for b in p.images],
            "shapes": [b.to_list() for b in p.shapes],
        }
        for p in pages
    ]}


def _read_json(source: Source) -> Any:
    try:
        if isinstance(source, (bytes, bytearray)):
            return json.loads(bytes(source).decode("utf-8"))
        if isinstance(source, (str, os.PathLike)):
            if isinstance(source, str) and source.lstrip()[:1] in ("{", "["):
                return json.loads(source)
            with open(source, "rb") as fh:
                return json.loads(fh.read().decode("utf-8"))
        data = source.read()
        if isinstance(data, bytes):
            data = data.decode("utf-8")
        return json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ElementsParseError(f"not valid JSON: {exc}") from exc


def _number(value: Any, page: Any, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ElementsParseError(f"expected a number, got {value!r}", page, field)
    return float(value)


def _bbox(value: Any, page: Any, field: str) -> BBox:
    if not isinstance(value, (list, tuple)) or len(value) != 4:
        raise ElementsParseError(f"bbox must be [x0, y0, x1, y1], got {value!r}", page, field)
    return BBox(*(_number(v, page, field) for v in value))


def _parse_page(raw: Any, index: int) -> PageElements:
    if not isinstance(raw, dict):
        raise ElementsParseError("page must be an object", index)
    page = raw.get("page_id", index)
    if "page_id" not in raw:
        raise ElementsParseError("missing", index, "page_id")
    if not isinstance(raw["page_id"], (str, int)) or isinstance(raw["page_id"], bool):
        raise ElementsParseError(f"page_id must be a string, got {raw['page_id']!r}", index, "page_id")
    for key in ("width", "height"):
        if key not in raw:
            raise ElementsParseError("missing", page, key)
    width = _number(raw["width"], page, "width")
    height = _number(raw["height"], page, "height")

    textboxes = []
    for ti, tb in enumerate(raw.get("textboxes", [])):
        field = f"textboxes[{ti}]"
        if not isinstance(tb, dict) or "bbox" not in tb or not isinstance(tb.get("lines"), list):
            raise ElementsParseError("textbox needs 'bbox' and a 'lines' list", page, field)
        lines = []
        for li, ln in enumerate(tb["lines"]):
            lfield = f"{field}.lines[{li}]"
            if not isinstance(ln, dict) or "bbox" not in ln or "text" not in ln:
                raise ElementsParseError("line needs 'bbox' and 'text'", page, lfield)
            if not isinstance(ln["text"], str):
                raise ElementsParseError("text must be a string", page, lfield + ".text")
            lines.append(Textline(ln["text"], _bbox(ln["bbox"], page, lfield + ".bbox")))
        textboxes.append(Textbox(_bbox(tb["bbox"], page, field + ".bbox"), tuple(lines)))

    images = tuple(_bbox(b, page, f"images[{i}]") for i, b in enumerate(raw.get("images", [])))
    shapes = tuple(_bbox(b, page, f"shapes[{i}]") for i, b in enumerate(raw.get("shapes", [])))
    return PageElements(str(raw["page_id"]), width, height, tuple(textboxes), images, shapes)


def dumps_page_elements(pages: Sequence[PageElements]) -> str:
    return json.dumps(dump_page_elements(pages), ensure_ascii=False, indent=1)
