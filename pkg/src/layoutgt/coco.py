"""COCO-style detection files with a top-left origin."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence

from .categories import CATEGORY_ORDER, LayoutCategory
from .elements import BBox
from .geometry import LayoutAnnotation, RectilinearPolygon, polygon_area

__all__ = ["CocoExportError", "CocoPage", "export_coco", "import_coco", "coco_categories"]


class CocoExportError(ValueError):
    def __init__(self, offenders: Sequence[str]):
        self.offenders = list(offenders)
        super().__init__("invalid annotations:\n  " + "\n  ".join(self.offenders))


@dataclass(frozen=True)
class CocoPage:
    page_id: str
    width: float
    height: float
    annotations: Sequence[LayoutAnnotation]


def coco_categories() -> list[dict[str, Any]]:
    return [{"id": c.coco_id, "name": c.value, "supercategory": "layout"} for c in CATEGORY_ORDER]


def _flip_point(x: float, y: float, height: float, scale: float) -> tuple[float, float]:
    return x * scale, (height - y) * scale


def export_coco(pages: Iterable[CocoPage], scale: float = 1.0) -> dict[str, Any]:
    """Build a COCO dataset dict from pages in bottom-left page coordinates.

    Boxes become ``[x, y_top, w, h]`` with ``y_top = height - y1``; polygon
    vertices are flipped the same way and flattened. ``scale`` multiplies
    every coordinate. Invalid annotations abort the export, listing all of
    them.
    """
    if not scale > 0:
        raise ValueError("scale must be positive")
    images, annotations, offenders = [], [], []
    ann_id = 0
    for image_id, page in enumerate(pages, start=1):
        images.append({
            "id": image_id,
            "file_name": page.page_id,
            "width": page.width * scale,
            "height": page.height * scale,
        })
        for i, a in enumerate(page.annotations):
            b = a.bbox
            where = f"{page.page_id}#{i}"
            if not (b.width > 0 and b.height > 0):
                offenders.append(f"{where}: degenerate box {b.to_list()}")
                continue
            if not isinstance(a.category, LayoutCategory):
                offenders.append(f"{where}: unknown category {a.category!r}")
                continue
            flat: list[float] = []
            for x, y in a.segmentation.vertices:
                flat.extend(_flip_point(x, y, page.height, scale))
            ann_id += 1
            annotations.append({
                "id": ann_id,
                "image_id": image_id,
                "category_id": a.category.coco_id,
                "bbox": [b.x0 * scale, (page.height - b.y1) * scale, b.width * scale, b.height * scale],
                "segmentation": [flat],
                "area": polygon_area(a.segmentation.vertices) * scale * scale,
                "iscrowd": 0,
            })
    if offenders:
        raise CocoExportError(offenders)
    return {"images": images, "annotations": annotations, "categories": coco_categories()}


def import_coco(data: Mapping[str, Any] | str, scale: float = 1.0) -> list[CocoPage]:
    """Inverse of :func:`export_coco`: back to bottom-left coordinates."""
    if isinstance(data, str):
        with open(data, encoding="utf-8") as fh:
            data = json.load(fh)
    by_cat = {c.coco_id: c for c in CATEGORY_ORDER}
    anns_by_image: dict[int, list[LayoutAnnotation]] = {}
    images = {im["id"]: im for im in data["images"]}
    for ann in data["annotations"]:
        im = images[ann["image_id"]]
        h = im["height"] / scale
        x, y, w, bh = (v / scale for v in ann["bbox"])
        box = BBox(x, h - y - bh, x + w, h - y)
        flat = ann["segmentation"][0]
        verts = tuple((flat[i] / scale, h - flat[i + 1] / scale) for i in range(0, len(flat), 2))
        anns_by_image.setdefault(im["id"], []).append(
            LayoutAnnotation(by_cat[ann["category_id"]], box, RectilinearPolygon(verts), page_id=im["file_name"]))
    return [CocoPage(im["file_name"], im["width"] / scale, im["height"] / scale, anns_by_image.get(iid, []))
            for iid, im in sorted(images.items())]
