"""Box-level mean average precision over IOU thresholds 0.50 to 0.95."""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence

from .categories import CATEGORY_ORDER, LayoutCategory, category_from_name
from .elements import BBox

__all__ = [
    "Detection",
    "EvalReport",
    "IOU_THRESHOLDS",
    "average_precision",
    "detections_from_coco",
    "evaluate_coco",
    "iou",
    "map_50_95",
]

IOU_THRESHOLDS = tuple(round(0.50 + 0.05 * i, 2) for i in range(10))
RECALL_POINTS = tuple(i / 100 for i in range(101))
# Absorbs float noise so that an IOU computed as 0.6000000000000001 or
# 0.5999999999999999 still counts as 0.60.
IOU_EPS = 1e-12


@dataclass(frozen=True)
class Detection:
    page_id: Any
    category: LayoutCategory
    bbox: BBox
    score: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score must lie in [0, 1], got {self.score}")
        if not self.bbox.is_valid:
            raise ValueError(f"invalid box {self.bbox.to_list()}")


def iou(a: BBox, b: BBox) -> float:
    inter = a.intersection_area(b)
    if inter <= 0.0:
        return 0.0
    union = a.area + b.area - inter
    return inter / union if union > 0 else 0.0


def _match(dets: Sequence[Detection], golds: Sequence[BBox], threshold: float) -> list[bool]:
    """Greedy matching on one page; ``dets`` must already be in rank order.

    Each detection takes the unmatched gold with the highest IOU (first one
    on ties) if that IOU reaches the threshold.
    """
    taken = [False] * len(golds)
    flags = []
    for d in dets:
        best, best_iou = -1, threshold - IOU_EPS
        for gi, g in enumerate(golds):
            if taken[gi]:
                continue
            v = iou(d.bbox, g)
            if v >= best_iou and (best < 0 or v > best_iou):
                best, best_iou = gi, v
        if best >= 0:
            taken[best] = True
        flags.append(best >= 0)
    return flags


def interpolated_ap(tp_flags: Sequence[bool], n_gold: int) -> float:
    """101-point interpolated AP of a ranked list of hit/miss flags."""
    if n_gold == 0:
        raise ValueError("AP is undefined without gold instances")
    precision, recall = [], []
    tp = 0
    for k, hit in enumerate(tp_flags, start=1):
        tp += hit
        precision.append(tp / k)
        recall.append(tp / n_gold)
    # precision envelope, right to left
    for i in range(len(precision) - 2, -1, -1):
        precision[i] = max(precision[i], precision[i + 1])
    total = 0.0
    j = 0
    for r in RECALL_POINTS:
        while j < len(recall) and recall[j] < r:
            j += 1
        if j < len(recall):
            total += precision[j]
    return total / len(RECALL_POINTS)


def average_precision(dets: Sequence[Detection], golds: Sequence[tuple[Any, BBox]], threshold: float) -> float:
    """AP for one category at one IOU threshold.

    ``golds`` holds ``(page_id, bbox)`` pairs. Detections are ranked by
    descending score, ties kept in input order.
    """
    n_gold = len(golds)
    if n_gold == 0:
        raise ValueError("AP is undefined without gold instances")
    gold_by_page: dict[Any, list[BBox]] = defaultdict(list)
    for pid, box in golds:
        gold_by_page[pid].append(box)
    order = sorted(range(len(dets)), key=lambda i: -dets[i].score)
    by_page: dict[Any, list[int]] = defaultdict(list)
    for i in order:
        by_page[dets[i].page_id].append(i)
    hit = [False] * len(dets)
    for pid, idxs in by_page.items():
        flags = _match([dets[i] for i in idxs], gold_by_page.get(pid, []), threshold)
        for i, f in zip(idxs, flags):
            hit[i] = f
    return interpolated_ap([hit[i] for i in order], n_gold)


@dataclass(frozen=True)
class EvalReport:
    per_category: Mapping[LayoutCategory, float]
    macro: float

    def to_dict(self) -> dict[str, Any]:
        return {"per_category": {c.value: v for c, v in self.per_category.items()}, "macro": self.macro}

    def table(self) -> str:
        """Category rows then the macro average, AP in percent."""
        width = max(len("Macro average"), *(len(c.value) for c in self.per_category)) if self.per_category else 13
        lines = [f"{'Category':<{width}}  MAP@[0.50:0.95]"]
        for c in CATEGORY_ORDER:
            if c in self.per_category:
                lines.append(f"{c.value.capitalize():<{width}}  {100 * self.per_category[c]:6.2f}")
        lines.append(f"{'Macro average':<{width}}  {100 * self.macro:6.2f}")
        return "\n".join(lines)


def _as_gold(g: Any) -> tuple[Any, LayoutCategory, BBox]:
    if isinstance(g, Detection):
        return g.page_id, g.category, g.bbox
    if isinstance(g, tuple):
        pid, cat, box = g
        return pid, category_from_name(cat), box
    return g.page_id, category_from_name(g.category), g.bbox


def map_50_95(dets: Sequence[Detection], golds: Iterable[Any],
              thresholds: Sequence[float] = IOU_THRESHOLDS) -> EvalReport:
    """Per-category AP averaged over IOU thresholds, plus the macro mean.

    Only categories present in the gold set are scored; a category with gold
    but no detections scores 0 and still counts toward the macro mean.
    """
    gold_by_cat: dict[LayoutCategory, list[tuple[Any, BBox]]] = defaultdict(list)
    for g in golds:
        pid, cat, box = _as_gold(g)
        gold_by_cat[cat].append((pid, box))
    det_by_cat: dict[LayoutCategory, list[Detection]] = defaultdict(list)
    for d in dets:
        det_by_cat[d.category].append(d)
    per_cat = {}
    for cat in CATEGORY_ORDER:
        if not gold_by_cat.get(cat):
            continue
        aps = [average_precision(det_by_cat.get(cat, []), gold_by_cat[cat], t) for t in thresholds]
        per_cat[cat] = sum(aps) / len(aps)
    macro = sum(per_cat.values()) / len(per_cat) if per_cat else 0.0
    return EvalReport(per_cat, macro)


def _xywh(b: Sequence[float]) -> BBox:
    x, y, w, h = (float(v) for v in b)
    return BBox(x, y, x + w, y + h)


def _load(data: Any) -> Any:
    if isinstance(data, (str, bytes)) or hasattr(data, "__fspath__"):
        with open(data, encoding="utf-8") as fh:
            return json.load(fh)
    return data


def detections_from_coco(results: Any) -> list[Detection]:
    """Detections from a COCO results list (``image_id``, ``category_id``, ``bbox``, ``score``)."""
    by_id = {c.coco_id: c for c in CATEGORY_ORDER}
    out = []
    for r in _load(results):
        out.append(Detection(r["image_id"], by_id[int(r["category_id"])], _xywh(r["bbox"]),
                             float(r.get("score", 1.0))))
    return out


def gold_from_coco(dataset: Any) -> list[tuple[Any, LayoutCategory, BBox]]:
    by_id = {c.coco_id: c for c in CATEGORY_ORDER}
    return [(a["image_id"], by_id[int(a["category_id"])], _xywh(a["bbox"])) for a in _load(dataset)["annotations"]]


def evaluate_coco(predictions: Any, gold: Any) -> EvalReport:
    """Score a COCO results file against a COCO dataset file.

    ``predictions`` may also be a COCO dataset, whose annotations are then
    read as detections with score 1.
    """
    preds = _load(predictions)
    if isinstance(preds, Mapping):
        preds = [{**a, "score": a.get("score", 1.0)} for a in preds["annotations"]]
    return map_50_95(detections_from_coco(preds), gold_from_coco(gold))
