"""Command-line entry point: annotate, partition, export-coco, evaluate, stats."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Sequence

from .article import ArticleError, TagMap
from .categories import CATEGORY_ORDER
from .coco import CocoExportError, CocoPage, export_coco
from .elements import ElementsParseError, ElementsValidationError
from .evaluate import evaluate_coco
from .partition import Quotas, make_split, records_from_annotation_doc
from .pipeline import AnnotateConfig, annotate_files, iter_page_annotations, load_annotation_file
from .quality import format_report

log = logging.getLogger("layoutgt")

ELEMENTS_SUFFIX = ".elements.json"
XML_SUFFIX = ".xml"
ANNOTATION_SUFFIX = ".annotations.json"
SPLITS = ("train", "dev", "test")


def atomic_write(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def pair_inputs(elements_dir: Path, xml_dir: Path) -> list[tuple[str, Path, Path]]:
    """Pair ``X.elements.json`` with ``X.xml`` by basename; warn about orphans."""
    elements = {p.name[: -len(ELEMENTS_SUFFIX)]: p for p in elements_dir.glob(f"*{ELEMENTS_SUFFIX}")}
    xmls = {p.name[: -len(XML_SUFFIX)]: p for p in xml_dir.glob(f"*{XML_SUFFIX}")}
    for name in sorted(elements.keys() - xmls.keys()):
        log.warning("no XML for %s, skipped", elements[name])
    for name in sorted(xmls.keys() - elements.keys()):
        log.warning("no elements file for %s, skipped", xmls[name])
    return [(name, elements[name], xmls[name]) for name in sorted(elements.keys() & xmls.keys())]


def _annotate_one(job: tuple[str, str, str, AnnotateConfig]) -> tuple[str, dict | None, list[str], str | None]:
    doc_id, ep, xp, config = job
    try:
        result = annotate_files(ep, xp, doc_id, config)
    except (ElementsParseError, ElementsValidationError, ArticleError, OSError, ValueError) as exc:
        return doc_id, None, [], f"{type(exc).__name__}: {exc}"
    return doc_id, result.to_json(), [format_report(r) for r in result.reports()], None


def cmd_annotate(args: argparse.Namespace) -> int:
    config = AnnotateConfig(
        threshold=args.quality_threshold,
        title_threshold=args.title_quality_threshold,
        tagmap=TagMap.load(args.tagmap) if args.tagmap else None,
    )
    out = Path(args.out)
    pairs = pair_inputs(Path(args.elements_dir), Path(args.xml_dir))
    if not pairs:
        log.warning("no paired inputs found")
    jobs = [(name, str(ep), str(xp), config) for name, ep, xp in pairs]
    if args.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_annotate_one, jobs))
    else:
        results = [_annotate_one(j) for j in jobs]
    errors = 0
    rows = ["page_id\tratio\tis_title_page\taccepted"]
    n_pages = n_acc = 0
    for doc_id, doc, reports, err in results:
        if err is not None:
            errors += 1
            log.error("%s: %s", doc_id, err)
            continue
        rows.extend(reports)
        n_pages += len(reports)
        n_acc += len(doc["pages"])
        atomic_write(out / f"{doc_id}{ANNOTATION_SUFFIX}", dumps(doc))
    atomic_write(out / "quality.tsv", "\n".join(rows) + "\n")
    log.info("annotated %d documents, %d of %d pages accepted, %d errors",
             len(results) - errors, n_acc, n_pages, errors)
    return 1 if errors else 0


def _annotation_docs(directory: Path) -> list[dict]:
    return [load_annotation_file(p) for p in sorted(directory.glob(f"*{ANNOTATION_SUFFIX}"))]


def cmd_partition(args: argparse.Namespace) -> int:
    quotas = Quotas.load(args.quota_file) if args.quota_file else Quotas()
    records = [r for doc in _annotation_docs(Path(args.annotations)) for r in records_from_annotation_doc(doc)]
    if not records:
        log.error("no accepted pages under %s", args.annotations)
        return 1
    split = make_split(None, records, args.seed, quotas)
    atomic_write(Path(args.out) / "split.json", split.dumps())
    return 0


def _split_pages(annotations: Path, manifest: dict) -> dict[str, list[CocoPage]]:
    wanted = {e["page_id"]: name for name in SPLITS for e in manifest["splits"][name]}
    out: dict[str, list[CocoPage]] = {name: [] for name in SPLITS}
    for doc in _annotation_docs(annotations):
        for page, anns in iter_page_annotations(doc):
            key = f"{doc['doc_id']}/{page['page_id']}"
            if key in wanted:
                out[wanted[key]].append(CocoPage(key, page["width"], page["height"], anns))
    for name in SPLITS:
        out[name].sort(key=lambda p: p.page_id)
    return out


def cmd_export(args: argparse.Namespace) -> int:
    with open(args.split, encoding="utf-8") as fh:
        manifest = json.load(fh)
    try:
        for name, pages in _split_pages(Path(args.annotations), manifest).items():
            atomic_write(Path(args.out) / f"{name}.json", dumps(export_coco(pages, args.scale)))
    except CocoExportError as exc:
        log.error("%s", exc)
        return 1
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    report = evaluate_coco(args.predictions, args.gold)
    print(report.table())
    if args.out:
        atomic_write(Path(args.out) / "evaluation.json", dumps(report.to_dict()))
    return 0


def split_statistics(annotations: Path, manifest: dict) -> dict[str, dict[str, Counter]]:
    stats = {}
    pages_by_split = _split_pages(annotations, manifest)
    kinds = {e["page_id"]: e["kinds"] for name in SPLITS for e in manifest["splits"][name]}
    for name, pages in pages_by_split.items():
        page_counts: Counter = Counter()
        inst: Counter = Counter()
        for p in pages:
            page_counts.update(kinds[p.page_id])
            page_counts["total"] += 1
            inst.update(a.category.value for a in p.annotations)
        stats[name] = {"pages": page_counts, "instances": inst}
    return stats


def format_statistics(stats: dict[str, dict[str, Counter]]) -> str:
    page_rows = ["total", "plain", "title", "list", "table", "figure"]
    lines = ["\t".join(["", *SPLITS])]
    lines.append("Pages")
    for k in page_rows:
        lines.append("\t".join([k, *(str(stats[s]["pages"][k]) for s in SPLITS)]))
    lines.append("Instances")
    for c in CATEGORY_ORDER:
        lines.append("\t".join([c.value, *(str(stats[s]["instances"][c.value]) for s in SPLITS)]))
    return "\n".join(lines)


def cmd_stats(args: argparse.Namespace) -> int:
    with open(args.split, encoding="utf-8") as fh:
        manifest = json.load(fh)
    print(format_statistics(split_statistics(Path(args.annotations), manifest)))
    return 0


def _unit(value: str) -> float:
    v = float(value)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"{value} is not in [0, 1]")
    return v


def _positive_int(value: str) -> int:
    v = int(value)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _positive_float(value: str) -> float:
    v = float(value)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="layoutgt", description="Layout ground truth from paired PDF elements and article XML.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("annotate", help="match elements to XML and write annotation files")
    p.add_argument("--elements-dir", required=True)
    p.add_argument("--xml-dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--quality-threshold", type=_unit, default=0.99)
    p.add_argument("--title-quality-threshold", type=_unit, default=0.90)
    p.add_argument("--tagmap", help="JSON tag map replacing the built-in one")
    p.add_argument("--workers", type=_positive_int, default=1)
    p.set_defaults(func=cmd_annotate)

    p = sub.add_parser("partition", help="journal-level train/dev/test split")
    p.add_argument("--annotations", required=True, help="directory of annotation files")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quota-file")
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("export-coco", help="one COCO file per split")
    p.add_argument("--annotations", required=True)
    p.add_argument("--split", required=True, help="split manifest")
    p.add_argument("--out", required=True)
    p.add_argument("--scale", type=_positive_float, default=1.0)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("evaluate", help="MAP@[0.50:0.95] of predictions against gold")
    p.add_argument("--predictions", required=True, help="COCO results or dataset file")
    p.add_argument("--gold", required=True, help="COCO dataset file")
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("stats", help="pages by kind and instances by category per split")
    p.add_argument("--annotations", required=True)
    p.add_argument("--split", required=True)
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
