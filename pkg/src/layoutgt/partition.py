"""Journal-level train/dev/test split with eligibility rules and sampling quotas.

Every journal lands in exactly one split. Journals that are small enough
and rich enough in figures, tables and lists are halved at random into a
dev pool and a test pool; the rest feed training under per-journal caps.
All randomness comes from one ``random.Random(seed)`` applied to inputs in
sorted order, so the split does not depend on the order pages arrive in.
"""

from __future__ import annotations

import json
import logging
import random
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Any, Iterable, Mapping, Sequence

from .categories import LayoutCategory, category_from_name

log = logging.getLogger(__name__)

__all__ = [
    "KIND_PRIORITY",
    "JournalStats",
    "PageRecord",
    "Quotas",
    "DatasetSplit",
    "classify_page",
    "eligible_journals",
    "journal_stats",
    "make_split",
    "primary_kind",
]

PLAIN = "plain"
TITLE = "title"
KIND_PRIORITY = ("list", "table", "figure", TITLE, PLAIN)
PROVENANCE = "machine-only"

_KIND_OF_CATEGORY = {
    LayoutCategory.LIST: "list",
    LayoutCategory.TABLE: "table",
    LayoutCategory.FIGURE: "figure",
}


def _category(a: Any) -> LayoutCategory:
    if isinstance(a, Mapping):
        return category_from_name(a["category"])
    return category_from_name(a.category)


def classify_page(annotations: Iterable[Any], is_title_page: bool = False) -> frozenset[str]:
    """Page kinds from annotation categories plus the title-page flag.

    Kinds are not exclusive; a page with none of list, table, figure or
    title is ``plain``.
    """
    kinds = {_KIND_OF_CATEGORY[c] for c in map(_category, annotations) if c in _KIND_OF_CATEGORY}
    if is_title_page:
        kinds.add(TITLE)
    return frozenset(kinds) if kinds else frozenset({PLAIN})


def primary_kind(kinds: Iterable[str]) -> str:
    """The quota a multi-kind page is drawn under: scarcest kind first."""
    ks = set(kinds)
    for k in KIND_PRIORITY:
        if k in ks:
            return k
    return PLAIN


@dataclass(frozen=True)
class PageRecord:
    page_id: str
    journal_id: str
    kinds: frozenset[str]
    counts: Mapping[str, int] = field(default_factory=dict)

    @classmethod
    def from_annotations(cls, page_id: str, journal_id: str, annotations: Sequence[Any],
                         is_title_page: bool = False) -> "PageRecord":
        counts = Counter(_category(a).value for a in annotations)
        return cls(page_id, journal_id, classify_page(annotations, is_title_page), dict(counts))


@dataclass(frozen=True)
class JournalStats:
    journal_id: str
    page_count: int = 0
    figure_count: int = 0
    table_count: int = 0
    list_count: int = 0

    def __post_init__(self) -> None:
        for name in ("page_count", "figure_count", "table_count", "list_count"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


def journal_stats(pages: Iterable[PageRecord]) -> list[JournalStats]:
    acc: dict[str, Counter] = {}
    for p in pages:
        c = acc.setdefault(p.journal_id, Counter())
        c["pages"] += 1
        for k in ("figure", "table", "list"):
            c[k] += p.counts.get(k, 0)
    return [JournalStats(j, c["pages"], c["figure"], c["table"], c["list"]) for j, c in sorted(acc.items())]


@dataclass(frozen=True)
class Eligibility:
    max_pages: int = 2000
    min_figures: int = 320
    min_tables: int = 140
    min_lists: int = 20

    def accepts(self, s: JournalStats) -> bool:
        return (s.page_count <= self.max_pages and s.figure_count >= self.min_figures
                and s.table_count >= self.min_tables and s.list_count >= self.min_lists)


def eligible_journals(stats: Sequence[JournalStats], rules: Eligibility | None = None) -> set[str]:
    rules = rules or Eligibility()
    return {s.journal_id for s in stats if rules.accepts(s)}


@dataclass(frozen=True)
class Quotas:
    """Sampling quotas.

    ``pool`` applies to each of the dev and test pools as a whole (list
    pages are always taken in full there); ``train`` caps each training
    journal.
    """

    pool: Mapping[str, int] = field(default_factory=lambda: {"table": 3000, "figure": 3000, TITLE: 2000, PLAIN: 2000})
    train: Mapping[str, int] = field(default_factory=lambda: {"list": 200, "table": 50, "figure": 50, TITLE: 50, PLAIN: 25})
    eligibility: Eligibility = field(default_factory=Eligibility)

    def __post_init__(self) -> None:
        for name, table in (("pool", self.pool), ("train", self.train)):
            for k, v in table.items():
                if k not in KIND_PRIORITY:
                    raise ValueError(f"unknown page kind {k!r} in {name} quotas")
                if int(v) < 0:
                    raise ValueError(f"{name} quota for {k} must be >= 0")

    @classmethod
    def from_mapping(cls, raw: Mapping[str, Any]) -> "Quotas":
        base = cls()
        pool = dict(base.pool)
        pool.update({k: int(v) for k, v in raw.get("pool", {}).items()})
        train = dict(base.train)
        train.update({k: int(v) for k, v in raw.get("train", {}).items()})
        elig = Eligibility(**{**asdict(base.eligibility), **raw.get("eligibility", {})})
        return cls(pool, train, elig)

    @classmethod
    def load(cls, path) -> "Quotas":
        with open(path, encoding="utf-8") as fh:
            return cls.from_mapping(json.load(fh))

    def to_dict(self) -> dict[str, Any]:
        return {"pool": dict(self.pool), "train": dict(self.train), "eligibility": asdict(self.eligibility)}


@dataclass
class DatasetSplit:
    train: dict[str, PageRecord] = field(default_factory=dict)
    dev: dict[str, PageRecord] = field(default_factory=dict)
    test: dict[str, PageRecord] = field(default_factory=dict)
    seed: int = 0
    reasons: dict[str, str] = field(default_factory=dict)
    quotas: Quotas = field(default_factory=Quotas)

    SPLITS = ("train", "dev", "test")

    def split_of(self, page_id: str) -> str | None:
        for name in self.SPLITS:
            if page_id in getattr(self, name):
                return name
        return None

    def journals(self, name: str) -> set[str]:
        return {p.journal_id for p in getattr(self, name).values()}

    def manifest(self) -> dict[str, Any]:
        return {
            "seed": self.seed,
            "quotas": self.quotas.to_dict(),
            "splits": {
                name: [
                    {
                        "page_id": p.page_id,
                        "journal_id": p.journal_id,
                        "kinds": sorted(p.kinds),
                        "reason": self.reasons[p.page_id],
                        "provenance": PROVENANCE,
                    }
                    for _, p in sorted(getattr(self, name).items())
                ]
                for name in self.SPLITS
            },
        }

    def dumps(self) -> str:
        return json.dumps(self.manifest(), indent=2, sort_keys=True) + "\n"


def _by_kind(pages: Iterable[PageRecord]) -> dict[str, list[PageRecord]]:
    out: dict[str, list[PageRecord]] = {k: [] for k in KIND_PRIORITY}
    for p in sorted(pages, key=lambda p: p.page_id):
        out[primary_kind(p.kinds)].append(p)
    return out


def _draw(rng: random.Random, pages: list[PageRecord], n: int) -> list[PageRecord]:
    if n >= len(pages):
        return list(pages)
    return sorted(rng.sample(pages, n), key=lambda p: p.page_id)


def _fill_pool(rng, pages, quotas: Quotas, target: dict, reasons: dict) -> None:
    groups = _by_kind(pages)
    for k in KIND_PRIORITY:
        if k == "list":
            chosen, why = groups[k], "all-lists"
        else:
            chosen, why = _draw(rng, groups[k], int(quotas.pool.get(k, 0))), f"quota:{k}"
        for p in chosen:
            target[p.page_id] = p
            reasons[p.page_id] = why


def make_split(stats: Sequence[JournalStats] | None, pages: Sequence[PageRecord], seed: int = 0,
               quotas: Quotas | None = None) -> DatasetSplit:
    """Split accepted pages at journal level.

    ``stats`` may be ``None`` to derive them from ``pages``. Eligible journals
    are shuffled and halved; with an odd count the extra journal goes to dev.
    """
    quotas = quotas or Quotas()
    ids = [p.page_id for p in pages]
    if len(set(ids)) != len(ids):
        raise ValueError("page ids must be unique")
    if stats is None:
        stats = journal_stats(pages)
    eligible = sorted(eligible_journals(stats, quotas.eligibility))
    rng = random.Random(seed)
    split = DatasetSplit(seed=seed, quotas=quotas)
    if not eligible:
        log.warning("no eligible journals: dev and test will be empty")
    shuffled = list(eligible)
    rng.shuffle(shuffled)
    n_dev = (len(shuffled) + 1) // 2
    dev_j, test_j = set(shuffled[:n_dev]), set(shuffled[n_dev:])

    by_journal: dict[str, list[PageRecord]] = {}
    for p in pages:
        by_journal.setdefault(p.journal_id, []).append(p)

    _fill_pool(rng, [p for j in sorted(dev_j) for p in by_journal.get(j, [])], quotas, split.dev, split.reasons)
    _fill_pool(rng, [p for j in sorted(test_j) for p in by_journal.get(j, [])], quotas, split.test, split.reasons)

    for j in sorted(by_journal):
        if j in dev_j or j in test_j:
            continue
        groups = _by_kind(by_journal[j])
        for k in KIND_PRIORITY:
            for p in _draw(rng, groups[k], int(quotas.train.get(k, 0))):
                split.train[p.page_id] = p
                split.reasons[p.page_id] = f"cap:{k}"
    log.info("split: %d train, %d dev, %d test pages (%d eligible journals)",
             len(split.train), len(split.dev), len(split.test), len(eligible))
    return split


def records_from_annotation_doc(doc: Mapping[str, Any]) -> list[PageRecord]:
    """Page records for every page in an annotation file (all are accepted)."""
    out = []
    for page in doc.get("pages", []):
        anns = page.get("annotations", [])
        title = bool(page.get("quality", {}).get("is_title_page", False))
        out.append(PageRecord.from_annotations(f"{doc['doc_id']}/{page['page_id']}", doc["journal_id"], anns, title))
    return out
