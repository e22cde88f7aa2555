"""A synthetic 50-journal page corpus with quotas scaled down to match it."""

from __future__ import annotations

import random
from collections import Counter

from layoutgt.partition import Eligibility, PageRecord, Quotas

SCALED = Quotas(
    pool={"table": 30, "figure": 30, "title": 20, "plain": 20},
    train={"list": 20, "table": 5, "figure": 5, "title": 5, "plain": 3},
    eligibility=Eligibility(max_pages=200, min_figures=32, min_tables=14, min_lists=2),
)

KINDS = ("list", "table", "figure", "title", "plain")


def synthetic_pages(n_journals: int = 50, seed: int = 11) -> list[PageRecord]:
    rng = random.Random(seed)
    pages = []
    for j in range(n_journals):
        jid = f"J{j:02d}"
        big = j % 4 == 0                       # a quarter of journals are rich in floats
        n_pages = rng.randint(60, 180) if big else rng.randint(5, 300)
        weights = (0.05, 0.2, 0.35, 0.1, 0.3) if big else (0.01, 0.05, 0.1, 0.1, 0.74)
        for p in range(n_pages):
            kinds = {rng.choices(KINDS, weights)[0]}
            if rng.random() < 0.15:
                kinds.add(rng.choice(KINDS[:3]))
            if len(kinds) > 1:
                kinds.discard("plain")
            counts = Counter({k: rng.randint(1, 2) for k in kinds if k in ("list", "table", "figure")})
            pages.append(PageRecord(f"{jid}-d{p // 8:03d}/{p % 8 + 1}", jid, frozenset(kinds), dict(counts)))
    return pages
