"""scikit-learn style wrappers around the annotation pipeline and the split.

These let the pipeline sit inside code that expects ``fit``/``transform`` and
``get_params``/``set_params``. Neither step learns anything from data in
the statistical sense: ``fit`` validates the configuration (and, for the
partitioner, computes journal statistics and the split) and ``transform``
applies it.
"""

from __future__ import annotations

import os
from typing import Any, Sequence

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .article import Article, NodeGroups, TagMap, parse_article
from .elements import PageElements, load_page_elements
from .partition import DatasetSplit, PageRecord, Quotas, eligible_journals, journal_stats, make_split
from .pipeline import AnnotateConfig, DocumentResult, annotate_document

__all__ = ["JournalPartitioner", "LayoutAnnotator", "check_document_pairs", "check_page_records"]


def _check_unit(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return value


def check_document_pairs(X: Any) -> list[tuple[str, Sequence[PageElements], Article | NodeGroups]]:
    """Normalize annotator input to ``(doc_id, pages, article)`` triples.

    Each item may be a ``(pages, article)`` pair, a ``(doc_id, pages,
    article)`` triple, or a pair of paths ``(elements_path, xml_path)``.
    """
    if isinstance(X, (str, bytes)) or not hasattr(X, "__iter__"):
        raise TypeError("expected a sequence of documents")
    out = []
    for i, item in enumerate(X):
        if not isinstance(item, (tuple, list)) or len(item) not in (2, 3):
            raise TypeError(f"document {i}: expected a pair or a triple, got {type(item).__name__}")
        if len(item) == 3:
            doc_id, pages, article = item
        else:
            pages, article = item
            doc_id = str(i)
        if isinstance(pages, (str, os.PathLike)):
            if len(item) == 2:
                doc_id = os.path.basename(os.fspath(pages)).split(".")[0]
            pages = load_page_elements(pages)
        if isinstance(article, (str, os.PathLike)):
            article = parse_article(article)
        if not all(isinstance(p, PageElements) for p in pages):
            raise TypeError(f"document {i}: pages must be PageElements")
        if not isinstance(article, (Article, NodeGroups)):
            raise TypeError(f"document {i}: expected an Article or NodeGroups")
        out.append((str(doc_id), list(pages), article))
    return out


def check_page_records(X: Any) -> list[PageRecord]:
    records = list(X)
    bad = [i for i, r in enumerate(records) if not isinstance(r, PageRecord)]
    if bad:
        raise TypeError(f"items {bad[:5]} are not PageRecord instances")
    ids = [r.page_id for r in records]
    if len(set(ids)) != len(ids):
        raise ValueError("page ids must be unique")
    return records


class LayoutAnnotator(BaseEstimator, TransformerMixin):
    """Annotate documents: ``transform`` returns one DocumentResult per input."""

    def __init__(self, threshold=0.99, title_threshold=0.90, lookahead_pages=1, removal=None, tagmap_path=None):
        self.threshold = threshold
        self.title_threshold = title_threshold
        self.lookahead_pages = lookahead_pages
        self.removal = removal
        self.tagmap_path = tagmap_path

    def fit(self, X=None, y=None):
        _check_unit("threshold", self.threshold)
        _check_unit("title_threshold", self.title_threshold)
        if int(self.lookahead_pages) < 0:
            raise ValueError("lookahead_pages must be >= 0")
        self.config_ = AnnotateConfig(
            threshold=float(self.threshold),
            title_threshold=float(self.title_threshold),
            removal=frozenset(self.removal) if self.removal is not None else None,
            lookahead_pages=int(self.lookahead_pages),
            tagmap=TagMap.load(self.tagmap_path) if self.tagmap_path else None,
        )
        return self

    def transform(self, X) -> list[DocumentResult]:
        check_is_fitted(self, "config_")
        return [annotate_document(pages, article, doc_id, self.config_)
                for doc_id, pages, article in check_document_pairs(X)]


class JournalPartitioner(BaseEstimator, TransformerMixin):
    """Journal-level split: ``fit`` draws it, ``transform`` labels pages.

    ``transform`` maps each page record to ``"train"``, ``"dev"``, ``"test"``
    or ``None`` when the page was not sampled.
    """

    def __init__(self, seed=0, quotas=None):
        self.seed = seed
        self.quotas = quotas

    def fit(self, X, y=None):
        records = check_page_records(X)
        quotas = self.quotas if isinstance(self.quotas, Quotas) else Quotas.from_mapping(self.quotas or {})
        self.stats_ = journal_stats(records)
        self.eligible_ = eligible_journals(self.stats_, quotas.eligibility)
        self.split_: DatasetSplit = make_split(self.stats_, records, int(self.seed), quotas)
        return self

    def transform(self, X) -> list[str | None]:
        check_is_fitted(self, "split_")
        return [self.split_.split_of(r.page_id) for r in check_page_records(X)]
