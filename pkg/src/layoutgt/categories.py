"""The five layout categories and how XML node roles map onto them."""

from __future__ import annotations

import enum


class LayoutCategory(str, enum.Enum):
    TEXT = "text"
    TITLE = "title"
    LIST = "list"
    TABLE = "table"
    FIGURE = "figure"

    @property
    def coco_id(self) -> int:
        return CATEGORY_ORDER.index(self) + 1

    def __str__(self) -> str:
        return self.value


CATEGORY_ORDER = (
    LayoutCategory.TEXT,
    LayoutCategory.TITLE,
    LayoutCategory.LIST,
    LayoutCategory.TABLE,
    LayoutCategory.FIGURE,
)

# Node role -> layout category. Inline titles and labels are text; a nested
# list is annotated only through its outermost list; sub-figures only through
# the whole panel.
ROLE_CATEGORY: dict[str, LayoutCategory] = {
    "author": LayoutCategory.TEXT,
    "affiliation": LayoutCategory.TEXT,
    "paper-information": LayoutCategory.TEXT,
    "copyright": LayoutCategory.TEXT,
    "license": LayoutCategory.TEXT,
    "abstract": LayoutCategory.TEXT,
    "keywords": LayoutCategory.TEXT,
    "paragraph": LayoutCategory.TEXT,
    "footnote": LayoutCategory.TEXT,
    "appendix": LayoutCategory.TEXT,
    "acknowledgment": LayoutCategory.TEXT,
    "abbreviations": LayoutCategory.TEXT,
    "reference": LayoutCategory.TEXT,
    "caption": LayoutCategory.TEXT,
    "table-footnote": LayoutCategory.TEXT,
    "inline-title": LayoutCategory.TEXT,
    "inline-label": LayoutCategory.TEXT,
    "article-title": LayoutCategory.TITLE,
    "section-title": LayoutCategory.TITLE,
    "figure-label": LayoutCategory.TITLE,
    "table-label": LayoutCategory.TITLE,
    "list": LayoutCategory.LIST,
    "nested-list": LayoutCategory.LIST,
    "table-body": LayoutCategory.TABLE,
    "figure-body": LayoutCategory.FIGURE,
    "sub-figure": LayoutCategory.FIGURE,
}

TITLE_ROLES = frozenset({"article-title", "section-title", "figure-label", "table-label"})


def category_of(role: str) -> LayoutCategory:
    try:
        return ROLE_CATEGORY[role]
    except KeyError:
        raise ValueError(f"unrecognized node role {role!r}") from None


def category_from_name(name: str | LayoutCategory) -> LayoutCategory:
    if isinstance(name, LayoutCategory):
        return name
    return LayoutCategory(name.lower())
