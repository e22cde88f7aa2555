"""Article XML ingest: parse, prune, move floats, bucket nodes into match groups.

The tree keeps mixed content (text runs interleaved with child nodes) so that
deleting an inline node such as a formula leaves the surrounding text, tail
included, exactly as it was.
"""

from __future__ import annotations

import json
import logging
import os
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field, replace
from functools import cached_property
from importlib import resources
from typing import IO, Iterable, Iterator, Union

from .categories import LayoutCategory, category_of
from .textnorm import normalize_kd

__all__ = [
    "Article",
    "ArticleError",
    "FigureEntry",
    "GroupNode",
    "NodeGroups",
    "TableEntry",
    "TagMap",
    "XmlNode",
    "group_nodes",
    "parse_article",
    "prune",
    "restructure_floats",
]

log = logging.getLogger(__name__)

Source = Union[str, bytes, os.PathLike, IO[bytes]]

FLOAT_KINDS = frozenset({"fig", "fig-group", "table-wrap", "table-wrap-group", "list"})


class ArticleError(ValueError):
    pass


@dataclass(frozen=True)
class TagMap:
    block: frozenset[str]
    inline: frozenset[str]
    meta: frozenset[str]
    remove: frozenset[str]

    @classmethod
    def load(cls, path: str | os.PathLike | None = None) -> "TagMap":
        if path is None:
            raw = json.loads(resources.files(__package__).joinpath("tagmap.json").read_text("utf-8"))
        else:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        return cls(*(frozenset(raw.get(k, ())) for k in ("block", "inline", "meta", "remove")))

    def kind_of(self, tag: str) -> str:
        if tag in self.block or tag in self.inline or tag in self.meta or tag in self.remove:
            return tag
        return "unknown"

    def is_block(self, kind: str) -> bool:
        return kind in self.block


DEFAULT_TAGMAP = TagMap.load()


@dataclass(frozen=True, eq=False)
class XmlNode:
    kind: str
    content: tuple[Union[str, "XmlNode"], ...] = ()
    attrs: tuple[tuple[str, str], ...] = ()
    block: bool = True

    @property
    def children(self) -> tuple["XmlNode", ...]:
        return tuple(c for c in self.content if isinstance(c, XmlNode))

    def attr(self, name: str, default: str | None = None) -> str | None:
        return dict(self.attrs).get(name, default)

    @cached_property
    def raw_text(self) -> str:
        parts: list[str] = []
        _flatten(self, parts)
        return "".join(parts)

    @cached_property
    def text(self) -> str:
        return normalize_kd(self.raw_text)

    def iter(self) -> Iterator["XmlNode"]:
        """Depth-first, document order, self first."""
        yield self
        for c in self.children:
            yield from c.iter()

    def find(self, kind: str) -> "XmlNode | None":
        for c in self.children:
            if c.kind == kind:
                return c
        return None

    def findall(self, kind: str) -> list["XmlNode"]:
        return [c for c in self.children if c.kind == kind]

    def structure(self) -> tuple:
        """Hashable structural form, for equality checks in tests."""
        return (self.kind, self.attrs, tuple(c if isinstance(c, str) else c.structure() for c in self.content))


def _flatten(node: XmlNode, out: list[str]) -> None:
    if node.kind == "name":
        # rendered as "Given Surname"
        given = node.find("given-names")
        surname = node.find("surname")
        if given is not None or surname is not None:
            out.append(" ")
            for part in (node.find("prefix"), given, surname, node.find("suffix")):
                if part is not None:
                    out.append(part.raw_text)
                    out.append(" ")
            return
    if node.block:
        out.append(" ")
    for c in node.content:
        if isinstance(c, str):
            out.append(c)
        else:
            _flatten(c, out)
    if node.block:
        out.append(" ")


@dataclass(frozen=True)
class Article:
    root: XmlNode
    journal_id: str
    has_article_title: bool
    article_id: str | None = None


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1] if "}" in tag else tag.split(":")[-1]


def _convert(el: ET.Element, tagmap: TagMap) -> XmlNode:
    kind = tagmap.kind_of(_local(el.tag))
    content: list[Union[str, XmlNode]] = []
    if el.text:
        content.append(el.text)
    for child in el:
        if not isinstance(child.tag, str):
            # comments / processing instructions: keep only their tail
            if child.tail:
                content.append(child.tail)
            continue
        content.append(_convert(child, tagmap))
        if child.tail:
            content.append(child.tail)
    attrs = tuple(sorted((_local(k), v) for k, v in el.attrib.items()))
    block = kind != "unknown" and kind not in tagmap.inline
    if kind not in tagmap.block and kind in tagmap.remove:
        block = False
    return XmlNode(kind, tuple(content), attrs, block)


def parse_article(source: Source, tagmap: TagMap | None = None) -> Article:
    """Parse article XML from a path, bytes or binary file object."""
    tagmap = tagmap or DEFAULT_TAGMAP
    try:
        if isinstance(source, (bytes, bytearray)):
            el = ET.fromstring(bytes(source))
        elif isinstance(source, (str, os.PathLike)) and not str(source).lstrip().startswith("<"):
            el = ET.parse(source).getroot()
        elif isinstance(source, str):
            el = ET.fromstring(source)
        else:
            el = ET.parse(source).getroot()
    except ET.ParseError as exc:
        raise ArticleError(f"malformed XML: {exc}") from exc
    root = _convert(el, tagmap)
    if root.kind != "article":
        raise ArticleError(f"root element is <{_local(el.tag)}>, expected <article>")

    journal_id = None
    article_id = None
    front = root.find("front")
    if front is not None:
        jmeta = front.find("journal-meta")
        if jmeta is not None:
            ids = [(n.attr("journal-id-type"), normalize_kd(n.raw_text)) for n in jmeta.findall("journal-id")]
            ids = [(t, v) for t, v in ids if v]
            preferred = [v for t, v in ids if t == "nlm-ta"]
            if preferred:
                journal_id = preferred[0]
            elif ids:
                journal_id = ids[0][1]
        ameta = front.find("article-meta")
        if ameta is not None:
            aids = {n.attr("pub-id-type"): normalize_kd(n.raw_text) for n in ameta.findall("article-id")}
            article_id = aids.get("pmc") or aids.get("doi") or next(iter(aids.values()), None)
    if not journal_id:
        raise ArticleError("article has no journal-meta/journal-id; the journal id is required")
    has_title = any(n.kind == "article-title" and n.text for n in root.iter())
    return Article(root, journal_id, has_title, article_id)


def prune(tree: XmlNode | Article, removal: Iterable[str] | None = None) -> XmlNode:
    """Drop every node whose kind is in ``removal`` (default: the tag map's list)."""
    if isinstance(tree, Article):
        tree = tree.root
    kinds = frozenset(DEFAULT_TAGMAP.remove if removal is None else removal)
    return _prune(tree, kinds)


def _prune(node: XmlNode, kinds: frozenset[str]) -> XmlNode:
    content = tuple(c if isinstance(c, str) else _prune(c, kinds)
                    for c in node.content if isinstance(c, str) or c.kind not in kinds)
    return replace(node, content=content)


def restructure_floats(tree: XmlNode) -> XmlNode:
    """Move every list, table-wrap and fig node into a top-level floats-group.

    Floats nested inside another float stay where they are (a nested list is
    part of its parent list). Relative document order of the moved floats is
    kept.
    """
    floats: list[XmlNode] = []

    def strip(node: XmlNode) -> XmlNode:
        content: list[Union[str, XmlNode]] = []
        for c in node.content:
            if isinstance(c, str):
                content.append(c)
            elif c.kind in FLOAT_KINDS:
                floats.append(c)
            elif c.kind == "floats-group":
                content.append(c)
            else:
                content.append(strip(c))
        return replace(node, content=tuple(content))

    # floats already in a floats-group are collected in place, so a second
    # pass finds the same sequence
    def collect_group(node: XmlNode) -> XmlNode:
        rest: list[Union[str, XmlNode]] = []
        for c in node.content:
            if isinstance(c, str):
                if c.strip():
                    rest.append(c)
            elif c.kind in FLOAT_KINDS:
                floats.append(c)
            else:
                rest.append(strip(c))
        return replace(node, content=tuple(rest))

    content: list[Union[str, XmlNode]] = []
    groups: list[XmlNode] = []
    for c in tree.content:
        if isinstance(c, XmlNode) and c.kind == "floats-group":
            groups.append(collect_group(c))
            content.append(c)  # placeholder, replaced below
        elif isinstance(c, XmlNode):
            content.append(strip(c) if c.kind not in FLOAT_KINDS else c)
            if c.kind in FLOAT_KINDS:
                floats.append(content.pop())
        else:
            content.append(c)
    if not floats and not groups:
        return tree

    rest: list[Union[str, XmlNode]] = []
    for g in groups:
        rest.extend(g.content)
    merged = XmlNode("floats-group", tuple(rest) + tuple(floats), (), True)
    out: list[Union[str, XmlNode]] = [c for c in content
                                      if not (isinstance(c, XmlNode) and c.kind == "floats-group")]
    out.append(merged)
    return replace(tree, content=tuple(out))


# --------------------------------------------------------------------------
# grouping


@dataclass(frozen=True)
class GroupNode:
    node_id: str
    role: str
    text: str
    kind: str = ""

    @property
    def category(self) -> LayoutCategory:
        return category_of(self.role)


@dataclass(frozen=True)
class FigureEntry:
    node_id: str
    label: GroupNode | None
    caption: GroupNode | None
    body: GroupNode


@dataclass(frozen=True)
class TableEntry:
    node_id: str
    label: GroupNode | None
    caption: GroupNode | None
    footnotes: GroupNode | None
    body: GroupNode


@dataclass
class NodeGroups:
    sorted: list[GroupNode] = field(default_factory=list)
    unsorted: list[GroupNode] = field(default_factory=list)
    figures: list[FigureEntry] = field(default_factory=list)
    tables: list[TableEntry] = field(default_factory=list)
    lists: list[GroupNode] = field(default_factory=list)

    def all_nodes(self) -> list[GroupNode]:
        out = list(self.sorted) + list(self.unsorted) + list(self.lists)
        for f in self.figures:
            out.extend(n for n in (f.label, f.caption, f.body) if n is not None)
        for t in self.tables:
            out.extend(n for n in (t.label, t.caption, t.footnotes, t.body) if n is not None)
        return out


_SEC_LIKE = frozenset({"sec", "app", "notes", "boxed-text", "disp-quote", "statement", "abstract",
                       "trans-abstract", "body", "back", "app-group"})
_IGNORED = frozenset({"graphic", "media", "disp-formula", "disp-formula-group", "label"})


class _Grouper:
    def __init__(self, tagmap: TagMap):
        self.tagmap = tagmap
        self.groups = NodeGroups()
        self.counter = 0

    def make(self, node: XmlNode | None, role: str, text: str | None = None) -> GroupNode | None:
        if node is None:
            return None
        self.counter += 1
        t = node.text if text is None else normalize_kd(text)
        return GroupNode(f"n{self.counter:04d}", role, t, node.kind)

    def add(self, bucket: list, node: XmlNode, role: str, text: str | None = None) -> None:
        g = self.make(node, role, text)
        if g is not None and g.text:
            bucket.append(g)

    # ---- front matter
    def front(self, front: XmlNode) -> None:
        for c in front.children:
            if c.kind == "article-meta":
                self.article_meta(c)
            elif c.kind in self.tagmap.meta:
                continue
            else:
                self.unknown(c)

    def article_meta(self, meta: XmlNode) -> None:
        g = self.groups
        for c in meta.children:
            k = c.kind
            if k == "title-group":
                for t in c.children:
                    if t.kind in ("article-title", "subtitle"):
                        self.add(g.sorted, t, "article-title")
            elif k == "contrib-group":
                self.contrib_group(c)
            elif k == "aff":
                self.add(g.unsorted, c, "affiliation")
            elif k == "author-notes":
                self.add(g.unsorted, c, "paper-information")
            elif k == "permissions":
                for p in c.children:
                    if p.kind == "copyright-statement":
                        self.add(g.unsorted, p, "copyright")
                    elif p.kind == "license":
                        self.add(g.unsorted, p, "license")
            elif k in ("abstract", "trans-abstract"):
                self.abstract(c)
            elif k == "kwd-group":
                self.add(g.sorted, c, "keywords", _keywords_text(c))
            elif k in self.tagmap.meta:
                continue
            else:
                self.unknown(c)

    def contrib_group(self, node: XmlNode) -> None:
        names = []
        for c in node.children:
            if c.kind == "contrib":
                names.append(" ".join(x.raw_text for x in c.children
                                      if x.kind in ("name", "collab", "string-name")))
            elif c.kind == "aff":
                self.add(self.groups.unsorted, c, "affiliation")
        if any(n.strip() for n in names):
            self.add(self.groups.unsorted, node, "author", ", ".join(n.strip() for n in names if n.strip()))

    def abstract(self, node: XmlNode) -> None:
        structured = any(c.kind in ("sec", "p", "title") for c in node.children)
        if not structured:
            self.add(self.groups.sorted, node, "abstract")
            return
        self.section(node, "abstract", self.groups.sorted)

    # ---- sections
    def section(self, node: XmlNode, para_role: str, bucket: list) -> None:
        g = self.groups
        label = node.find("label") if node.kind in ("sec", "app") else None
        for c in node.children:
            k = c.kind
            if k == "title":
                text = f"{label.raw_text} {c.raw_text}" if label is not None else None
                self.add(bucket, c, "section-title", text)
            elif k in ("p", "def-list", "preformat", "verse-group", "address"):
                self.add(bucket, c, para_role)
            elif k in _SEC_LIKE:
                self.section(c, para_role, bucket)
            elif k == "fn-group":
                for fn in c.findall("fn"):
                    self.add(g.unsorted, fn, "footnote")
            elif k == "ack":
                self.ack(c)
            elif k == "glossary":
                self.add(g.unsorted, c, "abbreviations")
            elif k == "ref-list":
                self.ref_list(c)
            elif k in _IGNORED or k in self.tagmap.meta:
                continue
            else:
                self.unknown(c)

    def ack(self, node: XmlNode) -> None:
        for c in node.children:
            if c.kind == "title":
                self.add(self.groups.unsorted, c, "section-title")
            elif c.text:
                self.add(self.groups.unsorted, c, "acknowledgment")

    def ref_list(self, node: XmlNode) -> None:
        for c in node.children:
            if c.kind == "title":
                self.add(self.groups.sorted, c, "section-title")
            elif c.kind == "ref":
                self.add(self.groups.sorted, c, "reference")
            elif c.kind == "ref-list":
                self.ref_list(c)

    def back(self, node: XmlNode) -> None:
        for c in node.children:
            k = c.kind
            if k == "ack":
                self.ack(c)
            elif k == "app-group" or k == "app":
                self.section(c, "appendix", self.groups.sorted)
            else:
                self.section(XmlNode("back", (c,)), "paragraph", self.groups.sorted)

    # ---- floats
    def floats(self, node: XmlNode) -> None:
        g = self.groups
        for c in node.children:
            k = c.kind
            if k in ("fig", "fig-group"):
                self.counter += 1
                fid = f"n{self.counter:04d}"
                label = self.make(c.find("label"), "figure-label")
                caption = self.make(c.find("caption"), "caption")
                body = GroupNode(fid + ".body", "figure-body", "", k)
                g.figures.append(FigureEntry(fid, _nonempty(label), _nonempty(caption), body))
            elif k in ("table-wrap", "table-wrap-group"):
                self.counter += 1
                tid = f"n{self.counter:04d}"
                label = self.make(c.find("label"), "table-label")
                caption = self.make(c.find("caption"), "caption")
                foot = self.make(c.find("table-wrap-foot"), "table-footnote")
                table = next((n for n in c.iter() if n.kind == "table"), None)
                body = GroupNode(tid + ".body", "table-body", table.text if table is not None else "", k)
                g.tables.append(TableEntry(tid, _nonempty(label), _nonempty(caption), _nonempty(foot), body))
            elif k == "list":
                self.add(g.lists, c, "list")
            else:
                self.unknown(c)

    def unknown(self, node: XmlNode) -> None:
        if node.kind in self.tagmap.meta or node.kind in _IGNORED:
            return
        if node.text:
            log.warning("unrecognized node <%s> skipped during grouping", node.kind)


def _nonempty(node: GroupNode | None) -> GroupNode | None:
    return node if node is not None and node.text else None


def _keywords_text(node: XmlNode) -> str:
    title = node.find("title")
    kwds = [k.raw_text.strip() for k in node.children if k.kind == "kwd"]
    head = title.raw_text.strip() if title is not None else ""
    body = ", ".join(k for k in kwds if k)
    return f"{head} {body}" if head else body


def group_nodes(tree: XmlNode | Article, tagmap: TagMap | None = None) -> NodeGroups:
    """Bucket a pruned, restructured tree into the five match groups.

    ``sorted`` follows document order: article title, abstract, keywords,
    then body and back-matter sections.
    """
    if isinstance(tree, Article):
        tree = tree.root
    grouper = _Grouper(tagmap or DEFAULT_TAGMAP)
    order = {"front": 0, "body": 1, "back": 2, "floats-group": 3}
    for c in sorted(tree.children, key=lambda n: order.get(n.kind, 4)):
        if c.kind == "front":
            grouper.front(c)
        elif c.kind == "body":
            grouper.section(c, "paragraph", grouper.groups.sorted)
        elif c.kind == "back":
            grouper.back(c)
        elif c.kind == "floats-group":
            grouper.floats(c)
        else:
            grouper.unknown(c)
    return grouper.groups


def prepare_groups(article: Article, removal: Iterable[str] | None = None,
                   tagmap: TagMap | None = None) -> NodeGroups:
    """prune -> restructure_floats -> group_nodes."""
    return group_nodes(restructure_floats(prune(article.root, removal)), tagmap)
