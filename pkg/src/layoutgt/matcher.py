"""Sequential alignment of article nodes with page textlines.

A node's normalized text is covered left to right by consuming textlines.
Each textline is aligned against the uncovered remainder of the node text
(:func:`~layoutgt.fuzzy.match_prefix`, budget from the line length). When a
line fails in the reading-order pass, matching skips to the next textbox;
when the node text runs out inside a textbox, the textbox is split and the
rest is left for the next node; when it runs out inside a textline, the line
is shared and the next node starts matching at that character offset.

Passes per page, in order: sorted nodes (reading order, with a cursor carried
across pages), unsorted nodes, lists, table labels/captions/footnotes, figure
labels/captions. Every pass other than the first searches all still-unused
lines of the page and keeps the lowest-distance complete alignment.
"""

from __future__ import annotations

import dataclasses

import logging
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .article import GroupNode, NodeGroups
from .categories import TITLE_ROLES, LayoutCategory
from .elements import BBox, PageElements, Textbox, Textline
from .fuzzy import levenshtein, match_prefix, max_distance
from .textnorm import normalize_kd

__all__ = [
    "LineSpan",
    "MatchCursor",
    "MatchedRegion",
    "PageWorkspace",
    "annotate_page",
    "detect_inline_title",
    "match_sorted",
    "match_unsorted",
    "split_textbox",
]

log = logging.getLogger(__name__)


def split_textbox(tb: Textbox, at_line: int) -> tuple[Textbox, Textbox]:
    """Cut ``tb`` before line ``at_line``; both halves get fresh enclosing boxes."""
    if not 0 < at_line < len(tb.lines):
        raise IndexError(f"cannot split a {len(tb.lines)}-line textbox at line {at_line}")
    return Textbox.from_lines(tb.lines[:at_line]), Textbox.from_lines(tb.lines[at_line:])


@dataclass(frozen=True)
class LineSpan:
    """The part ``[start, end)`` of one normalized textline covered by a node."""

    box: int
    line: int
    start: int
    end: int
    dist: int
    budget: int
    textline: Textline
    owner: bool = True  # False when the line was already taken by the previous node

    @property
    def key(self) -> tuple[int, int]:
        return (self.box, self.line)


@dataclass
class MatchedRegion:
    node: GroupNode
    category: LayoutCategory
    spans: list[LineSpan]
    complete: bool
    page_index: int = 0
    page_id: str = ""
    partial_end: bool = False
    continues: bool = False
    merged_from: list[str] = field(default_factory=list)
    merged_roles: list[str] = field(default_factory=list)

    @property
    def lines(self) -> list[Textline]:
        """Textlines owned by this region, in matching order."""
        return [s.textline for s in self.spans if s.owner]

    @property
    def distance(self) -> int:
        return sum(s.dist for s in self.spans)

    @property
    def bbox(self) -> BBox | None:
        lines = self.lines
        if not lines:
            return None
        box = lines[0].bbox
        for ln in lines[1:]:
            box = box.union(ln.bbox)
        return box

    def textboxes(self, page: PageElements) -> list[Textbox]:
        """The matched textbox pieces, split where the node boundary fell."""
        out: list[Textbox] = []
        by_box: dict[int, list[int]] = {}
        for s in self.spans:
            if s.owner:
                by_box.setdefault(s.box, []).append(s.line)
        for b, idx in by_box.items():
            tb = page.textboxes[b]
            lo, hi = min(idx), max(idx) + 1
            if lo > 0:
                tb = split_textbox(tb, lo)[1]
                hi -= lo
            if hi < len(tb.lines):
                tb = split_textbox(tb, hi)[0]
            out.append(tb)
        return out


@dataclass(frozen=True)
class MatchCursor:
    """Reading-order position carried from one page to the next.

    ``node_index``/``node_pos`` locate the next uncovered character of the
    sorted nodes; ``textbox_index``/``line_index``/``char_offset`` the next
    unconsumed textline piece of the current page. ``pending_split`` records
    the textbox cut by the last node boundary as (textbox, line).
    """

    node_index: int = 0
    node_pos: int = 0
    textbox_index: int = 0
    line_index: int = 0
    char_offset: int = 0
    pending_split: tuple[int, int] | None = None
    deferred: int = 0
    done: frozenset[str] = frozenset()
    page_index: int = 0
    # order-free nodes whose head ended the previous page: (node_id, text position)
    pending: tuple[tuple[str, int], ...] = ()


class PageWorkspace:
    """Normalized line texts of one page and which lines are used up."""

    def __init__(self, page: PageElements, page_index: int = 0):
        self.page = page
        self.page_index = page_index
        self.norm: list[list[str]] = [[normalize_kd(ln.text) for ln in tb.lines] for tb in page.textboxes]
        self.used: list[list[bool]] = [[False] * len(tb.lines) for tb in page.textboxes]

    @property
    def n_boxes(self) -> int:
        return len(self.norm)

    def first_free(self, box: int, from_line: int = 0) -> int:
        """Index of the first unused line of ``box`` at or after ``from_line``."""
        used = self.used[box]
        for i in range(from_line, len(used)):
            if not used[i]:
                return i
        return len(used)

    def free_lines(self) -> list[tuple[int, int]]:
        return [(b, i) for b, row in enumerate(self.used) for i, u in enumerate(row) if not u]

    def free_boxes(self) -> list[BBox]:
        """Enclosing boxes of each maximal run of unused lines inside a textbox."""
        out = []
        for b, tb in enumerate(self.page.textboxes):
            run: list[Textline] = []
            for i, ln in enumerate(tb.lines):
                if not self.used[b][i]:
                    run.append(ln)
                elif run:
                    out.append(Textbox.from_lines(run).bbox)
                    run = []
            if run:
                out.append(Textbox.from_lines(run).bbox)
        return out

    def consume(self, spans: Iterable[LineSpan]) -> None:
        for s in spans:
            if s.owner:
                self.used[s.box][s.line] = True


# --------------------------------------------------------------------------
# line-level alignment


@dataclass(frozen=True)
class _Step:
    new_pos: int
    line_end: int
    dist: int
    budget: int
    # distance if this line alone absorbed all the remaining text (else None)
    fits_rest: int | None = None


def _skip_ws(text: str, pos: int) -> int:
    n = len(text)
    while pos < n and text[pos].isspace():
        pos += 1
    return pos


def _match_line(line: str, text: str, pos: int) -> _Step | None:
    """Align one (piece of a) textline with ``text`` starting at ``pos``."""
    rem = text[pos:]
    n_line = len(line)
    if not rem or not line:
        return None
    k = max_distance(n_line)
    rest = None
    if len(rem) <= n_line + k:
        d = levenshtein(line, rem, k)
        if d <= k:
            rest = d
    m = match_prefix(line, rem, k)
    if m is not None and m.end < len(rem) and not rem[m.end].isspace() and not line.endswith("-"):
        # a line ending inside a word of the text is not a line break
        m = None
    # A cheaper prefix alignment wins: the leftover text is expected on the
    # next line. The whole-rest reading is kept as a fallback for _follow.
    if m is not None and (rest is None or m.dist < rest):
        if not rem[m.end:].strip():
            return _Step(len(text), n_line, m.dist, k)
        return _Step(pos + m.end, n_line, m.dist, k, rest)
    if rest is not None:
        return _Step(len(text), n_line, rest, k)
    if len(rem) < n_line:
        kr = max_distance(len(rem))
        m = match_prefix(rem, line, kr)
        if m is not None:
            end = m.end
            if not line[end:].strip():
                end = n_line
            return _Step(len(text), end, m.dist, kr)
    return None


@dataclass
class _Trial:
    spans: list[LineSpan]
    pos: int
    complete: bool
    after: tuple[int, int, int]  # (box, line, char) just past the last span

    @property
    def dist(self) -> int:
        return sum(s.dist for s in self.spans)

    @property
    def partial(self) -> bool:
        if not self.spans:
            return False
        last = self.spans[-1]
        return last.end < len(last.textline.text) and self.after[2] > 0


MIN_RUN_CHARS = 20


def _follow(text: str, pos: int, ws: PageWorkspace, start: tuple[int, int, int],
            allow_skip: bool) -> _Trial:
    """Cover ``text[pos:]`` with lines from ``start`` onwards.

    With ``allow_skip`` a failing line sends the search to the next textbox;
    otherwise the first failure ends the trial. A run of contiguous lines
    covering fewer than ``MIN_RUN_CHARS`` characters is not trusted across
    a skip: it is dropped and the search resumes after its first line.
    """
    b, ln, c = start
    spans: list[LineSpan] = []
    after = start
    pos = _skip_ws(text, pos)
    n_text = len(text)
    fallback: tuple[int, LineSpan] | None = None
    run_idx, run_pos, run_after, run_first = 0, pos, after, None
    skipped = False
    while pos < n_text and b < ws.n_boxes:
        lines = ws.norm[b]
        if ln >= len(lines) or (ws.used[b][ln] and c == 0):
            b += 1
            ln = ws.first_free(b) if b < ws.n_boxes else 0
            c = 0
            continue
        full = lines[ln]
        piece_start = c
        while piece_start < len(full) and full[piece_start] == " ":
            piece_start += 1
        piece = full[piece_start:]
        step = _match_line(piece, text, pos) if piece else None
        if step is not None:
            fallback = None
        if step is None:
            if not allow_skip or fallback is not None:
                break
            if run_first is not None and pos - run_pos < MIN_RUN_CHARS:
                del spans[run_idx:]
                pos, after = run_pos, run_after
                b, ln, c = run_first[0], run_first[1] + 1, 0
            else:
                b += 1
                ln = ws.first_free(b) if b < ws.n_boxes else 0
                c = 0
            run_idx, run_pos, run_after, run_first = len(spans), pos, after, None
            skipped = True
            continue
        if run_first is None:
            run_first = (b, ln)
        textline = ws.page.textboxes[b].lines[ln]
        end = piece_start + step.line_end
        spans.append(LineSpan(b, ln, piece_start, end, step.dist, step.budget, textline, owner=(c == 0)))
        if step.fits_rest is not None:
            fallback = (len(spans) - 1, dataclasses.replace(spans[-1], dist=step.fits_rest))
        pos = _skip_ws(text, step.new_pos)
        if end < len(full):
            after = (b, ln, end)
            break
        nxt = ln + 1
        if nxt < len(lines) and not ws.used[b][nxt]:
            ln, c = nxt, 0
            after = (b, ln, 0)
        else:
            after = (b + 1, ws.first_free(b + 1) if b + 1 < ws.n_boxes else 0, 0)
            b, ln, c = after
    if pos < n_text and fallback is not None:
        # nothing continued the text: the last line takes the rest after all
        spans[fallback[0]] = fallback[1]
        pos = n_text
    elif pos < n_text and skipped and run_first is not None and pos - run_pos < MIN_RUN_CHARS:
        del spans[run_idx:]
        pos, after = run_pos, run_after
    return _Trial(spans, pos, pos >= n_text, after)


# --------------------------------------------------------------------------
# passes


def _region(node: GroupNode, trial: _Trial, ws: PageWorkspace, complete: bool,
            continues: bool = False) -> MatchedRegion:
    partial = bool(trial.spans) and trial.spans[-1].end < len(ws.norm[trial.spans[-1].box][trial.spans[-1].line])
    return MatchedRegion(node, node.category, list(trial.spans), complete, ws.page_index,
                         ws.page.page_id, partial_end=partial, continues=continues)


def _sorted_pass(ws: PageWorkspace, nodes: Sequence[GroupNode], cursor: MatchCursor,
                 lookahead_pages: int = 1) -> tuple[list[MatchedRegion], MatchCursor]:
    regions: list[MatchedRegion] = []
    i, pos, deferred = cursor.node_index, cursor.node_pos, cursor.deferred
    start = (0, ws.first_free(0) if ws.n_boxes else 0, 0)
    split: tuple[int, int] | None = None
    while i < len(nodes):
        node = nodes[i]
        trial = _follow(node.text, pos, ws, start, allow_skip=True)
        if trial.spans and not trial.complete and pos == 0:
            trial = _complete_later(node.text, ws, trial) or trial
        if trial.spans:
            ws.consume(trial.spans)
            if trial.complete:
                regions.append(_region(node, trial, ws, True))
                split = _split_point(ws, trial)
                i, pos, deferred, start = i + 1, 0, 0, trial.after
                continue
            follower = nodes[i + 1] if i + 1 < len(nodes) else None
            if follower is not None and _follow(follower.text, 0, ws, trial.after, True).spans:
                # the rest of this node is not on the page but the next node is
                regions.append(_region(node, trial, ws, False))
                i, pos, deferred, start = i + 1, 0, 0, trial.after
                continue
            regions.append(_region(node, trial, ws, True, continues=True))
            pos, start = trial.pos, trial.after
            break
        if pos > 0:
            log.debug("continuation of %s not found on page %s", node.node_id, ws.page.page_id)
            i, pos, deferred = i + 1, 0, 0
            continue
        follower = nodes[i + 1] if i + 1 < len(nodes) else None
        if follower is not None and _follow(follower.text, 0, ws, start, True).spans:
            # node missing from the PDF; the next one is right here
            i, deferred = i + 1, 0
            continue
        if deferred >= lookahead_pages:
            i, deferred = i + 1, 0
            continue
        deferred += 1
        break
    out = replace(cursor, node_index=i, node_pos=pos, deferred=deferred,
                  textbox_index=ws.n_boxes, line_index=0, char_offset=0,
                  pending_split=split, page_index=ws.page_index + 1)
    return regions, out


def _complete_later(text: str, ws: PageWorkspace, trial: _Trial) -> _Trial | None:
    """A complete cover of ``text`` starting after the head ``trial`` found.

    An incomplete head is read as text running onto the next page; when the
    whole node is printed further down this page, the head was a look-alike
    (table cells repeating a sentence's first words, say).
    """
    first = trial.spans[0].key
    for b, ln in ws.free_lines():
        if (b, ln) <= first:
            continue
        later = _follow(text, 0, ws, (b, ln, 0), allow_skip=True)
        if later.complete:
            return later
    return None


def _split_point(ws: PageWorkspace, trial: _Trial) -> tuple[int, int] | None:
    b, ln, c = trial.after
    if c == 0 and b < ws.n_boxes and 0 < ln < len(ws.norm[b]) and trial.spans[-1].box == b:
        return (b, ln)
    return None


MIN_HEAD_CHARS = 20


def _candidates(text: str, ws: PageWorkspace) -> list[_Trial]:
    """Complete covers of ``text`` from every unused line, best first.

    Ordered by total distance, ties by extractor order of the first line.
    """
    if not text:
        return []
    found = []
    for order, (b, ln) in enumerate(ws.free_lines()):
        trial = _follow(text, 0, ws, (b, ln, 0), allow_skip=False)
        if trial.complete:
            found.append((trial.dist, order, trial))
    found.sort(key=lambda t: (t[0], t[1]))
    return [t[2] for t in found]


def _best_anywhere(text: str, ws: PageWorkspace) -> _Trial | None:
    """Lowest-distance complete cover of ``text`` starting at any unused line."""
    cands = _candidates(text, ws)
    return cands[0] if cands else None


def _commit(node: GroupNode, trial: _Trial, ws: PageWorkspace) -> MatchedRegion:
    ws.consume(trial.spans)
    return _region(node, trial, ws, True)


def _match_anywhere(node: GroupNode | None, ws: PageWorkspace) -> MatchedRegion | None:
    if node is None:
        return None
    trial = _best_anywhere(node.text, ws)
    return None if trial is None else _commit(node, trial, ws)


def _head_at_page_end(text: str, ws: PageWorkspace) -> _Trial | None:
    """Best match of a prefix of ``text`` that runs off the end of the page.

    The cover must use at least one whole line and stop only because the
    page's textboxes ran out.
    """
    best = None
    for order, (b, ln) in enumerate(ws.free_lines()):
        trial = _follow(text, 0, ws, (b, ln, 0), allow_skip=False)
        if trial.complete or not trial.spans or trial.after[0] < ws.n_boxes:
            continue
        if trial.pos < MIN_HEAD_CHARS:
            continue
        key = (trial.dist, -trial.pos, order)
        if best is None or key < best[0]:
            best = (key, trial)
    return None if best is None else best[1]


def _tail_anywhere(text: str, pos: int, ws: PageWorkspace) -> _Trial | None:
    """Lowest-distance complete cover of ``text[pos:]`` from any unused line."""
    found = None
    for order, (b, ln) in enumerate(ws.free_lines()):
        trial = _follow(text, pos, ws, (b, ln, 0), allow_skip=False)
        if trial.complete and (found is None or (trial.dist, order) < found[0]):
            found = ((trial.dist, order), trial)
    return None if found is None else found[1]


def _order_free(nodes: Sequence[GroupNode], ws: PageWorkspace, done: set[str],
                pending: dict[str, int], new_pending: dict[str, int]) -> list[MatchedRegion]:
    out = []
    for node in nodes:
        if node.node_id in done:
            continue
        if node.node_id in pending:
            trial = _tail_anywhere(node.text, pending[node.node_id], ws)
            if trial is not None:
                ws.consume(trial.spans)
                out.append(_region(node, trial, ws, True))
            done.add(node.node_id)
            continue
        r = _match_anywhere(node, ws)
        if r is not None:
            out.append(r)
            done.add(node.node_id)
            continue
        head = _head_at_page_end(node.text, ws)
        if head is not None:
            ws.consume(head.spans)
            out.append(_region(node, head, ws, True, continues=True))
            new_pending[node.node_id] = head.pos
    return out


def _caption_pass(ws: PageWorkspace, label: GroupNode | None, caption: GroupNode | None,
                  footnotes: GroupNode | None = None) -> list[MatchedRegion]:
    """Label, then the caption right after it, then (tables) the footnotes.

    Among label occurrences the best one followed by the caption wins; if no
    occurrence is, the best label and the best caption are taken separately.
    """
    out: list[MatchedRegion] = []
    label_trials = _candidates(label.text, ws) if label is not None else []
    pair = None
    if caption is not None:
        for lt in label_trials:
            ct = _follow(caption.text, 0, ws, lt.after, allow_skip=False)
            if ct.complete:
                pair = (lt, ct)
                break
    if pair is not None:
        out.append(_commit(label, pair[0], ws))
        out.append(_commit(caption, pair[1], ws))
    else:
        if label_trials:
            out.append(_commit(label, label_trials[0], ws))
        cap = _match_anywhere(caption, ws)
        if cap is not None:
            out.append(cap)
    if footnotes is not None and out:
        foot = _match_anywhere(footnotes, ws)
        if foot is not None:
            out.append(foot)
    return out


def detect_inline_title(title_region: MatchedRegion) -> bool:
    """True when the title's match stops before the end of its last textline."""
    spans = title_region.spans
    if not spans:
        return False
    last = spans[-1]
    full = normalize_kd(last.textline.text)
    return last.end < len(full) and bool(full[last.end:].strip())


def _merge_inline_titles(regions: list[MatchedRegion]) -> list[MatchedRegion]:
    out = list(regions)
    for r in list(out):
        if r.node.role not in TITLE_ROLES or not r.complete or not detect_inline_title(r):
            continue
        last = r.spans[-1]
        host = next((o for o in out if o is not r and o.page_index == r.page_index
                     and any(s.key == last.key and not s.owner and s.start >= last.end for s in o.spans)),
                    None)
        if host is None:
            r.category = LayoutCategory.TEXT
            continue
        merged_spans = list(r.spans) + [s for s in host.spans if not (s.key == last.key and not s.owner)]
        host.spans = merged_spans
        host.category = LayoutCategory.TEXT
        host.merged_from.append(r.node.node_id)
        host.merged_roles.append(r.node.role)
        out.remove(r)
    return out


def annotate_page(page: PageElements | PageWorkspace, groups: NodeGroups,
                  carry: MatchCursor | None = None, lookahead_pages: int = 1
                  ) -> tuple[list[MatchedRegion], MatchCursor]:
    """Run every matching pass over one page.

    Returns the page's regions (inline titles already folded into the text
    that follows them) and the cursor to pass to the next page.
    """
    carry = carry or MatchCursor()
    ws = page if isinstance(page, PageWorkspace) else PageWorkspace(page, carry.page_index)
    regions, cursor = _sorted_pass(ws, groups.sorted, carry, lookahead_pages)
    done = set(cursor.done)
    pending = dict(cursor.pending)
    new_pending: dict[str, int] = {}
    regions += _order_free(groups.unsorted, ws, done, pending, new_pending)
    regions += _order_free(groups.lists, ws, done, pending, new_pending)
    for entry in groups.tables:
        if entry.node_id in done:
            continue
        found = _caption_pass(ws, entry.label, entry.caption, entry.footnotes)
        if found:
            regions.extend(found)
            done.add(entry.node_id)
    for entry in groups.figures:
        if entry.node_id in done:
            continue
        found = _caption_pass(ws, entry.label, entry.caption)
        if found:
            regions.extend(found)
            done.add(entry.node_id)

    regions = _merge_inline_titles(regions)
    return regions, replace(cursor, done=frozenset(done), pending=tuple(sorted(new_pending.items())))


def match_sorted(nodes: Sequence[GroupNode], pages: Sequence[PageElements | PageWorkspace],
                 lookahead_pages: int = 1) -> list[MatchedRegion]:
    """Reading-order pass alone, over a whole document."""
    cursor = MatchCursor()
    out: list[MatchedRegion] = []
    for idx, page in enumerate(pages):
        ws = page if isinstance(page, PageWorkspace) else PageWorkspace(page, idx)
        regions, cursor = _sorted_pass(ws, nodes, replace(cursor, page_index=idx), lookahead_pages)
        out.extend(regions)
    return out


def match_unsorted(nodes: Sequence[GroupNode], pages: Sequence[PageElements | PageWorkspace]
                   ) -> list[MatchedRegion]:
    """Order-free pass: one region per node, ``complete=False`` if not found.

    Pass :class:`PageWorkspace` objects to respect lines consumed earlier.
    """
    spaces = [p if isinstance(p, PageWorkspace) else PageWorkspace(p, i) for i, p in enumerate(pages)]
    out = []
    for node in nodes:
        found = None
        for ws in spaces:
            found = _match_anywhere(node, ws)
            if found is not None:
                break
        if found is None:
            page_id = spaces[0].page.page_id if spaces else ""
            found = MatchedRegion(node, node.category, [], False, 0, page_id)
        out.append(found)
    return out
