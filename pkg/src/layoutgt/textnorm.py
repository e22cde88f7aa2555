"""Unicode compatibility normalization applied to every string before matching."""

from __future__ import annotations

import re
import unicodedata

_LONE_SURROGATE = re.compile("[\ud800-\udfff]")


class NormString(str):
    """A ``str`` known to be a fixed point of :func:`normalize_kd`."""

    __slots__ = ()


def normalize_kd(s: str | bytes) -> NormString:
    """Return the NFKD form of ``s`` with whitespace runs collapsed to one space.

    Ligatures, full-width forms, non-breaking spaces and other compatibility
    characters are replaced by their plain equivalents. Case is preserved.
    Undecodable bytes and lone surrogates become U+FFFD.
    """
    if isinstance(s, NormString):
        return s
    if isinstance(s, (bytes, bytearray)):
        s = bytes(s).decode("utf-8", errors="replace")
    s = _LONE_SURROGATE.sub("�", s)
    s = unicodedata.normalize("NFKD", s)
    return NormString(" ".join(s.split()))
