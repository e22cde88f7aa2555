import unicodedata

from hypothesis import given, strategies as st

from layoutgt.textnorm import normalize_kd


def test_ligature_and_width_forms_fold():
    assert normalize_kd("ﬁnal") == "final"
    assert normalize_kd("Ａ１") == "A1"


def test_whitespace_collapses_and_trims():
    assert normalize_kd("  a \t\n b  c  ") == "a b c"


def test_accents_decompose():
    assert normalize_kd("é") == "é"


def test_bytes_decode_with_replacement():
    assert normalize_kd(b"ab\xffc") == "ab�c"


def test_lone_surrogate_replaced():
    assert normalize_kd("a\ud800b") == "a�b"


def test_empty():
    assert normalize_kd("") == ""


@given(st.text())
def test_idempotent(s):
    once = normalize_kd(s)
    assert normalize_kd(once) == once


@given(st.text())
def test_output_is_nfkd_with_single_spaces(s):
    out = normalize_kd(s)
    assert unicodedata.normalize("NFKD", out) == out
    assert "  " not in out
    assert out == out.strip()
