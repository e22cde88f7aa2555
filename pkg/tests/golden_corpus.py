"""The twelve end-to-end golden documents.

Each entry is (name, seed, features). ``make_golden.py`` renders them into
``tests/golden/`` and the golden test re-annotates them with the CLI.
"""

from __future__ import annotations

from synth import Block, random_document, sentence

import random

CORPUS = [
    ("g01_sorted_text", 101, dict(n_sections=3, references=4)),
    ("g02_unsorted_meta", 102, dict(n_sections=2, footnotes=2, references=2)),
    ("g03_inline_titles", 103, dict(n_sections=4, inline_titles=True)),
    ("g04_nested_list", 104, dict(n_sections=2, lists=1, nested_list=True)),
    ("g05_figure", 105, dict(n_sections=2, figures=1)),
    ("g06_table_footnote", 106, dict(n_sections=2, tables=1)),
    ("g07_page_spanning", 107, dict(n_sections=3, paragraphs=(3, 4))),
    ("g08_corrupted", 108, dict(n_sections=3, noise=1)),
    ("g09_mixed_floats", 109, dict(n_sections=4, figures=2, tables=1, lists=1)),
    ("g10_inline_and_lists", 110, dict(n_sections=4, inline_titles=True, lists=2)),
    ("g11_long_article", 111, dict(n_sections=6, paragraphs=(2, 3), figures=1, tables=2, footnotes=1,
                                   references=8)),
    ("g12_minimal", 112, dict(n_sections=1, paragraphs=(1, 1), references=0, keywords=False, ack=False)),
]


def build(name: str, seed: int, features: dict):
    return random_document(seed, doc_id=name, journal_id=f"J{seed % 3}", **features)
