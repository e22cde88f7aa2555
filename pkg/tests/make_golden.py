"""Regenerate tests/golden/. Review the diff before committing new goldens.

    python3 tests/make_golden.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

HERE = Path(__file__).parent
sys.path.insert(0, str(HERE))

from golden_corpus import CORPUS, build  # noqa: E402

from layoutgt.cli import main  # noqa: E402
from layoutgt.elements import dumps_page_elements  # noqa: E402


def write_inputs(root: Path) -> None:
    (root / "elements").mkdir(parents=True, exist_ok=True)
    (root / "xml").mkdir(parents=True, exist_ok=True)
    for name, seed, features in CORPUS:
        doc = build(name, seed, features)
        (root / "elements" / f"{name}.elements.json").write_text(dumps_page_elements(doc.pages()) + "\n")
        (root / "xml" / f"{name}.xml").write_text(doc.xml())


if __name__ == "__main__":
    root = HERE / "golden"
    write_inputs(root)
    sys.exit(main(["annotate", "--elements-dir", str(root / "elements"), "--xml-dir", str(root / "xml"),
                   "--out", str(root / "expected")]))
