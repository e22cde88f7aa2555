"""Freeze oracle results the acceptance suite checks against.

    python3 tests/make_oracle_fixtures.py
"""

from __future__ import annotations

import json
import random
from pathlib import Path

from oracles import min_substring_distance

OUT = Path(__file__).parent / "fixtures" / "substring_oracle.json"


def cases(seed: int = 2, n: int = 1000):
    rng = random.Random(seed)
    for _ in range(n):
        source = "".join(rng.choice("abc ") for _ in range(rng.randint(0, 64)))
        target = "".join(rng.choice("abc ") for _ in range(rng.randint(1, 24)))
        yield target, source


if __name__ == "__main__":
    rows = [{"target": t, "source": s, "dist": min_substring_distance(t, s)} for t, s in cases()]
    OUT.write_text(json.dumps(rows, indent=0) + "\n")
    print(f"wrote {len(rows)} cases to {OUT}")
