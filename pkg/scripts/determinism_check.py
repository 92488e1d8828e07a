"""Run the gallery twice under different FOLCRIS_THREADS and compare JSON bytes.

    python3 scripts/determinism_check.py
"""

import hashlib
import os

from folcris.cli import render_json, run_problem
from folcris.gallery import GALLERY
from folcris.zmod import UsageError


def digest(threads: str) -> dict[str, str]:
    os.environ["FOLCRIS_THREADS"] = threads
    out = {}
    for name, (prob, _) in GALLERY.items():
        try:
            report, _ = run_problem(prob)
        except UsageError as exc:
            out[name] = "error: " + str(exc)
            continue
        out[name] = hashlib.sha256(render_json(report).encode()).hexdigest()
    return out


def main():
    a, b, c = digest("1"), digest("1"), digest("4")
    diffs = [k for k in a if not (a[k] == b[k] == c[k])]
    print(f"{len(a)} problems, {len(diffs)} differing: {diffs}")


if __name__ == "__main__":
    main()
