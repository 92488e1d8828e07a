"""Write every gallery problem to DIR/<name>.json and its JSON report to DIR/<name>.report.json.

    python3 scripts/export_gallery.py out/gallery
"""

import argparse
import json
import pathlib

from folcris.cli import render_json, run_problem
from folcris.gallery import GALLERY
from folcris.zmod import UsageError


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("dir", type=pathlib.Path)
    ap.add_argument("--recheck", action="store_true")
    args = ap.parse_args()
    args.dir.mkdir(parents=True, exist_ok=True)
    for name, (prob, expected) in GALLERY.items():
        stem = name.replace("/", "__")
        (args.dir / f"{stem}.json").write_text(json.dumps(prob, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        try:
            report, code = run_problem(prob, recheck=args.recheck)
        except UsageError as exc:
            code = 2
            print(f"{name:44s} exit 2  ({exc})")
        else:
            (args.dir / f"{stem}.report.json").write_text(render_json(report), encoding="utf-8")
            print(f"{name:44s} exit {code}  {report['status']}")
        if code != expected:
            print(f"  ! expected exit {expected}")


if __name__ == "__main__":
    main()
