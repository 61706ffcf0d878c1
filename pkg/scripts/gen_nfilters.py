"""Regenerate the bundled nFilters programs (or print one for a given n)."""

from __future__ import annotations

import argparse
from pathlib import Path

from hrmv import corpus

SHIPPED = (2, 3, 36)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("n", nargs="?", type=int, help="print the program for this n instead of writing files")
    args = ap.parse_args()
    if args.n is not None:
        print(corpus.nfilters(args.n), end="")
        return
    out = corpus.path("counter").parent
    for n in SHIPPED:
        target = Path(out) / f"filters{n}.lus"
        target.write_text(corpus.nfilters(n), encoding="utf-8")
        print(f"wrote {target}")


if __name__ == "__main__":
    main()
