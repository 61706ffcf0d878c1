"""Run compositional verification on the benchmark corpus and print a summary table.

Each row: guarantee count, verdict, wall time, the largest k any obligation
needed, and how many obligations went to the solver.
"""

from __future__ import annotations

import argparse
import time

from hrmv.cli import run_compose
from hrmv.corpus import text
from hrmv.lustre import load
from hrmv.mc import EngineConfig, Valid

BENCHMARKS = ("filters2", "filters3", "filters36", "mctrl")


def row(name: str, cfg: EngineConfig) -> tuple:
    start = time.monotonic()
    r = run_compose(load(text(name)), None, cfg)
    ks = [o.result.k for o in r.obligations if isinstance(o.result, Valid)]
    return name, r.extra["guarantees"], r.verdict, time.monotonic() - start, max(ks, default="-"), len(r.obligations)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("names", nargs="*", default=BENCHMARKS)
    ap.add_argument("--max-k", type=int, default=EngineConfig.max_k)
    ap.add_argument("--no-memo", action="store_true", help="check every benchmark from scratch")
    args = ap.parse_args()
    cfg = EngineConfig(max_k=args.max_k, memo=not args.no_memo)
    print(f"{'model':<10} {'#G':>4} {'verdict':<9} {'time':>8} {'max k':>6} {'checked':>8}")
    for name in args.names:
        n, g, v, secs, k, checked = row(name, cfg)
        print(f"{n:<10} {g:>4} {v:<9} {secs:>7.1f}s {k!s:>6} {checked:>8}")


if __name__ == "__main__":
    main()
