"""Run fuzz campaigns over a range of seeds and tabulate outcomes.

    python3 scripts/fuzz_campaign.py --seeds 1 5 --cases 500
"""
import argparse
import sys
import time
from dataclasses import replace

from juliette.fuzz import CHECKS, FuzzConfig, run_campaign


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, nargs=2, default=(1, 3), metavar=("FIRST", "LAST"))
    ap.add_argument("--cases", type=int, default=300)
    ap.add_argument("--fuel", type=int, default=FuzzConfig.fuel)
    ap.add_argument("--max-depth", type=int, default=FuzzConfig.max_depth)
    ap.add_argument("--check", action="append", choices=sorted(CHECKS),
                    help="restrict to these properties (repeatable)")
    args = ap.parse_args(argv)
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))

    base = FuzzConfig(cases=args.cases, fuel=args.fuel, max_depth=args.max_depth)
    failed = 0
    for seed in range(args.seeds[0], args.seeds[1] + 1):
        t = time.perf_counter()
        rep = run_campaign(replace(base, seed=seed), args.check)
        dt = time.perf_counter() - t
        outcomes = " ".join(f"{k}={v}" for k, v in sorted(rep.outcomes.items()))
        print(f"seed {seed}: {len(rep.failures)} failures, {dt:.1f} s  [{outcomes}]")
        for f in rep.failures:
            print(f"  case {f.case} {f.prop}: {f.reason}\n    minimized: {f.minimized}")
        failed += bool(rep.failures)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
