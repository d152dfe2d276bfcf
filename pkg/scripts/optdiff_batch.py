"""Sweep optimizer budgets over generated workloads.

For each (inline, specialize) budget pair, optimize the same workloads,
certify them, compare runs and total the rewrites that fired.

    python3 scripts/optdiff_batch.py --cases 200 --max-limit 2
"""
import argparse
import sys
from collections import Counter

from juliette.core import MethodTable
from juliette.evaluator import MachineState
from juliette.fuzz import OPT_FUZZ_FUEL, opt_case
from juliette.harness import freeze, optdiff_frozen


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--cases", type=int, default=200)
    ap.add_argument("--max-limit", type=int, default=2, help="largest budget in the grid")
    ap.add_argument("--fuel", type=int, default=OPT_FUZZ_FUEL)
    args = ap.parse_args(argv)
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))

    frozen = []
    for i in range(args.cases):
        p, skip = opt_case(args.seed, i)
        fz = freeze(MachineState(MethodTable(), p), skip, args.fuel)
        if fz is not None:
            frozen.append(fz)
    print(f"{len(frozen)} workloads with a table state (of {args.cases})")

    bad = 0
    for il in range(args.max_limit + 1):
        for sl in range(args.max_limit + 1):
            rewrites, changed, broken = Counter(), 0, 0
            for fz in frozen:
                rep = optdiff_frozen(fz, il, sl, args.fuel)
                rewrites.update(rep.result.rewrites)
                changed += rep.result.changed
                broken += not rep.ok
            fired = " ".join(f"{k}={v}" for k, v in sorted(rewrites.items()) if v)
            print(f"I={il} S={sl}: {changed} changed, {broken} not ok  [{fired or 'none'}]")
            bad += broken
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
