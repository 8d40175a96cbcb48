#!/usr/bin/env python3
"""Total cost of each method as the number of day-ahead periods T grows.

Reproduces the qualitative trend: every method improves with finer temporal
resolution, and cost-driven boundary placement (CO) dominates the fixed (CH),
load-clustering (TA), and cost-clustering (NA) baselines at every T.

Usage: python3 scripts/sweep_demo.py [seed]
"""

import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from couc import (
    EvalContext,
    Evaluator,
    baseline_ch,
    baseline_na,
    baseline_ta,
    greedy_optimize,
)
from couc.corpus import sweep_instance

T_LIST = (1, 2, 3, 6, 12, 24)


def main() -> None:
    seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
    fleet, series = sweep_instance(seed)
    ev = Evaluator(EvalContext(fleet, series, series))
    print(f"seed {seed}, horizon {series.horizon_minutes} min, {series.n} intervals")
    print(f"{'T':>3} {'CH':>12} {'NA':>12} {'TA':>12} {'CO':>12}  iters  seconds")
    for T in T_LIST:
        t0 = time.perf_counter()
        ch = baseline_ch(ev, T)
        na = baseline_na(ev, T)
        ta = baseline_ta(ev, T)
        best = min((ch, na, ta), key=lambda b: b.rt_cost)
        co = greedy_optimize(ev, best.partition)
        dt = time.perf_counter() - t0
        print(
            f"{T:>3} {ch.rt_cost:>12.2f} {na.rt_cost:>12.2f} "
            f"{ta.rt_cost:>12.2f} {co.final_cost:>12.2f}  {co.iterations:>5}  {dt:>7.1f}"
        )


if __name__ == "__main__":
    main()
