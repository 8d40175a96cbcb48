#!/usr/bin/env python3
"""Show why hour-aligned periods are expensive when the net load skirts the
baseload output limit.

On a profile that oscillates across the 800 MW baseload cap away from hour
boundaries, fixed hourly periods (CH) straddle the cap: the aggregated demand
flips the intermediate unit on and off once per crossing and pays its startup
cost each time.  Cost-driven boundary placement (CO) moves the period edges to
the crossings and avoids most of that churn.
"""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from couc import (
    EvalContext,
    Evaluator,
    baseline_ch,
    baseline_ta,
    greedy_optimize,
)
from couc.corpus import BASELOAD_CAP_MW, alignment_instance


def describe(name: str, partition, evaluation) -> None:
    b = evaluation.breakdown
    rt = evaluation.rt_schedule
    startups = [
        (uid, interval)
        for g, uid in enumerate(rt.unit_ids)
        for interval, paid in enumerate(rt.startup_paid[g])
        if paid > 0.0
    ]
    print(f"{name}: total {b.total:12.2f} EUR  (start/stop {b.start_stop:9.2f})")
    print(f"  periods (min): {partition.lengths_minutes}")
    print(f"  real-time startups: {startups}")


def main() -> None:
    fleet, series = alignment_instance()
    crossings = [
        i
        for i, (a, b) in enumerate(zip(series.values, series.values[1:]), start=1)
        if (a - BASELOAD_CAP_MW) * (b - BASELOAD_CAP_MW) < 0
    ]
    print(f"net load crosses the {BASELOAD_CAP_MW:.0f} MW baseload cap at intervals {crossings}")
    ev = Evaluator(EvalContext(fleet, series, series))
    T = 6
    ch = baseline_ch(ev, T)
    ta = baseline_ta(ev, T)
    co = greedy_optimize(ev, ta.partition)
    describe("CH (fixed hourly)", ch.partition, ch.evaluation)
    describe("TA (load clustering)", ta.partition, ta.evaluation)
    describe("CO (cost-driven)", co.final, ev.evaluate(co.final))
    saved = ch.rt_cost - co.final_cost
    print(f"CO saves {saved:.2f} EUR vs CH ({saved / ch.rt_cost:.2%})")


if __name__ == "__main__":
    main()
