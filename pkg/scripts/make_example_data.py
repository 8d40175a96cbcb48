#!/usr/bin/env python3
"""Write a ready-to-run example data set: fleet CSV, net-load CSVs, config.

Usage: python3 scripts/make_example_data.py [out_dir]
"""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from couc import write_fleet_csv, write_netload_csv
from couc.corpus import duck_instance, forecast_actual_pair


def main() -> None:
    out_dir = sys.argv[1] if len(sys.argv) > 1 else "example_data"
    os.makedirs(out_dir, exist_ok=True)
    fleet, series = duck_instance(seed=0)
    forecast, actual = forecast_actual_pair(seed=0)
    write_fleet_csv(fleet, os.path.join(out_dir, "fleet.csv"))
    write_netload_csv(series, os.path.join(out_dir, "netload.csv"))
    write_netload_csv(forecast, os.path.join(out_dir, "forecast.csv"))
    write_netload_csv(actual, os.path.join(out_dir, "actual.csv"))
    config = "\n".join(
        [
            "# six-hour duck-curve example",
            f"fleet = {out_dir}/fleet.csv",
            f"netload = {out_dir}/netload.csv",
            "T = 6",
            "method = co-greedy",
            "init = ta",
            "seed = 0",
            f"out_dir = {out_dir}/out",
        ]
    )
    with open(os.path.join(out_dir, "run.conf"), "w") as fh:
        fh.write(config + "\n")
    print(f"wrote fleet.csv, netload.csv, forecast.csv, actual.csv, run.conf to {out_dir}/")
    print(f"try: couc run --config {out_dir}/run.conf")


if __name__ == "__main__":
    main()
