#!/usr/bin/env python3
"""Independently recompute benchmark aggregates from records.csv and compare
them against aggregates.csv to a relative tolerance of 1e-9.

Usage: check_aggregates.py RECORDS_CSV AGGREGATES_CSV
Exits 0 on agreement, 1 on any mismatch.
"""

import csv
import math
import re
import sys

METRICS = ("n_f", "n_grad", "n_hess", "n_fact", "wall_seconds")
REL_TOL = 1e-9


def read_limits(path):
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
    match = re.search(r"max_iter=(\S+)\s+max_time=(\S+)", header)
    if not match:
        raise SystemExit(f"{path}: missing max_iter/max_time in the schema comment")
    return int(match.group(1)), float(match.group(2))


def read_csv_body(path):
    with open(path, encoding="utf-8") as fh:
        rows = [line for line in fh if not line.startswith("#")]
    return list(csv.DictReader(rows))


def penalized(row, metric, max_iter, max_time):
    failed = row["status"] != "optimal"
    if metric == "wall_seconds":
        return 2.0 * max_time if failed else float(row["wall_seconds"])
    return 2.0 * float(max_iter) if failed else float(row[metric])


def shifted_geomean(values, shift=1.0):
    return math.exp(sum(math.log(v + shift) for v in values) / len(values)) - shift


def median(values):
    ordered = sorted(values)
    n = len(ordered)
    if n % 2 == 1:
        return ordered[n // 2]
    return 0.5 * (ordered[n // 2 - 1] + ordered[n // 2])


def close(a, b):
    return abs(a - b) <= REL_TOL * max(1.0, abs(a), abs(b))


def main():
    if len(sys.argv) != 3:
        raise SystemExit(__doc__)
    records_path, aggregates_path = sys.argv[1], sys.argv[2]
    max_iter, max_time = read_limits(records_path)
    records = read_csv_body(records_path)
    aggregates = read_csv_body(aggregates_path)
    if not records or not aggregates:
        raise SystemExit("empty records or aggregates")

    failures = 0
    checked = 0
    for agg in aggregates:
        solver, metric = agg["solver"], agg["metric"]
        if metric not in METRICS:
            print(f"unknown metric in aggregates: {metric}")
            failures += 1
            continue
        values = [
            penalized(r, metric, max_iter, max_time)
            for r in records
            if r["solver"] == solver
        ]
        if not values:
            print(f"no records for solver {solver}")
            failures += 1
            continue
        want_geo = shifted_geomean(values)
        want_med = median(values)
        got_geo = float(agg["shifted_geomean"])
        got_med = float(agg["median"])
        if not close(want_geo, got_geo):
            print(f"{solver}/{metric}: geomean {got_geo} != recomputed {want_geo}")
            failures += 1
        if not close(want_med, got_med):
            print(f"{solver}/{metric}: median {got_med} != recomputed {want_med}")
            failures += 1
        checked += 1

    if failures:
        print(f"FAILED: {failures} mismatches over {checked} aggregate rows")
        return 1
    print(f"OK: {checked} aggregate rows match to {REL_TOL} relative")
    return 0


if __name__ == "__main__":
    sys.exit(main())
