#!/usr/bin/env python3
"""Trivial independent metrics recomputation over a trace CSV.

Prints a JSON object with rmse_e_p, mean_heading_error, and e_ave so the
values can be diffed against metrics.json (or the `asv metrics` output).
"""
import csv
import json
import math
import sys


def main() -> int:
    if len(sys.argv) != 2:
        print("usage: verify_metrics.py <trace.csv>", file=sys.stderr)
        return 2
    with open(sys.argv[1]) as f:
        rows = list(csv.DictReader(f))
    if not rows:
        print("empty trace", file=sys.stderr)
        return 1
    n = len(rows)
    sq = 0.0
    heading = 0.0
    effort = 0.0
    for r in rows:
        dx = float(r["x"]) - float(r["x_d"])
        dy = float(r["y"]) - float(r["y_d"])
        sq += dx * dx + dy * dy
        d = (float(r["psi"]) - float(r["psi_d"])) % (2.0 * math.pi)
        if d > math.pi:
            d -= 2.0 * math.pi
        heading += abs(d)
        effort += sum(abs(float(r[k])) for k in ("f1", "f2", "f3", "f4"))
    print(
        json.dumps(
            {
                "rmse_e_p": math.sqrt(sq / n),
                "mean_heading_error": heading / n,
                "e_ave": math.sqrt(effort / n),
                "steps": n,
            }
        )
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
