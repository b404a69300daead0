#!/usr/bin/env python3
"""Row-by-row reads of the synthetic fixture: day closes, price relatives,
and a brute-force state window. Uses only the csv module."""
import csv
import json
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parents[2]
FIXTURE = ROOT / "data" / "fixtures" / "synthetic_4asset.csv"
ASSETS = ["ALPHA", "BRAVO", "CHARLIE", "DELTA"]


def load():
    with open(FIXTURE, newline="") as f:
        rows = list(csv.DictReader(f))
    dates = [r["date"] for r in rows]
    # [asset][day][feature]; cash first at 1.0
    prices = [[[1.0, 1.0] for _ in rows]]
    for a in ASSETS:
        prices.append([[float(r[a + "_close"]), float(r[a + "_high"])] for r in rows])
    return dates, prices


def main():
    dates, prices = load()
    out = {"rows_with_header": len(dates) + 1, "days": len(dates)}
    out["day37_date"] = dates[37]
    out["day37_close"] = [prices[a][37][0] for a in range(len(prices))]

    t = 500
    out["y500"] = [prices[a][t][0] / prices[a][t - 1][0] for a in range(len(prices))]

    t, w = 600, 50
    window = []
    for a in range(len(prices)):
        last = prices[a][t][0]
        window.append([[prices[a][t - w + 1 + k][f] / last for f in range(2)]
                       for k in range(w)])
    out["state600_w50"] = window
    out["train_end_index"] = max(i for i, d in enumerate(dates) if d <= "2016-12-31")
    out["test_days"] = sum(1 for d in dates if "2016-12-31" < d <= "2017-09-01")
    json.dump(out, sys.stdout, indent=1)


if __name__ == "__main__":
    main()
