#!/usr/bin/env python3
"""Generate the synthetic 4-asset daily price fixture.

1200 weekdays ending 2017-09-01, geometric Brownian motion closes and a
high channel sitting slightly above each close. Seeded, so the output is
reproducible byte-for-byte.
"""
import argparse
import datetime as dt

import numpy as np

ASSETS = ["ALPHA", "BRAVO", "CHARLIE", "DELTA"]
DRIFT = [0.0004, 0.0002, 0.0003, 0.0001]
VOL = [0.015, 0.010, 0.020, 0.012]
START = [120.0, 80.0, 35.0, 60.0]


def weekdays_ending(last, count):
    days = []
    d = last
    while len(days) < count:
        if d.weekday() < 5:
            days.append(d)
        d -= dt.timedelta(days=1)
    return list(reversed(days))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data/fixtures/synthetic_4asset.csv")
    ap.add_argument("--days", type=int, default=1200)
    ap.add_argument("--seed", type=int, default=20170901)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    dates = weekdays_ending(dt.date(2017, 9, 1), args.days)
    n = len(ASSETS)
    shocks = rng.normal(size=(args.days, n))
    closes = np.empty((args.days, n))
    closes[0] = START
    for t in range(1, args.days):
        closes[t] = closes[t - 1] * np.exp(np.array(DRIFT) - 0.5 * np.array(VOL) ** 2
                                           + np.array(VOL) * shocks[t])
    highs = closes * (1.0 + np.abs(rng.normal(scale=0.006, size=closes.shape)))

    with open(args.out, "w") as f:
        header = ["date"]
        for a in ASSETS:
            header += [f"{a}_close", f"{a}_high"]
        f.write(",".join(header) + "\n")
        for t, d in enumerate(dates):
            row = [d.isoformat()]
            for i in range(n):
                row += [f"{closes[t, i]:.4f}", f"{highs[t, i]:.4f}"]
            f.write(",".join(row) + "\n")


if __name__ == "__main__":
    main()
