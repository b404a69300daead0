#!/usr/bin/env python3
"""Causal rolling denoise of the fixture's ALPHA close with PyWavelets:
for each day, threshold a db4 level-2 decomposition of the trailing
64-sample window and keep the last reconstructed sample."""
import csv
import json
import math
import pathlib
import sys
import warnings

import numpy as np
import pywt

ROOT = pathlib.Path(__file__).resolve().parents[2]
FIXTURE = ROOT / "data" / "fixtures" / "synthetic_4asset.csv"
WINDOW, LEVELS, DAYS = 64, 2, 160


def denoise(seg):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        coeffs = pywt.wavedec(seg, "db4", mode="symmetric", level=LEVELS)
    t = math.sqrt(2 * math.log(len(seg))) * np.median(np.abs(coeffs[-1])) / 0.6745
    coeffs = [coeffs[0]] + [pywt.threshold(c, t, mode="soft") for c in coeffs[1:]]
    return pywt.waverec(coeffs, "db4", mode="symmetric")[:len(seg)]


def main():
    with open(FIXTURE, newline="") as f:
        x = np.array([float(r["ALPHA_close"]) for r in csv.DictReader(f)])[:DAYS]
    out = []
    for i in range(len(x)):
        seg = x[max(0, i + 1 - WINDOW):i + 1]
        out.append(float(x[i]) if len(seg) < 2 ** LEVELS else float(denoise(seg)[-1]))
    json.dump({"asset": "ALPHA", "window": WINDOW, "levels": LEVELS,
               "input": x.tolist(), "denoised": out}, sys.stdout)


if __name__ == "__main__":
    main()
