#!/usr/bin/env python3
"""Direct convolve-and-downsample filter bank on a length-64 ramp, two
levels of db4 with half-sample symmetric extension. Cross-checked against
PyWavelets when it is installed."""
import json
import sys

import numpy as np

# Daubechies 4 (8 taps) decomposition low-pass.
DEC_LO = np.array([
    -0.010597401785069032, 0.0328830116668852, 0.030841381835560764,
    -0.18703481171909309, -0.027983769416859854, 0.6308807679298589,
    0.7148465705529157, 0.2303778133088965,
])
REC_LO = DEC_LO[::-1]
DEC_HI = np.array([(-1) ** (k + 1) * REC_LO[k] for k in range(len(REC_LO))])


def analysis(x):
    f = len(DEC_LO)
    # Extend by f-1 mirrored samples on each side (edge sample repeated).
    ext = np.concatenate([x[:f - 1][::-1], x, x[::-1][:f - 1]])
    full_lo = np.convolve(ext, DEC_LO)
    full_hi = np.convolve(ext, DEC_HI)
    # Keep the outputs aligned with PyWavelets' symmetric mode.
    n_out = (len(x) + f - 1) // 2
    start = f
    return full_lo[start:start + 2 * n_out:2], full_hi[start:start + 2 * n_out:2]


def main():
    x = np.arange(64, dtype=float)
    a1, d1 = analysis(x)
    a2, d2 = analysis(a1)
    out = {"signal": x.tolist(), "approx": a2.tolist(),
           "details_level1": d1.tolist(), "details_level2": d2.tolist()}
    try:
        import pywt
        ref = pywt.wavedec(x, "db4", mode="symmetric", level=2)
        assert np.allclose(ref[0], a2, atol=1e-12, rtol=0)
        assert np.allclose(ref[1], d2, atol=1e-12, rtol=0)
        assert np.allclose(ref[2], d1, atol=1e-12, rtol=0)
        out["pywt_crosscheck"] = True
    except ImportError:
        out["pywt_crosscheck"] = False
    json.dump(out, sys.stdout, indent=1)


if __name__ == "__main__":
    main()
