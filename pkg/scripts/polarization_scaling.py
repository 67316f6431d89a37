#!/usr/bin/env python3
"""Cutoff dependence of the gauge and non-gauge polarization integrals.

Usage: python scripts/polarization_scaling.py [--k-squared 0] [--mass 1]
"""

import argparse
import csv

import numpy as np

from fermivac.polarization import growth_exponent, log_slope, pi_gauge_scalar, pi_nongauge_scalar


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--mass", type=float, default=1.0)
    parser.add_argument("--k-squared", type=float, default=0.0)
    parser.add_argument("--points", type=int, default=13)
    parser.add_argument("--out", default="polarization_scaling.csv")
    args = parser.parse_args()

    m = args.mass
    cutoffs = m * np.logspace(1, 4, args.points)
    g = np.array([pi_gauge_scalar(args.k_squared, m, c) for c in cutoffs])
    ng = np.array([pi_nongauge_scalar(m, c) for c in cutoffs])
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["Lambda", "scalar_G", "scalar_NG"])
        w.writerows(zip(cutoffs, g, ng))

    decade = cutoffs <= 1000 * m
    print(f"non-gauge growth exponent over [10, 1000] m: {growth_exponent(cutoffs[decade], ng[decade]):.4f}")
    print(f"gauge slope in ln(Lambda) over [100, 10^4] m: {log_slope(cutoffs[cutoffs >= 100 * m], g[cutoffs >= 100 * m]):.4f}")


if __name__ == "__main__":
    main()
