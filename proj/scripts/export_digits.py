#!/usr/bin/env python3
"""Regenerates data/digits.csv from scikit-learn's bundled copy of the UCI
optical recognition of handwritten digits data (1797 samples, 64 features,
10 classes). Output: comma-separated, no header, label in the last column."""

import os
import sys

from sklearn.datasets import load_digits


def main() -> int:
    out_path = sys.argv[1] if len(sys.argv) > 1 else os.path.join(
        os.path.dirname(__file__), "..", "data", "digits.csv")
    X, y = load_digits(return_X_y=True)
    os.makedirs(os.path.dirname(out_path), exist_ok=True)
    with open(out_path, "w", encoding="ascii") as f:
        for row, label in zip(X, y):
            f.write(",".join("%g" % v for v in row))
            f.write(",%d\n" % label)
    print(f"wrote {len(X)} rows to {out_path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
