"""Writes the 5810-node Lebedev rule as "x y z w" rows with weights summing to 4*pi."""
import sys

import numpy as np
from scipy.integrate import lebedev_rule

x, w = lebedev_rule(131)
w = w * (4 * np.pi / w.sum())
out = sys.argv[1] if len(sys.argv) > 1 else "data/lebedev_5810.txt"
with open(out, "w") as fh:
    for (a, b, c), wi in zip(x.T, w):
        fh.write(f"{a:.17g} {b:.17g} {c:.17g} {wi:.17g}\n")
