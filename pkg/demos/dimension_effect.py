"""
Effect of the dimension at a fixed noise-only sample count
==========================================================

n = 10 noise-only samples, p = m signal samples, 5 dB SNR. Growing m
brings the whitening matrix closer to singular (m = n is the limit), so
detection degrades for large m. At small m the extra signal samples win
first: P_D peaks at m = 3 before falling.
"""

import numpy as np

from largest_root import DetectorParams, EnsembleParams, db_to_linear, detection_probability, threshold_for_pf

gamma = float(db_to_linear(5.0))

print(" m   P_D at P_F=0.5   P_D at P_F=0.1")
for m in range(1, 11):
    dp = DetectorParams(EnsembleParams(m, 10, m), gamma)
    mu = threshold_for_pf(dp, np.array([0.5, 0.1]))
    pd = detection_probability(dp, mu)
    print(f"{m:2d}   {pd[0]:14.4f}   {pd[1]:14.4f}")

# More noise-only samples always help at fixed m and p
print("\nm = p = 5, P_F = 0.5")
for n in (5, 6, 8, 12, 20):
    dp = DetectorParams(EnsembleParams(5, n, 5), gamma)
    print(f"  n = {n:2d}: P_D = {detection_probability(dp, threshold_for_pf(dp, 0.5)):.4f}")
