"""
Choosing the sample count when m = n = nu p
===========================================

With m = n the ROC has a closed form. Along m = nu p the detection
probability rises, peaks and decays (more dimensions eventually cost more
than the extra samples buy). Compare the closed-form bracket for the peak
with a direct search.
"""

import numpy as np
from scipy.optimize import minimize_scalar

from largest_root import db_to_linear, optimal_p_approx, optimal_p_bounds, optimal_p_exact, roc_balanced

pf, nu = 0.5, 0.25
for db in (0.0, 5.0, 10.0):
    gamma = float(db_to_linear(db))
    lo, up = optimal_p_bounds(pf, gamma, nu)
    res = minimize_scalar(lambda p: -roc_balanced(nu * p, p, gamma, pf), bounds=(0.05, 4 * up), method="bounded")
    p_star, pd_star = optimal_p_exact(pf, gamma, nu)
    print(f"SNR {db:4.1f} dB: bracket ({lo:.3f}, {up:.3f}), approximation {optimal_p_approx(pf, gamma, nu):.3f}, "
          f"continuous peak {res.x:.3f}, best integer p {p_star} (P_D {pd_star:.4f})")

# The continuous peak sits below the bracket. The profile is flat near the
# peak, so the P_D lost by using the approximation is usually small.
gamma = 10.0
p = np.arange(1, 16)
m = np.maximum(1, np.floor(nu * p + 0.5))
print("\np:  ", " ".join(f"{v:6d}" for v in p))
print("P_D:", " ".join(f"{v:6.4f}" for v in roc_balanced(m, p, gamma, pf)))
