"""Distance covariance basics: the two estimators, invariances, and the
permutation test.

Run:  python3 demos/01_distance_covariance.py
"""

import numpy as np

from sufrep import dcor, dcov_u, dcov_v, perm_threshold

rng = np.random.default_rng(0)
n = 500

# A nonlinear, uncorrelated-but-dependent pair: Y = Z^2 + noise
z = rng.standard_normal((n, 1))
y = z**2 + 0.2 * rng.standard_normal((n, 1))
print("Pearson-style correlation misses it:  corr =", round(float(np.corrcoef(z[:, 0], y[:, 0])[0, 1]), 3))
print("distance covariance sees it:          dcov_v =", round(dcov_v(z, y), 4))
print("normalized to [0, 1]:                 dcor   =", round(dcor(z, y), 4))

# V-statistic vs the pair/triple-normalized form
print("\nV-statistic vs normalized estimator on the same data:")
print("  dcov_v =", round(dcov_v(z, y), 6))
print("  dcov_u =", round(dcov_u(z, y), 6), "(slightly debiased, can go negative under independence)")

# invariances: translation, rotation, scaling
z2 = rng.standard_normal((n, 3))
q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
print("\nInvariances (3-d Z):")
print("  translate:", np.isclose(dcov_v(z2 + 5.0, y), dcov_v(z2, y)))
print("  rotate:   ", np.isclose(dcov_v(z2 @ q, y), dcov_v(z2, y)))
print("  scale x2 doubles it:", np.isclose(dcov_v(2.0 * z2, y), 2.0 * dcov_v(z2, y)))

# permutation test: dependent pair rejects, independent pair does not
tau = perm_threshold(z, y, num_perms=199, level=0.05, seed=1)
print("\nPermutation test at level 0.05 (199 permutations):")
print(f"  dependent pair:   statistic {dcov_u(z, y):.4f}  threshold {tau:.4f}  "
      f"reject={dcov_u(z, y) > tau}")

y_ind = rng.standard_normal((n, 1))
tau_ind = perm_threshold(z, y_ind, num_perms=199, level=0.05, seed=2)
print(f"  independent pair: statistic {dcov_u(z, y_ind):.4f}  threshold {tau_ind:.4f}  "
      f"reject={dcov_u(z, y_ind) > tau_ind}")
