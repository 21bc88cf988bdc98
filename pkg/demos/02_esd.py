"""The generalized ESD test on a textbook dataset and on a noisy series.

Run: python demos/02_esd.py
"""

# %% Rosner's 54 observations (as tabulated in the NIST/SEMATECH handbook)
import numpy as np

from distread.esd import EsdConfig, esd_test, t_quantile

rosner = np.array([
    -0.25, 0.68, 0.94, 1.15, 1.20, 1.26, 1.26, 1.34, 1.38, 1.43, 1.49, 1.49, 1.55, 1.56,
    1.58, 1.65, 1.69, 1.70, 1.76, 1.77, 1.81, 1.91, 1.94, 1.96, 1.99, 2.06, 2.09, 2.10,
    2.14, 2.15, 2.23, 2.24, 2.26, 2.35, 2.37, 2.40, 2.47, 2.54, 2.62, 2.64, 2.90, 2.92,
    2.92, 2.93, 3.21, 3.26, 3.30, 3.59, 3.68, 4.30, 4.64, 5.34, 5.42, 6.01,
])
result = esd_test(rosner, EsdConfig(alpha=0.05, r=10))

# %% One round per candidate: test statistic R_i against critical value lambda_i
print(" i    R_i   lambda_i  removed")
for i, (R, lam, idx) in enumerate(zip(result.R, result.lam, result.removed_index_order), start=1):
    print(f"{i:2d}  {R:6.3f}  {lam:7.3f}   {rosner[idx]:5.2f}{'  *' if R > lam else ''}")
print("outliers:", result.num_outliers, "->", rosner[result.outlier_indices])

# %% The critical values rest on Student-t quantiles
for nu in (1, 5, 52, 10**6):
    print(f"t_0.975({nu}) = {t_quantile(0.975, nu):.6f}")

# %% A noisy series with three planted spikes
rng = np.random.default_rng(3)
x = rng.normal(0.5, 0.05, size=400)
x[[50, 51, 300]] = [0.9, 0.92, 0.1]
found = esd_test(x)
print(f"r = {found.r}, detected {found.num_outliers}: {sorted(found.outlier_indices)}")
