"""
Regression under bimodal errors
===============================

Fit the three estimators on one sample whose errors are a 50/50 mixture of
N(-2, 5^2) and N(2, 0.5^2), then look at the residual density each one
leaves behind.
"""

import numpy as np

from distreg import Dataset, fit_dr, fit_mr, fit_qr
from distreg.sim import ErrorDist, sample_error
from distreg.workflow import density_curve

rng = np.random.default_rng(7)
n = 200
X = rng.standard_normal((n, 3))
beta = np.array([3.0, 3.0, 3.0])
Y = X @ beta + sample_error(ErrorDist("mixed_normal"), n, rng)
d = Dataset(X, Y)

# %%
# Slopes and their squared error against the truth

fits = {"DR": fit_dr(d), "MR": fit_mr(d), "QR": fit_qr(d)}
for name, f in fits.items():
    err = float(np.sum((f.beta - beta) ** 2))
    print(f"{name}: slopes {np.round(f.beta, 3)}  intercept {f.intercept: .3f}  sq. error {err:.4f}")

dr = fits["DR"]
print(f"DR bandwidth {dr.h_used.h:.3f} ({dr.h_used.source}), converged {dr.optim.converged}")

# %%
# Residual densities.  The tall narrow mode is the N(2, 0.5^2) component;
# the sharper a fit leaves it, the better it has separated signal from noise.

for name, f in fits.items():
    grid, dens, bw = density_curve(f.residuals)
    print(f"{name}: tallest mode at z = {grid[np.argmax(dens)]: .2f}, height {dens.max():.3f}")
