"""
Variable selection with the adaptive LASSO
==========================================

Ten candidate predictors, three of them active.  The penalized DR fit is
traced along a lambda grid and the GIC picks one point on the path.
"""

import numpy as np

from distreg.sim import ErrorDist, ScenarioSpec, gen_scenario
from distreg.sparse import PenaltyConfig, select_lambda

spec = ScenarioSpec("example2", ErrorDist("exp1"), n=100, seed=11)
d, beta_true = gen_scenario(spec, 0)
print("true slopes:", beta_true)

# %%
# The path: support size shrinks as lambda grows

path = select_lambda(d, PenaltyConfig(n_lambda=12))
for k, f in enumerate(path.fits):
    mark = "  <- selected" if k == path.selected else ""
    print(f"lambda {f.lambda_:9.5f}  s={f.s_lambda:2d}  GIC {f.gic: .4f}{mark}")

# %%
# Selected model

best = path.best
print("active set:", [j + 1 for j in best.active_set])
print("estimate:  ", np.round(best.beta, 3))
print("model error:", round(float(np.sum((best.beta - beta_true) ** 2)), 5))
