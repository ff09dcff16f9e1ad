"""
Held-out prediction error from a CSV file
=========================================

The real-data workflow: standardize predictors, hold out the last
ceil(n/9) rows, fit each method on the rest and score the held-out rows.
A synthetic file stands in for a user-supplied dataset.
"""

import tempfile
from pathlib import Path

import numpy as np

from distreg import Dataset
from distreg.cli import main
from distreg.data import load_csv, save_csv
from distreg.workflow import evaluate

rng = np.random.default_rng(3)
X = rng.normal([200.0, 10.0, 80.0], [90.0, 3.5, 9.0], size=(24, 3))
skewed = rng.gamma(2.0, 2.0, 24)
Y = 5.0 + X @ [0.02, -0.8, 0.3] + skewed

tmp = Path(tempfile.mkdtemp())
path = tmp / "ozone_like.csv"
save_csv(Dataset(X, Y, ["radiation", "wind", "temp"], "ozone"), path)

# %%
# Library route

rep = evaluate(load_csv(path, "ozone"))
print(f"train {rep.n_train} rows, test {rep.n_test} rows")
for m, pe in rep.pe.items():
    print(f"PE {m}: {pe:.4f}")
for row in rep.coefficient_table(original_units=True):
    print(row)

# %%
# The same through the command line, as a JSON report

main(["evaluate", "--input", str(path), "--response", "ozone", "--format", "json",
      "--original-units"])
