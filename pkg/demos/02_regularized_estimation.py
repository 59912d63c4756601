"""OLS, PCR, PLS and ridge regression through one SVD.

Two identical copies of an AR(1) series make the lag matrix singular.  OLS
refuses the fit, while the shrinkage estimators spread the weight equally
over the duplicated columns.  Cross-validation then picks the number of
components and the ridge parameter.
"""

import numpy as np

from dynreg import EstimatorSpec, RankDeficientError, build_design, centralize, svd_fit
from dynreg.regression import DesignPair
from dynreg.tuning import tune_q, tune_ridge

rng = np.random.default_rng(0)
z = np.zeros(300)
for t in range(1, 300):
    z[t] = 0.6 * z[t - 1] + rng.normal(0, 0.3)
x, _ = centralize(np.column_stack([z, z]))
design = build_design(x, (1, 1), target=0)

try:
    svd_fit(design, EstimatorSpec.ols())
except RankDeficientError as exc:
    print("OLS:", exc)

for spec in (EstimatorSpec.pcr(1), EstimatorSpec.pls(1), EstimatorSpec.ridge(1.0)):
    model = svd_fit(design, spec)
    print(f"{str(spec):12s} coefficients {np.round(model.coef, 4)}")

# A well-posed design with a weak direction: let cross-validation decide.
X = rng.standard_normal((200, 4)) @ np.diag([3.0, 1.5, 0.5, 0.05])
y = X @ np.array([0.4, -0.3, 0.2, 0.0]) + rng.standard_normal(200)
pair = DesignPair(X=X, y=y, orders=(4,), target=0, times=np.arange(200))
print("\nPCR components chosen by 10-fold CV:", tune_q(pair, "PCR"))
print("PLS components chosen by 10-fold CV:", tune_q(pair, "PLS"))
search = tune_ridge(pair)
print(f"ridge parameter {search.a:.4g} (sigma_1 = {search.sigma1:.4g}), "
      f"{search.iterations} refinement passes")
