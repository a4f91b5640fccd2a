# ---
# jupyter:
#   jupytext:
#     text_representation:
#       extension: .py
#       format_name: light
#   kernelspec:
#     display_name: Python 3
#     name: python3
# ---

# # Empirical convergence under coupled refinement
#
# Each Brownian path is refined by bridge midpoints, so the driver at 2n
# agrees with the driver at n on the coarse grid.  d_n is the sup distance
# between the curves at n and 2n on the coarsest sample times.

# +
import numpy as np

from loewnersim import diagnostics

rep = diagnostics.convergence_study("bm", seeds=range(1, 11), n0=100, doublings=3, m=2, kappa=2.0)
np.set_printoptions(precision=4, suppress=True)
print("levels", rep.levels)
print(rep.d_n)
# -

# Fitted exponents next to the exponent the theory gives for the fitted beta.
# The theory only gives a lower bound on the rate (up to subpower factors),
# so faster empirical decay is not a contradiction.

for s, rho, tgt, beta in zip(rep.seeds, rep.rho_fit, rep.rho_target, rep.beta_est):
    print(f"seed {s:2d}  rho_fit {rho:6.3f}  target {tgt:6.3f}  beta {beta:.3f}")
print("fraction decreasing:", rep.fraction_decreasing())

# A deterministic driver c sqrt(t) has a clean, stable rate.

for n0 in (16, 32):
    r = diagnostics.convergence_study("sqrt", n0=n0, doublings=3, m=2, c=1.0)
    print(n0, r.d_n[0], "rho", round(float(r.rho_fit[0]), 3))
