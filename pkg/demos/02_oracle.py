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

# # Cross-checking the composition against the Loewner ODE
#
# The composed map at grid time t_k should equal the inverse Loewner map,
# which the ODE module computes by running the upward equation with the
# time-reversed driver.  The two code paths share nothing but the driver.

# +
import numpy as np

from loewnersim import driver, odesolver, zipper

d = driver.sample_bm(2.0, 64, seed=1)
chain = zipper.build(d)
# -

# +
rows = []
for k in (8, 16, 32, 64):
    for y in (0.1, 0.3, 1.0):
        z = zipper.fhat(chain, k, 1j * y)
        ref = odesolver.fhat_oracle(d, k / d.n, 1j * y).value
        rows.append((k, y, abs(z - ref) / abs(ref)))
for k, y, err in rows:
    print(f"k={k:3d} y={y:4.1f} rel err {err:.1e}")
# -

# Reversing the composition order breaks the agreement badly, which is how
# the order was pinned down.

# +
def reversed_order(chain, k, z):
    w = np.asarray(z, dtype=complex)
    for j in range(k):
        w = zipper.slitmap.tilted_map(chain.alpha[j], chain.a[j], chain.b[j], w)
    return w + chain.driver.values[0]

z, k = 0.3j, 64
print("wrong order error:", abs(reversed_order(chain, k, z) - odesolver.fhat_oracle(d, 1.0, z).value))
# -

# The downward equation also gives blow-up times.  For the zero driver the
# point iy is swallowed at t = y^2/4.

zero = driver.zero_driver(4)
for y in (0.5, 1.0, 1.5):
    print(y, odesolver.solve_downward(zero, 1j * y, 1.0).T_z, y * y / 4)
