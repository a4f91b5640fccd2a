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

# # Simulating SLE traces
#
# A Brownian driver with variance parameter kappa is sampled on a uniform grid,
# each step becomes one tilted slit map, and the curve is read off by
# composing those maps.

# +
import os

import numpy as np

from loewnersim import driver, output, zipper

OUT = os.environ.get("DEMO_OUT", "demo_output")
os.makedirs(OUT, exist_ok=True)
n, m = 800, 4
# -

# Two drivers: kappa = 8/3 (a simple, fairly smooth trace) and kappa = 6
# (rougher, and in the continuum it touches itself).

# +
curves = {}
for label, kappa in (("8-3", 8 / 3), ("6", 6.0)):
    d = driver.sample_bm(kappa, n, seed=1)
    chain = zipper.build(d)
    curves[label] = zipper.simulate(chain, m)
    meta = {"kappa": label.replace("-", "/"), "n": n, "m": m, "seed": 1, "rng": driver.RNG_NAME}
    output.write_svg(curves[label], os.path.join(OUT, f"sle_{label}.svg"), meta)
    output.write_curve_csv(curves[label], os.path.join(OUT, f"sle_{label}.csv"), meta)
# -

# The tip height never exceeds 2 sqrt(t), and the sampled polyline does not
# cross itself.

for label, c in curves.items():
    hits = zipper.self_intersections(c.points)
    print(label, "max Im:", round(c.points.imag.max(), 4), "bound:", 2.0,
          "crossings:", len(hits))

# The random-walk version uses +-sqrt(kappa/n) steps, so every slit has one of
# two angles, a pi or (1 - a) pi.

rw = zipper.build(driver.sample_rw(8 / 3, n, seed=1))
print("a =", driver.kappa_to_a(8 / 3), "distinct alphas:", np.unique(rw.alpha.round(12)))
