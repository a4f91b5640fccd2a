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

# # Hulls from blow-up times
#
# A pixel is marked when the downward Loewner flow started at its centre
# comes within eps_blow of the driver before time t.  The hull of a simple
# curve has no area, so eps_blow decides how wide a band around the curve
# gets marked.

# +
import os

from loewnersim import driver, odesolver, output

OUT = os.environ.get("DEMO_OUT", "demo_output")
os.makedirs(OUT, exist_ok=True)


def show(mask):
    for row in mask:
        print("".join("#" if v else "." for v in row))
# -

# Zero driver: the hull is the segment from 0 to 2i.

r = odesolver.hull_raster(driver.zero_driver(8), 1.0, (-0.55, 0.55, 0.0, 2.5), 10)
show(r.mask)

# kappa = 6 with the default eps_blow marks almost nothing; a pixel-sized
# eps_blow shows the neighbourhood of the trace.

# +
d = driver.sample_bm(6.0, 64, seed=1)
bounds = (-1.5, 1.5, 0.0, 2.0)
for eps in (1e-6, 0.1):
    r = odesolver.hull_raster(d, 1.0, bounds, 10, eps_blow=eps)
    print("eps_blow", eps, "marked", int(r.mask.sum()))
show(r.mask)
output.write_pgm(r.mask, os.path.join(OUT, "hull_k6.pgm"), {"kappa": 6, "seed": 1, "eps_blow": 0.1})
# -
