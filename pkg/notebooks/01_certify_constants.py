# %% [markdown]
# # From a contraction factor to a certified potential bound
#
# A transfer operator with zero potential is Markov: it fixes constants and
# contracts a seminorm by some factor `theta`.  Everything else follows by
# arithmetic: a base gap, a projection bound, a perturbation radius and finally
# the largest potential seminorm for which a spectral gap survives.

# %%
import math

from gapcert import (
    bvp_threshold,
    certified_gap_size,
    certify,
    doeblin_fortet_gap,
    holder_threshold,
    make_pomeau_manneville,
    make_tent,
    perturbation_radius,
    projection_norm_bound,
)

theta = 0.75  # Pomeau-Manneville maps, Lipschitz metric
delta0 = doeblin_fortet_gap(theta, 1.0)
pi = projection_norm_bound(1.0)
radius = perturbation_radius(delta0, 0.0, 1.0, pi)
print(f"delta0 = {delta0:.6f}  (1/7 = {1 / 7:.6f})")
print(f"||pi|| <= {pi:.6f}")
print(f"radius  = {radius:.8f}  (1/448 = {1 / 448:.8f})")

# %% [markdown]
# The potential enters through `exp(||phi - c||) - 1`, and centering costs a
# factor 3/2, so the Lipschitz threshold is `(2/3) log(1 + radius)`.

# %%
print("Lipschitz threshold:", holder_threshold(1.0, theta, 1.0), ">= 0.0014")
print("BV threshold, k = 2:", bvp_threshold(2, 1.0), ">= 0.0069")
print("BV threshold, k -> inf:", bvp_threshold(math.inf, 1.0))

# %% [markdown]
# A certificate records every intermediate value.  Below the threshold the gap
# shrinks smoothly from `delta0` as the potential grows.

# %%
for bound in (0.0, 0.0005, 0.001, 0.0014, 0.002):
    cert = certify(make_pomeau_manneville(2.0), "hol:1", bound)
    print(f"Lip(phi) <= {bound:<7} {cert.status:14} delta = {cert.certified_delta:.5f}")

cert = certify(make_tent(), "bvp:1", 0.0069)
print("tent map, BV(phi) <= 0.0069:", cert.status, f"delta = {cert.certified_delta:.5f}")
print("inverse check:", certified_gap_size(1 / 7, 1 / 896, 1.0, 4 / 3), "= 8/105 =", 8 / 105)
