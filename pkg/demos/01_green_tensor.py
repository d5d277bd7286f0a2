# %% [markdown]
# # The elastic fundamental tensor
#
# The outgoing tensor splits into an identity part phi1 and a part phi2 along
# x x^T / |x|^2.  In the plane phi1 has a logarithmic singularity at the origin
# while phi2 stays bounded.

# %%
import math

import numpy as np

from elastoscatter import LameParams, green_tensor, phi_pair_2d, phi_pair_3d

params = LameParams(lam=1.0, mu=4.0, omega=10.0)
print(f"k_p = {params.k_p:.4f}, k_s = {params.k_s:.4f}")

# %% The log slope of phi1 near zero
v = np.logspace(-6, -1, 6)
phi1, phi2 = phi_pair_2d(v, params)
slope = np.diff(phi1.real) / np.diff(np.log(v))
print("d Re(phi1) / d log v:", np.round(slope, 6))
print("predicted           :", round(-(1 / params.mu + 1 / (params.lam + 2 * params.mu))
                                     / (4 * math.pi), 6))
print("phi2 near 0         :", np.round(phi2.real, 6))

# %% In space the profiles blow up like 1/v, handled by a series near zero
for vv in (1e-6, 1e-3, 1e-1, 1.0):
    a, b = phi_pair_3d(vv, params)
    print(f"v={vv:7.0e}  v*phi1={vv * a:.6f}  v*phi2={vv * b:.6f}")

# %% The full matrix at a point
g = green_tensor(np.array([0.3, 0.4]), params)
print(np.round(g.matrix, 5))
