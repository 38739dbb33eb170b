"""
Local indices of weighting functions
====================================

``-h''/h'`` plays the role in the probability plane that ``-U''/U'`` plays
for wealth. Inverse-S shaped functions are concave at low cumulative
probabilities, where the index is positive and spreads are disliked, and
convex at high ones, where spreads are sought.
"""
# %%
import numpy as np

import dualrisk as dr

p = np.linspace(0.01, 0.99, 99)
p_star = 1 - np.exp(-1)

# %% Prelec: the index crosses zero at the fixed point 1 - 1/e for every alpha
for alpha in (0.3, 0.65, 0.9):
    h = dr.PrelecWeighting(alpha)
    idx = h.local_index(p)
    k = np.flatnonzero(np.diff(np.sign(idx)))[0]
    print(f"alpha={alpha}: h(p*)-p* = {float(h.value(p_star)) - p_star:.1e}, "
          f"sign change between p={p[k]:.2f} and {p[k + 1]:.2f}")

# %% Tversky-Kahneman, cumulative convention
for beta in (0.55, 0.61, 0.75, 0.95):
    idx = dr.TKWeighting(beta).local_index(p)
    print(f"beta={beta}: index from {idx[0]: .3f} to {idx[-1]: .3f}")

# %% The approximate premium surface with both normalised terms equal to 1
w0 = np.linspace(0.5, 10, 40)
surf = dr.premium_surface(dr.PowerUtility(0.5), dr.PrelecWeighting(0.65), w0, p)
print("decreasing in w0:", bool(np.all(np.diff(surf, axis=0) < 0)))

# The zero of each row is where the weighting index equals minus the
# utility index, not where the weighting index alone vanishes. At low
# wealth the utility term is large and pushes the root well to the right.
for i in (0, 9, 39):
    row = surf[i]
    k = np.flatnonzero(np.diff(np.sign(row)))[0]
    print(f"w0={w0[i]:5.2f}: sign change near p0={p[k]:.2f} (index root {p_star:.3f})")
