# %% [markdown]
# # Packets with spatial curvature
#
# A nonzero k couples the two directions through a cube-root term that has a
# kink on the light cone u = +-v. The null space of D is no longer spanned by
# single basis pairs, yet it stays well separated from the rest of the
# spectrum. We solve for k = +1 and k = -1 and overlay the classical path.

# %%
import numpy as np

import wdspectral as W
from wdspectral import pipeline

chi, N = 4.0, 35
angles = 2 * np.pi * np.arange(16) / 16

# %%
solutions = {}
for k in (1.0, -1.0):
    system = W.galerkin_matrix(W.BasisSpec("oscillator", N), W.PotentialSpec(k=k))
    sol = W.solve(system, W.coherent_coefficients(chi, N))
    solutions[k] = sol
    print(f"k={k:+g}  gap ratio={sol.bundle.gap_ratio:.2e}  "
          f"max |eig| kept={np.abs(sol.bundle.eigenvalues).max():.2e}  "
          f"Galerkin residual={W.galerkin_residual(sol, system):.2e}")

# %% [markdown]
# Where along each ray through the origin is |psi|^2 largest, and how far is
# that from the classical radius at the same angle?

# %%
for k, sol in solutions.items():
    r_q = pipeline.ray_argmax(sol, angles, dr=0.01)
    r_c = W.integrate(chi, k, 3 * np.pi).radius_at_angles(angles)
    print(f"k={k:+g}")
    for th, a, b in zip(angles, r_q, r_c):
        print(f"  angle {np.degrees(th):5.1f}  quantum {a:6.3f}  classical {b:6.3f}")

# %% [markdown]
# The k = +1 path is a little wider than the circle and the k = -1 path a
# little narrower. The k = -1 packet sits farther out than the classical path
# on the diagonals, where the path runs close to the light cone.

# %%
for k in (1.0, -1.0):
    r = W.integrate(chi, k).radius()
    print(f"k={k:+g}: classical radius in [{r.min():.4f}, {r.max():.4f}]")
