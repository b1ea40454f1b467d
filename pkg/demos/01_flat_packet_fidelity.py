# %% [markdown]
# # A coherent packet on flat space
#
# With no curvature term the equation separates into two oscillators and the
# Galerkin matrix is diagonal. A packet started at u = -chi has a closed form,
# so we can watch the truncated expansion converge to it as N grows.

# %%
import numpy as np

import wdspectral as W

chi = 4.0
reference = W.reference_k0(chi, terms=120)
print("grid:", reference.box, "M =", reference.M)

# %% [markdown]
# Solve for a few truncations and compare on the same 128 x 128 grid.

# %%
for N in (10, 15, 20, 25, 30, 35):
    system = W.galerkin_matrix(W.BasisSpec("oscillator", N), W.PotentialSpec(k=0))
    sol = W.solve(system, W.coherent_coefficients(chi, N))
    d = W.delta(W.GridField.from_function(sol.evaluate), reference).delta
    print(f"N={N:2d}  null vectors={len(sol.bundle):2d}  delta={d:.3e}")

# %% [markdown]
# The null space is exact here: D is diagonal with exactly N zeros on the
# diagonal, one per pair (n, n). Detuning the second frequency removes them.

# %%
D = W.galerkin_matrix(W.BasisSpec("oscillator", 6), W.PotentialSpec(k=0)).D
print("zeros on the diagonal, equal frequencies:", np.count_nonzero(np.diag(D) == 0))
D = W.galerkin_matrix(W.BasisSpec("oscillator", 6, omega2=np.sqrt(2)), W.PotentialSpec(k=0)).D
print("smallest |diagonal|, omega2 = sqrt 2:", np.abs(np.diag(D)).min())
