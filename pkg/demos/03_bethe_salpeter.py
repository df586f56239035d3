# %% [markdown]
# # A definite Bethe-Salpeter problem through a skew solve
#
# `H = [[A, B], [-conj(B), -conj(A)]]` with Hermitian `A` and complex
# symmetric `B`.  When `[[A, B], [conj(B), conj(A)]]` is positive definite the
# eigenvalues of `H` are real and come as `+-lam`.  The solver turns the
# problem into a real skew one of the same size and never forms `H`.

# %%
import numpy as np

import skeweig as sk
from skeweig.bse import bse_residuals

H = sk.random_definite_bse(40, seed=5, margin=0.5)
print("block size", H.n)

# %% [markdown]
# ## The pieces

# %%
M = sk.build_M(H)
L = sk.cholesky(M)
W = sk.form_W(L)
print("M symmetric:", np.allclose(M, M.T), "  ||L L^T - M|| =", np.linalg.norm(L @ L.T - M))
w = W.materialize()
print("W skew:", np.array_equal(w, -w.T))

# %% [markdown]
# ## One call does all of it

# %%
D = sk.solve_bse(H)
res, hnorm = bse_residuals(H, D)
print("smallest lam", D.lam.min(), " largest lam", D.lam.max())
print(f"max ||H x - lam x|| / ||H||_F = {res / hnorm:.2e}")

ev = np.linalg.eigvals(H.materialize())
ref = np.sort(ev.real)[H.n:][::-1]
print("agreement with a dense eigensolve:", np.abs(D.lam - ref).max())

# %% [markdown]
# ## When the problem is not definite
#
# `A = 1, B = i` gives a singular `M`, so the Cholesky factorization stops
# and names the pivot.

# %%
bad = sk.BSEHamiltonian.from_complex([[1.0]], [[1j]])
try:
    sk.solve_bse(bad)
except sk.NotDefiniteError as exc:
    print("refused:", exc)
