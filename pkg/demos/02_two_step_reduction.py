# %% [markdown]
# # Full to band, then band to tridiagonal
#
# The two-step reduction first squeezes the matrix into a band of half
# width `nb` using blocked reflectors, then chases the remaining band down
# to a tridiagonal one.  Here we look at the intermediate band and the cost
# of each stage.

# %%
import time

import numpy as np

from skeweig import random_skew
from skeweig.tridiag import reduce_band_to_tridiag, reduce_full_to_band

A = random_skew(400, seed=3)

# %%
band, q1 = reduce_full_to_band(A, nb=16)
Q1 = q1.materialize()
B = Q1.T @ A.materialize() @ Q1
i, j = np.indices(B.shape)
print("largest entry of Q1^T A Q1 outside the band:", np.abs(B[np.abs(i - j) > 16]).max())
print("distance to the stored band:", np.linalg.norm(B - band.materialize()))
print(q1.count, "reflectors in", len(q1.tfactors), "compact-WY panels")

# %% [markdown]
# The band matrix has the same eigenvalues as `A`; the second stage keeps
# them while removing everything but the first off-diagonal.

# %%
trd, q2 = reduce_band_to_tridiag(band)
T = trd.materialize()
ev_a = np.sort(np.abs(np.linalg.eigvals(A.materialize()).imag))
ev_t = np.sort(np.abs(np.linalg.eigvals(T).imag))
print("spectrum drift:", np.abs(ev_a - ev_t).max())

# %% [markdown]
# Applying both reflector sets to the identity gives the orthogonal `Q` with
# `Q^T A Q = T`.

# %%
Q = Q1 @ q2.materialize()
print("||Q^T A Q - T||_F =", np.linalg.norm(Q.T @ A.materialize() @ Q - T))

# %% [markdown]
# ## Where the time goes
#
# On a single core the chasing stage is bound by many small array passes,
# so it usually outweighs the blocked first stage at these sizes.

# %%
for n in (256, 512, 1024):
    M = random_skew(n, seed=n)
    t0 = time.perf_counter()
    bnd, _ = reduce_full_to_band(M, nb=32)
    t1 = time.perf_counter()
    reduce_band_to_tridiag(bnd)
    t2 = time.perf_counter()
    print(f"n={n:5d}  full-to-band {t1 - t0:6.3f} s   band-to-tridiag {t2 - t1:6.3f} s")
