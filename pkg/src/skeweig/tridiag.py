"""Orthogonal reduction of skew-symmetric matrices to skew tridiagonal form.

Two routes are provided.  ``tridiagonalize_onestep`` eliminates one column at
a time with a skew rank-2 update of the trailing matrix.  The two-step route
first reduces to a band of width ``nb`` with blocked compact-WY updates
(``reduce_full_to_band``) and then chases the band down to tridiagonal form
(``reduce_band_to_tridiag``).
"""
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .core import (
    BandSkewMatrix,
    DenseSkewMatrix,
    ReflectorSet,
    SkewTridiagonal,
    apply_reflectors,
    build_tfactor,
    skew_lower_matmul,
    skew_matvec,
    skew_rank2_update,
    skew_rank2k_update,
)

DEFAULT_NB = 64


def householder(x):
    """Reflector ``H = I - tau v v^T`` with ``H x = beta e_1``.

    ``v[0] == 1`` and ``beta = -sign(x[0]) * ||x||`` (``x[0] == 0`` counts as
    positive).  When ``x[1:]`` vanishes the identity is returned with
    ``beta = x[0]``.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("householder needs a non-empty vector")
    alpha = float(x[0])
    v = np.zeros_like(x)
    v[0] = 1.0
    xnorm = float(np.linalg.norm(x[1:])) if x.size > 1 else 0.0
    if xnorm == 0.0:
        return v, 0.0, alpha
    beta = -math.hypot(alpha, xnorm) if alpha >= 0 else math.hypot(alpha, xnorm)
    tau = (beta - alpha) / beta
    v[1:] = x[1:] / (alpha - beta)
    return v, tau, beta


def _skew_two_sided(block, v, tau):
    """``block <- H block H`` for the skew diagonal block (lower storage)."""
    w = skew_matvec(block, v)
    # v^T A v vanishes for skew A; the term is kept for parity with the
    # symmetric formula and cancels inside the skew rank-2 update
    u1 = tau * w + (0.5 * tau * tau * (v @ w)) * v
    skew_rank2_update(block, v, u1)


def _wy_reflectors(n, vecs, taus, starts, nb):
    """Group reflectors with consecutive start rows into compact-WY panels."""
    k = len(taus)
    if k == 0:
        return ReflectorSet.empty(n)
    length = max(v.size for v in vecs)
    V = np.zeros((length, k))
    for j, v in enumerate(vecs):
        V[: v.size, j] = v
    rs = ReflectorSet(n, V, np.asarray(taus, float), np.asarray(starts, np.int64), nb=nb)
    for j0 in range(0, k, nb):
        j1 = min(j0 + nb, k)
        rs.panels.append((j0, j1))
        rs.tfactors.append(None)
        _, vp = rs.panel_matrix(len(rs.panels) - 1)
        rs.tfactors[-1] = build_tfactor(vp, rs.tau[j0:j1])
    return rs


@dataclass
class OneStepFactorization:
    trd: SkewTridiagonal
    reflectors: ReflectorSet
    # reduced matrix: subdiagonal plus Householder vectors in the eliminated columns
    packed: np.ndarray = None
    timings: dict = field(default_factory=dict)

    def q_apply(self, planes, transpose=False):
        return apply_reflectors(self.reflectors, planes, transpose)


@dataclass
class TwoStepFactorization:
    trd: SkewTridiagonal
    band_reflectors: ReflectorSet
    tri_reflectors: ReflectorSet
    nb: int
    band: BandSkewMatrix = None
    timings: dict = field(default_factory=dict)

    def q_apply(self, planes, transpose=False):
        """``Q_band Q_trd X`` (or the transpose)."""
        if transpose:
            planes = apply_reflectors(self.band_reflectors, planes, True)
            return apply_reflectors(self.tri_reflectors, planes, True)
        planes = apply_reflectors(self.tri_reflectors, planes)
        return apply_reflectors(self.band_reflectors, planes)


def tridiagonalize_onestep(A, overwrite=False, nb=DEFAULT_NB):
    """Reduce ``A`` to skew tridiagonal form one column at a time.

    For column ``i`` the reflector ``v`` annihilating ``A[i+2:, i]`` updates
    the trailing matrix as ``A <- A + v u^T - u v^T`` with
    ``u = tau A v + tau^2/2 (v^T A v) v``.  Updates are delayed within panels
    of ``nb`` columns: the pairs ``(v, u)`` are collected, later columns and
    products with ``A`` are corrected on the fly, and the trailing matrix
    receives one skew rank-2k update per panel.  ``nb=1`` applies every
    rank-2 update immediately.  Householder vectors overwrite the eliminated
    columns.
    """
    a = A.data if overwrite else A.data.copy(order="F")
    n = a.shape[0]
    nb = max(1, int(nb))
    alpha = np.zeros(max(n - 1, 0))
    vecs, taus, starts = [], [], []
    for p0 in range(0, max(n - 2, 0), nb):
        p1 = min(p0 + nb, n - 2)
        if nb == 1:
            i = p0
            v, tau, beta = householder(a[i + 1 :, i])
            alpha[i] = -beta
            a[i + 1, i] = beta
            if tau != 0.0:
                _skew_two_sided(a[i + 1 :, i + 1 :], v, tau)
            a[i + 2 :, i] = v[1:]
            vecs.append(v)
            taus.append(tau)
            starts.append(i + 1)
            continue
        # rows/cols p0+1: at panel start, both triangles filled in
        full = DenseSkewMatrix(a[p0 + 1 :, p0 + 1 :]).materialize()
        m = n - p0 - 1
        V = np.zeros((m, p1 - p0))
        U = np.zeros((m, p1 - p0))
        for c, i in enumerate(range(p0, p1)):
            r = i + 1 - (p0 + 1)  # local row of the reflector start
            col = a[i + 1 :, i].copy()
            if c:
                # rows of V, U are offset by p0+1; column i sits at local row r-1
                col += V[r:, :c] @ U[r - 1, :c] - U[r:, :c] @ V[r - 1, :c]
            v, tau, beta = householder(col)
            alpha[i] = -beta
            a[i + 1, i] = beta
            a[i + 2 :, i] = v[1:]
            if tau != 0.0:
                w = full[r:, r:] @ v
                if c:
                    w += V[r:, :c] @ (U[r:, :c].T @ v) - U[r:, :c] @ (V[r:, :c].T @ v)
                V[r:, c] = v
                U[r:, c] = tau * w + (0.5 * tau * tau * (v @ w)) * v
            vecs.append(v)
            taus.append(tau)
            starts.append(i + 1)
        # trailing matrix (from column p1 on): A <- A + V U^T - U V^T
        t = p1 - p0
        skew_rank2k_update(a[p1:, p1:], V[t - 1 :], U[t - 1 :])
    if n >= 2:
        alpha[n - 2] = -a[n - 1, n - 2]
    rs = _wy_reflectors(n, vecs, taus, starts, nb)
    return OneStepFactorization(SkewTridiagonal(alpha), rs, a)


def _panel_qr(panel, k):
    """Householder QR of the first ``k`` columns of ``panel`` (in place)."""
    m = panel.shape[0]
    vp = np.zeros((m, k))
    tau = np.zeros(k)
    for c in range(k):
        v, t, beta = householder(panel[c:, c])
        panel[c, c] = beta
        panel[c + 1 :, c] = 0.0
        if t != 0.0 and c + 1 < panel.shape[1]:
            rest = panel[c:, c + 1 :]
            rest -= t * np.outer(v, v @ rest)
        vp[c:, c] = v
        tau[c] = t
    return vp, tau


def reduce_full_to_band(A, nb, overwrite=False):
    """Blocked reduction of ``A`` to a skew band matrix with ``nb`` subdiagonals.

    Each panel of ``nb`` columns is QR-factored below the band, its reflectors
    are accumulated into ``I - V T V^T`` and the trailing matrix is updated as
    ``A <- A + V U^T - U V^T`` where ``U = A V T + 1/2 V (T^T V^T A V T)^T``.

    Returns the band matrix and the reflector set of ``Q_band``.
    """
    n = A.n
    if not 1 <= nb < n:
        raise ValueError(f"block size must satisfy 1 <= nb < n, got nb={nb}, n={n}")
    a = A.data if overwrite else A.data.copy(order="F")
    vblocks, taus, starts, panels, tfs = [], [], [], [], []
    j0 = 0
    while n - j0 - nb >= 2:
        r0 = j0 + nb
        m = n - r0
        k = min(nb, m - 1)
        vp, tau = _panel_qr(a[r0:, j0:r0], k)
        t = build_tfactor(vp, tau)
        sub = a[r0:, r0:]
        x = skew_lower_matmul(sub, vp @ t)
        c = t.T @ (vp.T @ x)
        u = x + 0.5 * (vp @ c.T)
        skew_rank2k_update(sub, vp, u)
        first = sum(taus_.size for taus_ in taus)
        panels.append((first, first + k))
        tfs.append(t)
        vblocks.append(vp)
        taus.append(tau)
        starts.append(r0 + np.arange(k))
        j0 += nb
    band = BandSkewMatrix.from_lower(a, nb)
    if not panels:
        return band, ReflectorSet.empty(n)
    length = n - nb
    count = panels[-1][1]
    V = np.zeros((length, count))
    for (p0, p1), vp in zip(panels, vblocks):
        for c in range(p1 - p0):
            V[: vp.shape[0] - c, p0 + c] = vp[c:, c]
    rs = ReflectorSet(n, V, np.concatenate(taus), np.concatenate(starts),
                      nb=nb, panels=panels, tfactors=tfs)
    return band, rs


def reduce_band_to_tridiag(B, group=None):
    """Serial bulge chasing from band to skew tridiagonal form.

    Sweep ``j`` annihilates column ``j`` below the subdiagonal.  The reflector
    fills in the block below its diagonal block; the first column of that bulge
    is annihilated by the next reflector, ``b`` rows further down, and so on to
    the bottom of the matrix.

    For the back-transformation the reflectors of ``group`` (at most ``b``,
    default ``b``) consecutive sweeps that sit at the same chase step have
    consecutive start rows and form one compact-WY panel.  Within a group the
    panels are ordered by decreasing step; reflectors that this reordering
    moves past each other act on disjoint rows, so the product is unchanged.
    """
    n, b = B.n, B.b
    a = B.to_lower()
    if n <= 2 or b == 1:
        alpha = -np.diagonal(a, -1).copy() if n > 1 else np.zeros(0)
        return SkewTridiagonal(alpha), ReflectorSet.empty(n)
    group = b if group is None else max(1, min(int(group), b))
    sweeps = []
    for j in range(n - 2):
        vs, ts = [], []
        col, s = j, j + 1
        while s <= n - 2:
            e = min(s + b - 1, n - 1)
            v, tau, beta = householder(a[s : e + 1, col])
            a[s, col] = beta
            a[s + 1 : e + 1, col] = 0.0
            if tau != 0.0:
                if col + 1 < s:
                    blk = a[s : e + 1, col + 1 : s]
                    blk -= tau * np.outer(v, v @ blk)
                _skew_two_sided(a[s : e + 1, s : e + 1], v, tau)
                r1 = min(e + b, n - 1)
                if e < r1:
                    below = a[e + 1 : r1 + 1, s : e + 1]
                    below -= tau * np.outer(below @ v, v)
            vs.append(v)
            ts.append(tau)
            col, s = s, s + b
        sweeps.append((vs, ts))
    alpha = -np.diagonal(a, -1).copy()
    return SkewTridiagonal(alpha), _chase_reflectors(n, b, sweeps, group)


def _chase_reflectors(n, b, sweeps, group):
    cols, taus, starts, panels = [], [], [], []
    for g0 in range(0, len(sweeps), group):
        members = range(g0, min(g0 + group, len(sweeps)))
        steps = max(len(sweeps[j][1]) for j in members)
        for k in reversed(range(steps)):
            first = len(taus)
            for j in members:
                vs, ts = sweeps[j]
                if k >= len(ts):
                    break
                padded = np.zeros(b)
                padded[: vs[k].size] = vs[k]
                cols.append(padded)
                taus.append(ts[k])
                starts.append(j + 1 + k * b)
            panels.append((first, len(taus)))
    rs = ReflectorSet(n, np.array(cols).T, np.array(taus), np.array(starts, np.int64),
                      nb=group, panels=panels, tfactors=[None] * len(panels))
    for p, (j0, j1) in enumerate(panels):
        _, vp = rs.panel_matrix(p)
        rs.tfactors[p] = build_tfactor(vp, rs.tau[j0:j1])
    return rs


def tridiagonalize_twostep(A, nb=DEFAULT_NB, overwrite=False):
    """Full-to-band followed by band-to-tridiagonal reduction.

    ``nb`` is clamped to ``n - 1``; stage wall times land in ``timings``.
    """
    n = A.n
    if nb < 1:
        raise ValueError(f"block size must be positive, got {nb}")
    if n <= 2:
        one = tridiagonalize_onestep(A, overwrite)
        empty = ReflectorSet.empty(n)
        return TwoStepFactorization(one.trd, empty, empty, max(1, n - 1),
                                    timings={"full_to_band": 0.0, "band_to_tridiag": 0.0})
    nb = min(nb, n - 1)
    t0 = time.perf_counter()
    band, band_rs = reduce_full_to_band(A, nb, overwrite)
    t1 = time.perf_counter()
    trd, tri_rs = reduce_band_to_tridiag(band)
    t2 = time.perf_counter()
    return TwoStepFactorization(trd, band_rs, tri_rs, nb, band,
                                timings={"full_to_band": t1 - t0, "band_to_tridiag": t2 - t1})


def tridiagonalize(A, flavor="two-step", nb=DEFAULT_NB):
    if flavor == "one-step":
        return tridiagonalize_onestep(A, nb=nb)
    if flavor == "two-step":
        return tridiagonalize_twostep(A, nb)
    raise ValueError(f"unknown flavor {flavor!r}")


def sign_normalize(alpha):
    """Flip signs so every ``alpha`` is nonnegative.

    Returns the normalized array and the diagonal signature ``s`` (entries
    +-1) with ``diag(s) T(alpha) diag(s) = T(|alpha|)``.
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    s = np.ones(alpha.size + 1)
    for k, a in enumerate(alpha):
        s[k + 1] = s[k] * (-1.0 if a < 0 else 1.0)
    return np.abs(alpha), s
