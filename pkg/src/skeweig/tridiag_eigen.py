"""Symmetric tridiagonal eigensolvers.

``dc_eigen`` is a Cuppen-style divide and conquer with deflation and
Gu-Eisenstat eigenvector recomputation.  ``bisection_eigenvalues`` is an
independent Sturm-sequence bisection used to cross-check it.
"""
import math
from dataclasses import dataclass

import numpy as np

from .core import EPS

# machine epsilon, for the internal convergence tests
_MACHEPS = np.finfo(np.float64).eps
TINY = np.finfo(np.float64).tiny

# subproblems up to this size go to implicit QL
BASE_SIZE = 16
MAX_SECULAR_ITER = 200


@dataclass
class SymTridiagonal:
    d: np.ndarray
    e: np.ndarray

    def __post_init__(self):
        self.d = np.asarray(self.d, dtype=np.float64).ravel()
        self.e = np.asarray(self.e, dtype=np.float64).ravel()
        if self.d.size < 1:
            raise ValueError("tridiagonal matrix must have n >= 1")
        if self.e.size != self.d.size - 1:
            raise ValueError(f"off-diagonal length {self.e.size} != n - 1 = {self.d.size - 1}")

    @classmethod
    def from_alpha(cls, alpha):
        alpha = np.asarray(alpha, dtype=np.float64)
        return cls(np.zeros(alpha.size + 1), alpha)

    @property
    def n(self):
        return self.d.size

    def materialize(self):
        return np.diag(self.d) + np.diag(self.e, 1) + np.diag(self.e, -1)

    def norm2_bound(self):
        """Cheap upper bound on ``||T||_2`` (the infinity norm)."""
        if self.n == 1:
            return abs(self.d[0])
        ae = np.abs(self.e)
        row = np.abs(self.d).copy()
        row[:-1] += ae
        row[1:] += ae
        return float(row.max())


@dataclass
class TridiagEigen:
    lam: np.ndarray
    vectors: np.ndarray = None


def _ql_implicit(d, e):
    """Implicit QL with Wilkinson shifts on a small tridiagonal matrix."""
    n = d.size
    d = d.copy()
    e = np.append(e, 0.0)
    z = np.eye(n)
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= _MACHEPS * dd or abs(e[m]) < TINY:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > 60:
                raise RuntimeError("implicit QL failed to converge")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                zi = z[:, i].copy()
                z[:, i] = c * zi - s * z[:, i + 1]
                z[:, i + 1] = s * zi + c * z[:, i + 1]
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    order = np.argsort(d, kind="stable")
    return d[order], z[:, order]


def _secular_roots(d, z, rho):
    """Roots of ``1 + rho sum z_i^2 / (d_i - x)`` for sorted distinct ``d``
    and ``rho > 0``.

    Each root is tracked as an offset ``tau`` from its nearer pole, so that
    ``delta[i, j] = d_i - lambda_j`` is available to full relative accuracy.
    The iteration fits one simple pole to each side of the root (value and
    slope) and solves the resulting quadratic, falling back to bisection when
    the step leaves the current bracket.
    """
    k = d.size
    z2 = z * z
    if k == 1:
        tau = rho * z2[0]
        return d + tau, np.array([[-tau]])
    gaps = np.diff(d)
    idx = np.arange(k)
    origin = idx.copy()
    lo = np.zeros(k)
    hi = np.zeros(k)
    # interior roots: pick the origin from the sign of f at the midpoint
    half = 0.5 * gaps
    shifted = d[:, None] - d[None, :-1] - half[None, :]
    fmid = 1.0 + rho * np.sum(z2[:, None] / shifted, axis=0)
    left = fmid >= 0
    origin[:-1] = np.where(left, idx[:-1], idx[:-1] + 1)
    lo[:-1] = np.where(left, 0.0, -half)
    hi[:-1] = np.where(left, half, 0.0)
    hi[-1] = rho * z2.sum()
    # poles bounding each root from the left (a) and right (b); for the last
    # root both lie to its left and the right-hand sum is the last pole alone
    a = np.minimum(idx, k - 2)
    b = a + 1
    base = d[:, None] - d[origin][None, :]
    da = base[a, idx]
    db = base[b, idx]
    left_mask = idx[:, None] <= a[None, :]

    tau = 0.5 * (lo + hi)
    active = np.ones(k, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        for _ in range(MAX_SECULAR_ITER):
            den = base - tau[None, :]
            t = z2[:, None] / den
            tp = t / den
            psi = np.where(left_mask, t, 0.0).sum(axis=0)
            phi = t.sum(axis=0) - psi
            dpsi = np.where(left_mask, tp, 0.0).sum(axis=0)
            dphi = tp.sum(axis=0) - dpsi
            f = 1.0 + rho * (psi + phi)
            err = 8.0 * k * _MACHEPS * (1.0 + rho * np.abs(t).sum(axis=0))
            lo = np.where(active & (f < 0), tau, lo)
            hi = np.where(active & (f > 0), tau, hi)
            width = hi - lo
            done = (np.abs(f) <= err) | (width <= 2.0 * _MACHEPS * np.maximum(np.abs(lo), np.abs(hi)))
            active &= ~done
            if not active.any():
                break
            ea = da - tau
            eb = db - tau
            s_a = dpsi * ea * ea
            s_b = dphi * eb * eb
            c = 1.0 + rho * (psi - s_a / ea + phi - s_b / eb)
            qa = c
            qb = -(c * (da + db) + rho * (s_a + s_b))
            qc = c * da * db + rho * (s_a * db + s_b * da)
            disc = qb * qb - 4.0 * qa * qc
            root = np.sqrt(np.maximum(disc, 0.0))
            q = -0.5 * (qb + np.copysign(root, qb))
            x1 = q / qa
            x2 = qc / q
            in1 = (x1 > lo) & (x1 < hi)
            in2 = (x2 > lo) & (x2 < hi)
            step = np.where(in1, x1, np.where(in2, x2, 0.5 * (lo + hi)))
            step = np.where(np.isfinite(step) & (disc >= 0), step, 0.5 * (lo + hi))
            tau = np.where(active, step, tau)
    lam = d[origin] + tau
    delta = base - tau[None, :]
    return lam, delta


def _gu_eisenstat_z(d, delta, rho, zsign):
    """Recompute the rank-one vector so the computed roots are exact
    eigenvalues of ``diag(d) + rho z z^T``."""
    diff = d[None, :] - d[:, None]  # d_j - d_i
    np.fill_diagonal(diff, rho)
    ratio = -delta / diff
    z2 = np.abs(np.prod(ratio, axis=1))
    return np.copysign(np.sqrt(z2), zsign)


def _rank_one_eig(dd, z, rho):
    """Eigen-decomposition of ``diag(dd) + rho z z^T`` with ``||z|| = 1``.

    Returns ascending eigenvalues and the orthogonal eigenvector matrix in the
    coordinates of ``dd``.
    """
    if rho < 0:
        lam, w = _rank_one_eig(-dd, z, -rho)
        return -lam[::-1], w[:, ::-1]
    n = dd.size
    perm = np.argsort(dd, kind="stable")
    d = dd[perm]
    z = z[perm].copy()
    basis = np.eye(n)[:, perm]
    dnorm = float(np.abs(d).max()) if n else 0.0
    deflated = rho * np.abs(z) <= 8.0 * EPS * (rho + dnorm)
    tol_pole = 8.0 * EPS * dnorm
    prev = -1
    for i in np.flatnonzero(~deflated):
        if prev >= 0 and d[i] - d[prev] <= tol_pole:
            r = math.hypot(z[prev], z[i])
            c, s = z[i] / r, z[prev] / r
            bp = basis[:, prev].copy()
            basis[:, prev] = c * bp - s * basis[:, i]
            basis[:, i] = s * bp + c * basis[:, i]
            z[i], z[prev] = r, 0.0
            deflated[prev] = True
        prev = i
    keep = np.flatnonzero(~deflated)
    gone = np.flatnonzero(deflated)
    if keep.size == 0:
        lam = d
        vec = basis
    else:
        ds, zs = d[keep], z[keep]
        lam_s, delta = _secular_roots(ds, zs, rho)
        zhat = _gu_eisenstat_z(ds, delta, rho, zs)
        u = zhat[:, None] / delta
        u /= np.linalg.norm(u, axis=0)
        lam = np.concatenate([d[gone], lam_s])
        vec = np.hstack([basis[:, gone], basis[:, keep] @ u])
    order = np.argsort(lam, kind="stable")
    return lam[order], vec[:, order]


def _dc(d, e, cols=None):
    """Eigenpairs of the tridiagonal ``(d, e)``; ``cols`` limits the vectors
    formed at this level to a slice of the ascending order."""
    n = d.size
    if n <= BASE_SIZE:
        lam, q = _ql_implicit(d, e)
        return lam, q if cols is None else q[:, cols]
    m = n // 2
    rho = e[m - 1]
    d1 = d[:m].copy()
    d2 = d[m:].copy()
    d1[-1] -= rho
    d2[0] -= rho
    l1, q1 = _dc(d1, e[: m - 1])
    l2, q2 = _dc(d2, e[m:])
    z = np.concatenate([q1[-1, :], q2[0, :]]) / math.sqrt(2.0)
    lam, w = _rank_one_eig(np.concatenate([l1, l2]), z, 2.0 * rho)
    if cols is not None:
        w = w[:, cols]
    vec = np.empty((n, w.shape[1]))
    vec[:m] = q1 @ w[:m]
    vec[m:] = q2 @ w[m:]
    return lam, vec


def _selection(want, n):
    if want == "all" or want is None:
        return 0, n, True
    if want == "none":
        return 0, n, False
    lo, hi = want
    if not 0 <= lo <= hi <= n:
        raise ValueError(f"index range {want!r} outside 0..{n}")
    return lo, hi, True


def dc_eigen(T, want="all"):
    """Divide-and-conquer eigensolver for a symmetric tridiagonal matrix.

    Parameters
    ----------
    T : SymTridiagonal
    want : "all", "none" or (lo, hi)
        Eigenvectors to return; a pair selects the half-open range of
        ascending indices ``lo:hi`` (eigenvalues are restricted likewise).

    Returns
    -------
    TridiagEigen
        Ascending eigenvalues and, unless ``want == "none"``, the matching
        orthonormal eigenvectors as columns.
    """
    d, e = T.d, T.e
    if not (np.all(np.isfinite(d)) and np.all(np.isfinite(e))):
        raise ValueError("tridiagonal matrix has non-finite entries")
    n = d.size
    lo, hi, vectors = _selection(want, n)
    scale = max(float(np.abs(d).max()), float(np.abs(e).max()) if e.size else 0.0)
    if scale == 0.0:
        lam, q = np.zeros(n), np.eye(n)[:, lo:hi]
    else:
        lam, q = _dc(d / scale, e / scale, slice(lo, hi))
        lam *= scale
    return TridiagEigen(lam[lo:hi], q if vectors else None)


def _sturm_count(d, e2, x, pivmin):
    """Number of eigenvalues strictly below each entry of ``x``."""
    q = d[0] - x
    q = np.where(np.abs(q) < pivmin, -pivmin, q)
    count = (q < 0).astype(np.int64)
    for i in range(1, d.size):
        q = d[i] - x - e2[i - 1] / q
        q = np.where(np.abs(q) < pivmin, -pivmin, q)
        count += q < 0
    return count


def bisection_eigenvalues(T, k_lo, k_hi):
    """Eigenvalues ``k_lo..k_hi`` (1-based, inclusive, ascending) by bisection
    on Sturm counts.  Each is bracketed to width ``4 eps ||T||_inf`` (plus an
    underflow-level floor), which never exceeds ``4 eps max(1, ||T||_inf)``."""
    n = T.n
    if not 1 <= k_lo <= k_hi <= n:
        raise ValueError(f"invalid index range {k_lo}..{k_hi} for n={n}")
    d, e = T.d, T.e
    e2 = e * e
    tnorm = T.norm2_bound()
    pivmin = TINY * max(1.0, float(e2.max()) if e2.size else 1.0)
    tol = 4.0 * EPS * tnorm + 4.0 * pivmin
    ks = np.arange(k_lo, k_hi + 1)
    lo = np.full(ks.size, -tnorm - tol)
    hi = np.full(ks.size, tnorm + tol)
    for _ in range(2000):
        if np.all(hi - lo <= tol):
            break
        mid = 0.5 * (lo + hi)
        stuck = (mid <= lo) | (mid >= hi)
        cnt = _sturm_count(d, e2, mid, pivmin)
        below = cnt >= ks
        hi = np.where(below & ~stuck, mid, hi)
        lo = np.where(~below & ~stuck, mid, lo)
        if np.all(stuck | (hi - lo <= tol)):
            break
    return 0.5 * (lo + hi)
