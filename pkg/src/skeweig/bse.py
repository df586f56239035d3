"""Structure-preserving solver for the definite Bethe-Salpeter eigenproblem.

The Hamiltonian is::

    H_BS = [[ A,        B      ],
            [-conj(B), -conj(A)]]      A Hermitian, B complex symmetric.

When ``Omega = [[A, B], [conj(B), conj(A)]]`` is positive definite, the
real symmetric matrix ``M`` built from the real and imaginary parts of
``A +- B`` is positive definite as well.  With ``M = L L^T`` the spectrum of
``H_BS`` is ``+-lam`` where ``i lam`` are the eigenvalues of the real skew
matrix ``W = L^T J L``, ``J = [[0, I], [-I, 0]]``.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

from .core import EPS, ComplexPlanes, DenseSkewMatrix, _strict_lower_mask, make_rng
from .driver import SolverOptions, normalize_phase, solve_skew_eigen, worker_limit

_PANEL = 128


class BSEValidationError(ValueError):
    """Blocks lack the Hermitian / complex symmetric structure."""


class NotDefiniteError(ArithmeticError):
    """Cholesky factorization met a pivot at or below the tolerance."""

    def __init__(self, pivot, value, tol):
        self.pivot = int(pivot)
        self.value = float(value)
        self.tol = float(tol)
        super().__init__(
            f"matrix is not positive definite: pivot {self.pivot} is {self.value:.3e} "
            f"(tolerance {self.tol:.3e})")


def _defect(x, y, ref):
    d = float(np.linalg.norm(x - y))
    return d, 8.0 * EPS * float(np.linalg.norm(ref))


@dataclass
class BSEHamiltonian:
    A: ComplexPlanes
    B: ComplexPlanes

    def __post_init__(self):
        if self.A.re.ndim != 2 or self.A.shape[0] != self.A.shape[1]:
            raise ValueError(f"A must be square, got shape {self.A.shape}")
        if self.B.shape != self.A.shape:
            raise ValueError(f"A and B shapes differ: {self.A.shape} vs {self.B.shape}")
        a, b = self.A.to_complex(), self.B.to_complex()
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise BSEValidationError("blocks contain non-finite entries")
        d, tol = _defect(a, a.conj().T, a)
        if d > tol:
            raise BSEValidationError(f"A is not Hermitian: ||A - A^H||_F = {d:.3e} > {tol:.3e}")
        d, tol = _defect(b, b.T, b)
        if d > tol:
            raise BSEValidationError(f"B is not symmetric: ||B - B^T||_F = {d:.3e} > {tol:.3e}")

    @classmethod
    def from_complex(cls, A, B):
        return cls(ComplexPlanes.from_complex(np.asarray(A, complex)),
                   ComplexPlanes.from_complex(np.asarray(B, complex)))

    @property
    def n(self):
        return self.A.shape[0]

    def materialize(self):
        """Dense complex ``H_BS``."""
        a, b = self.A.to_complex(), self.B.to_complex()
        return np.block([[a, b], [-b.conj(), -a.conj()]])

    def omega(self):
        a, b = self.A.to_complex(), self.B.to_complex()
        return np.block([[a, b], [b.conj(), a.conj()]])


@dataclass
class BSEDecomposition:
    """``H_BS x_k = lam_k x_k`` for the positive ``lam`` (descending)."""

    lam: np.ndarray
    X: ComplexPlanes
    timings: dict = None

    def expand(self):
        """Add the ``-lam_k`` branch, eigenvector ``(conj x2; conj x1)``."""
        n = self.X.shape[0] // 2
        re, im = self.X.re, self.X.im
        pre = np.vstack([re[n:], re[:n]])
        pim = -np.vstack([im[n:], im[:n]])
        lam = np.concatenate([self.lam, -self.lam[::-1]])
        X = ComplexPlanes(np.hstack([re, pre[:, ::-1]]), np.hstack([im, pim[:, ::-1]]))
        return BSEDecomposition(lam, X, self.timings)


def unitary_Q(n):
    """``Q = [[I, -iI], [I, iI]] / sqrt(2)`` (dense complex)."""
    eye = np.eye(n)
    return np.block([[eye, -1j * eye], [eye, 1j * eye]]) / math.sqrt(2.0)


def sign_matrix(n):
    """``S = diag(I, -I)``."""
    return np.diag(np.concatenate([np.ones(n), -np.ones(n)]))


def j_matrix(n):
    """Dense ``J = [[0, I], [-I, 0]]``; for tests only."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def hamiltonian_form(H):
    """Real Hamiltonian ``[[Im(A+B), -Re(A-B)], [Re(A+B), Im(A-B)]]``."""
    a, b = H.A.to_complex(), H.B.to_complex()
    p, m = a + b, a - b
    return np.block([[p.imag, -m.real], [p.real, m.imag]])


def build_M(H):
    """Symmetric ``M = [[Re(A+B), Im(A-B)], [-Im(A+B), Re(A-B)]]``."""
    p_re, p_im = H.A.re + H.B.re, H.A.im + H.B.im
    m_re, m_im = H.A.re - H.B.re, H.A.im - H.B.im
    M = np.block([[p_re, m_im], [-p_im, m_re]])
    d, tol = _defect(M, M.T, M)
    if d > tol:
        raise BSEValidationError(f"M is not symmetric: ||M - M^T||_F = {d:.3e} > {tol:.3e}")
    return np.asfortranarray(0.5 * (M + M.T))


def cholesky(M):
    """Lower ``L`` with ``M = L L^T``.

    Raises ``NotDefiniteError`` (0-based pivot index) when a pivot falls to
    ``N eps max(diag M)`` or below, ``N`` being the order of ``M``.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    N = M.shape[0]
    if N == 0:
        return np.zeros((0, 0))
    tol = N * EPS * max(float(np.max(np.diag(M))), 0.0)
    c, info = lapack.dpotrf(M, lower=1, clean=1, overwrite_a=0)
    if info < 0:
        raise ValueError(f"dpotrf argument {-info} invalid")
    stop = N if info == 0 else info - 1
    piv = np.diag(c)[:stop] ** 2
    bad = np.flatnonzero(piv <= tol)
    if bad.size:
        k = int(bad[0])
        raise NotDefiniteError(k, piv[k], tol)
    if info > 0:
        # LAPACK's failing pivot: recompute it from the computed leading rows
        k = info - 1
        value = M[k, k] - float(c[k, :k] @ c[k, :k])
        raise NotDefiniteError(k, value, tol)
    return np.asfortranarray(np.tril(c))


def form_W(L):
    """Skew ``W = L^T J L`` (strictly lower triangle only).

    With ``L = [[L1], [L2]]`` split by rows, ``J L = [[L2], [-L1]]`` and
    ``W = L1^T L2 - L2^T L1``.
    """
    L = np.asarray(L, dtype=np.float64)
    N = L.shape[0]
    if L.ndim != 2 or L.shape[1] != N:
        raise ValueError(f"expected a square factor, got shape {L.shape}")
    if N % 2:
        raise ValueError(f"J needs an even dimension, got {N}")
    n = N // 2
    L1, L2 = L[:n], L[n:]
    w = np.zeros((N, N), order="F")
    for c0 in range(0, N, _PANEL):
        c1 = min(c0 + _PANEL, N)
        blk = L1[:, c0:].T @ L2[:, c0:c1] - L2[:, c0:].T @ L1[:, c0:c1]
        k = c1 - c0
        w[c0:c1, c0:c1] = np.where(_strict_lower_mask(k), blk[:k], 0.0)
        w[c1:, c0:c1] = blk[k:]
    return DenseSkewMatrix(w)


def _back_transform(L, z):
    """``x = Q J L z`` for complex planes ``z``; columns normalized."""
    n = L.shape[0] // 2
    a = L @ z.re
    b = L @ z.im
    # J L z = (w1; w2) with w1 = (L z)_2, w2 = -(L z)_1
    w1r, w1i = a[n:], b[n:]
    w2r, w2i = -a[:n], -b[:n]
    s = 1.0 / math.sqrt(2.0)
    # Q (w1; w2) = (w1 - i w2; w1 + i w2) / sqrt(2)
    re = s * np.vstack([w1r + w2i, w1r - w2i])
    im = s * np.vstack([w1i - w2r, w1i + w2r])
    nrm = np.sqrt((re * re + im * im).sum(axis=0))
    nrm[nrm == 0] = 1.0
    return normalize_phase(ComplexPlanes(re / nrm, im / nrm))


def solve_bse(H, opts=None, **kwargs):
    """Positive eigenvalues (descending) and eigenvectors of ``H_BS``.

    ``opts`` selects the skew solver flavor, block size and workers; only
    the nonnegative half of the skew spectrum is ever needed, so
    ``fraction`` is fixed to one half.
    """
    if opts is None:
        opts = SolverOptions(**kwargs)
    elif kwargs:
        raise ValueError("pass either opts or keyword options, not both")
    if not isinstance(H, BSEHamiltonian):
        raise TypeError("expected a BSEHamiltonian")
    opts = SolverOptions(flavor=opts.flavor, nb=opts.nb, fraction=0.5, workers=opts.workers)
    with worker_limit(opts.workers):
        M = build_M(H)
        L = cholesky(M)
        W = form_W(L)
        E = solve_skew_eigen(W, opts)
        X = _back_transform(L, E.vectors)
    return BSEDecomposition(E.lam, X, dict(E.timings))


def random_definite_bse(n, seed, margin=1.0):
    """Random ``H_BS`` with ``Omega >= margin I``.

    ``Omega = (K + P conj(K) P) / 2 + margin I`` with ``K = G^H G`` for a
    complex Gaussian ``G`` (PCG64 stream) and ``P`` the block swap; this has
    the required block pattern, so ``A`` and ``B`` are read off its first
    block row.
    """
    if n < 1:
        raise ValueError(f"block dimension must be positive, got {n}")
    if not margin > 0:
        raise ValueError(f"margin must be positive, got {margin}")
    rng = make_rng(seed)
    N = 2 * n
    G = (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))) / math.sqrt(2.0 * N)
    K = G.conj().T @ G
    perm = np.concatenate([np.arange(n, N), np.arange(n)])
    Kp = K.conj()[np.ix_(perm, perm)]
    omega = 0.5 * (K + Kp) + margin * np.eye(N)
    A = omega[:n, :n]
    B = omega[:n, n:]
    A = 0.5 * (A + A.conj().T)
    B = 0.5 * (B + B.T)
    return BSEHamiltonian.from_complex(A, B)


def bse_residuals(H, D):
    """``max_k ||H_BS x_k - lam_k x_k||_2`` and ``||H_BS||_F``."""
    h = H.materialize()
    x = D.X.to_complex()
    r = h @ x - x * D.lam[None, :]
    res = float(np.linalg.norm(r, axis=0).max()) if x.shape[1] else 0.0
    return res, float(np.linalg.norm(h))
