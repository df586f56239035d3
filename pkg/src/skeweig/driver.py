"""End-to-end skew-symmetric eigensolver.

Pipeline: tridiagonalize, solve the symmetrized tridiagonal problem, scale
by ``D = diag(1, i, i^2, ...)``, then undo the orthogonal reductions on the
real and imaginary planes.  The spectrum of a real skew matrix is
``{+i lam, -i lam}``, so by default only the nonnegative half is computed.
"""
import contextlib
import math
import time
from dataclasses import dataclass, field

import numpy as np
from threadpoolctl import threadpool_limits

from .core import EPS, ComplexPlanes, DenseSkewMatrix
from .tridiag import DEFAULT_NB, tridiagonalize_onestep, tridiagonalize_twostep
from .tridiag_eigen import SymTridiagonal, dc_eigen

FLAVORS = ("one-step", "two-step")


@dataclass
class SolverOptions:
    flavor: str = "two-step"
    nb: int = DEFAULT_NB
    fraction: float = 0.5
    workers: int = None

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise ValueError(f"flavor must be one of {FLAVORS}, got {self.flavor!r}")
        if int(self.nb) < 1:
            raise ValueError(f"block size must be positive, got {self.nb}")
        if not 0.0 < float(self.fraction) <= 1.0:
            raise ValueError(f"fraction must lie in (0, 1], got {self.fraction}")
        if self.workers is not None and int(self.workers) < 1:
            raise ValueError(f"workers must be positive, got {self.workers}")


@dataclass
class EigenDecomposition:
    """Eigenpairs ``A q_k = i lam_k q_k``.

    ``lam`` is sorted descending.  ``half`` marks a decomposition holding
    only nonnegative ``lam``, which ``expand_half_spectrum`` can complete.
    """

    lam: np.ndarray
    vectors: ComplexPlanes
    half: bool
    timings: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.vectors.shape[0]


def worker_limit(workers):
    """Context manager capping BLAS threads; ``None`` leaves them alone."""
    if workers is None:
        return contextlib.nullcontext()
    return threadpool_limits(limits=int(workers))


def apply_D(x):
    """Scale row ``k`` of real ``x`` by ``i**k``."""
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[:, None]
    re = np.zeros_like(x)
    im = np.zeros_like(x)
    re[0::4] = x[0::4]
    im[1::4] = x[1::4]
    re[2::4] = -x[2::4]
    im[3::4] = -x[3::4]
    if squeeze:
        return ComplexPlanes(re[:, 0], im[:, 0])
    return ComplexPlanes(re, im)


def _powers_of_i(n):
    return np.array([1, 1j, -1, -1j])[np.arange(n) % 4]


def symmetrization_check(alpha):
    """``||-i D^H T_skew D - T_sym||_F`` for the given off-diagonals.

    Both sides are materialized in complex arithmetic.
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    n = alpha.size + 1
    k = np.arange(n - 1)
    skew = np.zeros((n, n), dtype=complex)
    skew[k, k + 1] = alpha
    skew[k + 1, k] = -alpha
    sym = np.zeros((n, n))
    sym[k, k + 1] = alpha
    sym[k + 1, k] = alpha
    D = np.diag(_powers_of_i(n))
    lhs = -1j * (D.conj().T @ skew @ D)
    return float(np.linalg.norm(lhs - sym))


def normalize_phase(planes):
    """Rotate each column so its largest-magnitude entry is real positive."""
    z = planes.to_complex()
    if z.size == 0:
        return planes
    piv = np.argmax(np.abs(z), axis=0)
    lead = z[piv, np.arange(z.shape[1])]
    mag = np.abs(lead)
    phase = np.where(mag > 0, np.conj(lead) / np.where(mag > 0, mag, 1.0), 1.0)
    z = z * phase[None, :]
    cols = np.arange(z.shape[1])
    z[piv, cols] = np.where(mag > 0, mag, z[piv, cols])
    return ComplexPlanes.from_complex(z)


def _as_skew(A):
    if isinstance(A, DenseSkewMatrix):
        return A
    return DenseSkewMatrix.from_dense(A)


def solve_skew_eigen(A, opts=None, **kwargs):
    """Eigenpairs of a real skew-symmetric matrix.

    Parameters
    ----------
    A : DenseSkewMatrix or array
    opts : SolverOptions, optional
        Keyword arguments build one when omitted.

    Returns
    -------
    EigenDecomposition
        The ``ceil(fraction * n)`` largest ``lam`` in descending order with
        unit eigenvectors.  Values within ``100 n eps ||A||_2`` of zero are
        set to exactly zero (odd ``n`` always has one).
    """
    if opts is None:
        opts = SolverOptions(**kwargs)
    elif kwargs:
        raise ValueError("pass either opts or keyword options, not both")
    A = _as_skew(A)
    n = A.n
    if n < 1:
        raise ValueError("empty matrix")
    m = max(1, math.ceil(opts.fraction * n - 1e-12))
    timings = {}
    with worker_limit(opts.workers):
        t0 = time.perf_counter()
        if opts.flavor == "one-step":
            fact = tridiagonalize_onestep(A, nb=opts.nb)
            timings.update(full_to_band=0.0, band_to_tridiag=0.0)
        else:
            fact = tridiagonalize_twostep(A, opts.nb)
            timings.update(fact.timings)
        t1 = time.perf_counter()
        sol = dc_eigen(SymTridiagonal.from_alpha(fact.trd.alpha), want=(n - m, n))
        lam = sol.lam[::-1].copy()
        qdiag = sol.vectors[:, ::-1]
        t2 = time.perf_counter()
        planes = apply_D(qdiag)
        planes = fact.q_apply(planes)
        planes = normalize_phase(planes)
        t3 = time.perf_counter()
    # the spectrum is symmetric, so the largest |lam| is ||A||_2
    anorm2 = float(np.abs(sol.lam).max()) if n > 1 else 0.0
    clamp = 100.0 * n * EPS * anorm2
    lam[np.abs(lam) <= clamp] = 0.0
    timings.update(tridiagonalize=t1 - t0, tridiag_solve=t2 - t1, back_transform=t3 - t2,
                   total=t3 - t0)
    half = bool(np.all(lam >= 0)) and m <= math.ceil(n / 2)
    return EigenDecomposition(lam, planes, half, timings)


def expand_half_spectrum(E):
    """Append ``-lam_k`` with eigenvector ``conj(q_k)`` for every ``lam_k > 0``."""
    if not E.half:
        raise ValueError("decomposition is not a half spectrum")
    pos = E.lam > 0
    lam = np.concatenate([E.lam, -E.lam[pos][::-1]])
    re = np.hstack([E.vectors.re, E.vectors.re[:, pos][:, ::-1]])
    im = np.hstack([E.vectors.im, -E.vectors.im[:, pos][:, ::-1]])
    return EigenDecomposition(lam, ComplexPlanes(re, im), False, dict(E.timings))


@dataclass
class ResidualMetrics:
    residual: float
    residual_rel: float
    unitarity: float
    pairing: float = None
    oracle_gap: float = None

    def as_dict(self):
        return {k: getattr(self, k) for k in
                ("residual", "residual_rel", "unitarity", "pairing", "oracle_gap")}

    def worst_relative(self, anorm):
        """Largest metric on a relative scale (used for pass/fail checks)."""
        scale = anorm if anorm > 0 else 1.0
        vals = [self.residual_rel, self.unitarity]
        if self.pairing is not None:
            vals.append(self.pairing / scale)
        if self.oracle_gap is not None:
            vals.append(self.oracle_gap / scale)
        return max(vals)


def residual_report(A, E, oracle=False):
    """Accuracy metrics of a decomposition.

    ``residual`` is ``max_k ||A q_k - i lam_k q_k||_2``, ``unitarity`` is
    ``||Q^H Q - I||_F``.  ``pairing`` (full spectrum only) is
    ``max_k |lam_k + lam_{n-1-k}|``.  With ``oracle`` the values are compared
    against the eigenvalues of the Hermitian matrix ``-iA`` from LAPACK.
    """
    A = _as_skew(A)
    a = A.materialize()
    if E.vectors.shape[0] != A.n:
        raise ValueError("decomposition and matrix dimensions differ")
    re, im = E.vectors.re, E.vectors.im
    k = re.shape[1]
    # A q - i lam q, real and imaginary parts
    rr = a @ re + im * E.lam[None, :]
    ri = a @ im - re * E.lam[None, :]
    residual = float(np.sqrt((rr * rr + ri * ri).sum(axis=0)).max()) if k else 0.0
    anorm = A.norm_fro()
    gram_re = re.T @ re + im.T @ im - np.eye(k)
    gram_im = re.T @ im - im.T @ re
    unit = float(np.sqrt(np.linalg.norm(gram_re) ** 2 + np.linalg.norm(gram_im) ** 2))
    pairing = None
    if E.lam.size == A.n and not E.half:
        s = np.sort(E.lam)[::-1]
        pairing = float(np.abs(s + s[::-1]).max())
    gap = None
    if oracle:
        ref = np.linalg.eigvalsh(-1j * a)[::-1]
        s = np.sort(E.lam)[::-1]
        gap = float(np.abs(s - ref[: s.size]).max()) if s.size else 0.0
    return ResidualMetrics(residual, residual / anorm if anorm > 0 else residual, unit,
                           pairing, gap)
