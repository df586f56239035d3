"""Matrix containers and skew-symmetric BLAS-like kernels.

Every skew matrix in this package is stored as a full ``n x n`` column-major
array of which only the strictly lower triangle is authoritative.  The
diagonal is implicitly zero and the upper triangle is implied as the negated
transpose; kernels never read either.
"""
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

# unit roundoff of IEEE double precision (half the machine epsilon); all
# accuracy tolerances are stated as multiples of it
EPS = np.finfo(np.float64).eps / 2

# column panel width used by the lower-triangle update kernels
_PANEL = 128


class SkewValidationError(ValueError):
    """Input claimed to be skew-symmetric is not."""


@lru_cache(maxsize=512)
def _strict_lower_mask(n):
    mask = np.tri(n, n, -1, dtype=bool)
    mask.setflags(write=False)
    return mask


def _strict_lower(a):
    """Copy of ``a`` with diagonal and upper triangle zeroed."""
    return np.where(_strict_lower_mask(a.shape[0]), a, 0.0)


def _lower_view(a):
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


@dataclass
class DenseSkewMatrix:
    """Dense real skew-symmetric matrix, strictly lower triangle authoritative."""

    data: np.ndarray

    def __post_init__(self):
        self.data = np.asfortranarray(_lower_view(self.data), dtype=np.float64)

    @property
    def n(self):
        return self.data.shape[0]

    @classmethod
    def from_dense(cls, a, check=True):
        """Wrap a full matrix.  With ``check`` the input must satisfy
        ``a.T == -a`` exactly, diagonal included."""
        a = _lower_view(np.asarray(a, dtype=np.float64))
        if check:
            if np.any(np.diag(a) != 0):
                i = int(np.flatnonzero(np.diag(a))[0])
                raise SkewValidationError(f"nonzero diagonal entry at ({i}, {i})")
            bad = np.argwhere(np.tril(a + a.T, -1) != 0)
            if bad.size:
                i, j = bad[0]
                raise SkewValidationError(
                    f"entries ({i}, {j}) and ({j}, {i}) are not negatives of each other")
        return cls(np.array(a, order="F"))

    @classmethod
    def zeros(cls, n):
        return cls(np.zeros((n, n), order="F"))

    def lower(self):
        return _strict_lower(self.data)

    def materialize(self):
        low = self.lower()
        return low - low.T

    def norm_fro(self):
        return float(np.sqrt(2.0) * np.linalg.norm(self.lower()))

    def copy(self):
        return DenseSkewMatrix(self.data.copy(order="F"))


@dataclass
class BandSkewMatrix:
    """Skew band matrix with ``b`` subdiagonals.

    ``band[d - 1, j]`` holds entry ``(j + d, j)``; slots past the bottom of the
    matrix are zero.
    """

    band: np.ndarray
    n: int
    b: int

    @classmethod
    def from_lower(cls, a, b):
        a = _lower_view(a)
        n = a.shape[0]
        band = np.zeros((b, n))
        for d in range(1, b + 1):
            band[d - 1, : n - d] = np.diagonal(a, -d)
        return cls(band, n, b)

    def to_lower(self):
        a = np.zeros((self.n, self.n), order="F")
        idx = np.arange(self.n)
        for d in range(1, self.b + 1):
            a[idx[d:], idx[:-d]] = self.band[d - 1, : self.n - d]
        return a

    def materialize(self):
        low = self.to_lower()
        return low - low.T

    def norm_fro(self):
        return float(np.sqrt(2.0) * np.linalg.norm(self.band))


@dataclass
class SkewTridiagonal:
    """Skew tridiagonal matrix with ``T[k, k+1] = alpha[k]`` and
    ``T[k+1, k] = -alpha[k]``."""

    alpha: np.ndarray

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=np.float64).ravel()

    @property
    def n(self):
        return self.alpha.size + 1

    def materialize(self):
        n = self.n
        t = np.zeros((n, n))
        k = np.arange(n - 1)
        t[k, k + 1] = self.alpha
        t[k + 1, k] = -self.alpha
        return t


@dataclass
class ComplexPlanes:
    """Complex matrix kept as separate real and imaginary planes."""

    re: np.ndarray
    im: np.ndarray

    def __post_init__(self):
        self.re = np.asarray(self.re, dtype=np.float64)
        self.im = np.asarray(self.im, dtype=np.float64)
        if self.re.shape != self.im.shape:
            raise ValueError(f"plane shapes differ: {self.re.shape} vs {self.im.shape}")

    @classmethod
    def from_complex(cls, z):
        z = np.asarray(z)
        return cls(z.real.copy(), z.imag.copy())

    @property
    def shape(self):
        return self.re.shape

    def to_complex(self):
        return self.re + 1j * self.im

    def copy(self):
        return ComplexPlanes(self.re.copy(), self.im.copy())


@dataclass
class ReflectorSet:
    """Product ``Q = H_0 H_1 ... H_{k-1}`` of Householder reflectors.

    Column ``j`` of ``V`` holds reflector ``j`` starting at row ``starts[j]``
    (its leading entry is 1); ``H_j = I - tau[j] v_j v_j^T``.  Reflectors are
    grouped into ``panels``, half-open ranges of consecutive indices with
    consecutive start rows.  Each panel is applied as the compact-WY product
    ``I - V T V^T`` with its upper triangular factor from ``tfactors``.
    """

    n: int
    V: np.ndarray
    tau: np.ndarray
    starts: np.ndarray
    nb: int = 1
    panels: list = field(default_factory=list)
    tfactors: list = field(default_factory=list)

    @classmethod
    def empty(cls, n):
        return cls(n, np.zeros((0, 0)), np.zeros(0), np.zeros(0, dtype=np.int64))

    @property
    def count(self):
        return self.tau.size

    def panel_matrix(self, p):
        """Row offset and stacked unit lower trapezoidal V of WY panel ``p``."""
        j0, j1 = self.panels[p]
        s0 = int(self.starts[j0])
        rows = min(self.n - s0, self.V.shape[0] + (j1 - j0) - 1)
        vp = np.zeros((rows, j1 - j0))
        for c, j in enumerate(range(j0, j1)):
            length = min(self.V.shape[0], rows - c)
            vp[c : c + length, c] = self.V[:length, j]
        return s0, vp

    def materialize(self):
        q = np.eye(self.n)
        apply_reflectors_real(self, q)
        return q


def build_tfactor(vp, tau):
    """Upper triangular T with ``H_0 ... H_{k-1} = I - V T V^T``.

    Accumulated one reflector at a time (forward, columnwise).
    """
    k = tau.size
    t = np.zeros((k, k))
    for j in range(k):
        t[j, j] = tau[j]
        if j:
            t[:j, j] = -tau[j] * (t[:j, :j] @ (vp[:, :j].T @ vp[:, j]))
    return t


def apply_reflectors_real(rs, x, transpose=False):
    """Overwrite real ``x`` with ``Q x`` (or ``Q^T x``)."""
    if x.shape[0] != rs.n:
        raise ValueError(f"row count {x.shape[0]} does not match reflector dimension {rs.n}")
    order = range(len(rs.panels)) if transpose else reversed(range(len(rs.panels)))
    for p in order:
        t = rs.tfactors[p]
        s0, vp = rs.panel_matrix(p)
        rows = slice(s0, s0 + vp.shape[0])
        tt = t.T if transpose else t
        x[rows] -= vp @ (tt @ (vp.T @ x[rows]))
    return x


def apply_reflectors(rs, planes, transpose=False):
    """Apply ``Q`` (or ``Q^T``) to both planes of a complex block.

    The planes are stacked side by side so the identical real kernel acts on
    the real and imaginary parts.
    """
    if planes.shape[0] != rs.n:
        raise ValueError(f"row count {planes.shape[0]} does not match reflector dimension {rs.n}")
    m = planes.shape[1]
    x = np.hstack([planes.re, planes.im])
    apply_reflectors_real(rs, x, transpose)
    return ComplexPlanes(x[:, :m], x[:, m:])


def _as_lower_array(a):
    if isinstance(a, DenseSkewMatrix):
        return a.data
    return _lower_view(a)


def skew_matvec(a, x):
    """``y = A x`` reading only the strictly lower triangle of ``A``."""
    a = _as_lower_array(a)
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (a.shape[0],):
        raise ValueError(f"vector of length {x.shape} does not match dimension {a.shape[0]}")
    if a.shape[0] == 0:
        return np.zeros(0)
    low = _strict_lower(a)
    return low @ x - x @ low


def skew_rank2k_update(a, u, v):
    """In place ``A <- A - V U^T + U V^T`` on the strictly lower triangle.

    ``u`` and ``v`` are ``n x k`` blocks (or vectors).  Diagonal and upper
    triangle are never written.
    """
    a = _as_lower_array(a)
    n = a.shape[0]
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.ndim == 1:
        u = u[:, None]
        v = v[:, None]
    if u.shape[0] != n or v.shape != u.shape:
        raise ValueError(f"update blocks {u.shape}, {v.shape} do not match dimension {n}")
    for c0 in range(0, n, _PANEL):
        c1 = min(c0 + _PANEL, n)
        upd = u[c0:] @ v[c0:c1].T - v[c0:] @ u[c0:c1].T
        w = c1 - c0
        a[c0:c1, c0:c1] += np.where(_strict_lower_mask(w), upd[:w], 0.0)
        a[c1:, c0:c1] += upd[w:]
    return a


def skew_rank2_update(a, u, v):
    """In place skew rank-2 update ``A <- A - v u^T + u v^T`` (lower only)."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.ndim != 1 or v.ndim != 1:
        raise ValueError("skew_rank2_update expects vectors")
    skew_rank2k_update(a, u, v)
    return a


def skew_lower_matmul(a, x):
    """``A X`` for skew ``A`` given by its strictly lower triangle."""
    low = _strict_lower(_as_lower_array(a))
    return low @ x - low.T @ x


def make_rng(seed):
    """PCG64 generator, explicitly seeded."""
    return np.random.Generator(np.random.PCG64(seed))


def random_skew(n, seed):
    """Random skew matrix with strictly lower entries i.i.d. uniform on [-1, 1].

    Entries come from a PCG64 stream seeded with ``seed`` and are filled column
    by column (column-major order of the strictly lower triangle).
    """
    if n < 1:
        raise ValueError(f"dimension must be positive, got {n}")
    rng = make_rng(seed)
    a = np.zeros((n, n), order="F")
    vals = rng.uniform(-1.0, 1.0, size=n * (n - 1) // 2)
    pos = 0
    for j in range(n - 1):
        m = n - j - 1
        a[j + 1 :, j] = vals[pos : pos + m]
        pos += m
    return DenseSkewMatrix(a)
