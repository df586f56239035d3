"""Matrix Market reading and writing for skew matrices and complex blocks.

Supported headers::

    %%MatrixMarket matrix coordinate real skew-symmetric   (strictly lower entries)
    %%MatrixMarket matrix coordinate real general          (validated skew)
    %%MatrixMarket matrix array real skew-symmetric        (strictly lower, column-major)
    %%MatrixMarket matrix array real general               (validated skew)
    %%MatrixMarket matrix array complex general            ("re im" per line)

Indices are 1-based.  Values are written with 17 significant digits, which
round-trips every finite double exactly.
"""
import os

import numpy as np

from .core import ComplexPlanes, DenseSkewMatrix, SkewValidationError

_FIELDS = ("real", "integer", "complex")
_SYMMETRIES = ("general", "skew-symmetric")


class MatrixFormatError(ValueError):
    """Malformed Matrix Market or values file."""

    def __init__(self, path, line, msg):
        self.path = str(path)
        self.line = line
        where = f"{self.path}:{line}" if line else self.path
        super().__init__(f"{where}: {msg}")


def _header(path, lines):
    if not lines:
        raise MatrixFormatError(path, 1, "empty file")
    tok = lines[0].split()
    if len(tok) != 5 or tok[0].lower() != "%%matrixmarket" or tok[1].lower() != "matrix":
        raise MatrixFormatError(path, 1, "expected '%%MatrixMarket matrix <format> <field> <symmetry>'")
    fmt, fld, sym = (t.lower() for t in tok[2:])
    if fmt not in ("coordinate", "array"):
        raise MatrixFormatError(path, 1, f"unknown format {fmt!r}")
    if fld not in _FIELDS:
        raise MatrixFormatError(path, 1, f"unsupported field {fld!r}")
    if sym not in _SYMMETRIES:
        raise MatrixFormatError(path, 1, f"unsupported symmetry {sym!r}")
    if fld == "complex" and (fmt != "array" or sym != "general"):
        raise MatrixFormatError(path, 1, "complex data must be 'array complex general'")
    return fmt, fld, sym


def _data_lines(lines):
    """(line number, tokens) for non-comment, non-blank lines after the header."""
    out = []
    for no, line in enumerate(lines[1:], start=2):
        s = line.strip()
        if s and not s.startswith("%"):
            out.append((no, s.split()))
    return out


def _ints(path, no, tokens):
    try:
        vals = [int(t) for t in tokens]
    except ValueError:
        raise MatrixFormatError(path, no, f"expected integers, got {' '.join(tokens)!r}") from None
    if any(v < 0 for v in vals):
        raise MatrixFormatError(path, no, "negative size")
    return vals


def _floats(path, rows, width, skip=0):
    """Parse ``rows`` of ``skip + width`` tokens into a float array."""
    for no, tok in rows:
        if len(tok) != skip + width:
            raise MatrixFormatError(path, no, f"expected {skip + width} fields, got {len(tok)}")
    try:
        return np.array([tok[skip:] for _, tok in rows], dtype=np.float64).reshape(-1, width)
    except ValueError:
        for no, tok in rows:
            for t in tok[skip:]:
                try:
                    float(t)
                except ValueError:
                    raise MatrixFormatError(path, no, f"bad number {t!r}") from None
        raise


def _read_lines(path):
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        return fh.read().splitlines()


def read_matrix(path):
    """Read a Matrix Market file.

    Real data is returned as a validated ``DenseSkewMatrix`` and complex data
    as ``ComplexPlanes``.  Structural problems raise ``MatrixFormatError``
    (with the offending line number), a real matrix that is not skew raises
    ``SkewValidationError``.
    """
    lines = _read_lines(path)
    fmt, fld, sym = _header(path, lines)
    data = _data_lines(lines)
    if not data:
        raise MatrixFormatError(path, len(lines), "missing size line")
    size_no, size_tok = data[0]
    body = data[1:]
    if fmt == "array":
        if len(size_tok) != 2:
            raise MatrixFormatError(path, size_no, "array size line needs 'rows cols'")
        m, n = _ints(path, size_no, size_tok)
        if fld == "complex":
            return _read_complex_array(path, m, n, body)
        if m != n:
            raise MatrixFormatError(path, size_no, f"skew matrix must be square, got {m}x{n}")
        return _read_real_array(path, n, sym, body)
    if len(size_tok) != 3:
        raise MatrixFormatError(path, size_no, "coordinate size line needs 'rows cols nnz'")
    m, n, nnz = _ints(path, size_no, size_tok)
    if m != n:
        raise MatrixFormatError(path, size_no, f"skew matrix must be square, got {m}x{n}")
    return _read_coordinate(path, n, nnz, sym, body)


def _expect_count(path, body, count):
    if len(body) < count:
        last = body[-1][0] if body else None
        raise MatrixFormatError(path, last, f"expected {count} entries, found {len(body)}")
    if len(body) > count:
        raise MatrixFormatError(path, body[count][0], f"more than the declared {count} entries")


def _read_complex_array(path, m, n, body):
    _expect_count(path, body, m * n)
    vals = _floats(path, body, 2)
    re = vals[:, 0].reshape((m, n), order="F")
    im = vals[:, 1].reshape((m, n), order="F")
    return ComplexPlanes(re.copy(order="F"), im.copy(order="F"))


def _read_real_array(path, n, sym, body):
    if sym == "general":
        _expect_count(path, body, n * n)
        a = _floats(path, body, 1).reshape((n, n), order="F")
        return DenseSkewMatrix.from_dense(a)
    count = n * (n - 1) // 2
    _expect_count(path, body, count)
    vals = _floats(path, body, 1)[:, 0]
    a = np.zeros((n, n), order="F")
    pos = 0
    for j in range(n - 1):
        a[j + 1 :, j] = vals[pos : pos + n - j - 1]
        pos += n - j - 1
    return DenseSkewMatrix(a)


def _read_coordinate(path, n, nnz, sym, body):
    _expect_count(path, body, nnz)
    for no, tok in body:
        if len(tok) != 3:
            raise MatrixFormatError(path, no, f"expected 'row col value', got {len(tok)} fields")
    idx = np.empty((nnz, 2), dtype=np.int64)
    for k, (no, tok) in enumerate(body):
        i, j = _ints(path, no, tok[:2])
        if not (1 <= i <= n and 1 <= j <= n):
            raise MatrixFormatError(path, no, f"index ({i}, {j}) outside 1..{n}")
        idx[k] = i - 1, j - 1
    vals = _floats(path, body, 1, skip=2)[:, 0]
    a = np.zeros((n, n), order="F")
    seen = np.zeros((n, n), dtype=bool)
    for k, (no, _) in enumerate(body):
        i, j = idx[k]
        if seen[i, j]:
            raise MatrixFormatError(path, no, f"duplicate entry ({i + 1}, {j + 1})")
        seen[i, j] = True
        if sym == "skew-symmetric":
            if i == j:
                if vals[k] != 0:
                    raise SkewValidationError(
                        f"{path}:{no}: nonzero diagonal entry ({i + 1}, {j + 1})")
                continue
            if i < j:
                raise MatrixFormatError(
                    path, no, f"entry ({i + 1}, {j + 1}) above the diagonal in a skew-symmetric file")
        a[i, j] = vals[k]
    if sym == "general":
        return DenseSkewMatrix.from_dense(a)
    return DenseSkewMatrix(a)


def read_skew(path):
    """Read a real skew matrix (any supported real layout)."""
    m = read_matrix(path)
    if not isinstance(m, DenseSkewMatrix):
        raise MatrixFormatError(path, 1, "expected a real matrix")
    return m


def read_complex(path):
    """Read an ``array complex general`` block as ``ComplexPlanes``.

    A real ``array general`` file is accepted too (imaginary part zero); it
    is not required to be skew.
    """
    lines = _read_lines(path)
    fmt, fld, sym = _header(path, lines)
    if fld == "complex":
        return read_matrix(path)
    if fmt != "array" or sym != "general":
        raise MatrixFormatError(path, 1, "expected an 'array complex general' or 'array real general' file")
    data = _data_lines(lines)
    if not data:
        raise MatrixFormatError(path, len(lines), "missing size line")
    size_no, size_tok = data[0]
    if len(size_tok) != 2:
        raise MatrixFormatError(path, size_no, "array size line needs 'rows cols'")
    m, n = _ints(path, size_no, size_tok)
    _expect_count(path, data[1:], m * n)
    re = _floats(path, data[1:], 1).reshape((m, n), order="F")
    return ComplexPlanes(re.copy(order="F"), np.zeros((m, n), order="F"))


def _fmt(x):
    return "%.17g" % x


def write_matrix(path, M, comment=None):
    """Write a ``DenseSkewMatrix`` (coordinate skew-symmetric, every strictly
    lower entry listed) or ``ComplexPlanes`` (array complex general)."""
    lines = []
    if isinstance(M, DenseSkewMatrix):
        n = M.n
        lines.append("%%MatrixMarket matrix coordinate real skew-symmetric")
        if comment:
            lines.append("% " + comment)
        lines.append(f"{n} {n} {n * (n - 1) // 2}")
        for j in range(n - 1):
            col = M.data[j + 1 :, j]
            lines.extend(f"{i} {j + 1} {_fmt(v)}" for i, v in zip(range(j + 2, n + 1), col))
    elif isinstance(M, ComplexPlanes):
        re = np.atleast_2d(M.re.T).T if M.re.ndim == 1 else M.re
        im = np.atleast_2d(M.im.T).T if M.im.ndim == 1 else M.im
        m, n = re.shape
        lines.append("%%MatrixMarket matrix array complex general")
        if comment:
            lines.append("% " + comment)
        lines.append(f"{m} {n}")
        lines.extend(f"{_fmt(r)} {_fmt(i)}" for r, i in zip(re.ravel(order="F"), im.ravel(order="F")))
    else:
        raise TypeError(f"cannot write {type(M).__name__} as Matrix Market")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def write_values(path, lam):
    """One value per line, shortest exact decimal form."""
    with open(path, "w", encoding="ascii") as fh:
        fh.writelines(repr(float(x)) + "\n" for x in np.asarray(lam).ravel())


def read_values(path):
    vals = []
    for no, line in enumerate(_read_lines(path), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        try:
            vals.append(float(s))
        except ValueError:
            raise MatrixFormatError(path, no, f"bad number {s!r}") from None
    return np.array(vals, dtype=np.float64)


def output_paths(prefix):
    """File names used for a solve written under ``prefix``."""
    prefix = os.fspath(prefix)
    return prefix + ".values.txt", prefix + ".vectors.mtx"
