import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from skeweig.core import (
    EPS,
    BandSkewMatrix,
    ComplexPlanes,
    DenseSkewMatrix,
    SkewTridiagonal,
    SkewValidationError,
    random_skew,
    skew_lower_matmul,
    skew_matvec,
    skew_rank2_update,
    skew_rank2k_update,
)
from skeweig.mmio import (
    MatrixFormatError,
    read_complex,
    read_matrix,
    read_values,
    write_matrix,
    write_values,
)

sizes = st.integers(min_value=1, max_value=40)
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def poisoned(n, seed):
    """Random skew lower triangle with NaN on and above the diagonal."""
    a = random_skew(n, seed).data.copy(order="F")
    a[np.triu_indices(n)] = np.nan
    return a


# ---- containers -------------------------------------------------------------

def test_from_dense_accepts_skew():
    a = np.array([[0.0, 2.0], [-2.0, 0.0]])
    A = DenseSkewMatrix.from_dense(a)
    assert A.n == 2
    np.testing.assert_array_equal(A.materialize(), a)


def test_from_dense_rejects_diagonal():
    with pytest.raises(SkewValidationError, match="diagonal"):
        DenseSkewMatrix.from_dense(np.array([[1.0, 0.0], [0.0, 0.0]]))


def test_from_dense_rejects_asymmetric_pair():
    a = np.array([[0.0, 1.0], [-1.0 + 1e-15, 0.0]])
    with pytest.raises(SkewValidationError):
        DenseSkewMatrix.from_dense(a)


def test_non_square_rejected():
    with pytest.raises(ValueError):
        DenseSkewMatrix(np.zeros((2, 3)))


@given(sizes, seeds)
def test_materialize_is_exactly_skew(n, seed):
    a = random_skew(n, seed).materialize()
    assert np.array_equal(a.T, -a)
    assert np.all(np.diag(a) == 0)


def test_norm_fro():
    A = random_skew(9, 2)
    assert A.norm_fro() == pytest.approx(np.linalg.norm(A.materialize()), rel=1e-15)


def test_band_roundtrip_and_pattern():
    A = random_skew(10, 4)
    B = BandSkewMatrix.from_lower(A.data, 3)
    full = B.materialize()
    i, j = np.indices(full.shape)
    assert np.all(full[np.abs(i - j) > 3] == 0)
    np.testing.assert_array_equal(np.tril(full, -1)[np.abs(i - j) <= 3],
                                  np.tril(A.materialize(), -1)[np.abs(i - j) <= 3])
    assert np.array_equal(full.T, -full)
    assert B.norm_fro() == pytest.approx(np.linalg.norm(full), rel=1e-14)


def test_skew_tridiagonal_pattern():
    T = SkewTridiagonal([1.0, 2.0]).materialize()
    np.testing.assert_array_equal(T, [[0, 1, 0], [-1, 0, 2], [0, -2, 0]])
    assert SkewTridiagonal([]).n == 1


def test_complex_planes_shapes():
    with pytest.raises(ValueError):
        ComplexPlanes(np.zeros((2, 2)), np.zeros((2, 3)))
    z = np.array([[1 + 2j, 3j]])
    np.testing.assert_array_equal(ComplexPlanes.from_complex(z).to_complex(), z)


# ---- random generator -------------------------------------------------------

def test_random_skew_n1_is_zero():
    np.testing.assert_array_equal(random_skew(1, 99).materialize(), [[0.0]])


def test_random_skew_deterministic():
    np.testing.assert_array_equal(random_skew(4, 1).data, random_skew(4, 1).data)
    assert not np.array_equal(random_skew(4, 1).data, random_skew(4, 2).data)


def test_random_skew_structure_and_range():
    a = random_skew(100, 3).materialize()
    assert np.array_equal(a.T, -a)
    low = a[np.tril_indices(100, -1)]
    assert low.min() >= -1 and low.max() <= 1


def test_random_skew_rejects_zero():
    with pytest.raises(ValueError):
        random_skew(0, 1)


# ---- skew_matvec --------------------------------------------------------------

def test_matvec_2x2():
    A = DenseSkewMatrix.from_dense(np.array([[0.0, 2.0], [-2.0, 0.0]]))
    assert A.data[1, 0] == -2.0
    np.testing.assert_array_equal(skew_matvec(A, np.array([1.0, 0.0])), [0.0, -2.0])


def test_matvec_zero_vector():
    assert np.all(skew_matvec(random_skew(7, 1), np.zeros(7)) == 0)


def test_matvec_first_column():
    A = random_skew(8, 42)
    e1 = np.zeros(8)
    e1[0] = 1
    np.testing.assert_allclose(skew_matvec(A, e1), A.materialize()[:, 0], rtol=0, atol=0)


def test_matvec_dimension_mismatch():
    with pytest.raises(ValueError):
        skew_matvec(random_skew(4, 1), np.ones(3))


@given(sizes, seeds)
def test_matvec_matches_dense(n, seed):
    A = random_skew(n, seed)
    x = np.random.default_rng(seed).standard_normal(n)
    y = skew_matvec(poisoned(n, seed), x)
    ref = A.materialize() @ x
    assert np.linalg.norm(y - ref) <= 8 * n * EPS * A.norm_fro() * np.linalg.norm(x)


@given(sizes, seeds)
def test_quadratic_form_vanishes(n, seed):
    A = random_skew(n, seed)
    x = np.random.default_rng(seed + 1).standard_normal(n)
    q = x @ skew_matvec(A, x)
    assert abs(q) <= 8 * n * EPS * A.norm_fro() * (x @ x)


# ---- rank-2 updates -------------------------------------------------------------

def test_rank2_from_zero():
    A = DenseSkewMatrix.zeros(2)
    skew_rank2_update(A, np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    np.testing.assert_array_equal(A.materialize(), [[0, 1], [-1, 0]])


def test_rank2_equal_vectors_is_noop():
    A = random_skew(6, 3)
    before = A.data.copy()
    u = np.arange(6.0)
    skew_rank2_update(A, u, u)
    np.testing.assert_array_equal(np.tril(A.data, -1), np.tril(before, -1))


def _rank2_oracle(a, u, v):
    full = a - np.outer(v, u) + np.outer(u, v)
    return np.tril(full, -1)


def test_rank2_random_n16():
    A = random_skew(16, 7)
    rng = np.random.default_rng(7)
    u, v = rng.standard_normal(16), rng.standard_normal(16)
    ref = _rank2_oracle(A.materialize(), u, v)
    bound = 16 * EPS * (A.norm_fro() + np.linalg.norm(u) * np.linalg.norm(v))
    skew_rank2_update(A, u, v)
    assert np.max(np.abs(np.tril(A.data, -1) - ref)) <= bound


def test_rank2_dimension_mismatch():
    with pytest.raises(ValueError):
        skew_rank2_update(random_skew(4, 1), np.ones(4), np.ones(3))


@given(st.integers(1, 300), seeds)
def test_rank2_never_touches_diagonal_or_upper(n, seed):
    a = poisoned(n, seed)
    rng = np.random.default_rng(seed)
    u, v = rng.standard_normal(n), rng.standard_normal(n)
    ref = _rank2_oracle(random_skew(n, seed).materialize(), u, v)
    skew_rank2_update(a, u, v)
    assert np.all(np.isnan(a[np.triu_indices(n)]))
    low = np.tril_indices(n, -1)
    bound = 16 * EPS * (np.sqrt(n) + np.linalg.norm(u) * np.linalg.norm(v))
    assert np.all(np.abs(a[low] - ref[low]) <= bound)


@given(st.integers(1, 260), st.integers(1, 6), seeds)
def test_rank2k_matches_dense(n, k, seed):
    A = random_skew(n, seed)
    rng = np.random.default_rng(seed)
    U, V = rng.standard_normal((n, k)), rng.standard_normal((n, k))
    ref = np.tril(A.materialize() - V @ U.T + U @ V.T, -1)
    skew_rank2k_update(A, U, V)
    bound = 16 * k * EPS * (A.norm_fro() + np.linalg.norm(U) * np.linalg.norm(V))
    assert np.max(np.abs(np.tril(A.data, -1) - ref)) <= bound


@given(sizes, seeds)
def test_lower_matmul_matches_dense(n, seed):
    A = random_skew(n, seed)
    X = np.random.default_rng(seed).standard_normal((n, 3))
    got = skew_lower_matmul(poisoned(n, seed), X)
    assert np.linalg.norm(got - A.materialize() @ X) <= 8 * n * EPS * A.norm_fro() * np.linalg.norm(X)


# ---- Matrix Market ------------------------------------------------------------------

def test_mm_roundtrip_bit_exact(tmp_path):
    A = random_skew(8, 5)
    path = tmp_path / "a.mtx"
    write_matrix(path, A)
    B = read_matrix(path)
    assert isinstance(B, DenseSkewMatrix)
    np.testing.assert_array_equal(B.materialize(), A.materialize())


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=1, max_size=20))
def test_mm_values_roundtrip(tmp_path_factory, vals):
    path = tmp_path_factory.mktemp("v") / "x.txt"
    write_values(path, vals)
    got = read_values(path)
    assert np.array_equal(got, np.array(vals))


def test_mm_complex_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    z = ComplexPlanes(rng.standard_normal((5, 3)), rng.standard_normal((5, 3)) * 1e-300)
    path = tmp_path / "z.mtx"
    write_matrix(path, z)
    w = read_matrix(path)
    np.testing.assert_array_equal(w.re, z.re)
    np.testing.assert_array_equal(w.im, z.im)


def _write(tmp_path, text, name="m.mtx"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_mm_2x2_lower_entry(tmp_path):
    p = _write(tmp_path, "%%MatrixMarket matrix coordinate real skew-symmetric\n2 2 1\n2 1 -3\n")
    np.testing.assert_array_equal(read_matrix(p).materialize(), [[0, 3], [-3, 0]])


def test_mm_diagonal_entry_is_validation_error(tmp_path):
    p = _write(tmp_path, "%%MatrixMarket matrix coordinate real skew-symmetric\n2 2 1\n1 1 1\n")
    with pytest.raises(SkewValidationError):
        read_matrix(p)


def test_mm_upper_entry_is_format_error(tmp_path):
    p = _write(tmp_path, "%%MatrixMarket matrix coordinate real skew-symmetric\n% c\n2 2 1\n1 2 4\n")
    with pytest.raises(MatrixFormatError) as exc:
        read_matrix(p)
    assert exc.value.line == 4


@pytest.mark.parametrize("text,line", [
    ("", 1),
    ("%%MatrixMarket matrix coordinate real symmetric\n2 2 0\n", 1),
    ("%%MatrixMarket matrix coordinate real skew-symmetric\n2 2\n", 2),
    ("%%MatrixMarket matrix coordinate real skew-symmetric\n2 2 1\n2 1 abc\n", 3),
    ("%%MatrixMarket matrix coordinate real skew-symmetric\n2 2 1\n3 1 1.0\n", 3),
    ("%%MatrixMarket matrix coordinate real skew-symmetric\n2 2 2\n2 1 1.0\n2 1 2.0\n", 4),
    ("%%MatrixMarket matrix coordinate real skew-symmetric\n2 2 1\n2 1 1.0\n2 1 2.0\n", 4),
    ("%%MatrixMarket matrix array real general\n2 3\n", 2),
    ("%%MatrixMarket matrix array complex general\n1 1\n1.0\n", 3),
])
def test_mm_format_errors_name_line(tmp_path, text, line):
    p = _write(tmp_path, text)
    with pytest.raises(MatrixFormatError) as exc:
        read_matrix(p)
    assert exc.value.line == line
    assert f":{line}:" in str(exc.value)


def test_mm_array_general_validated(tmp_path):
    good = _write(tmp_path, "%%MatrixMarket matrix array real general\n2 2\n0\n-3\n3\n0\n", "g.mtx")
    np.testing.assert_array_equal(read_matrix(good).materialize(), [[0, 3], [-3, 0]])
    bad = _write(tmp_path, "%%MatrixMarket matrix array real general\n2 2\n0\n-3\n2\n0\n", "b.mtx")
    with pytest.raises(SkewValidationError):
        read_matrix(bad)


def test_mm_array_skew_and_coordinate_general(tmp_path):
    p = _write(tmp_path, "%%MatrixMarket matrix array real skew-symmetric\n3 3\n1\n2\n3\n", "s.mtx")
    np.testing.assert_array_equal(read_matrix(p).data[np.tril_indices(3, -1)], [1, 2, 3])
    q = _write(tmp_path, "%%MatrixMarket matrix coordinate real general\n2 2 2\n2 1 -3\n1 2 3\n", "c.mtx")
    np.testing.assert_array_equal(read_matrix(q).materialize(), [[0, 3], [-3, 0]])


def test_read_complex_accepts_real_array(tmp_path):
    p = _write(tmp_path, "%%MatrixMarket matrix array real general\n2 1\n1.5\n2\n")
    z = read_complex(p)
    np.testing.assert_array_equal(z.re, [[1.5], [2.0]])
    np.testing.assert_array_equal(z.im, [[0.0], [0.0]])


def test_read_values_bad_line(tmp_path):
    p = _write(tmp_path, "1.0\n\nnope\n", "v.txt")
    with pytest.raises(MatrixFormatError) as exc:
        read_values(p)
    assert exc.value.line == 3
