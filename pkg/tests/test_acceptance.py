"""Acceptance criteria, one test per criterion.

Every test records a single PASS/FAIL line (printed immediately and repeated
in the pytest terminal summary) and then asserts on the same condition.
"""
import csv
import filecmp
import math
import os
import subprocess
import sys
import time

import numpy as np

from conftest import ACCEPTANCE
from oracles import sym_eigvalsh
from skeweig.bse import (
    BSEHamiltonian,
    bse_residuals,
    hamiltonian_form,
    j_matrix,
    random_definite_bse,
    sign_matrix,
    solve_bse,
    unitary_Q,
)
from skeweig.cli import BENCH_COLUMNS, main
from skeweig.core import EPS, ComplexPlanes, random_skew
from skeweig.driver import (
    expand_half_spectrum,
    residual_report,
    solve_skew_eigen,
    symmetrization_check,
)
from skeweig.mmio import write_matrix
from skeweig.tridiag import tridiagonalize
from skeweig.tridiag_eigen import SymTridiagonal, bisection_eigenvalues, dc_eigen

FLAVORS = ("one-step", "two-step")


def record(k, ok, detail):
    line = f"CRITERION {k}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE.append(line)
    print(line)
    assert ok, line


def worst(ratios):
    """Largest measured/allowed ratio (<= 1 passes)."""
    return max(ratios) if ratios else 0.0


def cli(*args):
    env = dict(os.environ, SKEWEIG_WORKERS="1", OMP_NUM_THREADS="1", OPENBLAS_NUM_THREADS="1",
               MKL_NUM_THREADS="1")
    return subprocess.run([sys.executable, "-m", "skeweig", *args], capture_output=True,
                          text=True, env=env, check=False)


def test_criterion_1_tridiagonalization():
    t0 = time.perf_counter()
    ratios = []
    for n in (7, 32, 129, 512):
        A = random_skew(n, 1000 + n)
        a = A.materialize()
        eye = ComplexPlanes(np.eye(n), np.zeros((n, n)))
        for flavor in FLAVORS:
            for nb in (4, 64):
                f = tridiagonalize(A, flavor, nb=nb)
                Q = f.q_apply(eye).re
                T = f.trd.materialize()
                res = np.linalg.norm(Q.T @ a @ Q - T) / (50 * n * EPS * A.norm_fro())
                orth = np.linalg.norm(Q.T @ Q - np.eye(n)) / (50 * n * EPS)
                ratios += [res, orth]
    elapsed = time.perf_counter() - t0
    ok = worst(ratios) <= 1 and elapsed < 30
    record(1, ok, f"worst defect {worst(ratios):.3f} of bound, runtime {elapsed:.1f} s (< 30 s)")


def test_criterion_2_symmetrization():
    rng = np.random.default_rng(2)
    ratios = []
    for _ in range(100):
        n = int(rng.integers(1, 65))
        alpha = rng.uniform(-1, 1, n - 1)
        r = symmetrization_check(alpha)
        bound = 4 * EPS * (np.abs(alpha).max() if alpha.size else 0.0)
        ratios.append(0.0 if r == 0 else r / bound)
    record(2, worst(ratios) <= 1, f"100 arrays, worst residual {worst(ratios):.3f} of bound")


def test_criterion_3_tridiagonal_solver():
    rng = np.random.default_rng(3)
    ratios = []
    # n = 1 is the zero matrix, where a relative bound is meaningless
    sizes = np.concatenate([[2, 3, 512], rng.integers(4, 513, 47)])
    for n in sizes:
        T = SymTridiagonal.from_alpha(rng.uniform(-1, 1, int(n) - 1))
        lam = dc_eigen(T, want="none").lam
        ref = bisection_eigenvalues(T, 1, int(n))
        t2 = float(np.abs(ref).max())
        gap = float(np.abs(lam - ref).max())
        ratios.append(gap / (100 * n * EPS * t2))
    k = np.arange(1, 11)
    exact = np.sort(2 * np.cos(k * np.pi / 11))
    path = dc_eigen(SymTridiagonal.from_alpha(np.ones(9)), want="none").lam
    closed = float(np.abs(path - exact).max()) / (100 * EPS)
    ok = worst(ratios) <= 1 and closed <= 1
    record(3, ok, f"50 problems worst gap {worst(ratios):.3f} of bound; "
                  f"path graph n=10 {closed:.3f} of bound")


def test_criterion_4_full_skew_solve():
    ratios, zeros_ok = [], True
    for n in (2, 15, 64, 256):
        A = random_skew(n, 4000 + n)
        a = A.materialize()
        a2 = np.linalg.norm(a, 2)
        for fraction in (0.5, 1.0):
            E = solve_skew_eigen(A, fraction=fraction)
            m = residual_report(A, E)
            ratios.append(m.residual / (100 * n * EPS * A.norm_fro()))
            ratios.append(m.unitarity / (100 * n * EPS))
            if fraction == 0.5 and n % 2:
                zeros_ok &= int(np.count_nonzero(E.lam == 0.0)) == 1
            if fraction == 0.5 and n % 2 == 0:
                zeros_ok &= int(np.count_nonzero(E.lam == 0.0)) == 0
            if fraction == 1.0:
                ref = sym_eigvalsh(-a @ a)
                gap = np.abs(np.sort(E.lam ** 2) - np.sort(ref)).max()
                ratios.append(gap / (100 * n * EPS * a2 ** 2))
    ok = worst(ratios) <= 1 and zeros_ok
    record(4, ok, f"worst metric {worst(ratios):.3f} of bound; odd n single zero: {zeros_ok}")


def test_criterion_5_pairing():
    ratios = []
    for n in (16, 33, 128):
        A = random_skew(n, 5000 + n)
        a = A.materialize()
        a2 = np.linalg.norm(a, 2)
        half = solve_skew_eigen(A, fraction=0.5)
        F = expand_half_spectrum(half)
        k = half.lam.size
        neg = F.lam[k:]
        q = F.vectors.to_complex()[:, k:]
        res = np.linalg.norm(a @ q - 1j * q * neg[None, :], axis=0).max()
        ratios.append(res / (100 * n * EPS * A.norm_fro()))
        full = solve_skew_eigen(A, fraction=1.0)
        gap = np.abs(half.lam - full.lam[:k]).max()
        ratios.append(gap / (100 * n * EPS * a2))
    record(5, worst(ratios) <= 1, f"worst -lambda residual / half-vs-full gap {worst(ratios):.3f} of bound")


def test_criterion_6_flavor_agreement():
    ratios = []
    for n in (9, 100, 512):
        A = random_skew(n, 6000 + n)
        a2 = np.linalg.norm(A.materialize(), 2)
        one = solve_skew_eigen(A, flavor="one-step", fraction=1.0)
        alpha_one = tridiagonalize(A, "one-step").trd.alpha
        for nb in (1, 8, 64):
            two = solve_skew_eigen(A, flavor="two-step", nb=nb, fraction=1.0)
            gap = np.abs(np.sort(one.lam) - np.sort(two.lam)).max()
            ratios.append(gap / (100 * n * EPS * a2))
            if nb == 1:
                alpha_two = tridiagonalize(A, "two-step", nb=1).trd.alpha
                d = np.abs(np.abs(alpha_one) - np.abs(alpha_two)).max()
                ratios.append(d / (100 * n * EPS * a2))
    record(6, worst(ratios) <= 1, f"worst lambda / nb=1 alpha gap {worst(ratios):.3f} of bound")


def test_criterion_7_similarity_identities():
    rng = np.random.default_rng(7)
    ratios = []
    for t in range(20):
        n = int(rng.integers(1, 33))
        H = random_definite_bse(n, 700 + t)
        h = H.materialize()
        Q = unitary_Q(n)
        Hr = hamiltonian_form(H)
        ratios.append(np.linalg.norm(Q.conj().T @ h @ Q - 1j * Hr) / (50 * n * EPS * np.linalg.norm(h)))
        JH = j_matrix(n) @ Hr
        ratios.append(np.linalg.norm(JH - JH.T) / (50 * n * EPS * np.linalg.norm(Hr)))
        inv = -1j * j_matrix(n) @ Q.conj().T @ sign_matrix(n) @ Q
        ratios.append(np.linalg.norm(inv - np.eye(2 * n)) / (50 * EPS))
    record(7, worst(ratios) <= 1, f"20 Hamiltonians, worst identity defect {worst(ratios):.3f} of bound")


def test_criterion_8_bse(tmp_path):
    ratios, positive = [], True
    for n in (2, 8, 17, 32, 64):
        H = random_definite_bse(n, 800 + n)
        D = solve_bse(H)
        positive &= bool(np.all(D.lam > 0)) and bool(np.all(np.isreal(D.lam)))
        res, hnorm = bse_residuals(H, D)
        ratios.append(res / (200 * n * EPS * hnorm))
        h = H.materialize()
        ev = np.linalg.eigvals(h)
        h2 = np.linalg.norm(h, 2)
        full = np.sort(np.concatenate([D.lam, -D.lam]))
        ratios.append(np.abs(full - np.sort(ev.real)).max() / (200 * n * EPS * h2))
        ratios.append(np.abs(ev.imag).max() / (200 * n * EPS * h2))
    D1 = solve_bse(BSEHamiltonian.from_complex([[2.0]], [[1.0]]))
    scalar = abs(D1.lam[0] - math.sqrt(3.0))
    pa, pb = tmp_path / "a.mtx", tmp_path / "b.mtx"
    write_matrix(pa, ComplexPlanes.from_complex(np.array([[1.0 + 0j]])))
    write_matrix(pb, ComplexPlanes.from_complex(np.array([[1j]])))
    code = main(["bse", "--block-a", str(pa), "--block-b", str(pb)])
    ok = worst(ratios) <= 1 and positive and scalar <= 1e-14 and code == 4
    record(8, ok, f"worst residual/spectrum {worst(ratios):.3f} of bound; positive {positive}; "
                  f"n=1 error {scalar:.1e}; non-definite exit {code}")


def test_criterion_9_benchmark(tmp_path):
    out = tmp_path / "bench.csv"
    t0 = time.perf_counter()
    r = cli("bench", "--sizes", "512,1024,2048", "--flavors", "one-step,two-step",
            "--seed", "9", "--workers", "1", "--csv", str(out))
    elapsed = time.perf_counter() - t0
    rows = []
    if r.returncode == 0:
        with open(out, newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames
            rows = list(reader)
    schema = r.returncode == 0 and tuple(header) == BENCH_COLUMNS and len(rows) == 6
    for row in rows:
        try:
            times = [float(row[c]) for c in BENCH_COLUMNS if c.startswith("t_")]
            schema &= all(t >= 0 for t in times)
            schema &= float(row["t_total"]) >= max(times[2:-1])
        except ValueError:
            schema = False
    lines = []
    for row in rows:
        if row["flavor"] == "two-step":
            f2b, b2t = float(row["t_full_to_band"]), float(row["t_band_to_tridiag"])
            lines.append(f"n={row['size']}: full-to-band {f2b:.2f} s, band-to-tridiag {b2t:.2f} s"
                         f" ({'full-to-band' if f2b >= b2t else 'band-to-tridiag'} dominates)")
    for line in lines:
        # informative only: the stage split does not gate the criterion
        print("  " + line)
        ACCEPTANCE.append("  informative: " + line)
    record(9, schema, f"exit {r.returncode}, {len(rows)} rows, schema valid {schema}, "
                      f"{elapsed:.0f} s")


def test_criterion_10_determinism(tmp_path):
    inp = tmp_path / "a.mtx"
    write_matrix(inp, random_skew(300, 10))
    same = True
    for flavor in FLAVORS:
        outs = []
        for run in range(2):
            prefix = tmp_path / f"{flavor}-{run}"
            r = cli("solve", "--input", str(inp), "--flavor", flavor, "--nb", "16",
                    "--workers", "1", "--out", str(prefix))
            same &= r.returncode == 0
            outs.append(prefix)
        for suffix in (".values.txt", ".vectors.mtx"):
            same &= filecmp.cmp(str(outs[0]) + suffix, str(outs[1]) + suffix, shallow=False)
    record(10, same, "two single-worker invocations per flavor produced identical bytes"
           if same else "outputs differ between invocations")
