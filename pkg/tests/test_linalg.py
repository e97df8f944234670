"""Tests for the from-scratch dense kernels.

numpy.linalg serves as the independent oracle throughout: the package
kernels never call it, so agreement is meaningful evidence.
"""

import math

import numpy as np
import pytest

from sobikit.errors import ConvergenceError, NotSymmetricError
from sobikit.linalg import (
    givens_rotation,
    hessenberg,
    pseudo_inverse,
    real_schur,
    schur_eigenvalues,
    sym_eig,
)

RESIDUAL_TOL = 1e-8


def random_symmetric(n, rng):
    a = rng.standard_normal((n, n))
    return 0.5 * (a + a.T)


def test_givens_rotation_zeroes_second_entry():
    rng = np.random.default_rng(0)
    for _ in range(200):
        a, b = rng.standard_normal(2) * 10.0 ** rng.integers(-6, 7)
        c, s, r = givens_rotation(a, b)
        assert abs(c * c + s * s - 1.0) < 1e-12
        assert abs(-s * a + c * b) < 1e-10 * max(1.0, abs(a), abs(b))
        assert abs(c * a + s * b - r) < 1e-10 * max(1.0, abs(r))
        assert r >= 0.0


def test_givens_rotation_zero_pair():
    assert givens_rotation(0.0, 0.0) == (1.0, 0.0, 0.0)


def test_sym_eig_reconstructs_and_matches_numpy():
    rng = np.random.default_rng(1)
    for trial in range(60):
        n = int(rng.integers(2, 13))
        a = random_symmetric(n, rng)
        pair = sym_eig(a)
        vals, vecs = np.asarray(pair.values), np.asarray(pair.vectors)
        # descending order
        assert np.all(np.diff(vals) <= 1e-12)
        # orthonormal eigenvectors
        assert np.abs(vecs.T @ vecs - np.eye(n)).max() < 1e-9
        # A V = V diag(lambda)
        resid = np.abs(a @ vecs - vecs * vals[None, :]).max()
        assert resid < 1e-9 * max(1.0, np.abs(a).max()), f"trial {trial}"
        # eigenvalues agree with the oracle
        ref = np.sort(np.linalg.eigvalsh(a))[::-1]
        assert np.abs(vals - ref).max() < 1e-8 * max(1.0, np.abs(ref).max())


def test_sym_eig_two_by_two_closed_form():
    # closed-form eigenvalues of [[a, b], [b, c]]
    a, b, c = 3.0, 1.5, -2.0
    disc = math.sqrt(((a - c) / 2.0) ** 2 + b * b)
    expected = [(a + c) / 2.0 + disc, (a + c) / 2.0 - disc]
    got = sym_eig(np.array([[a, b], [b, c]])).values
    assert np.abs(np.asarray(got) - expected).max() < 1e-12


def test_sym_eig_diagonal_input_is_exact():
    d = np.diag([5.0, -1.0, 2.5])
    pair = sym_eig(d)
    assert np.allclose(pair.values, [5.0, 2.5, -1.0], atol=0.0)


def test_sym_eig_sign_convention_deterministic():
    rng = np.random.default_rng(2)
    a = random_symmetric(6, rng)
    v1 = np.asarray(sym_eig(a).vectors)
    v2 = np.asarray(sym_eig(a.copy()).vectors)
    assert np.array_equal(v1, v2)
    for k in range(6):
        col = v1[:, k]
        assert col[np.argmax(np.abs(col))] > 0.0


def test_sym_eig_rejects_asymmetric():
    with pytest.raises(NotSymmetricError):
        sym_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_hessenberg_similarity_and_pattern():
    rng = np.random.default_rng(3)
    for _ in range(40):
        n = int(rng.integers(2, 13))
        a = rng.standard_normal((n, n))
        h, q = hessenberg(a)
        h, q = np.asarray(h), np.asarray(q)
        assert np.abs(q.T @ q - np.eye(n)).max() < 1e-10
        assert np.abs(q @ h @ q.T - a).max() < 1e-9 * max(1.0, np.abs(a).max())
        below = np.tril(h, k=-2)
        assert np.abs(below).max() == 0.0


def test_real_schur_reconstruction_random():
    rng = np.random.default_rng(4)
    for trial in range(80):
        n = int(rng.integers(2, 13))
        a = rng.standard_normal((n, n))
        form = real_schur(a)
        t, q = np.asarray(form.t), np.asarray(form.q)
        norm = max(1.0, float(np.linalg.norm(a)))
        assert np.abs(q @ t @ q.T - a).max() < RESIDUAL_TOL * norm, f"trial {trial}"
        assert np.abs(q.T @ q - np.eye(n)).max() < RESIDUAL_TOL * n
        # quasi-triangular: nothing below the first subdiagonal,
        # and no two consecutive nonzero subdiagonal entries
        assert np.abs(np.tril(t, k=-2)).max() == 0.0
        sub = np.abs(np.diag(t, k=-1)) > 0.0
        assert not np.any(sub[:-1] & sub[1:])


def test_real_schur_eigenvalues_match_numpy():
    rng = np.random.default_rng(5)
    for _ in range(40):
        n = int(rng.integers(2, 13))
        a = rng.standard_normal((n, n))
        form = real_schur(a)
        got = np.sort_complex(np.asarray(schur_eigenvalues(form.t)))
        ref = np.sort_complex(np.linalg.eigvals(a))
        assert np.abs(got - ref).max() < 1e-7 * max(1.0, np.abs(ref).max())


def test_real_schur_symmetric_input_diagonalizes():
    rng = np.random.default_rng(6)
    for _ in range(40):
        n = int(rng.integers(2, 13))
        a = random_symmetric(n, rng)
        form = real_schur(a)
        t = np.asarray(form.t)
        off = t - np.diag(np.diag(t))
        assert np.abs(off).max() < 1e-8 * max(1.0, np.abs(a).max())
        got = np.sort(np.diag(t))
        ref = np.sort(np.linalg.eigvalsh(a))
        assert np.abs(got - ref).max() < 1e-6 * max(1.0, np.abs(ref).max())


def test_real_schur_defective_matrix():
    # Jordan-block-like matrix (defective): Schur form must still hold
    a = np.array([[2.0, 1.0, 0.0], [0.0, 2.0, 1.0], [0.0, 0.0, 2.0]])
    form = real_schur(a)
    t, q = np.asarray(form.t), np.asarray(form.q)
    assert np.abs(q @ t @ q.T - a).max() < 1e-9


def test_real_schur_rotation_matrix_complex_pair():
    theta = 0.7
    a = np.array(
        [[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]]
    )
    form = real_schur(a)
    vals = schur_eigenvalues(form.t)
    got = sorted((complex(v) for v in vals), key=lambda z: z.imag)
    assert abs(got[0] - complex(math.cos(theta), -math.sin(theta))) < 1e-10
    assert abs(got[1] - complex(math.cos(theta), math.sin(theta))) < 1e-10


def test_pseudo_inverse_moore_penrose_conditions():
    rng = np.random.default_rng(7)
    shapes = [(4, 4), (6, 3), (3, 6), (5, 5), (8, 2)]
    for m, n in shapes:
        a = rng.standard_normal((m, n))
        p = np.asarray(pseudo_inverse(a))
        assert p.shape == (n, m)
        tol = 1e-8 * max(1.0, np.abs(a).max())
        assert np.abs(a @ p @ a - a).max() < tol
        assert np.abs(p @ a @ p - p).max() < tol
        assert np.abs((a @ p).T - a @ p).max() < tol
        assert np.abs((p @ a).T - p @ a).max() < tol
        # oracle agreement
        assert np.abs(p - np.linalg.pinv(a)).max() < 1e-8


def test_pseudo_inverse_rank_deficient():
    a = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])  # rank 1
    p = np.asarray(pseudo_inverse(a))
    assert np.abs(p - np.linalg.pinv(a)).max() < 1e-10
    assert np.abs(a @ p @ a - a).max() < 1e-10


def test_schur_handles_identity_and_zero():
    for a in (np.eye(5), np.zeros((4, 4))):
        form = real_schur(a)
        assert np.abs(np.asarray(form.t) - a).max() < 1e-14
