"""Dense real linear-algebra kernels, written from scratch.

Everything the separation code needs from a matrix library lives here:
Givens rotations, a cyclic Jacobi eigensolver for symmetric matrices,
Householder reduction to Hessenberg form, a Francis implicit double-shift
QR iteration producing the real Schur form, and an eigendecomposition-based
Moore-Penrose pseudo-inverse.  The algorithms follow Golub & Van Loan,
"Matrix Computations" (4th ed., chapters 7 and 8).

The kernels run textbook loops over plain Python lists; scalar indexing on
lists beats ndarray item access by a wide margin at the 8-32 channel sizes
this package works at, and keeping both diagonalization routes (Jacobi
sweeps in :mod:`sobikit.bss` and the Schur route here) in the same
plain-loop style keeps their execution-time comparison meaningful.
Inputs and outputs at the module boundary are numpy arrays.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, NotSymmetricError

__all__ = [
    "EigenPair",
    "SchurForm",
    "givens_rotation",
    "sym_eig",
    "hessenberg",
    "real_schur",
    "pseudo_inverse",
    "schur_eigenvalues",
]


@dataclass(frozen=True)
class EigenPair:
    """Eigenvalues sorted descending; column k of ``vectors`` pairs with ``values[k]``."""

    values: np.ndarray
    vectors: np.ndarray


@dataclass(frozen=True)
class SchurForm:
    """Real Schur factorization ``a = q @ t @ q.T``.

    ``t`` is quasi-upper-triangular: zero below the first subdiagonal, with
    nonzero subdiagonal entries isolated so they delimit 2x2 blocks carrying
    complex-conjugate eigenvalue pairs.
    """

    q: np.ndarray
    t: np.ndarray
    iterations: int


def _as_square_lists(a):
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    return arr.tolist(), arr.shape[0]


def _identity_lists(n):
    return [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]


def _fro_lists(m):
    return math.sqrt(sum(x * x for row in m for x in row))


def givens_rotation(a, b):
    """Plane rotation (c, s, r) with ``c*a + s*b = r >= 0`` and ``-s*a + c*b = 0``.

    The degenerate input (0, 0) returns (1, 0, 0) by convention.
    """
    r = math.hypot(a, b)
    if r == 0.0:
        return 1.0, 0.0, 0.0
    return a / r, b / r, r


def sym_eig(a, tol=1e-10, max_sweeps=100):
    """Eigendecomposition of a symmetric matrix by cyclic-by-row Jacobi sweeps.

    Sweeps stop once the off-diagonal Frobenius mass falls to ``tol`` times
    the Frobenius norm of the input.  Eigenvalues come back sorted
    descending; each eigenvector's largest-magnitude entry is made positive
    so outputs are deterministic up to roundoff.

    Raises :class:`NotSymmetricError` if the input is asymmetric beyond
    1e-10 relative, :class:`ConvergenceError` after ``max_sweeps``.
    """
    w, n = _as_square_lists(a)
    anorm = _fro_lists(w)
    asym = math.sqrt(
        sum((w[i][j] - w[j][i]) ** 2 for i in range(n) for j in range(n))
    )
    if asym > 1e-10 * anorm:
        raise NotSymmetricError(
            f"asymmetry {asym:.3e} exceeds 1e-10 relative to norm {anorm:.3e}"
        )
    for i in range(n):
        for j in range(i + 1, n):
            w[i][j] = w[j][i] = 0.5 * (w[i][j] + w[j][i])

    v = _identity_lists(n)
    converged = False
    for _sweep in range(max_sweeps + 1):
        off = math.sqrt(
            2.0 * sum(w[i][j] ** 2 for i in range(n) for j in range(i + 1, n))
        )
        if off <= tol * anorm:
            converged = True
            break
        if _sweep == max_sweeps:
            break
        for p in range(n - 1):
            wp = w[p]
            for q in range(p + 1, n):
                apq = wp[q]
                if apq == 0.0:
                    continue
                wq = w[q]
                app = wp[p]
                aqq = wq[q]
                tau = (aqq - app) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                for i in range(n):
                    if i == p or i == q:
                        continue
                    wi = w[i]
                    aip = wi[p]
                    aiq = wi[q]
                    wi[p] = wp[i] = c * aip - s * aiq
                    wi[q] = wq[i] = c * aiq + s * aip
                wp[p] = app - t * apq
                wq[q] = aqq + t * apq
                wp[q] = wq[p] = 0.0
                for i in range(n):
                    vi = v[i]
                    vip = vi[p]
                    viq = vi[q]
                    vi[p] = c * vip - s * viq
                    vi[q] = c * viq + s * vip
    if not converged:
        raise ConvergenceError(f"Jacobi eigensolver: no convergence in {max_sweeps} sweeps")

    values = [w[i][i] for i in range(n)]
    order = sorted(range(n), key=lambda k: -values[k])
    vals = np.array([values[k] for k in order])
    vecs = np.empty((n, n))
    for new_k, k in enumerate(order):
        col = [v[i][k] for i in range(n)]
        peak = max(range(n), key=lambda i: abs(col[i]))
        if col[peak] < 0.0:
            col = [-x for x in col]
        vecs[:, new_k] = col
    return EigenPair(values=vals, vectors=vecs)


def hessenberg(a):
    """Householder reduction ``h = q.T @ a @ q`` with h zero below the subdiagonal."""
    h, n = _as_square_lists(a)
    q = _identity_lists(n)
    for k in range(n - 2):
        norm = math.sqrt(sum(h[i][k] ** 2 for i in range(k + 1, n)))
        if norm == 0.0:
            continue
        x0 = h[k + 1][k]
        alpha = -math.copysign(norm, x0)
        vec = [h[i][k] for i in range(k + 1, n)]
        vec[0] -= alpha
        tau = 2.0 / sum(x * x for x in vec)
        # rows k+1..n-1 from the left
        for j in range(k, n):
            t = tau * sum(vec[i] * h[k + 1 + i][j] for i in range(n - k - 1))
            for i in range(n - k - 1):
                h[k + 1 + i][j] -= t * vec[i]
        # columns k+1..n-1 from the right
        for i in range(n):
            hi = h[i]
            t = tau * sum(vec[j] * hi[k + 1 + j] for j in range(n - k - 1))
            for j in range(n - k - 1):
                hi[k + 1 + j] -= t * vec[j]
        for i in range(n):
            qi = q[i]
            t = tau * sum(vec[j] * qi[k + 1 + j] for j in range(n - k - 1))
            for j in range(n - k - 1):
                qi[k + 1 + j] -= t * vec[j]
        h[k + 1][k] = alpha
        for i in range(k + 2, n):
            h[i][k] = 0.0
    return np.array(h), np.array(q)


def _apply_householder3(h, q, n, k, rows3, x, y, z, lo, hi):
    """Reflect (x, y, z) onto the first axis and apply it to rows/cols/q."""
    scale = abs(x) + abs(y) + abs(z)
    if scale == 0.0:
        return
    xs, ys, zs = x / scale, y / scale, z / scale
    norm = math.sqrt(xs * xs + ys * ys + zs * zs)
    alpha = -math.copysign(norm, xs)
    v0 = xs - alpha
    v1 = ys
    v2 = zs
    vtv = v0 * v0 + v1 * v1 + v2 * v2
    if vtv == 0.0:
        return
    tau = 2.0 / vtv
    r0, r1, r2 = rows3
    hr0, hr1, hr2 = h[r0], h[r1], h[r2]
    col_start = max(lo, k - 1)
    for j in range(col_start, n):
        t = tau * (v0 * hr0[j] + v1 * hr1[j] + v2 * hr2[j])
        hr0[j] -= t * v0
        hr1[j] -= t * v1
        hr2[j] -= t * v2
    row_end = min(hi, k + 3)
    for i in range(row_end + 1):
        hi_row = h[i]
        t = tau * (v0 * hi_row[r0] + v1 * hi_row[r1] + v2 * hi_row[r2])
        hi_row[r0] -= t * v0
        hi_row[r1] -= t * v1
        hi_row[r2] -= t * v2
    for i in range(len(q)):
        qi = q[i]
        t = tau * (v0 * qi[r0] + v1 * qi[r1] + v2 * qi[r2])
        qi[r0] -= t * v0
        qi[r1] -= t * v1
        qi[r2] -= t * v2


def _francis_sweep(h, q, n, lo, hi, trace, det):
    """One implicit double-shift bulge chase over the active block [lo, hi]."""
    h00 = h[lo][lo]
    h10 = h[lo + 1][lo]
    x = h00 * h00 + h[lo][lo + 1] * h10 - trace * h00 + det
    y = h10 * (h00 + h[lo + 1][lo + 1] - trace)
    z = h[lo + 2][lo + 1] * h10
    for k in range(lo, hi - 1):
        _apply_householder3(h, q, n, k, (k, k + 1, k + 2), x, y, z, lo, hi)
        if k > lo:
            h[k + 1][k - 1] = 0.0
            h[k + 2][k - 1] = 0.0
        x = h[k + 1][k]
        y = h[k + 2][k]
        z = h[k + 3][k] if k + 3 <= hi else 0.0
    # clear the last bulge entry with a plane rotation on rows hi-1, hi
    c, s, _r = givens_rotation(h[hi - 1][hi - 2], h[hi][hi - 2])
    row_a, row_b = h[hi - 1], h[hi]
    for j in range(hi - 2, n):
        ta, tb = row_a[j], row_b[j]
        row_a[j] = c * ta + s * tb
        row_b[j] = -s * ta + c * tb
    for i in range(hi + 1):
        hi_row = h[i]
        ta, tb = hi_row[hi - 1], hi_row[hi]
        hi_row[hi - 1] = c * ta + s * tb
        hi_row[hi] = -s * ta + c * tb
    for i in range(len(q)):
        qi = q[i]
        ta, tb = qi[hi - 1], qi[hi]
        qi[hi - 1] = c * ta + s * tb
        qi[hi] = -s * ta + c * tb
    h[hi][hi - 2] = 0.0


def _split_2x2(h, q, n, l):
    """Upper-triangularize the 2x2 block at (l, l) when its eigenvalues are real."""
    a = h[l][l]
    b = h[l][l + 1]
    c = h[l + 1][l]
    d = h[l + 1][l + 1]
    half = 0.5 * (a - d)
    disc = half * half + b * c
    if disc < 0.0:
        return  # complex pair stays as a 2x2 block
    sq = math.sqrt(disc)
    mid = 0.5 * (a + d)
    lam = mid + sq if abs(mid + sq - d) >= abs(mid - sq - d) else mid - sq
    cg, sg, _r = givens_rotation(lam - d, c)
    row_a, row_b = h[l], h[l + 1]
    for j in range(l, n):
        ta, tb = row_a[j], row_b[j]
        row_a[j] = cg * ta + sg * tb
        row_b[j] = -sg * ta + cg * tb
    for i in range(l + 2):
        hi_row = h[i]
        ta, tb = hi_row[l], hi_row[l + 1]
        hi_row[l] = cg * ta + sg * tb
        hi_row[l + 1] = -sg * ta + cg * tb
    for i in range(len(q)):
        qi = q[i]
        ta, tb = qi[l], qi[l + 1]
        qi[l] = cg * ta + sg * tb
        qi[l + 1] = -sg * ta + cg * tb
    h[l + 1][l] = 0.0


def real_schur(a, tol=1e-12, max_iterations=None):
    """Real Schur decomposition via Hessenberg reduction and Francis QR steps.

    A subdiagonal entry h[k+1, k] deflates once it drops below
    ``tol * (|h[k, k]| + |h[k+1, k+1]|)``.  Stalled blocks get the classic
    ad-hoc exceptional shift every tenth iteration.  Raises
    :class:`ConvergenceError` if the iteration budget (default ``30 * n``)
    runs out before the matrix deflates completely.
    """
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    n = arr.shape[0]
    if max_iterations is None:
        max_iterations = 30 * n
    if n == 1:
        return SchurForm(q=np.eye(1), t=arr.copy(), iterations=0)

    h_np, q_np = hessenberg(arr)
    h = h_np.tolist()
    q = q_np.tolist()
    anorm = _fro_lists(h)
    iterations = 0
    stall = 0
    hi = n - 1
    while hi > 0:
        lo = hi
        while lo > 0:
            hsum = abs(h[lo - 1][lo - 1]) + abs(h[lo][lo])
            if hsum == 0.0:
                hsum = anorm
            if abs(h[lo][lo - 1]) <= tol * hsum:
                h[lo][lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            hi -= 1
            stall = 0
        elif lo == hi - 1:
            _split_2x2(h, q, n, lo)
            hi -= 2
            stall = 0
        else:
            if iterations >= max_iterations:
                raise ConvergenceError(
                    f"Schur iteration: block [{lo}, {hi}] undeflated after "
                    f"{max_iterations} double-shift steps"
                )
            if stall > 0 and stall % 10 == 0:
                s_exc = abs(h[hi][hi - 1]) + abs(h[hi - 1][hi - 2])
                trace = 1.5 * s_exc
                det = -0.4375 * s_exc * s_exc
            else:
                trace = h[hi - 1][hi - 1] + h[hi][hi]
                det = h[hi - 1][hi - 1] * h[hi][hi] - h[hi - 1][hi] * h[hi][hi - 1]
            _francis_sweep(h, q, n, lo, hi, trace, det)
            iterations += 1
            stall += 1
    for i in range(2, n):
        hi_row = h[i]
        for j in range(i - 1):
            hi_row[j] = 0.0
    return SchurForm(q=np.array(q), t=np.array(h), iterations=iterations)


def schur_eigenvalues(t):
    """Eigenvalues of a quasi-upper-triangular matrix, as a complex array."""
    arr = np.asarray(t, dtype=float)
    n = arr.shape[0]
    values = []
    k = 0
    while k < n:
        if k + 1 < n and arr[k + 1, k] != 0.0:
            a, b = arr[k, k], arr[k, k + 1]
            c, d = arr[k + 1, k], arr[k + 1, k + 1]
            mid = 0.5 * (a + d)
            disc = 0.25 * (a - d) ** 2 + b * c
            if disc >= 0.0:
                sq = math.sqrt(disc)
                values.extend([complex(mid + sq), complex(mid - sq)])
            else:
                sq = math.sqrt(-disc)
                values.extend([complex(mid, sq), complex(mid, -sq)])
            k += 2
        else:
            values.append(complex(arr[k, k]))
            k += 1
    return np.array(values)


def pseudo_inverse(a):
    """Moore-Penrose pseudo-inverse through the symmetric eigensolver.

    Works on the Gram matrix (``a.T @ a`` or ``a @ a.T``, whichever is
    smaller) and truncates eigenvalues below ``1e-12`` times the largest,
    which handles rank-deficient inputs without a separate code path.
    """
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    m, n = arr.shape
    if n <= m:
        gram = arr.T @ arr
    else:
        gram = arr @ arr.T
    pair = sym_eig(0.5 * (gram + gram.T))
    lam_max = pair.values[0] if pair.values.size else 0.0
    if lam_max <= 0.0:
        return np.zeros((n, m))
    cutoff = 1e-12 * lam_max
    inv = np.where(pair.values >= cutoff, 1.0 / np.where(pair.values > 0, pair.values, 1.0), 0.0)
    core = pair.vectors @ np.diag(inv) @ pair.vectors.T
    if n <= m:
        return core @ arr.T
    return arr.T @ core
