"""Hot loops of the time stepper: operator assembly and the pentadiagonal solve.

Every kernel has a numba version and a numpy/scipy version with identical
signatures.  Band layout throughout: ``bands[k, i]`` is the coefficient of
unknown ``i + k - 2`` in row ``i`` (``k = 0..4``); entries that would fall
outside the matrix are ignored.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from ._compat import USE_NUMBA, njit

PIVOT_FLOOR = 1e-300


def operator_bands_numpy(dx, A_half, a0, aJ, B, C, theta, left_dirichlet, right_dirichlet):
    """Bands of the spatial operator acting on ``V = U^{n+1} + U^n``.

    ``A_half[j]`` is ``A`` at ``x_{j+1/2}``; ``B``, ``C``, ``theta`` are nodal.
    Rows of Dirichlet ends are left zero.
    """
    n = B.size
    J = n - 1
    L = np.zeros((5, n))
    j = np.arange(1, J)
    Am = A_half[:-1]
    Ap = A_half[1:]
    inv2 = 1.0 / (dx * dx)
    L[1, j] += 0.5 * Am * inv2
    L[2, j] -= 0.5 * (Am + Ap) * inv2
    L[3, j] += 0.5 * Ap * inv2

    b = B[j]
    fwd = b >= 0.0
    th = theta[j].copy()
    # one-sided stencil would leave the grid: fall back to the central quotient
    th[fwd & (j + 2 > J)] = 0.0
    th[~fwd & (j - 2 < 0)] = 0.0
    c = 0.25 * (1.0 - th) * b / dx
    L[1, j] -= c
    L[3, j] += c
    w = 0.25 * th * b / dx
    wf = np.where(fwd, w, 0.0)
    wb = np.where(fwd, 0.0, w)
    L[2, j] += -3.0 * wf + 3.0 * wb
    L[3, j] += 4.0 * wf
    L[4, j] -= wf
    L[1, j] -= 4.0 * wb
    L[0, j] += wb
    L[2, j] += 0.5 * C[j]

    if not left_dirichlet:
        L[2, 0] = -0.5 * a0 / dx - 0.75 * B[0] / dx + 0.5 * C[0]
        L[3, 0] = 0.5 * a0 / dx + B[0] / dx
        L[4, 0] = -0.25 * B[0] / dx
    if not right_dirichlet:
        L[2, J] = 0.5 * aJ / dx + 0.75 * B[J] / dx + 0.5 * C[J]
        L[1, J] = -0.5 * aJ / dx - B[J] / dx
        L[0, J] = 0.25 * B[J] / dx
    return L


@njit(cache=True)
def operator_bands_numba(dx, A_half, a0, aJ, B, C, theta, left_dirichlet, right_dirichlet):
    n = B.size
    J = n - 1
    L = np.zeros((5, n))
    inv2 = 1.0 / (dx * dx)
    for j in range(1, J):
        Am = A_half[j - 1]
        Ap = A_half[j]
        L[1, j] += 0.5 * Am * inv2
        L[2, j] -= 0.5 * (Am + Ap) * inv2
        L[3, j] += 0.5 * Ap * inv2
        b = B[j]
        th = theta[j]
        if b >= 0.0:
            if j + 2 > J:
                th = 0.0
        elif j - 2 < 0:
            th = 0.0
        c = 0.25 * (1.0 - th) * b / dx
        L[1, j] -= c
        L[3, j] += c
        w = 0.25 * th * b / dx
        if b >= 0.0:
            L[2, j] -= 3.0 * w
            L[3, j] += 4.0 * w
            L[4, j] -= w
        else:
            L[2, j] += 3.0 * w
            L[1, j] -= 4.0 * w
            L[0, j] += w
        L[2, j] += 0.5 * C[j]
    if not left_dirichlet:
        L[2, 0] = -0.5 * a0 / dx - 0.75 * B[0] / dx + 0.5 * C[0]
        L[3, 0] = 0.5 * a0 / dx + B[0] / dx
        L[4, 0] = -0.25 * B[0] / dx
    if not right_dirichlet:
        L[2, J] = 0.5 * aJ / dx + 0.75 * B[J] / dx + 0.5 * C[J]
        L[1, J] = -0.5 * aJ / dx - B[J] / dx
        L[0, J] = 0.25 * B[J] / dx
    return L


def band_matvec(bands, x):
    n = x.size
    y = bands[2] * x
    y[1:] += bands[1, 1:] * x[:-1]
    y[2:] += bands[0, 2:] * x[:-2]
    y[:-1] += bands[3, :-1] * x[1:]
    y[:-2] += bands[4, :-2] * x[2:]
    return y[:n]


def band_to_dense(bands):
    n = bands.shape[1]
    M = np.zeros((n, n))
    for k in range(5):
        for i in range(n):
            j = i + k - 2
            if 0 <= j < n:
                M[i, j] = bands[k, i]
    return M


def band_solve_numpy(bands, rhs):
    """Solve with LAPACK ``gbsv``.  Returns ``(x, failed_column)``; -1 on success."""
    n = rhs.size
    ab = np.zeros((5, n))
    for k in range(5):
        off = k - 2
        if off >= 0:
            ab[4 - k, off:] = bands[k, : n - off]
        else:
            ab[4 - k, : n + off] = bands[k, -off:]
    try:
        x = solve_banded((2, 2), ab, rhs, check_finite=False)
    except LinAlgError as exc:
        # message carries the 1-based index of the zero pivot
        digits = "".join(ch for ch in str(exc) if ch.isdigit())
        return np.full(n, np.nan), (int(digits) - 1 if digits else 0)
    return x, -1


@njit(cache=True)
def band_solve_numba(bands, rhs):
    """Banded Gaussian elimination with partial pivoting (kl = ku = 2).

    Row pivoting widens the upper band to 4, so rows are stored with offsets
    ``-2..+4`` relative to the diagonal.
    """
    n = rhs.size
    w = 7
    a = np.zeros((n, w))
    for i in range(n):
        for k in range(5):
            j = i + k - 2
            if j >= 0 and j < n:
                a[i, k] = bands[k, i]
    b = rhs.copy()
    for col in range(n):
        last = min(col + 2, n - 1)
        p = col
        best = abs(a[col, 2])
        for r in range(col + 1, last + 1):
            v = abs(a[r, col - r + 2])
            if v > best:
                best = v
                p = r
        if best < PIVOT_FLOOR:
            return np.full(n, np.nan), col
        cmax = min(n - 1, col + 4)
        if p != col:
            for c in range(col, cmax + 1):
                tmp = a[col, c - col + 2]
                a[col, c - col + 2] = a[p, c - p + 2]
                a[p, c - p + 2] = tmp
            tmp = b[col]
            b[col] = b[p]
            b[p] = tmp
        piv = a[col, 2]
        for r in range(col + 1, last + 1):
            m = a[r, col - r + 2] / piv
            if m != 0.0:
                for c in range(col, cmax + 1):
                    a[r, c - r + 2] -= m * a[col, c - col + 2]
                b[r] -= m * b[col]
    x = np.empty(n)
    for i in range(n - 1, -1, -1):
        s = b[i]
        for c in range(i + 1, min(n - 1, i + 4) + 1):
            s -= a[i, c - i + 2] * x[c]
        x[i] = s / a[i, 2]
    return x, -1


BACKENDS = {
    "numpy": (operator_bands_numpy, band_solve_numpy),
    "numba": (operator_bands_numba, band_solve_numba),
}
DEFAULT_BACKEND = "numba" if USE_NUMBA else "numpy"


def get_backend(name: str | None = None):
    name = name or DEFAULT_BACKEND
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown backend {name!r}") from None
