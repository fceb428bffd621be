"""Exact linear algebra over a prime field F_p.

Matrices are numpy int64 arrays with entries in [0, p).  Elimination
pivots on the first nonzero entry, so every result is deterministic.
"""
from __future__ import annotations

import numpy as np

# float64 products are exact below this bound
_FLOAT_EXACT = 2**52
_INT_EXACT = 2**62


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def inv(a: int, p: int) -> int:
    return pow(int(a) % p, -1, p)


def reduce(A, p: int) -> np.ndarray:
    return np.mod(np.asarray(A, dtype=np.int64), p)


def matmul(A, B, p: int) -> np.ndarray:
    """A @ B mod p, broadcasting over leading axes like np.matmul."""
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    k = A.shape[-1]
    if k == 0:
        shape = np.broadcast_shapes(A.shape[:-2], B.shape[:-2]) + (A.shape[-2], B.shape[-1])
        return np.zeros(shape, dtype=np.int64)
    bound = (p - 1) ** 2
    if k * bound < _FLOAT_EXACT:
        out = np.matmul(A.astype(np.float64), B.astype(np.float64))
        return np.mod(np.rint(out).astype(np.int64), p)
    step = max(1, _INT_EXACT // max(bound, 1))
    out = None
    for s in range(0, k, step):
        part = np.matmul(A[..., s:s + step], B[..., s:s + step, :]) % p
        out = part if out is None else (out + part) % p
    return out


def rref(A, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and pivot columns."""
    R = reduce(A, p).copy()
    if R.ndim != 2:
        raise ValueError("rref expects a matrix")
    m, n = R.shape
    pivots: list[int] = []
    r = 0
    for c in range(n):
        if r == m:
            break
        nz = np.flatnonzero(R[r:, c])
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            R[[r, i]] = R[[i, r]]
        R[r, c:] = (R[r, c:] * inv(R[r, c], p)) % p
        col = R[:, c].copy()
        col[r] = 0
        rows = np.flatnonzero(col)
        if rows.size:
            R[rows, c:] = (R[rows, c:] - np.outer(col[rows], R[r, c:])) % p
        pivots.append(c)
        r += 1
    return R, pivots


def rank(A, p: int) -> int:
    A = np.asarray(A)
    if A.size == 0:
        return 0
    R = reduce(A, p).copy()
    m, n = R.shape
    r = 0
    for c in range(n):
        if r == m:
            break
        nz = np.flatnonzero(R[r:, c])
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            R[[r, i]] = R[[i, r]]
        below = R[r + 1:, c]
        rows = np.flatnonzero(below)
        if rows.size:
            f = (below[rows] * inv(R[r, c], p)) % p
            R[r + 1 + rows, c:] = (R[r + 1 + rows, c:] - np.outer(f, R[r, c:])) % p
        r += 1
    return r


def nullspace(A, p: int) -> np.ndarray:
    """Columns form a basis of {x : A x = 0}; shape (ncols, nullity)."""
    A = np.asarray(A)
    m, n = A.shape
    if m == 0:
        return np.eye(n, dtype=np.int64)
    R, pivots = rref(A, p)
    free = [c for c in range(n) if c not in set(pivots)]
    N = np.zeros((n, len(free)), dtype=np.int64)
    for j, f in enumerate(free):
        N[f, j] = 1
        for i, c in enumerate(pivots):
            N[c, j] = (-R[i, f]) % p
    return N


def left_nullspace(A, p: int) -> np.ndarray:
    """Rows form a basis of {y : y A = 0}."""
    return nullspace(np.asarray(A).T, p).T


def independent_columns(A, p: int) -> list[int]:
    A = np.asarray(A)
    if A.size == 0:
        return []
    return rref(A, p)[1]


def column_basis(A, p: int) -> np.ndarray:
    A = reduce(A, p)
    return A[:, independent_columns(A, p)]


def inverse(A, p: int) -> np.ndarray:
    A = np.asarray(A)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("inverse of a non-square matrix")
    R, pivots = rref(np.hstack([reduce(A, p), np.eye(n, dtype=np.int64)]), p)
    if pivots[:n] != list(range(n)):
        raise ValueError("matrix is singular mod p")
    return R[:, n:]


def solve(A, b, p: int) -> np.ndarray | None:
    """One solution x of A x = b (b may be a matrix), or None if inconsistent."""
    A = reduce(A, p)
    b = reduce(b, p)
    vec = b.ndim == 1
    if vec:
        b = b[:, None]
    m, n = A.shape
    R, pivots = rref(np.hstack([A, b]), p)
    if any(c >= n for c in pivots):
        return None
    x = np.zeros((n, b.shape[1]), dtype=np.int64)
    for i, c in enumerate(pivots):
        x[c] = R[i, n:]
    return x[:, 0] if vec else x


def in_span(A, v, p: int) -> bool:
    A = np.asarray(A)
    if A.size == 0:
        return not np.any(reduce(v, p))
    return rank(np.column_stack([A, v]), p) == rank(A, p)
