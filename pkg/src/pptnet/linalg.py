"""Dense complex matrix kernel: Kronecker products, matrix powers, partial
transpose, partial trace, Hermitian eigendecomposition.

Composite basis convention used throughout the package: the bipartite basis
state |ij> (i on A, j on B) sits at index i*d_b + j (row-major, A-major).
"""

from __future__ import annotations

import math

import numpy as np

HERMITICITY_TOL = 1e-9


def _as_square(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the left factor major: entry ((i*rb+k),(j*cb+l)) = a[i,j]*b[k,l]."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def mat_power(a: np.ndarray, k: int) -> np.ndarray:
    """k-fold matrix product a @ a @ ... @ a for integer k >= 1."""
    a = _as_square(a)
    if k < 1:
        raise ValueError(f"power must be a positive integer, got {k}")
    return np.linalg.matrix_power(a, k)


def partial_transpose(rho: np.ndarray, d_a: int, d_b: int, subsystem: str = "B") -> np.ndarray:
    """Transpose the indices of one subsystem only.

    For subsystem B the output entry at (i*d_b+j, m*d_b+n) is the input entry
    at (i*d_b+n, m*d_b+j); for subsystem A the A-indices are swapped instead.
    A pure index permutation: involutive, trace- and Hermiticity-preserving.
    """
    rho = _as_square(rho, "rho")
    if rho.shape[0] != d_a * d_b:
        raise ValueError(f"matrix size {rho.shape[0]} does not match dims {d_a}x{d_b}")
    t = rho.reshape(d_a, d_b, d_a, d_b)
    if subsystem == "B":
        t = t.transpose(0, 3, 2, 1)
    elif subsystem == "A":
        t = t.transpose(2, 1, 0, 3)
    else:
        raise ValueError(f"subsystem must be 'A' or 'B', got {subsystem!r}")
    return t.reshape(d_a * d_b, d_a * d_b)


def partial_trace(rho: np.ndarray, dims: list[int], keep) -> np.ndarray:
    """Trace out all tensor factors except those listed in `keep`.

    `dims` lists the factor dimensions with the leading (leftmost Kronecker)
    factor first; `keep` is one factor index or a list of them.  Kept factors
    stay in their original relative order.
    """
    rho = _as_square(rho, "rho")
    dims = [int(d) for d in dims]
    if math.prod(dims) != rho.shape[0]:
        raise ValueError(f"dims {dims} inconsistent with matrix size {rho.shape[0]}")
    keep_list = [keep] if isinstance(keep, (int, np.integer)) else sorted(int(i) for i in keep)
    n = len(dims)
    if not keep_list or any(i < 0 or i >= n for i in keep_list):
        raise ValueError(f"keep indices {keep_list} out of range for {n} factors")
    t = rho.reshape(dims + dims)
    row_sub = list(range(n))
    col_sub = [i + n if i in keep_list else i for i in range(n)]
    out_sub = keep_list + [i + n for i in keep_list]
    out = np.einsum(t, row_sub + col_sub, out_sub)
    d_keep = math.prod(dims[i] for i in keep_list)
    return out.reshape(d_keep, d_keep)


def hermitian_eigenvalues(a: np.ndarray, tol: float = HERMITICITY_TOL) -> np.ndarray:
    """Real eigenvalues of a Hermitian matrix, sorted descending.

    Raises if max|a - a^dagger| exceeds `tol`.
    """
    a = _as_square(a)
    dev = np.max(np.abs(a - a.conj().T))
    if dev > tol:
        raise ValueError(f"matrix is not Hermitian within {tol} (deviation {dev:.3e})")
    return np.linalg.eigvalsh(a)[::-1]
