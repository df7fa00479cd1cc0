"""Shared dense numerical kernels.

Thin wrappers around LAPACK/FFT routines (via numpy/scipy) that pin down the
conventions the rest of the package relies on: nonincreasing singular values,
column-pivoted QR with an inspectable trailing-norm trail, generalized
eigenvalues with explicit finite/infinite classification, and a DFT
normalization in which the coefficients are trigonometric-polynomial expansion
coefficients.  Hankel/Toeplitz products switch to FFT-based evaluation for
large sizes.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

__all__ = [
    "svd",
    "cpqr",
    "cpqr_trailing_norms",
    "gen_eig",
    "dft",
    "idft",
    "toeplitz_matvec",
    "hankel_matvec",
    "null_complement",
]

# Above this size, structured matvecs go through the FFT.
_FFT_MATVEC_CUTOFF = 512

# Finite/infinite split for generalized eigenvalues.
INFINITE_EIG_CUTOFF = 1e12


class NumericalError(RuntimeError):
    """A dense kernel failed to converge or produced unusable output."""


def svd(a, full_matrices=False):
    """SVD ``a = U @ diag(s) @ Vh`` with ``s`` nonincreasing.

    Economy-size by default; pass ``full_matrices=True`` when the null space
    of a wide matrix is needed.  Falls back to the slower QR-iteration driver
    when the divide-and-conquer one fails to converge.
    """
    a = np.asarray(a)
    if a.size and not np.all(np.isfinite(a)):
        raise NumericalError("svd: input has non-finite entries")
    try:
        return scipy.linalg.svd(a, full_matrices=full_matrices, check_finite=False)
    except np.linalg.LinAlgError:
        try:
            return scipy.linalg.svd(
                a, full_matrices=full_matrices, check_finite=False, lapack_driver="gesvd"
            )
        except np.linalg.LinAlgError as exc:  # pragma: no cover
            raise NumericalError("svd did not converge") from exc


def singular_values(a):
    s = svd(a)[1]
    return s


def cpqr(a):
    """Column-pivoted QR, ``a[:, piv] = Q @ R``.

    Pivots greedily on the largest remaining column norm (LAPACK geqp3);
    ties resolve deterministically for a fixed input.
    """
    a = np.asarray(a)
    q, r, piv = scipy.linalg.qr(a, mode="economic", pivoting=True, check_finite=False)
    return q, r, piv


def cpqr_trailing_norms(r, k):
    """Column norms of the trailing block after ``k`` elimination steps.

    Given the triangular factor ``r`` of a CPQR, returns for each pivoted
    column ``j >= k`` the 2-norm of ``r[k:, j]`` (the residual of that column
    on the complement of the first ``k`` selected columns).
    """
    r = np.asarray(r)
    if k >= r.shape[1]:
        return np.zeros(0)
    block = r[k:, k:]
    return np.linalg.norm(block, axis=0)


def gen_eig(e, b):
    """Generalized eigenvalues of the pencil ``(e, b)``.

    Returns ``(finite, n_infinite)``: the finite eigenvalues and the count of
    infinite ones (``beta`` numerically zero, or ``|mu|`` above
    ``INFINITE_EIG_CUTOFF``).
    """
    # The homogeneous (alpha, beta) form avoids overflow for infinite eigenvalues.
    w = scipy.linalg.eig(e, b, right=False, homogeneous_eigvals=True, check_finite=False)
    alpha, beta = w[0], w[1]
    if np.any(np.isnan(alpha)):
        raise NumericalError("gen_eig: QZ iteration failed")
    with np.errstate(divide="ignore", invalid="ignore"):
        mu = alpha / beta
    finite = np.isfinite(mu) & (np.abs(mu) <= INFINITE_EIG_CUTOFF)
    return mu[finite], int(np.sum(~finite))


def dft(values):
    """Fourier coefficients ``c_k = (1/n) sum_j v_j exp(-2*pi*i*j*k/n)``.

    With this normalization ``v_j = sum_k c_k exp(2*pi*i*j*k/n)``, so the
    coefficients expand the samples in the trigonometric-polynomial basis.
    Any length (odd lengths included) is supported.
    """
    values = np.asarray(values)
    return np.fft.fft(values) / values.shape[0]

def idft(coeffs):
    """Inverse of :func:`dft` (exact round trip up to roundoff)."""
    coeffs = np.asarray(coeffs)
    return np.fft.ifft(coeffs) * coeffs.shape[0]


def toeplitz_matvec(col, row, x):
    """Product ``T @ x`` for the Toeplitz matrix with first column/row given.

    Dense for small sizes, FFT-embedded (scipy ``matmul_toeplitz``) above the
    cutoff.  ``col[0]`` and ``row[0]`` must agree.
    """
    col = np.asarray(col)
    row = np.asarray(row)
    x = np.asarray(x)
    if col[0] != row[0]:
        raise ValueError("toeplitz_matvec: col[0] != row[0]")
    if max(col.size, row.size) <= _FFT_MATVEC_CUTOFF:
        t = scipy.linalg.toeplitz(col, row)
        return t @ x
    return scipy.linalg.matmul_toeplitz((col, row), x, check_finite=False)


def hankel_matvec(seq, x, n_rows=None):
    """Product ``H @ x`` for the Hankel matrix ``H[j, k] = seq[j + k]``.

    ``x`` has length ``n_cols``; ``n_rows`` defaults to
    ``len(seq) - n_cols + 1``.  Uses the Toeplitz kernel on the reversed
    vector, so large sizes are FFT-accelerated.
    """
    seq = np.asarray(seq)
    x = np.asarray(x)
    n_cols = x.shape[0]
    if n_rows is None:
        n_rows = seq.shape[0] - n_cols + 1
    if n_rows < 1 or n_rows + n_cols - 1 > seq.shape[0]:
        raise ValueError("hankel_matvec: sequence too short for requested shape")
    # H[j, k] = seq[j + k] = T[j, k'] with k' = n_cols-1-k, T Toeplitz.
    col = seq[n_cols - 1 : n_cols - 1 + n_rows]
    row = seq[:n_cols][::-1]
    return toeplitz_matvec(col, row, x[::-1])


def null_complement(v):
    """Orthonormal basis of the complement of the span of constraint rows.

    ``v`` is a vector or a matrix whose rows are constraint vectors; the
    returned ``Q`` has orthonormal columns spanning the orthogonal complement
    of their row space (``v @ Q = 0``).  All-zero constraints impose nothing
    but still reduce the returned dimension by one each, so the caller's
    problem keeps its expected size (degenerate case; caller should flag).
    """
    v = np.atleast_2d(np.asarray(v, dtype=float))
    k, n = v.shape
    q = scipy.linalg.null_space(v)
    want = n - k
    return q[:, :want] if q.shape[1] > want else q
