"""Regularized Prony fitting of exponential sums to Fourier coefficients.

A short sum of decaying complex exponentials is recovered from a coefficient
vector by (1) forming a Hankel matrix of the coefficients, (2) taking a
numerical null vector at the detected rank cut of its SVD, (3) rooting the
polynomial built from that vector and keeping the roots inside the unit
disk, and (4) solving a Vandermonde least-squares problem for the weights.
The tolerance is interpreted relative to the Hankel spectral norm unless the
automatic gap detector is enabled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numkernels
from .core import ExpSum, FitConfig, InvalidModelError
from .report import ConvergenceReport

__all__ = [
    "fit_rpm",
    "auto_tol",
    "prony_roots",
    "vandermonde_ls",
    "HankelSystem",
    "build_hankel",
]

# Roots this close to the unit circle are pulled inward so the fitted terms
# stay strictly decaying.
UNIT_CLAMP = 1e-10

# Coefficients below this relative size are stripped before rootfinding.
COEFF_STRIP = 1e-14

# Roots closer than this are merged before the weight solve.
ROOT_MERGE = 1e-12


def build_hankel(v, n_cols=None):
    """Hankel matrix ``H[j, k] = v[j + k]`` using every entry of ``v``.

    By default the matrix is square for even ``N = len(v) - 1`` and
    near-square ``(ceil(N/2)+1) x (floor(N/2)+1)`` for odd ``N``.
    """
    v = np.asarray(v)
    n_total = v.shape[0]
    if n_cols is None:
        n_cols = (n_total - 1) // 2 + 1
    n_rows = n_total - n_cols + 1
    if n_rows < 1 or n_cols < 1:
        raise ValueError("coefficient vector too short for the Hankel shape")
    j = np.arange(n_rows)[:, None] + np.arange(n_cols)[None, :]
    return v[j]


@dataclass(frozen=True)
class HankelSystem:
    """Hankel matrix of a coefficient vector with its cached spectrum."""

    coeffs: np.ndarray
    half: int
    singular_values: np.ndarray

    @classmethod
    def from_coeffs(cls, v, n_cols=None):
        v = np.ascontiguousarray(v, dtype=complex)
        h = build_hankel(v, n_cols)
        s = numkernels.svd(h)[1]
        return cls(coeffs=v, half=h.shape[1] - 1, singular_values=s)


def auto_tol(singular_values) -> float:
    """Tolerance from the deepest gap in the small singular values.

    Scanning pairs from the smallest end, the first index where
    ``s[k+1]/s[k] <= 1e-3`` and ``s[k+1] <= 1e-2 * s[0]`` marks the cut; the
    returned tolerance is the largest singular value below the gap.  Without
    a gap the fallback is ``1e-12 * s[0]``.
    """
    s = np.asarray(singular_values, dtype=float)
    if s.size < 4:
        raise ValueError("need at least 4 singular values")
    if s[0] == 0.0:
        return 0.0
    for k in range(s.size - 2, -1, -1):
        if s[k] > 0.0 and s[k + 1] / s[k] <= 1e-3 and s[k + 1] <= 1e-2 * s[0]:
            return float(s[k + 1])
    return float(1e-12 * s[0])


def prony_roots(c):
    """Inside-disk roots of the polynomial with monomial coefficients ``c``.

    Leading/trailing coefficients below ``COEFF_STRIP * max|c|`` are stripped
    before the companion-matrix rootfinder.  Roots hugging the unit circle
    (within ``UNIT_CLAMP`` on either side, so a mode sitting exactly on the
    circle is kept no matter how rounding lands) are clamped radially to
    ``1 - UNIT_CLAMP``; everything farther out is discarded as growing.
    """
    c = np.asarray(c, dtype=complex)
    if not np.any(c != 0.0):
        raise ValueError("coefficient vector is identically zero")
    cut = COEFF_STRIP * np.max(np.abs(c))
    big = np.nonzero(np.abs(c) > cut)[0]
    if big.size == 0:
        return np.zeros(0, dtype=complex)
    lo, hi = big[0], big[-1]
    core = c[lo : hi + 1]
    if core.size < 2:
        return np.zeros(0, dtype=complex)
    roots = np.roots(core[::-1])  # np.roots wants highest degree first
    mods = np.abs(roots)
    roots = roots[(mods < 1.0 + UNIT_CLAMP) & (mods > 1e-14)]
    mods = np.abs(roots)
    close = mods >= 1.0 - UNIT_CLAMP
    if np.any(close):
        roots[close] *= (1.0 - UNIT_CLAMP) / mods[close]
    return roots


def vandermonde_ls(roots, v):
    """Weights minimizing ``||V w - v||_2`` with ``V[j, k] = roots[k]**j``.

    Solved through an orthogonal factorization (never normal equations).
    Nearly coincident roots are merged first and a warning recorded; returns
    ``(weights, roots_used, warnings)``.
    """
    z = np.asarray(roots, dtype=complex)
    v = np.asarray(v, dtype=complex)
    warn = []
    if z.size > 1:
        merged = []
        used = np.zeros(z.size, dtype=bool)
        order = np.argsort(-np.abs(z), kind="stable")
        for i in order:
            if used[i]:
                continue
            group = [i]
            for j in order:
                if j != i and not used[j] and abs(z[i] - z[j]) < ROOT_MERGE:
                    group.append(j)
                    used[j] = True
            used[i] = True
            merged.append(np.mean(z[group]))
        if len(merged) < z.size:
            warn.append(f"merged {z.size - len(merged)} nearly coincident roots")
        z = np.asarray(merged)
    if z.size == 0:
        return np.zeros(0, dtype=complex), z, warn
    if v.shape[0] < z.size:
        raise ValueError("need at least as many coefficients as roots")
    powers = np.arange(v.shape[0])
    vmat = z[None, :] ** powers[:, None]
    w, *_ = np.linalg.lstsq(vmat, v, rcond=None)
    return w, z, warn


def _rpm_terms(v, cfg: FitConfig, n_cols=None, eps_abs=None):
    """Core pipeline: coefficients -> (weights, exponents, report)."""
    v = np.ascontiguousarray(v, dtype=complex)
    report = ConvergenceReport()
    h = build_hankel(v, n_cols)
    if not np.any(v != 0.0):
        report.details["rank"] = 0
        report.error = 0.0
        return np.zeros(0, dtype=complex), np.zeros(0, dtype=complex), report

    _, s, vh = numkernels.svd(h)
    if eps_abs is None:
        eps_abs = auto_tol(s) if cfg.auto_tol else cfg.tol * s[0]
    report.details["eps_abs"] = float(eps_abs)
    report.details["sigma_max"] = float(s[0])
    rank = int(np.sum(s > eps_abs))
    report.details["rank"] = rank
    if rank == s.size:
        # no singular value reaches the requested level; carry on with the
        # smallest one so the caller can inspect the achievable residual
        report.converged = False
        report.warnings.append("no-null-vector-at-tolerance")
        report.details["smallest_achievable"] = float(s[-1])
        c = vh[-1].conj()
    elif rank == 0:
        return np.zeros(0, dtype=complex), np.zeros(0, dtype=complex), report
    elif rank < h.shape[1] - 1:
        # deep null space: the trailing singular vector mixes the canonical
        # annihilating polynomial with its shifts, planting arbitrary extra
        # roots.  Rebuild with rank+1 columns, where the null vector is the
        # unique minimal-degree Prony polynomial.
        h2 = build_hankel(v, n_cols=rank + 1)
        vh2 = numkernels.svd(h2)[2]
        c = vh2[-1].conj()
    else:
        c = vh[rank].conj()

    roots = prony_roots(c)
    # the constant term reproduces index 0 exactly, so the weights fit
    # indices 1..N (an index-0 value inconsistent with the decaying model,
    # e.g. after mean removal, must not bias the fit)
    weights, roots, merge_warn = vandermonde_ls(roots, v[1:])
    report.warnings += merge_warn
    if roots.size:
        weights = weights / roots  # the fit ran on the index-shifted rows

    keep = np.abs(weights) > eps_abs
    weights, roots = weights[keep], roots[keep]
    if roots.size:
        resid = np.abs(
            (roots[None, :] ** np.arange(v.shape[0])[:, None]) @ weights - v
        )
    else:
        resid = np.abs(v)
    resid[0] = 0.0  # index 0 is reproduced exactly through the constant term
    report.error = float(np.max(resid))
    report.m = int(roots.size)
    return weights, np.log(roots), report


def fit_rpm(v, cfg: FitConfig = FitConfig(), abs_tol: float = None):
    """Fit a decaying exponential sum to coefficients ``v = (v_0 ... v_N)``.

    Returns ``(ExpSum, report)``.  The index-0 coefficient is reproduced
    through the model's constant term; the exponential terms fit the full
    index range by least squares, and terms with weights at or below the
    working tolerance are dropped.  ``cfg.tol`` is interpreted relative to
    the Hankel spectral norm (or the gap detector runs when
    ``cfg.auto_tol``); pass ``abs_tol`` to pin the null-vector level in
    coefficient units instead.  When no numerical null vector exists at the
    requested level the best-effort model is returned with
    ``report.converged = False`` and the smallest achievable residual in
    ``report.details``.
    """
    v = np.ascontiguousarray(v, dtype=complex)
    if v.shape[0] < 8:
        raise ValueError("need at least 8 coefficients")
    if abs(v[0].imag) > 1e-10 * max(1.0, abs(v[0])):
        raise InvalidModelError("index-0 coefficient must be real for a real signal")
    weights, exponents, report = _rpm_terms(v, cfg, eps_abs=abs_tol)
    model = ExpSum(weights, exponents, constant_term=float(v[0].real))
    return model, report
