"""Closed-form and recompression-based algebra on the model types.

Sums, convolutions, pointwise products, and cross-correlations all reduce to
operations on the exponential coefficient models, followed by recompression:
a short Hankel matrix is built from samples of the (suboptimal) result and
the regularized Prony pipeline is rerun on it, validating the compressed
model against randomly probed coefficients and enlarging the sample until
the check passes.  Barycentric inputs are combined by pointwise evaluation
plus refitting, with a transform-based fallback.
"""

from __future__ import annotations

import numpy as np

from .core import (
    ExpSum,
    FitConfig,
    SampleGrid,
    TrigRational,
    eval_bary,
    eval_expsum,
)
from .report import ConvergenceReport
from . import numkernels
from .rpm import _rpm_terms

__all__ = [
    "compress",
    "add_expsum",
    "add_rfun",
    "conv",
    "mul",
    "corr",
    "scale_expsum",
]

# Exponential bases closer than this are merged on concatenation.
_MERGE_TOL = 1e-13

# Number of random coefficient probes per validation round.
_N_PROBE = 64


def scale_expsum(R: ExpSum, c) -> ExpSum:
    """Model of ``c * f``: weights and constant scaled (real scalar)."""
    c = float(c)
    if c == 0.0 or R.n_terms == 0:
        return ExpSum(np.zeros(0), np.zeros(0), c * R.constant_term)
    return ExpSum(c * R.weights, R.exponents, c * R.constant_term)


def _validation_band(R: ExpSum, tol: float) -> int:
    if R.n_terms == 0:
        return 8
    return max(R.resolution(min(max(tol, 1e-13), 0.5)), 2 * R.n_terms + 2, 8)


def _compress_terms(tail_fn, m_bound, tol, n_eps, rng, constant, report):
    """Shared recompression loop: Hankel fit of sampled tail coefficients.

    ``tail_fn`` evaluates the suboptimal model's decaying part on integer
    indices (index 0 meaning the exponential extension there).  Doubles the
    sample length on validation failure, up to the resolution bound.
    """
    m_bound = max(int(m_bound), 1)
    big_m = 2 * m_bound
    cfg = FitConfig(tol=min(max(tol, 1e-15), 0.5))
    best = None
    while True:
        # fit on indices 1.. so an index-0 value inconsistent with the
        # exponential law (constants live there) cannot corrupt the Hankel;
        # the weights are unshifted afterwards
        ks = np.arange(1, 2 * big_m + 2)
        g = tail_fn(ks)
        ref = float(np.max(np.abs(g))) if g.size else 0.0
        if ref == 0.0:
            return ExpSum(np.zeros(0), np.zeros(0), constant), report
        w, a, sub = _rpm_terms(g, cfg, n_cols=m_bound + 1)
        w = w * np.exp(-a)
        cand = ExpSum(w, a, constant) if w.size else ExpSum(np.zeros(0), np.zeros(0), constant)
        # index 0 is exempt (the constant term reproduces it exactly)
        probe = rng.integers(1, max(n_eps, 2) + 1, size=_N_PROBE)
        err = float(np.max(np.abs(cand.tail(probe) - tail_fn(probe))))
        if best is None or err < best[0]:
            best = (err, cand)
        if err <= tol * ref:
            report.m = cand.n_terms
            report.error = err
            report.details["sample_length"] = int(2 * big_m + 1)
            return cand, report
        if big_m >= max(n_eps, 2 * m_bound):
            break
        big_m = min(2 * big_m, max(n_eps, 2 * m_bound))
        report.fallbacks.append(f"resample:{big_m}")
    err, cand = best
    report.converged = False
    report.warnings.append("compression-validation-failed")
    report.m = cand.n_terms
    report.error = err
    return cand, report


def compress(R: ExpSum, tol: float = 1e-13, cfg: FitConfig = FitConfig()):
    """Shorten an exponential sum to ``m_tilde <= m`` terms at tolerance.

    Samples the decaying part, fits a rectangular Hankel through the Prony
    pipeline, and validates the result on random coefficient indices.  The
    constant term rides along unchanged.  Returns ``(ExpSum, report)``.
    """
    report = ConvergenceReport()
    if R.n_terms == 0:
        return R, report
    n_eps = _validation_band(R, tol)
    out, report = _compress_terms(
        R.tail, R.n_terms, tol, n_eps, cfg.rng(salt=211), R.constant_term, report
    )
    return out, report


def _merge_terms(weights, exponents):
    """Concatenated term list with nearly coincident bases merged."""
    if weights.size == 0:
        return weights, exponents
    z = np.exp(exponents)
    order = np.argsort(-np.abs(z), kind="stable")
    out_w, out_a = [], []
    used = np.zeros(z.size, dtype=bool)
    for i in order:
        if used[i]:
            continue
        group = np.nonzero(~used & (np.abs(z - z[i]) < _MERGE_TOL))[0]
        used[group] = True
        w_sum = np.sum(weights[group])
        if w_sum != 0.0:
            out_w.append(w_sum)
            out_a.append(exponents[i])
    return np.asarray(out_w, dtype=complex), np.asarray(out_a, dtype=complex)


def add_expsum(S: ExpSum, G: ExpSum, cfg: FitConfig = FitConfig()):
    """Sum of two coefficient models: concatenate, merge, recompress.

    The recompression runs at near-machine tolerance so repeated summations
    do not accumulate length.  Constants add.  Returns ``(ExpSum, report)``.
    """
    w = np.concatenate([S.weights, G.weights])
    a = np.concatenate([S.exponents, G.exponents])
    w, a = _merge_terms(w, a)
    const = S.constant_term + G.constant_term
    merged = ExpSum(w, a, const)
    if merged.n_terms == 0:
        return merged, ConvergenceReport()
    out, report = compress(merged, tol=1e-13, cfg=cfg)
    return out, report


def add_rfun(s: TrigRational, g: TrigRational, cfg: FitConfig = FitConfig()):
    """Sum of two barycentric models: evaluate pointwise and refit.

    When the refit reports spurious-pole trouble, falls back to the
    frequency domain (transform both, add there, transform back).
    Returns ``(TrigRational, report)``.
    """
    from .pronyaaa import fit_pronyaaa
    from .transforms import ft, ift

    n = max(4 * (s.nodes.size + g.nodes.size), 1024)
    x = np.arange(n) / n
    vals = eval_bary(s, x) + eval_bary(g, x)
    if np.max(np.abs(vals - np.mean(vals))) == 0.0:
        # cancellation down to a constant: keep a minimal flat model
        nodes = np.array([0.0, 0.5])
        model = TrigRational(nodes, np.array([1.0, 1.0]), np.zeros(2), float(np.mean(vals)))
        return model, ConvergenceReport(m=1, error=0.0)
    grid = SampleGrid(x, vals)
    model, report = fit_pronyaaa(grid, cfg)
    if report.converged and "spurious-poles-remain" not in report.warnings:
        return model, report
    report.fallbacks.append("transform-route")
    S, rep_s = ft(s, cfg)
    G, rep_g = ft(g, cfg)
    total, rep_add = add_expsum(S, G, cfg)
    if total.n_terms == 0:
        nodes = np.array([0.0, 0.5])
        model = TrigRational(nodes, np.array([1.0, 1.0]), np.zeros(2), total.constant_term)
        return model, report
    model, rep_ift = ift(total, cfg)
    report.merge_prefixed(rep_ift, "ift")
    report.converged = rep_ift.converged
    report.m = model.degree
    report.error = rep_ift.error
    return model, report


def _as_expsum(f, cfg):
    if isinstance(f, ExpSum):
        return f, None
    from .transforms import ft

    return ft(f, cfg)[0], "transformed"


def _product_bound(w, a, tol, ref, n_pairs):
    """Count product terms with non-negligible total coefficient mass."""
    if w.size == 0:
        return 0
    mass = np.abs(w) / (1.0 - np.abs(np.exp(a)))
    keep = mass > tol * max(ref, 1e-300) / max(n_pairs, 1)
    return int(np.sum(keep))


def conv(s, g, tol: float = 1e-12, cfg: FitConfig = FitConfig()):
    """Convolution: pointwise product of the coefficient models, compressed.

    The closed-form product of sums of lengths ``l`` and ``n`` has ``l*n``
    terms; the recompression Hankel is built from sampled products
    ``S(j+k) * G(j+k)`` with the length bounded by counting the
    non-negligible product terms and inspecting the coefficient tail.
    Returns ``(ExpSum, report)``.
    """
    S, _ = _as_expsum(s, cfg)
    G, _ = _as_expsum(g, cfg)
    report = ConvergenceReport()
    const = S.constant_term * G.constant_term
    if S.n_terms == 0 or G.n_terms == 0:
        return ExpSum(np.zeros(0), np.zeros(0), const), report

    w_prod = np.multiply.outer(S.weights, G.weights).ravel()
    a_prod = np.add.outer(S.exponents, G.exponents).ravel()

    def tail_fn(k):
        return S.tail(k) * G.tail(k)

    probe = np.arange(0, 2 * (S.n_terms + G.n_terms) + 1)
    ref = float(np.max(np.abs(tail_fn(probe))))
    m_bound = max(_product_bound(w_prod, a_prod, tol, ref, w_prod.size), 1)
    m_bound = min(m_bound, w_prod.size)
    n_eps = max(
        _validation_band(S, tol), _validation_band(G, tol), 2 * m_bound + 2
    )
    out, report = _compress_terms(
        tail_fn, m_bound, tol, n_eps, cfg.rng(salt=223), const, report
    )
    report.details["product_terms"] = int(w_prod.size)
    report.details["term_bound"] = int(m_bound)
    return out, report


def mul(r, s, tol: float = 1e-12, cfg: FitConfig = FitConfig()):
    """Pointwise product in time: discrete convolution of the coefficients.

    The output coefficients are the truncated two-sided convolution
    evaluated through a Toeplitz matrix-vector product, then recompressed to
    at most ``l + n`` terms.  Returns ``(ExpSum, report)``.
    """
    R, _ = _as_expsum(r, cfg)
    S, _ = _as_expsum(s, cfg)
    report = ConvergenceReport()
    if R.n_terms == 0 and S.n_terms == 0:
        return ExpSum(np.zeros(0), np.zeros(0), R.constant_term * S.constant_term), report

    n_eps = max(_validation_band(S, tol), _validation_band(R, tol))
    s_seq = eval_expsum(S, np.arange(-n_eps, n_eps + 1))

    def conv_at(ks):
        # h(k) = sum_{j=-n_eps}^{n_eps} R(k - j) S(j)
        ks = np.atleast_1d(ks)
        out = np.empty(ks.shape, dtype=complex)
        j = np.arange(-n_eps, n_eps + 1)
        for i, k in enumerate(ks):
            out[i] = eval_expsum(R, k - j) @ s_seq
        return out

    def tail_fn(ks):
        ks = np.atleast_1d(np.asarray(ks))
        j = np.arange(-n_eps, n_eps + 1)
        kmax = int(np.max(ks))
        col = eval_expsum(R, np.arange(n_eps, n_eps + kmax + 1))
        row = eval_expsum(R, np.arange(n_eps, -n_eps - 1, -1))
        dense = numkernels.toeplitz_matvec(col, row, s_seq)
        return dense[ks]

    m_bound = R.n_terms + S.n_terms
    out, report = _compress_terms(
        tail_fn, m_bound, tol, n_eps, cfg.rng(salt=227), 0.0, report
    )
    h0 = float(np.real(conv_at(np.array([0]))[0]))
    out = ExpSum(out.weights, out.exponents, h0)
    report.details["truncation_band"] = int(n_eps)
    return out, report


def corr(s, g, tol: float = 1e-12, cfg: FitConfig = FitConfig()):
    """Cross-correlation ``(s (*) g)(x) = int s(y - x) g(y) dy``.

    Coefficientwise ``conj(S(k)) * G(k)``, recompressed like a convolution.
    Returns ``(ExpSum, report)``.
    """
    S, _ = _as_expsum(s, cfg)
    G, _ = _as_expsum(g, cfg)
    s_conj = (
        ExpSum(np.conj(S.weights), np.conj(S.exponents), S.constant_term)
        if S.n_terms
        else ExpSum(np.zeros(0), np.zeros(0), S.constant_term)
    )
    return conv(s_conj, G, tol=tol, cfg=cfg)
