"""Stable lossy conversion between barycentric and exponential-sum form.

The forward direction pins the exponents to the model's computed poles and
recovers the weights by least squares against Fourier coefficients obtained
from equispaced evaluation (exact parameter recovery is ill conditioned, so
no closed-form residue formulas are trusted).  The inverse direction selects
barycentric nodes as a well-conditioned column subset of a pole-kernel
matrix via column-pivoted QR, fits weights through the numerical null space,
then prunes the oversampled pole pairs with the smallest residues.
"""

from __future__ import annotations

import numpy as np

from . import numkernels
from .core import (
    ExpSum,
    FitConfig,
    SampleGrid,
    TransformError,
    TrigRational,
    _all_poles_residues,
    cot_pi,
    eval_bary,
    eval_expsum,
    eval_expsum_time,
)
from .report import ConvergenceReport

__all__ = ["ft", "ift", "pole_to_exponent", "exponent_to_pole"]

# Fourier sampling of a model targets this coefficient decay level.
_MACHINE_EPS_TARGET = 1e-13

# On-interval pole detection band for the inverse transform's quality check.
_INTERVAL_POLE_BAND = 1e-10

# Null-space certification for the direct (no-oversampling) inverse route.
_CERT_RATIO = 1e-12
_CERT_GAP = 1e3

# Relative singular-value threshold spanning the numerical null space.
_NULLSPACE_RTOL = 1e-8


def pole_to_exponent(eta):
    """Exponential rate whose base generates the coefficients of a pole pair.

    A pole at ``eta`` (upper half plane) contributes coefficients with base
    ``conj(exp(2*pi*i*eta))``, so the exponent is ``-2*pi*i*conj(eta)``.
    """
    return -2j * np.pi * np.conj(eta)


def exponent_to_pole(alpha):
    """Inverse of :func:`pole_to_exponent`, real part wrapped to [0, 1)."""
    eta = -1j * np.conj(np.asarray(alpha)) / (2.0 * np.pi)
    return (eta.real % 1.0) + 1j * eta.imag


def _sample_coeffs(model: TrigRational, max_n: int = 2**18):
    """Fourier coefficients of the model up to its machine-target bandwidth.

    Evaluates on successively doubled odd equispaced grids and applies a
    plateau chop: resolved once the suffix envelope of the coefficients has
    dropped to the roundoff plateau, which is then cut away.
    """
    n = 257
    while True:
        x = np.arange(n) / n
        vals = eval_bary(model, x)
        c = numkernels.dft(vals)[: (n - 1) // 2 + 1]
        env = np.maximum.accumulate(np.abs(c)[::-1])[::-1]
        top = float(np.max(np.abs(c)))
        if top == 0.0:
            return c[:1].real.astype(complex), 0
        cut = np.nonzero(env <= _MACHINE_EPS_TARGET * top)[0]
        tail_len = env.size - cut[0] if cut.size else 0
        if (cut.size and cut[0] < 0.8 * env.size) or n >= max_n:
            n_eps = int(cut[0]) if cut.size else env.size - 1
            n_eps = max(n_eps, 1)
            out = c[: n_eps + 1].copy()
            out[0] = out[0].real
            return out, n_eps
        n = 2 * n - 1  # keep the count odd


def ft(model: TrigRational, cfg: FitConfig = FitConfig()):
    """Forward transform: barycentric model to exponential coefficient sum.

    Exponents come from the cached poles; weights solve an oversampled
    Vandermonde least-squares problem against the model's Fourier
    coefficients, with the oversampling doubled until a randomized
    coefficient validation passes.  Terms with negligible weights are
    dropped, so the output can be shorter than the pole count.
    Returns ``(ExpSum, report)``.
    """
    poles = model.pole_cache.poles
    m = poles.size
    if m == 0:
        raise TransformError("model has no upper-half-plane poles to transform")
    coeffs, n_eps = _sample_coeffs(model)
    if n_eps < 1 or np.max(np.abs(coeffs[1:])) <= 1e-14 * max(1.0, abs(coeffs[0])):
        raise TransformError("signal is constant; no exponential content to fit")
    alpha = pole_to_exponent(poles)
    scale = float(np.max(np.abs(coeffs)))
    threshold = 10.0 * cfg.tol * scale
    rng = cfg.rng(salt=101)
    report = ConvergenceReport()
    report.details["n_eps"] = n_eps

    rhs_full = coeffs.astype(complex)

    # Index 0 is reproduced exactly by the constant term, so the weight fit
    # runs on indices 1..M; poles too deep to retain (negligible for every
    # k >= 1) would otherwise corrupt the row-0 balance.
    m_fit = cfg.coeff_fit_M * m
    best = None
    while True:
        rows = np.arange(1, min(m_fit, n_eps) + 1)
        vmat = np.exp(np.multiply.outer(rows.astype(float), alpha))
        w, *_ = np.linalg.lstsq(vmat, rhs_full[rows], rcond=None)
        keep = np.abs(w) > threshold
        cand = ExpSum(w[keep], alpha[keep], constant_term=float(coeffs[0].real))
        probe = rng.integers(0, n_eps + 1, size=32)
        err = float(np.max(np.abs(eval_expsum(cand, probe) - coeffs[probe])))
        if best is None or err < best[0]:
            best = (err, cand, int(m_fit))
        if err <= threshold:
            report.m = cand.n_terms
            report.error = err
            report.details["fit_rows"] = int(rows.size)
            return cand, report
        if m_fit >= 8 * m or m_fit >= n_eps:
            break
        m_fit *= 2
        report.fallbacks.append(f"oversample:{m_fit}")

    err, cand, m_fit = best
    report.converged = False
    report.warnings.append("coefficient-validation-failed")
    report.m = cand.n_terms
    report.error = err
    report.details["fit_rows"] = int(min(m_fit, n_eps) + 1)
    return cand, report


def _pole_matrix(eta, x, values, value_scale):
    """Real pole-kernel matrix: Re/Im cot rows per pole plus the value row."""
    rows = cot_pi(eta[:, None] - x[None, :])
    return np.vstack([rows.real, rows.imag, values[None, :] / value_scale])


def _candidate_nodes(piv, rfac, n_keep):
    """First ``n_keep`` CPQR pivots plus the minimum-norm trailing column."""
    lead = list(piv[:n_keep])
    trail = numkernels.cpqr_trailing_norms(rfac, n_keep)
    j = int(np.argmin(trail))
    return np.asarray(lead + [piv[n_keep + j]])


def _constrained_grid_weights(x, s, idx):
    from .pronyaaa import _kernel_cols, _solve_constrained

    cols = _kernel_cols(x, x[idx], "cot")
    gamma, _, _ = _solve_constrained(cols, s, idx, s[idx])
    return gamma


def _interval_pole_count(nodes, weights, values):
    """On-interval poles that actually matter: real-band location and a
    residue above the cancellation floor (exactly cancelling pole/zero pairs
    have machine-zero residues and no pointwise effect)."""
    eta, res = _all_poles_residues(nodes, weights, values)
    if eta.size == 0:
        return 0
    floor = 1e-12 * float(np.max(np.abs(values)))
    on = (np.abs(eta.imag) <= _INTERVAL_POLE_BAND) & (np.abs(res) > floor)
    return int(np.sum(on))


def _try_build(nodes, weights, values, offset):
    gf = weights * values
    denom = np.sum(np.abs(gf))
    if denom > 0.0 and abs(np.sum(gf)) > 1e-10 * denom:
        return None
    try:
        return TrigRational(nodes, weights, values, mean_offset=offset)
    except Exception:
        return None


def ift(R: ExpSum, cfg: FitConfig = FitConfig()):
    """Inverse transform: exponential sum to barycentric interpolant.

    Nodes are selected by CPQR on the pole-kernel matrix over a fine grid.
    Without oversampling the weights come straight from a certified null
    vector; otherwise an oversampled interpolant is fit through the
    numerical null space and the surplus pole pairs with the smallest
    residues are pruned.  A fallback ladder (more oversampling, denser grid,
    then the greedy time-domain fitter at relaxed tolerance) handles
    detected on-interval poles; the outcome is always a model plus a quality
    report.  Returns ``(TrigRational, report)``.
    """
    m = R.n_terms
    if m < 1:
        raise TransformError("need at least one exponential term")
    eta = exponent_to_pole(R.exponents)
    report = ConvergenceReport()
    n_eps = R.resolution(_MACHINE_EPS_TARGET)

    # The barycentric part must be the class whose index-0 coefficient equals
    # the exponential extension there (sum of the weights); the leftover
    # constant goes into the model's mean offset.
    sum0 = complex(np.sum(R.weights))
    offset = R.constant_term - sum0.real
    report.details["index0_imbalance"] = abs(sum0.imag)

    def attempt(grid_factor):
        n_t = int(min(max(grid_factor * 2 * (2 * n_eps + 1), 64 * m), 2**17))
        x = np.arange(n_t) / n_t
        s = eval_expsum_time(R, x) - offset
        scale = float(np.max(np.abs(s)))
        if scale == 0.0:
            raise TransformError("model is identically constant")
        d_t = _pole_matrix(eta, x, s, scale)
        _, rfac, piv = numkernels.cpqr(d_t)
        return n_t, x, s, scale, d_t, rfac, piv

    def quality(model, x, s, scale):
        err = float(np.max(np.abs(s + offset - eval_bary(model, x))))
        n_int = _interval_pole_count(model.nodes, model.weights, model.node_values)
        return err, n_int

    best = None  # (n_interval, err, model, tag)
    target_err = 1e2 * cfg.tol

    n_t, x, s, scale, d_t, rfac, piv = attempt(1)
    report.details["grid"] = n_t

    # direct route: certified null vector, no oversampling
    idx0 = np.sort(_candidate_nodes(piv, rfac, 2 * m - 1))
    sub = d_t[:, idx0]
    _, sv, vh = numkernels.svd(sub)
    if sv[-1] <= _CERT_RATIO * sv[0] and sv[-2] >= _CERT_GAP * max(sv[-1], 1e-300):
        gamma = vh[-1]
        model = _try_build(x[idx0], gamma, s[idx0], offset)
        if model is not None:
            err, n_int = quality(model, x, s, scale)
            if n_int == 0 and err <= target_err * scale:
                report.m = model.degree
                report.error = err
                report.details.update(K=0, spurious=0)
                return model, report
            best = _better(best, (n_int, err, model, "K0"))
    report.fallbacks.append("K0-uncertified")

    current_gf = 1
    for grid_factor, K in [(1, max(cfg.oversample_K, 1)), (1, 2), (2, 1), (2, 2)]:
        if grid_factor != current_gf:
            n_t, x, s, scale, d_t, rfac, piv = attempt(grid_factor)
            report.fallbacks.append(f"regrid:{n_t}")
            current_gf = grid_factor
        for model, pruned in _oversampled_fit(d_t, rfac, piv, x, s, m, K, offset):
            if model is None:
                report.fallbacks.append(f"K{K}-null-failure")
                continue
            err, n_int = quality(model, x, s, scale)
            if n_int == 0 and err <= target_err * scale:
                report.m = model.degree
                report.error = err
                report.details.update(K=K, spurious=0, pruned=pruned)
                report.details["grid"] = n_t
                return model, report
            best = _better(best, (n_int, err, model, f"K{K}g{grid_factor}"))
            report.fallbacks.append(f"K{K}g{grid_factor}-spurious:{n_int}")

    # last resort: greedy time-domain fit at relaxed tolerance
    from .pronyaaa import fit_pronyaaa

    grid = SampleGrid(x, s + offset)
    for relax in (10.0, 100.0, 1e4):
        tol = min(cfg.tol * relax, 1e-4)
        sub_model, sub_report = fit_pronyaaa(grid, FitConfig(tol=tol, max_degree=cfg.max_degree, seed=cfg.seed))
        err, n_int = quality(sub_model, x, s, scale)
        report.fallbacks.append(f"pronyaaa:{tol:.1e}")
        if n_int == 0 and err <= max(target_err, relax * cfg.tol) * scale:
            report.m = sub_model.degree
            report.error = err
            report.warnings.append("fell-back-to-time-domain-fit")
            report.details.update(K=-1, spurious=0)
            return sub_model, report
        best = _better(best, (n_int, err, sub_model, f"aaa{tol:.0e}"))

    n_int, err, model, tag = best
    report.converged = False
    report.warnings.append(f"fallbacks-exhausted:{tag}")
    report.m = model.degree
    report.error = err
    report.details.update(K=-2, spurious=n_int)
    return model, report


def _better(best, cand):
    if best is None:
        return cand
    return min(best, cand, key=lambda e: (e[0], e[1]))


def _oversampled_fit(d_t, rfac, piv, x, s, m, K, offset):
    """Steps 2-3 of the oversampled route: null-space fit, then pole pruning.

    Yields ``(model, pruned_flag)`` candidates: the pruned 2m-node model
    first, then the unpruned oversampled interpolant (whose 2K surplus pole
    pairs carry near-zero residues, i.e. cancel exactly) as a backstop.
    """
    n_nodes = 2 * m + 2 * K
    if n_nodes - 1 >= len(piv):
        yield None, False
        return
    idx = np.sort(_candidate_nodes(piv, rfac, n_nodes - 1))
    sub = d_t[:, idx]
    _, sv, vh = numkernels.svd(sub, full_matrices=True)
    null_dim = int(np.sum(sv <= _NULLSPACE_RTOL * sv[0]))
    null_dim += max(0, sub.shape[1] - sub.shape[0])
    null_dim = max(null_dim, 1)
    q = vh[-null_dim:].T  # orthonormal null-space basis (real matrix)

    from .pronyaaa import _kernel_cols

    mask = np.ones(x.size, dtype=bool)
    mask[idx] = False
    cols = _kernel_cols(x, x[idx], "cot")
    c = (s[mask, None] - s[idx][None, :]) * cols[mask]
    _, _, vh2 = numkernels.svd(c @ q)
    gamma_t = q @ vh2[-1]

    eta_i, res_i = _all_poles_residues(x[idx], gamma_t, s[idx])
    if eta_i.size == 0:
        yield None, False
        return
    order = np.argsort(np.abs(res_i), kind="stable")
    nodes_left = list(idx)
    removed = 0
    for j in order:
        if removed >= 2 * K or len(nodes_left) <= 2 * m:
            break
        d = np.abs((x[np.asarray(nodes_left)] - eta_i[j].real + 0.5) % 1.0 - 0.5)
        nodes_left.pop(int(np.argmin(d)))
        removed += 1
    idx_final = np.asarray(sorted(nodes_left))
    gamma = _constrained_grid_weights(x, s, idx_final)
    yield _try_build(x[idx_final], gamma, s[idx_final], offset), True

    gamma_full = _constrained_grid_weights(x, s, idx)
    yield _try_build(x[idx], gamma_full, s[idx], offset), False
