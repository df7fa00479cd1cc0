"""Composite workflows combining the time- and frequency-domain fitters.

``denoise_superresolve`` runs the frequency-domain fitter as a noise filter
and reconstructs a barycentric model from the filtered spectrum, whose
extrapolation beyond the data's Nyquist index enriches the reconstruction.
``undersampled_fit`` goes the other way: interpolate first in time (immune
to coefficient aliasing), then read the coefficient model off the fit.
"""

from __future__ import annotations

import numpy as np

from .core import ExpSum, FitConfig, GridError, SampleGrid, fourier_coeffs
from .pronyaaa import fit_pronyaaa
from .rpm import fit_rpm
from .transforms import ft, ift
from .report import ConvergenceReport

__all__ = ["denoise_superresolve", "undersampled_fit"]


def denoise_superresolve(grid: SampleGrid, tol: float, cfg: FitConfig = None):
    """Filter noisy equispaced samples and reconstruct both representations.

    Removes the sample mean, fits the coefficient model at the given
    tolerance (which absorbs coefficient noise at or below that level), and
    inverts it; the inverse transform samples the model's coefficients well
    beyond the data's Nyquist index, so the reconstruction grid carries
    extrapolated high-frequency content.  Returns ``(ExpSum, TrigRational,
    report)``; non-convergence of the coefficient fit is propagated in the
    report with guidance to raise the tolerance.
    """
    if not grid.equispaced:
        raise GridError("denoising pipeline needs an equispaced grid")
    if grid.size % 2 == 0:
        raise GridError("need an odd sample count 2N+1 for the coefficient path")
    cfg = cfg or FitConfig()
    cfg = FitConfig(tol=tol, max_degree=cfg.max_degree, oversample_K=cfg.oversample_K,
                    coeff_fit_M=cfg.coeff_fit_M, auto_tol=cfg.auto_tol, seed=cfg.seed)
    mean = float(np.mean(grid.values))
    v = fourier_coeffs(SampleGrid(grid.locations, grid.values - mean))
    R0, rpm_report = fit_rpm(v, cfg)
    report = ConvergenceReport(converged=rpm_report.converged, m=R0.n_terms,
                               error=rpm_report.error)
    report.merge_prefixed(rpm_report, "rpm")
    if not rpm_report.converged:
        report.warnings.append("rpm-non-converged: raise tol")
    R = ExpSum(R0.weights, R0.exponents, R0.constant_term + mean)
    nyquist = (grid.size - 1) // 2
    report.details["data_nyquist"] = nyquist
    if R.n_terms:
        report.details["enriched_bandwidth"] = R.resolution(1e-13)
        r, ift_report = ift(R, cfg)
        report.merge_prefixed(ift_report, "ift")
        report.details["ift_error"] = ift_report.error
        report.m = R.n_terms
        report.converged = report.converged and ift_report.converged
    else:
        raise GridError("coefficient fit returned an empty model; raise tol")
    return R, r, report


def undersampled_fit(grid: SampleGrid, tol: float, cfg: FitConfig = None,
                     recompress_eps: float = None):
    """Interpolate in time, then transform to the coefficient model.

    Time-domain interpolation is not limited by the coefficient aliasing of
    a coarse grid, so the transformed model extrapolates the spectrum more
    accurately than fitting the aliased coefficients directly.  With
    ``recompress_eps`` (absolute, coefficient units) a terminal Prony refit
    over the data bandwidth replaces the transform's pole set with a
    near-minimal one at that level, shortening the model without the
    accuracy loss of plain term dropping.  Returns ``(ExpSum, report)``.
    """
    cfg = cfg or FitConfig()
    cfg = FitConfig(tol=tol, max_degree=cfg.max_degree, oversample_K=cfg.oversample_K,
                    coeff_fit_M=cfg.coeff_fit_M, auto_tol=cfg.auto_tol, seed=cfg.seed)
    r, aaa_report = fit_pronyaaa(grid, cfg)
    report = ConvergenceReport(converged=aaa_report.converged, m=aaa_report.m,
                               error=aaa_report.error)
    report.merge_prefixed(aaa_report, "pronyaaa")
    R, ft_report = ft(r, cfg)
    report.merge_prefixed(ft_report, "ft")
    report.m = R.n_terms
    report.converged = report.converged and ft_report.converged
    report.details["time_m"] = r.degree
    if recompress_eps is not None and R.n_terms:
        n_data = (grid.size - 1) // 2
        v = np.asarray(R(np.arange(n_data + 1)))
        v[0] = v[0].real
        R, rec_report = fit_rpm(v, cfg, abs_tol=recompress_eps)
        report.merge_prefixed(rec_report, "recompress")
        report.m = R.n_terms
        report.converged = report.converged and rec_report.converged
    return R, report
