"""Adaptive trigonometric rational fitting for sampled periodic signals.

Two interchangeable model forms are provided: a barycentric trigonometric
rational interpolant in time (:class:`~trigfit.core.TrigRational`) and a
short sum of decaying complex exponentials modeling the Fourier coefficients
(:class:`~trigfit.core.ExpSum`).  Fitters for each (greedy interpolation and
a regularized Prony method), stable transforms between them, and a calculus
and algebra toolkit operate on top.
"""

__version__ = "0.1.0"

from .core import (
    ExpSum,
    FitConfig,
    PoleSet,
    SampleGrid,
    TrigRational,
    eval_bary,
    eval_expsum,
    eval_expsum_time,
    fourier_coeffs,
    epsilon_resolution,
    TrigfitError,
    GridError,
    DegenerateInputError,
    InvalidModelError,
    TransformError,
    EmptyIntervalError,
)
from .pronyaaa import fit_pronyaaa, cleanup, solve_weights_full, solve_weights_half
from .rpm import fit_rpm, auto_tol, prony_roots, vandermonde_ls
from .transforms import ft, ift
from .algebra import compress, add_expsum, add_rfun, conv, mul, corr, scale_expsum
from .calculus import (
    diff_bary,
    derivative,
    derivative_model,
    diff_expsum,
    cumsum_expsum,
    cumsum_expsum_time,
    cumsum_bary,
    definite_sum,
    roots,
    poles_and_residues,
    find_extrema,
    extrema,
)
from .pipelines import denoise_superresolve, undersampled_fit
from .report import ConvergenceReport

__all__ = [
    "__version__",
    "ExpSum",
    "FitConfig",
    "PoleSet",
    "SampleGrid",
    "TrigRational",
    "eval_bary",
    "eval_expsum",
    "eval_expsum_time",
    "fourier_coeffs",
    "epsilon_resolution",
    "fit_pronyaaa",
    "cleanup",
    "solve_weights_full",
    "solve_weights_half",
    "fit_rpm",
    "auto_tol",
    "prony_roots",
    "vandermonde_ls",
    "ft",
    "ift",
    "compress",
    "add_expsum",
    "add_rfun",
    "conv",
    "mul",
    "corr",
    "scale_expsum",
    "diff_bary",
    "derivative",
    "derivative_model",
    "diff_expsum",
    "cumsum_expsum",
    "cumsum_expsum_time",
    "cumsum_bary",
    "definite_sum",
    "roots",
    "poles_and_residues",
    "find_extrema",
    "extrema",
    "denoise_superresolve",
    "undersampled_fit",
    "ConvergenceReport",
    "TrigfitError",
    "GridError",
    "DegenerateInputError",
    "InvalidModelError",
    "TransformError",
    "EmptyIntervalError",
]
