"""Documented synthetic signal generators used by tests, scripts, and demos.

Each generator is deterministic (seeded where randomized) and, where
possible, ships a closed-form Fourier-coefficient companion so fits can be
checked against exact spectra.  All signals live on [0, 1).
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "poisson_kernel",
    "poisson_coeffs",
    "folded_sine",
    "bspline_bump",
    "folded_exp_wave",
    "gaussian_bump",
    "gaussian_bump_coeffs",
    "narrow_bump_mixture_coeffs",
    "narrow_bump_mixture",
    "ecg_like_signal",
    "poisson_mixture",
    "whale_like_trill",
]


def poisson_kernel(x, a: float, center: float = 0.0):
    """Periodic Poisson kernel (1-a^2)/(1 - 2a cos(2 pi (x-c)) + a^2).

    Mean one; Fourier coefficients a^|k| e^{-2 pi i k c}.
    """
    x = np.asarray(x, dtype=float)
    return (1.0 - a * a) / (1.0 - 2.0 * a * np.cos(2.0 * np.pi * (x - center)) + a * a)


def poisson_coeffs(k, a: float, center: float = 0.0):
    k = np.asarray(k)
    return a ** np.abs(k) * np.exp(-2j * np.pi * k * center)


def folded_sine(x):
    """|sin(pi(x - 1/2))| - pi/2: one corner per period, at x = 1/2."""
    x = np.asarray(x, dtype=float)
    return np.abs(np.sin(np.pi * (x - 0.5))) - np.pi / 2.0


_BSPLINE_KNOTS = np.array([1.0, 2.0, 3.0, 4.0, 5.0]) / 6.0


def bspline_bump(x):
    """Cubic B-spline on knots {1/6..5/6}, shifted to zero mean, sup-normalized.

    C^2 with third-derivative jumps at the five knots.
    """
    from scipy.interpolate import BSpline

    basis = BSpline.basis_element(_BSPLINE_KNOTS, extrapolate=False)
    x = np.asarray(x, dtype=float)
    v = np.nan_to_num(basis(x), nan=0.0)
    v = v - 1.0 / 6.0  # integral of the basis element over its support
    # closed-form peak of the shifted bump: B(1/2) - 1/6 = 2/3 - 1/6
    return v / (2.0 / 3.0 - 1.0 / 6.0)


def bspline_knots():
    return _BSPLINE_KNOTS.copy()


def folded_exp_wave(x):
    """|sin(2 pi x)/4 + exp(sin(2 pi x)) - 1| / 4, shifted to zero mean.

    The inner expression crosses zero simply at x = 0 and x = 1/2, so the
    fold creates two corners per period; coefficients decay like k^-2.
    """
    x = np.asarray(x, dtype=float)
    s = np.sin(2.0 * np.pi * x)
    v = np.abs(s / 4.0 + np.exp(s) - 1.0) / 4.0
    return v - _FOLDED_EXP_MEAN


# mean of the unshifted fold, from adaptive quadrature split at the corners
_FOLDED_EXP_MEAN = 0.21734953225744655


def gaussian_bump(x, sigma: float, center: float = 0.0, images: int = 6):
    """Periodized normalized Gaussian minus its mean (which is one).

    Coefficients: exp(-2 pi^2 sigma^2 k^2) e^{-2 pi i k c} for k != 0.
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for n in range(-images, images + 1):
        d = x - center - n
        out += np.exp(-d * d / (2.0 * sigma * sigma))
    return out / (np.sqrt(2.0 * np.pi) * sigma) - 1.0


def gaussian_bump_coeffs(k, sigma: float, center: float = 0.0):
    k = np.asarray(k, dtype=float)
    out = np.exp(-2.0 * np.pi**2 * sigma**2 * k * k) * np.exp(-2j * np.pi * k * center)
    return np.where(k == 0, 0.0, out)


# Narrow-bump mixture: the stock "many near-singularities" test signal.
# Amplitudes/widths/centers are frozen so every consumer sees the same data.
_MIX_SEED = 20240817


def _mixture_params(seed: int = _MIX_SEED):
    rng = np.random.default_rng(seed)
    n_gauss = 20
    centers = np.sort(rng.uniform(0.03, 0.97, n_gauss))
    sigmas = rng.uniform(0.003, 0.007, n_gauss)
    amps = rng.uniform(0.5, 1.0, n_gauss) * rng.choice([-1.0, 1.0], n_gauss)
    spike_centers = rng.uniform(0, 1, 2)
    spike_a = rng.uniform(0.93, 0.96, 2)
    spike_amps = rng.uniform(0.3, 0.6, 2) * rng.choice([-1.0, 1.0], 2)
    n_ridge = 6
    ridge_centers = rng.uniform(0.03, 0.97, n_ridge)
    ridge_sigmas = rng.uniform(0.004, 0.009, n_ridge)
    ridge_amps = rng.uniform(0.5, 1.0, n_ridge) * rng.choice([-1.0, 1.0], n_ridge)
    return (centers, sigmas, amps, spike_centers, spike_a, spike_amps,
            ridge_centers, ridge_sigmas, ridge_amps)


def narrow_bump_mixture(x, seed: int = _MIX_SEED, images: int = 4):
    """Mean-zero blend of narrow Gaussian bumps, antisymmetric ridges, and
    two sharp rational spikes.

    Smooth but wildly multiscale: every feature needs its own cluster of
    poles, so high-accuracy exponential-sum fits need on the order of a
    hundred terms.
    """
    (centers, sigmas, amps, sc, sa, samp,
     rcenters, rsigmas, ramps) = _mixture_params(seed)
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for c, s, a in zip(centers, sigmas, amps):
        out += a * s * np.sqrt(2.0 * np.pi) * (gaussian_bump(x, s, c) + 1.0)
    for c, a, amp in zip(sc, sa, samp):
        out += amp * (poisson_kernel(x, a, c) - 1.0)
    for c, s, a in zip(rcenters, rsigmas, ramps):
        for n in range(-images, images + 1):
            d = x - c - n
            out += a * (d / s) * np.exp(-d * d / (2.0 * s * s))
    mean = np.sum(amps * sigmas * np.sqrt(2.0 * np.pi))
    return out - mean


def narrow_bump_mixture_coeffs(k, seed: int = _MIX_SEED):
    """Exact Fourier coefficients of :func:`narrow_bump_mixture`."""
    (centers, sigmas, amps, sc, sa, samp,
     rcenters, rsigmas, ramps) = _mixture_params(seed)
    k = np.asarray(k, dtype=float)
    out = np.zeros(k.shape, dtype=complex)
    for c, s, a in zip(centers, sigmas, amps):
        scale = a * s * np.sqrt(2.0 * np.pi)
        out += scale * np.exp(-2.0 * np.pi**2 * s * s * k * k) * np.exp(-2j * np.pi * k * c)
    for c, a, amp in zip(sc, sa, samp):
        out += amp * np.where(k == 0, 0.0, a ** np.abs(k) * np.exp(-2j * np.pi * k * c))
    for c, s, a in zip(rcenters, rsigmas, ramps):
        # (d/s) exp(-d^2/2s^2) = -s * d/dx exp(-d^2/2s^2); periodized
        out += (
            a * (-2j * np.pi * k) * s * s * np.sqrt(2.0 * np.pi)
            * np.exp(-2.0 * np.pi**2 * s * s * k * k) * np.exp(-2j * np.pi * k * c)
        )
    out[k == 0] = 0.0
    return out


def ecg_like_signal(n: int = 645, noise: float = 1e-3, seed: int = 7, beats: int = 2,
                    return_centers: bool = False):
    """Synthetic heartbeat-like trace: narrow Gaussian complexes plus noise.

    Per beat: a tall sharp spike flanked by dips, a notch, and broad low
    waves (seven bumps per beat); mean removed; unit sup norm before noise.
    Returns ``(x, noisy, clean)``, plus the bump-core centers when
    ``return_centers`` is set (denoising error concentrates there).
    """
    x = np.arange(n) / n
    rng = np.random.default_rng(seed)
    clean = np.zeros_like(x)
    centers = []
    for b in range(beats):
        base = (b + 0.5) / beats
        shapes = [
            (base - 0.12 / beats, 0.025 / beats, 0.18),   # low broad wave
            (base - 0.018 / beats, 0.007 / beats, -0.12), # dip
            (base, 0.004 / beats, 1.0),                   # dominant spike
            (base + 0.02 / beats, 0.007 / beats, -0.15),  # dip
            (base + 0.055 / beats, 0.006 / beats, 0.09),  # notch
            (base + 0.13 / beats, 0.03 / beats, 0.32),    # recovery wave
            (base + 0.30 / beats, 0.05 / beats, 0.10),    # baseline ripple
        ]
        for c, s, a in shapes:
            clean += a * np.exp(-((x - c + 0.5) % 1.0 - 0.5) ** 2 / (2 * s * s))
            centers.append(c % 1.0)
    clean -= np.mean(clean)
    clean /= np.max(np.abs(clean))
    noisy = clean + noise * rng.standard_normal(n)
    if return_centers:
        return x, noisy, clean, np.asarray(centers)
    return x, noisy, clean


def poisson_mixture(x, seed: int = 3):
    """Mean-zero blend of three smooth rational spikes (for gap imputation).

    Exactly a short trigonometric rational, so fits extrapolate stably
    across deleted regions.
    """
    rng = np.random.default_rng(seed)
    centers = np.sort(rng.uniform(0.05, 0.95, 3))
    a = rng.uniform(0.55, 0.8, 3)
    amps = rng.uniform(0.4, 1.0, 3) * np.array([1.0, -1.0, 1.0])
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for c, aa, amp in zip(centers, a, amps):
        out += amp * (poisson_kernel(x, aa, c) - 1.0)
    return out


def whale_like_trill(n: int = 6001, noise: float = 5e-3, seed: int = 12):
    """Chirpy pulse train with additive noise (acoustic-recording stand-in).

    Returns ``(x, noisy, clean)``; several enveloped chirps of increasing
    carrier frequency, mean removed, unit sup norm before noise.
    """
    x = np.arange(n) / n
    rng = np.random.default_rng(seed)
    clean = np.zeros_like(x)
    for p in range(6):
        c = 0.08 + 0.15 * p
        width = 0.02 + 0.004 * p
        f0 = 40.0 + 25.0 * p
        sweep = 120.0
        env = np.exp(-((x - c) ** 2) / (2 * width * width))
        clean += env * np.sin(2 * np.pi * (f0 * (x - c) + 0.5 * sweep * (x - c) ** 2))
    clean -= np.mean(clean)
    clean /= np.max(np.abs(clean))
    noisy = clean + noise * rng.standard_normal(n)
    return x, noisy, clean
