"""Core representations for periodic signal models.

Two interchangeable forms are maintained:

* :class:`TrigRational` -- a barycentric trigonometric rational interpolant in
  the time domain (nodes, weights, node values, plus an explicit mean offset),
  evaluated stably through the cot-kernel quotient.
* :class:`ExpSum` -- a sum of weighted decaying complex exponentials modeling
  the nonnegative-index Fourier coefficients, with the index-0 coefficient
  stored separately so signals with nonzero mean are representable.

The module also houses sampled-signal containers, Fourier sampling, and the
bandwidth (resolution) estimate used throughout the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import numkernels
from .numkernels import NumericalError

__all__ = [
    "SampleGrid",
    "FitConfig",
    "TrigRational",
    "ExpSum",
    "PoleSet",
    "eval_bary",
    "eval_expsum",
    "eval_expsum_time",
    "fourier_coeffs",
    "epsilon_resolution",
    "TrigfitError",
    "GridError",
    "DegenerateInputError",
    "InvalidModelError",
    "TransformError",
    "EmptyIntervalError",
    "NumericalError",
]

# Circular distance below which evaluation snaps to the node value (the cot
# kernel blows up there; this is the double-precision ulp scale).
NODE_SNAP_TOL = 1e-14

# Relative tolerance on the numerator-degree constraint sum(w*f) = 0.
CONSTRAINT_RTOL = 1e-10

# Minimal modulus separation between exponential bases of distinct terms.
EXPONENT_SEP_TOL = 1e-13


class TrigfitError(Exception):
    """Base class for errors raised by this package."""


class GridError(TrigfitError):
    """Operation requires a grid property (e.g. equispacing) that fails."""


class DegenerateInputError(TrigfitError):
    """Input data carries no fittable structure (e.g. all values equal)."""


class InvalidModelError(TrigfitError):
    """Model parameters violate a representation invariant."""


class TransformError(TrigfitError):
    """A representation transform could not be carried out."""


class EmptyIntervalError(TrigfitError):
    """An integration interval with a > b was requested."""


# ----------------------------------------------------------------------------
# periodic kernels


def cot_pi(w):
    """cot(pi*w), stable for real and complex arguments.

    For complex ``w`` the exponential form ``i(mu+1)/(mu-1)`` with
    ``mu = exp(2*pi*i*w)`` is used on the side of the real axis where ``mu``
    decays, so arguments far from the axis neither overflow nor lose accuracy.
    """
    w = np.asarray(w)
    if not np.iscomplexobj(w):
        return np.cos(np.pi * w) / np.sin(np.pi * w)
    scalar = w.ndim == 0
    w = np.atleast_1d(w)
    out = np.empty(w.shape, dtype=complex)
    up = w.imag >= 0
    mu = np.exp(2j * np.pi * w[up])
    out[up] = 1j * (mu + 1.0) / (mu - 1.0)
    mu_inv = np.exp(-2j * np.pi * w[~up])
    out[~up] = 1j * (1.0 + mu_inv) / (1.0 - mu_inv)
    return complex(out[0]) if scalar else out


def csc2_pi(w):
    """csc^2(pi*w) = 1/sin^2(pi*w), stable like :func:`cot_pi`."""
    w = np.asarray(w)
    if not np.iscomplexobj(w):
        s = np.sin(np.pi * w)
        return 1.0 / (s * s)
    scalar = w.ndim == 0
    w = np.atleast_1d(w)
    out = np.empty(w.shape, dtype=complex)
    up = w.imag >= 0
    mu = np.exp(2j * np.pi * w[up])
    out[up] = -4.0 * mu / (mu - 1.0) ** 2
    mu_inv = np.exp(-2j * np.pi * w[~up])
    out[~up] = -4.0 * mu_inv / (1.0 - mu_inv) ** 2
    return complex(out[0]) if scalar else out


def circular_distance(x, t):
    """Distance on the unit circle between points of [0, 1)."""
    d = np.abs(np.asarray(x) - np.asarray(t)) % 1.0
    return np.minimum(d, 1.0 - d)


# ----------------------------------------------------------------------------
# containers


@dataclass(frozen=True)
class SampleGrid:
    """Sampled periodic signal: locations in [0, 1) with real values.

    Locations must be strictly increasing; gaps and non-uniform spacing are
    allowed.  ``equispaced`` is detected automatically (j/n within
    1e-12/n) unless passed explicitly.
    """

    locations: np.ndarray
    values: np.ndarray
    equispaced: bool = None  # type: ignore[assignment]

    def __post_init__(self):
        loc = np.ascontiguousarray(self.locations, dtype=float)
        val = np.ascontiguousarray(self.values, dtype=float)
        if loc.ndim != 1 or val.ndim != 1 or loc.shape != val.shape:
            raise GridError("locations and values must be 1-D of equal length")
        if loc.size < 4:
            raise GridError("need at least 4 samples")
        if np.any(loc < 0.0) or np.any(loc >= 1.0):
            raise GridError("locations must lie in [0, 1)")
        if np.any(np.diff(loc) <= 0.0):
            raise GridError("locations must be strictly increasing")
        if not np.all(np.isfinite(val)):
            raise GridError("values must be finite")
        eq = self.equispaced
        if eq is None:
            n = loc.size
            eq = bool(np.max(np.abs(loc - np.arange(n) / n)) <= 1e-12 / n)
        loc.setflags(write=False)
        val.setflags(write=False)
        object.__setattr__(self, "locations", loc)
        object.__setattr__(self, "values", val)
        object.__setattr__(self, "equispaced", bool(eq))

    @classmethod
    def equispaced_from_values(cls, values):
        values = np.asarray(values, dtype=float)
        n = values.size
        return cls(np.arange(n) / n, values)

    @property
    def size(self) -> int:
        return self.locations.size


@dataclass(frozen=True)
class FitConfig:
    """Knobs shared by the fitting and transform routines."""

    tol: float = 1e-9
    max_degree: int = 150
    oversample_K: int = 1
    coeff_fit_M: int = 2
    auto_tol: bool = False
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.tol < 1.0):
            raise ValueError("tol must lie in (0, 1)")
        if self.max_degree < 1:
            raise ValueError("max_degree must be >= 1")
        if self.oversample_K < 0:
            raise ValueError("oversample_K must be >= 0")
        if self.coeff_fit_M < 1:
            raise ValueError("coeff_fit_M must be >= 1")

    def rng(self, salt: int = 0) -> np.random.Generator:
        return np.random.default_rng(np.random.PCG64(self.seed + salt))


@dataclass(frozen=True)
class PoleSet:
    """Upper-half-plane pole locations with residues.

    ``poles[j]`` has real part in [0, 1) and strictly positive imaginary
    part; the lower-half-plane partners are implied by conjugation and never
    stored.  ``residues[j]`` is the residue of the cot-kernel quotient at the
    pole (the simple-pole coefficient n(eta)/d'(eta)).
    """

    poles: np.ndarray
    residues: np.ndarray

    def __post_init__(self):
        p = np.ascontiguousarray(self.poles, dtype=complex)
        r = np.ascontiguousarray(self.residues, dtype=complex)
        if p.shape != r.shape or p.ndim != 1:
            raise InvalidModelError("poles and residues must be 1-D of equal length")
        if p.size and (np.any(p.imag <= 0.0) or np.any(p.real < 0.0) or np.any(p.real >= 1.0)):
            raise InvalidModelError("poles must have Im > 0 and Re in [0, 1)")
        p.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "poles", p)
        object.__setattr__(self, "residues", r)

    @property
    def size(self) -> int:
        return self.poles.size

    def z_points(self) -> np.ndarray:
        """Unit-disk images exp(2*pi*i*poles) of the stored poles."""
        return np.exp(2j * np.pi * self.poles)


# ----------------------------------------------------------------------------
# pole/root pencil (shared by the eager pole cache and the calculus module)


def _pencil(nodes, weights, last_row):
    """Generalized eigenvalue pencil whose finite eigenvalues are exp(2*pi*i*s)
    at the solutions s of  sum_j weights[j]*last_row[j]*cot(pi*(s - nodes[j])) = 0.
    """
    n = nodes.size
    tau = np.exp(2j * np.pi * nodes)
    e = np.zeros((n + 1, n + 1), dtype=complex)
    b = np.zeros((n + 1, n + 1), dtype=complex)
    e[np.arange(n), np.arange(n)] = tau
    e[:n, n] = 1j * weights * tau
    e[n, :n] = last_row
    b[np.arange(n), np.arange(n)] = 1.0
    b[:n, n] = -1j * weights
    return e, b


def _mu_to_plane(mu):
    """Map pencil eigenvalues exp(2*pi*i*s) to s with Re(s) in [0, 1)."""
    re = (np.angle(mu) / (2.0 * np.pi)) % 1.0
    re[re >= 1.0] = 0.0  # guard the rounding of tiny negative angles
    with np.errstate(divide="ignore"):
        im = -np.log(np.abs(mu)) / (2.0 * np.pi)
    return re + 1j * im


def _all_poles_residues(nodes, weights, values):
    """All finite denominator zeros of the cot quotient, with residues.

    Returns ``(eta, res)`` over both half planes (near-real poles included);
    the residue is n(eta)/d'(eta) for the mean-zero quotient n/d.
    """
    e, b = _pencil(nodes, weights, np.ones_like(nodes))
    mu, _ = numkernels.gen_eig(e, b)
    mu = mu[np.abs(mu) > 1e-12]
    eta = _mu_to_plane(mu)
    if eta.size == 0:
        return eta, eta.copy()
    diff = eta[:, None] - nodes[None, :]
    # Res = n(eta)/d'(eta) for the simple zero eta of d, with
    # d'(x) = -pi * sum_j w_j csc^2(pi*(x - t_j)).
    dprime = -np.pi * (csc2_pi(diff) @ weights)
    nvals = cot_pi(diff) @ (weights * values)
    res = nvals / dprime
    return eta, res


# ----------------------------------------------------------------------------
# barycentric trigonometric rational


@dataclass(frozen=True)
class TrigRational:
    """Barycentric trigonometric rational with an explicit mean offset.

    The mean-zero part is  n(x)/d(x)  with
    ``n(x) = sum_j weights[j]*node_values[j]*cot(pi*(x - nodes[j]))`` and
    ``d(x) = sum_j weights[j]*cot(pi*(x - nodes[j]))``; evaluation adds
    ``mean_offset``.  The node count is even and the constraint
    ``sum_j weights[j]*node_values[j] = 0`` keeps the numerator one degree
    below the denominator.  Instances are immutable; the pole cache is
    computed eagerly at construction.
    """

    nodes: np.ndarray
    weights: np.ndarray
    node_values: np.ndarray
    mean_offset: float = 0.0
    pole_cache: Optional[PoleSet] = None

    def __post_init__(self):
        t = np.ascontiguousarray(self.nodes, dtype=float)
        w = np.asarray(self.weights)
        f = np.ascontiguousarray(self.node_values, dtype=float)
        if np.iscomplexobj(w):
            if np.max(np.abs(w.imag)) > 0.0:
                raise InvalidModelError("weights must be real")
            w = w.real
        w = np.ascontiguousarray(w, dtype=float)
        if t.ndim != 1 or t.shape != w.shape or t.shape != f.shape:
            raise InvalidModelError("nodes/weights/node_values must be 1-D, equal length")
        if t.size < 2 or t.size % 2:
            raise InvalidModelError("node count must be even and >= 2")
        if np.any(t < 0.0) or np.any(t >= 1.0):
            raise InvalidModelError("nodes must lie in [0, 1)")
        if np.unique(t).size != t.size:
            raise InvalidModelError("nodes must be pairwise distinct")
        if not np.any(w != 0.0):
            raise InvalidModelError("weights must not all vanish")
        gf = w * f
        denom = np.sum(np.abs(gf))
        if denom > 0.0 and abs(np.sum(gf)) > CONSTRAINT_RTOL * denom:
            raise InvalidModelError(
                "numerator-degree constraint violated: |sum(w*f)| = "
                f"{abs(np.sum(gf)):.3e} vs {CONSTRAINT_RTOL:.0e} * {denom:.3e}"
            )
        for a in (t, w, f):
            a.setflags(write=False)
        object.__setattr__(self, "nodes", t)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "node_values", f)
        object.__setattr__(self, "mean_offset", float(self.mean_offset))
        if self.pole_cache is None:
            eta, res = _all_poles_residues(t, w, f)
            keep = eta.imag > 0.0
            order = np.argsort(-eta[keep].imag, kind="stable")
            object.__setattr__(
                self, "pole_cache", PoleSet(eta[keep][order], res[keep][order])
            )

    @property
    def degree(self) -> int:
        """Denominator degree m (half the node count)."""
        return self.nodes.size // 2

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.node_values)) + abs(self.mean_offset))

    def all_poles(self):
        """Finite poles over both half planes (includes near-real ones)."""
        return _all_poles_residues(self.nodes, self.weights, self.node_values)

    def __call__(self, x):
        return eval_bary(self, x)


def eval_bary(r: TrigRational, x):
    """Evaluate the rational at ``x`` (scalar or array), periodic in x.

    Points within ``NODE_SNAP_TOL`` circular distance of a node return the
    stored node value (plus the mean offset) exactly.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    xv = np.atleast_1d(x) % 1.0
    if not np.any(r.node_values != 0.0):
        # numerator identically zero: the model is the constant offset
        out = np.full(xv.shape, r.mean_offset)
        return float(out[0]) if scalar else out
    diff = xv[:, None] - r.nodes[None, :]
    dist = np.abs(diff) % 1.0
    dist = np.minimum(dist, 1.0 - dist)
    hit = dist <= NODE_SNAP_TOL
    at_node = hit.any(axis=1)
    out = np.empty(xv.shape, dtype=float)
    if np.any(at_node):
        idx = np.argmax(hit[at_node], axis=1)
        out[at_node] = r.node_values[idx] + r.mean_offset
    free = ~at_node
    if np.any(free):
        c = cot_pi(diff[free])
        num = c @ (r.weights * r.node_values)
        den = c @ r.weights
        out[free] = num / den + r.mean_offset
    return float(out[0]) if scalar else out


# ----------------------------------------------------------------------------
# exponential-sum coefficient model


@dataclass(frozen=True)
class ExpSum:
    """Decaying complex-exponential model of Fourier coefficients.

    The coefficient at index ``k >= 1`` is ``sum_j weights[j]*exp(exponents[j]*k)``
    with ``Re(exponents) < 0``; index 0 is ``constant_term`` (stored
    separately so mean-nonzero signals are representable), and negative
    indices are the conjugates of positive ones, which makes the represented
    time signal real by construction.
    """

    weights: np.ndarray
    exponents: np.ndarray
    constant_term: float = 0.0

    def __post_init__(self):
        w = np.ascontiguousarray(self.weights, dtype=complex)
        a = np.ascontiguousarray(self.exponents, dtype=complex)
        if w.ndim != 1 or w.shape != a.shape:
            raise InvalidModelError("weights and exponents must be 1-D, equal length")
        if w.size:
            if np.any(w == 0.0):
                raise InvalidModelError("weights must be nonzero (drop vanishing terms)")
            if np.any(a.real >= 0.0):
                raise InvalidModelError("exponents must have Re < 0 (decaying terms)")
            z = np.exp(a)
            if w.size > 1:
                sep = np.abs(z[:, None] - z[None, :])
                sep[np.diag_indices_from(sep)] = np.inf
                if np.min(sep) < EXPONENT_SEP_TOL:
                    raise InvalidModelError(
                        "exponential bases closer than the separation tolerance; merge terms"
                    )
        w.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "exponents", a)
        object.__setattr__(self, "constant_term", float(self.constant_term))
        object.__setattr__(self, "_resolution_memo", {})

    @property
    def n_terms(self) -> int:
        return self.weights.size

    def tail(self, k):
        """Pure exponential part ``sum_j w_j exp(a_j k)`` for k >= 0.

        Unlike coefficient evaluation, ``tail(0)`` is ``sum(weights)`` (the
        value the exponential model extends to at index 0); used by the
        recompression machinery, which operates on the decaying part only.
        """
        k = np.asarray(k)
        if self.n_terms == 0:
            out = np.zeros(k.shape, dtype=complex)
            return complex(out) if k.ndim == 0 else out
        out = np.exp(np.multiply.outer(k, self.exponents)) @ self.weights
        return complex(out) if k.ndim == 0 else out

    def resolution(self, eps: float) -> int:
        """Cached :func:`epsilon_resolution` of this sum."""
        memo = object.__getattribute__(self, "_resolution_memo")
        if eps not in memo:
            memo[eps] = epsilon_resolution(self, eps)
        return memo[eps]

    def __call__(self, k):
        return eval_expsum(self, k)


def eval_expsum(R: ExpSum, k):
    """Coefficient at integer index ``k`` (scalar or array).

    ``k > 0`` evaluates the exponential sum, ``k = 0`` returns the stored
    constant, and ``k < 0`` returns the conjugate of the value at ``-k``.
    """
    k = np.asarray(k)
    scalar = k.ndim == 0
    kv = np.atleast_1d(k).astype(float)
    out = np.zeros(kv.shape, dtype=complex)
    out[kv == 0] = complex(R.constant_term)
    pos = kv > 0
    neg = kv < 0
    if R.n_terms:
        if np.any(pos):
            out[pos] = np.exp(np.multiply.outer(kv[pos], R.exponents)) @ R.weights
        if np.any(neg):
            out[neg] = np.conj(
                np.exp(np.multiply.outer(-kv[neg], R.exponents)) @ R.weights
            )
    return complex(out[0]) if scalar else out


def eval_expsum_time(R: ExpSum, x):
    """Time-domain evaluation: the pointwise limit of the symmetric partial
    Fourier sums, computed through the closed form of the two geometric tails.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    xv = np.atleast_1d(x)
    out = np.full(xv.shape, R.constant_term, dtype=float)
    if R.n_terms:
        z = np.exp(R.exponents[None, :] + 2j * np.pi * xv[:, None])
        out = out + 2.0 * np.real((z / (1.0 - z)) @ R.weights)
    return float(out[0]) if scalar else out


def fourier_coeffs(g: SampleGrid) -> np.ndarray:
    """Discrete Fourier coefficients (indices 0..N) of an equispaced grid.

    Normalized so that ``y_j = sum_{k=-N}^{N} c_k exp(2*pi*i*k*x_j)`` with
    ``c_{-k} = conj(c_k)``; the index-0 coefficient is real.  The grid must be
    equispaced with odd length 2N+1; other grids must be fit in the time
    domain instead.
    """
    if not g.equispaced:
        raise GridError("fourier_coeffs needs an equispaced grid; resample or fit in time domain")
    n = g.size
    if n % 2 == 0:
        raise GridError("fourier_coeffs needs an odd sample count 2N+1")
    c = numkernels.dft(g.values)
    half = (n - 1) // 2
    out = c[: half + 1].copy()
    out[0] = out[0].real
    return out


def epsilon_resolution(R: ExpSum, eps: float) -> int:
    """Smallest N >= 0 with ``2 * sum_{k>N} |coeff(k)| <= eps``.

    Uses the closed-form geometric tail bound
    ``sum_{k>N} |w| exp(Re(a) k) = |w| exp(Re(a)(N+1)) / (1 - exp(Re(a)))``
    summed over terms (an upper bound on the true tail).
    """
    if not (0.0 < eps < 1.0):
        raise ValueError("eps must lie in (0, 1)")
    if R.n_terms == 0:
        return 0
    b = np.abs(R.weights)
    rho = np.exp(R.exponents.real)

    def tail(n):
        return 2.0 * float(np.sum(b * rho ** (n + 1) / (1.0 - rho)))

    if tail(0) <= eps:
        return 0
    # exponential search for an upper bracket, then bisection
    hi = 1
    while tail(hi) > eps:
        hi *= 2
        if hi > 2**40:  # pragma: no cover - decay guaranteed by Re(a) < 0
            raise NumericalError("epsilon_resolution failed to bracket the tail")
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if tail(mid) <= eps:
            hi = mid
        else:
            lo = mid
    return hi
