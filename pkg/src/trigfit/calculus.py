"""Differentiation, integration, rootfinding, polefinding, and extrema.

Derivatives of the barycentric form follow the closed-form quotient rule for
the linearized identity ``(r*d)^(k) = n^(k)`` away from the nodes; at the
nodes the values come from the trigonometric differentiation matrices.  The
exponential-sum side differentiates and integrates coefficientwise.  Roots
and poles are generalized eigenvalues of a small matrix pencil built from the
nodes, weights, and node values.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from . import numkernels
from .core import (
    ExpSum,
    FitConfig,
    InvalidModelError,
    EmptyIntervalError,
    PoleSet,
    SampleGrid,
    TrigRational,
    _mu_to_plane,
    _pencil,
    circular_distance,
    cot_pi,
    csc2_pi,
    eval_bary,
    eval_expsum,
)

__all__ = [
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
    "ExtremaResult",
]

# Distance (circular) below which derivative evaluation switches to the
# node-value branch.
_NODE_BAND = 1e-9

# Eigenvalues below this modulus are the structural zero of the root pencil.
_ZERO_EIG_CUTOFF = 1e-12

# Roots with |Im| above this are not counted as real.
_REAL_ROOT_BAND = 1e-10

# |r''| below this relative size classifies a stationary point as flat.
_FLAT_CURVATURE = 1e-6

# Returned real roots must satisfy |r(zeta)| <= this factor times the scale.
_ROOT_CERT = 1e-8


def _cot_derivative_polys(order):
    """Coefficient arrays of P_n with d^n/dy^n cot(pi*y) = P_n(cot(pi*y)).

    Generated by P_0(c) = c and P_{n+1} = -pi*(1 + c^2) * dP_n/dc.
    """
    polys = [np.array([0.0, 1.0])]  # P_0(c) = c
    for _ in range(order):
        p = polys[-1]
        dp = np.polynomial.polynomial.polyder(p)
        nxt = -np.pi * np.polynomial.polynomial.polymul(
            np.array([1.0, 0.0, 1.0]), dp
        )
        polys.append(nxt)
    return polys


class DerivativeEvaluator:
    """Callable evaluating the k-th derivative of a barycentric rational.

    Off the nodes the derivatives follow from repeatedly differentiating the
    linearization ``r * d = n``; within ``1e-9`` (circular) of a node, orders
    one and two use the node differentiation matrices and higher orders
    evaluate at a slightly offset point.
    """

    def __init__(self, model: TrigRational, order: int = 1):
        if order < 1:
            raise ValueError("order must be >= 1")
        self.model = model
        self.order = order
        self._polys = _cot_derivative_polys(order)
        self._node_d1, self._node_d2 = self._node_derivatives()

    def _node_derivatives(self):
        t = self.model.nodes
        g = self.model.weights
        f = self.model.node_values
        diff = t[:, None] - t[None, :]
        np.fill_diagonal(diff, np.nan)
        with np.errstate(invalid="ignore", divide="ignore"):
            cot = np.cos(np.pi * diff) / np.sin(np.pi * diff)
            csc2 = 1.0 / np.sin(np.pi * diff) ** 2
        np.fill_diagonal(cot, 0.0)
        np.fill_diagonal(csc2, 0.0)
        df = f[None, :] - f[:, None]
        n0 = np.sum(g[None, :] * df * cot, axis=1)
        d0 = np.sum(g[None, :] * cot, axis=1)
        n1 = -np.pi * np.sum(g[None, :] * df * csc2, axis=1)
        r1 = (np.pi / g) * n0
        r2 = (2.0 * np.pi / g) * (n1 - r1 * d0)
        return r1, r2

    def _off_node(self, x):
        t = self.model.nodes
        g = self.model.weights
        f = self.model.node_values
        diff = x[:, None] - t[None, :]
        c = np.cos(np.pi * diff) / np.sin(np.pi * diff)
        # kernel derivative stack: K[k] = d^k/dx^k cot(pi*(x - t_j))
        kmax = self.order
        kder = [c]
        for k in range(1, kmax + 1):
            kder.append(np.polynomial.polynomial.polyval(c, self._polys[k]))
        n_der = [kd @ (g * f) for kd in kder]
        d_der = [kd @ g for kd in kder]
        r = [n_der[0] / d_der[0]]
        for k in range(1, kmax + 1):
            acc = n_der[k].copy()
            for ell in range(1, k + 1):
                acc -= comb(k, ell) * r[k - ell] * d_der[ell]
            r.append(acc / d_der[0])
        return r[kmax]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        xv = np.atleast_1d(x) % 1.0
        out = np.empty(xv.shape)
        dist = circular_distance(xv[:, None], self.model.nodes[None, :])
        near = dist.min(axis=1) <= _NODE_BAND
        if np.any(near):
            idx = np.argmin(dist[near], axis=1)
            if self.order == 1:
                out[near] = self._node_d1[idx]
            elif self.order == 2:
                out[near] = self._node_d2[idx]
            else:
                # no closed node formula kept beyond order 2: nudge off the node
                out[near] = self._off_node(self.model.nodes[idx] + 64 * _NODE_BAND)
        if np.any(~near):
            out[~near] = self._off_node(xv[~near])
        return float(out[0]) if scalar else out


def derivative(model: TrigRational, order: int = 1) -> DerivativeEvaluator:
    """Derivative evaluator (function-handle contract, not a new model)."""
    return DerivativeEvaluator(model, order)


def diff_bary(model: TrigRational, x, order: int = 1):
    """Value of the k-th derivative at ``x`` (nodes handled by matrices)."""
    return DerivativeEvaluator(model, order)(x)


def derivative_model(model: TrigRational, order: int = 1, cfg: FitConfig = FitConfig(tol=1e-8)):
    """Refit the derivative as a new barycentric model via the greedy fitter."""
    from .pronyaaa import fit_pronyaaa

    n = max(4096, 16 * model.nodes.size)
    x = np.arange(n) / n
    vals = DerivativeEvaluator(model, order)(x)
    return fit_pronyaaa(SampleGrid(x, vals), cfg)


class CoeffEvaluator:
    """Callable on integer indices for derived coefficient models."""

    def __init__(self, fn):
        self._fn = fn

    def __call__(self, k):
        return self._fn(k)


def diff_expsum(R: ExpSum, order: int = 1, refit: bool = False, cfg: FitConfig = FitConfig()):
    """Coefficient evaluator ``j -> (2*pi*i*j)**order * R(j)``.

    With ``refit=True`` the evaluator is resampled and refit as a new
    exponential sum (terms may exceed the input length since differentiation
    raises pole multiplicity); returns ``(ExpSum, report)`` in that case.
    """
    if order < 1:
        raise ValueError("order must be >= 1")

    def coeffs(k):
        k = np.asarray(k, dtype=float)
        return (2j * np.pi * k) ** order * eval_expsum(R, k)

    if not refit:
        return CoeffEvaluator(coeffs)
    from .rpm import fit_rpm

    n = max(2 * R.resolution(min(cfg.tol, 1e-9)), 64)
    v = coeffs(np.arange(n + 1))
    v[0] = 0.0
    return fit_rpm(v, cfg)


def cumsum_expsum(R: ExpSum) -> CoeffEvaluator:
    """Coefficient evaluator of the periodic antiderivative ``g(x)=int_0^x``.

    Requires a mean-zero model (zero constant term); the index-0 coefficient
    is fixed so that ``g(0) = 0``.
    """
    scale = 1.0 + float(np.sum(np.abs(R.weights)))
    if abs(R.constant_term) > 1e-13 * scale:
        raise InvalidModelError(
            f"antiderivative needs a mean-zero model; constant term is {R.constant_term!r}"
        )
    z = np.exp(R.exponents)
    # g(0) = sum_k g_k = 0 pins the mean of the antiderivative
    g0 = -2.0 * np.real(np.sum(R.weights * (-np.log1p(-z))) / (2j * np.pi))

    def coeffs(k):
        k = np.asarray(k, dtype=float)
        scalar = k.ndim == 0
        kv = np.atleast_1d(k)
        out = np.full(kv.shape, complex(g0), dtype=complex)
        nz = kv != 0
        out[nz] = eval_expsum(R, kv[nz]) / (2j * np.pi * kv[nz])
        return complex(out[0]) if scalar else out

    return CoeffEvaluator(coeffs)


def cumsum_expsum_time(R: ExpSum):
    """Time-domain antiderivative evaluator for a mean-zero coefficient model.

    Closed form: the coefficientwise antiderivative sums to a logarithm,
    pinned so the value at 0 vanishes.
    """
    coeffs = cumsum_expsum(R)  # validates the mean-zero precondition
    g0 = float(np.real(coeffs(0)))
    z = np.exp(R.exponents)

    def g(x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        xv = np.atleast_1d(x)
        series = (-np.log1p(-z[None, :] * np.exp(2j * np.pi * xv[:, None]))) @ R.weights
        out = g0 + 2.0 * np.real(series / (2j * np.pi))
        return float(out[0]) if scalar else out

    return g


class AntiderivativeEvaluator:
    """Callable ``x -> int_0^x r`` by adaptive composite Gauss-Legendre.

    Panels split at the barycentric nodes (where higher derivatives spike)
    and bisect until the two-level estimate settles below the target.
    """

    def __init__(self, model: TrigRational, abs_target: float = None):
        self.model = model
        self.target = (
            1e-10 * max(1.0, model.scale) if abs_target is None else abs_target
        )
        self._x20, self._w20 = np.polynomial.legendre.leggauss(20)
        self._x40, self._w40 = np.polynomial.legendre.leggauss(40)

    def _panel(self, a, b, depth=0):
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        f20 = eval_bary(self.model, mid + half * self._x20)
        f40 = eval_bary(self.model, mid + half * self._x40)
        i20 = half * float(self._w20 @ f20)
        i40 = half * float(self._w40 @ f40)
        if abs(i40 - i20) <= self.target * max(1.0, abs(i40)) * 0.01 or depth >= 30:
            return i40
        return self._panel(a, mid, depth + 1) + self._panel(mid, b, depth + 1)

    def integrate(self, a: float, b: float) -> float:
        if b < a:
            raise EmptyIntervalError("integration interval has a > b")
        if b == a:
            return 0.0
        cuts = np.sort(self.model.nodes[(self.model.nodes > a) & (self.model.nodes < b)])
        edges = np.concatenate([[a], cuts, [b]])
        return float(sum(self._panel(lo, hi) for lo, hi in zip(edges[:-1], edges[1:])))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        out = np.array([self.integrate(0.0, xi) for xi in np.atleast_1d(x)])
        return float(out[0]) if scalar else out


def cumsum_bary(model: TrigRational) -> AntiderivativeEvaluator:
    """Antiderivative evaluator for the barycentric representation."""
    return AntiderivativeEvaluator(model)


def definite_sum(model, a: float, b: float) -> float:
    """Integral over ``[a, b]`` (within one period, ``0 <= a <= b < 1``).

    Barycentric models integrate by node-aware quadrature; exponential-sum
    models use the closed form of the coefficientwise antiderivative.
    """
    if b < a:
        raise EmptyIntervalError("integration interval has a > b")
    if not (0.0 <= a < 1.0) or not (0.0 <= b < 1.0):
        raise ValueError("interval must lie inside [0, 1)")
    if isinstance(model, TrigRational):
        return AntiderivativeEvaluator(model).integrate(a, b)
    R = model
    out = R.constant_term * (b - a)
    if R.n_terms:
        z = np.exp(R.exponents)
        za = z * np.exp(2j * np.pi * a)
        zb = z * np.exp(2j * np.pi * b)
        series = np.sum(R.weights * (np.log1p(-za) - np.log1p(-zb))) / (2j * np.pi)
        out += 2.0 * float(np.real(series))
    return out


def _root_pencil_eigs(model: TrigRational, last_row):
    e, b = _pencil(model.nodes, model.weights, last_row)
    mu, _ = numkernels.gen_eig(e, b)
    return mu[np.abs(mu) > _ZERO_EIG_CUTOFF]


def roots(model: TrigRational, all_roots: bool = False):
    """Zeros of the model on [0, 1) via the generalized eigenvalue pencil.

    The mean offset is folded into the node values before the pencil is
    formed.  By default only real zeros (wrapped to [0, 1), sorted) are
    returned; ``all_roots=True`` adds the complex ones.
    """
    shifted = model.node_values + model.mean_offset
    if not np.any(shifted != 0.0):
        raise InvalidModelError("model is identically zero")
    mu = _root_pencil_eigs(model, shifted)
    zeta = _mu_to_plane(mu)
    if all_roots:
        return zeta
    real = zeta[np.abs(zeta.imag) <= _REAL_ROOT_BAND].real % 1.0
    real = _polish_roots(model, np.sort(real))
    if real.size:
        # the pencil can smear its structural zero/infinite eigenvalues into
        # near-real junk; the certificate separates those from true zeros
        scale = float(np.max(np.abs(shifted)))
        vals = np.abs(np.atleast_1d(eval_bary(model, real)))
        real = real[vals <= _ROOT_CERT * scale]
    return real


def _polish_roots(model: TrigRational, zeta):
    """One or two guarded Newton steps to sharpen each real root."""
    if zeta.size == 0:
        return zeta
    d1 = DerivativeEvaluator(model, 1)
    out = zeta.copy()
    for _ in range(2):
        v = np.atleast_1d(eval_bary(model, out))
        dv = np.atleast_1d(d1(out))
        step = np.where(dv != 0.0, v / np.where(dv == 0.0, 1.0, dv), 0.0)
        cand = (out - step) % 1.0
        vc = np.atleast_1d(eval_bary(model, cand))
        improve = np.abs(vc) < np.abs(v)
        out = np.where(improve, cand, out)
    return np.sort(out)


def poles_and_residues(model: TrigRational) -> PoleSet:
    """Upper-half-plane poles with residues (the eagerly cached set)."""
    return model.pole_cache


@dataclass
class ExtremaResult:
    """Stationary points grouped by curvature sign."""

    minima: list
    maxima: list
    degenerate: list  # |r''| below the flatness threshold; kept visible


def find_extrema(model: TrigRational, cfg: FitConfig = FitConfig(tol=1e-8)) -> ExtremaResult:
    """Locate local extrema: refit the derivative, root it, test concavity.

    Falls back to a dense grid scan with local refinement when the
    derivative refit does not converge (flagged through the result lists
    still being populated from the scan).
    """
    from .pronyaaa import fit_pronyaaa

    n = max(4096, 16 * model.nodes.size)
    x = np.arange(n) / n
    d1 = DerivativeEvaluator(model, 1)
    d2 = DerivativeEvaluator(model, 2)
    vals = d1(x)
    try:
        dmodel, report = fit_pronyaaa(SampleGrid(x, vals), cfg)
        converged = report.converged
    except Exception:
        converged = False
    locs = None
    if converged:
        try:
            locs = roots(dmodel)
        except InvalidModelError:
            locs = np.zeros(0)
    if locs is None:
        locs = _scan_extrema(d1, n_grid=2**14)
    locs = np.asarray(sorted(set(np.round(np.mod(locs, 1.0), 14) % 1.0)))
    scale2 = max(np.max(np.abs(d2(x[:: max(1, n // 512)]))), 1e-300)
    res = ExtremaResult([], [], [])
    for loc in locs:
        dist = float(np.min(circular_distance(loc, model.nodes)))
        if dist <= 1e-6:
            h = 1e-6
            curv = (eval_bary(model, (loc + h) % 1.0) - 2 * eval_bary(model, loc)
                    + eval_bary(model, (loc - h) % 1.0)) / h**2
        else:
            curv = d2(loc)
        value = eval_bary(model, loc)
        if abs(curv) <= _FLAT_CURVATURE * scale2:
            res.degenerate.append((float(loc), float(value)))
        elif curv > 0:
            res.minima.append((float(loc), float(value)))
        else:
            res.maxima.append((float(loc), float(value)))
    return res


def _scan_extrema(d1, n_grid):
    x = np.arange(n_grid) / n_grid
    v = d1(x)
    sign_flip = np.nonzero(np.sign(v) != np.sign(np.roll(v, -1)))[0]
    locs = []
    for i in sign_flip:
        a, bb = x[i], x[i] + 1.0 / n_grid
        fa = d1(a)
        for _ in range(60):
            mid = 0.5 * (a + bb)
            fm = d1(mid % 1.0)
            if np.sign(fm) == np.sign(fa):
                a, fa = mid, fm
            else:
                bb = mid
        locs.append(0.5 * (a + bb) % 1.0)
    return np.asarray(locs)


def extrema(model: TrigRational, kind: str, cfg: FitConfig = FitConfig(tol=1e-8)):
    """Local extrema of the requested kind, sorted by location."""
    res = find_extrema(model, cfg)
    if kind == "min":
        return sorted(res.minima)
    if kind == "max":
        return sorted(res.maxima)
    raise ValueError("kind must be 'min' or 'max'")
