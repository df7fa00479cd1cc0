"""Greedy adaptive construction of barycentric trigonometric interpolants.

The fitter alternates a full (even node count, cot basis) step with an
interim half step (odd node count, csc basis) so nodes are added in pairs:
each new node is the point of largest current absolute residual, and after
every addition the barycentric weights are recomputed as the constrained
least-squares minimizer of the linearized interpolation error.  Spurious
poles (on or hugging the interval) are removed afterwards by deleting their
nearest nodes and re-solving.

Non-convergence is a reported state, not an exception, so callers can fall
back to the frequency-domain fitter.
"""

from __future__ import annotations

import warnings as _warnings
from dataclasses import dataclass, field

import numpy as np

from . import numkernels
from .core import (
    CONSTRAINT_RTOL,
    DegenerateInputError,
    FitConfig,
    SampleGrid,
    TrigRational,
    circular_distance,
    cot_pi,
)
from .report import ConvergenceReport

__all__ = [
    "fit_pronyaaa",
    "solve_weights_full",
    "solve_weights_half",
    "cleanup",
    "AaaState",
]

# A pole this close to the real axis counts as real-valued (spurious).
REAL_POLE_BAND = 1e-12

# Residue threshold factor: |res| <= tol/100 * scale flags a spurious pole.
RESIDUE_FACTOR = 1e-2


@dataclass
class AaaState:
    """Loop state of the greedy fitter (exposed for inspection/testing)."""

    chosen: list = field(default_factory=list)  # grid indices, selection order
    iteration: int = 0  # current pair count m
    half_step: bool = False  # odd node count, csc basis active
    residual: np.ndarray = None  # abs error on grid minus chosen nodes


def _kernel_cols(x, t, kind):
    """Columns kernel(pi*(x - t_j)); rows at x == t_j come out infinite."""
    d = x[:, None] - t[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        if kind == "cot":
            return np.cos(np.pi * d) / np.sin(np.pi * d)
        return 1.0 / np.sin(np.pi * d)


def _solve_constrained(cols, fy, idx, constraint):
    """Weights minimizing the linearized error subject to linear constraints.

    ``cols`` are kernel columns over the full grid, ``idx`` the chosen node
    indices.  ``constraint`` holds one constraint vector per row; it is
    honored by optimizing over an orthonormal basis Q of the rows' joint
    complement, and the minimizer is the trailing right singular vector of
    C @ Q.  Returns ``(gamma, smallest_sv, flagged)`` with ``norm(gamma) = 1``.
    """
    n = cols.shape[0]
    mask = np.ones(n, dtype=bool)
    mask[idx] = False
    c = (fy[mask, None] - fy[idx][None, :]) * cols[mask]
    u = np.atleast_2d(constraint)
    flagged = not np.any(u != 0.0)
    q = numkernels.null_complement(u)
    cq = c @ q
    if cq.shape[0] >= cq.shape[1]:
        _, s, vh = numkernels.svd(cq)
        gamma = q @ vh[-1]
        sv = float(s[-1])
    else:
        # underdetermined: any unit vector of the (nontrivial) null space
        _, _, vh = numkernels.svd(cq, full_matrices=True)
        gamma = q @ vh[-1]
        sv = 0.0
    return gamma, sv, flagged


def _half_constraint(nodes, node_values):
    """Degree-reduction constraint for the csc basis.

    In the csc basis the leading coefficient of the (polynomial-multiplied)
    denominator is proportional to sum_j gamma_j exp(i*pi*t_j); forcing it to
    vanish is the odd-count analogue of the even case's sum(gamma*f) = 0 and
    gives two real constraint rows.
    """
    return np.vstack([np.cos(np.pi * nodes), np.sin(np.pi * nodes)])


def _eval_quotient(cols, gamma, fval, mask):
    """Barycentric quotient on the masked grid rows from cached columns."""
    with np.errstate(divide="ignore", invalid="ignore"):
        num = cols[mask] @ (gamma * fval)
        den = cols[mask] @ gamma
        return num / den


def _residual(cols, gamma, fy, idx):
    n = cols.shape[0]
    mask = np.ones(n, dtype=bool)
    mask[idx] = False
    r = _eval_quotient(cols, gamma, fy[idx], mask)
    res = np.full(n, -np.inf)
    err = np.abs(fy[mask] - r)
    err[~np.isfinite(err)] = np.inf
    res[mask] = err
    return res  # -inf at chosen nodes so argmax never re-picks them


def solve_weights_full(nodes, grid: SampleGrid):
    """Barycentric weights for an even set of nodes against grid samples.

    ``nodes`` are locations that must all be grid points.  The weights are
    the constrained minimizer with the numerator-degree constraint
    ``sum(gamma * f(nodes)) = 0`` and unit 2-norm.
    """
    idx = _locate(nodes, grid)
    if idx.size % 2:
        raise ValueError("solve_weights_full needs an even node count")
    cols = _kernel_cols(grid.locations, grid.locations[idx], "cot")
    gamma, _, flagged = _solve_constrained(cols, grid.values, idx, grid.values[idx])
    if flagged:
        _warnings.warn("all node values vanish; constraint basis is arbitrary")
    return gamma


def solve_weights_half(nodes, grid: SampleGrid):
    """Weights for an odd node set in the csc basis.

    The degree condition appropriate to that basis replaces the even case's
    value constraint: ``sum_j gamma_j exp(i*pi*t_j) = 0`` (see
    :func:`_half_constraint`); the least-squares structure is otherwise
    identical.
    """
    idx = _locate(nodes, grid)
    if idx.size % 2 == 0:
        raise ValueError("solve_weights_half needs an odd node count")
    t = grid.locations[idx]
    cols = _kernel_cols(grid.locations, t, "csc")
    gamma, _, _ = _solve_constrained(
        cols, grid.values, idx, _half_constraint(t, grid.values[idx])
    )
    return gamma


def _locate(nodes, grid: SampleGrid):
    idx = np.searchsorted(grid.locations, np.asarray(nodes, dtype=float))
    idx = np.clip(idx, 0, grid.size - 1)
    if np.max(np.abs(grid.locations[idx] - nodes)) > 0.0:
        raise ValueError("every node must be a grid location")
    return idx


def fit_pronyaaa(grid: SampleGrid, cfg: FitConfig = FitConfig()):
    """Fit a barycentric trigonometric rational to sampled data.

    Returns ``(model, report)``.  The sample mean is removed before fitting
    and restored through the model's mean offset; the stopping tolerance is
    ``cfg.tol`` relative to the largest mean-removed sample magnitude.  On
    hitting ``cfg.max_degree`` the best iterate seen is returned with
    ``report.converged = False``.  Spurious-pole cleanup is applied before
    returning.
    """
    x = grid.locations
    y = grid.values
    mean = float(np.mean(y))
    fy = y - mean
    scale = float(np.max(np.abs(fy)))
    if scale == 0.0:
        raise DegenerateInputError("all sample values are equal")
    target = cfg.tol * scale
    n = x.size

    state = AaaState()
    i1 = int(np.argmax(np.abs(fy)))
    rest = np.abs(fy).copy()
    rest[i1] = -np.inf
    i2 = int(np.argmax(rest))
    state.chosen = [i1, i2]
    state.iteration = 1

    cot_cols = _kernel_cols(x, x[state.chosen], "cot")
    idx = np.asarray(state.chosen)
    gamma, _, flagged = _solve_constrained(cot_cols, fy, idx, fy[idx])
    res = _residual(cot_cols, gamma, fy, idx)
    err = float(np.max(res))

    best = (err, list(state.chosen), gamma.copy())
    history = [(state.iteration, err)]
    node_history = list(state.chosen)
    half_divergence_step = None

    max_nodes = 2 * cfg.max_degree
    while err > target:
        if len(state.chosen) + 2 > max_nodes or len(state.chosen) + 2 >= n - 1:
            break
        # first new node from the current even interpolant's residual
        pick_even = int(np.argmax(res))
        state.chosen.append(pick_even)
        node_history.append(pick_even)
        idx = np.asarray(state.chosen)
        csc_cols = _kernel_cols(x, x[idx], "csc")
        state.half_step = True
        gamma_h, _, _ = _solve_constrained(
            csc_cols, fy, idx, _half_constraint(x[idx], fy[idx])
        )
        res_h = _residual(csc_cols, gamma_h, fy, idx)

        # second new node from the interim csc interpolant's residual
        pick_half = int(np.argmax(res_h))
        if half_divergence_step is None:
            res_alt = res.copy()
            res_alt[pick_even] = -np.inf
            if int(np.argmax(res_alt)) != pick_half:
                half_divergence_step = state.iteration
        state.chosen.append(pick_half)
        node_history.append(pick_half)
        state.half_step = False
        idx = np.asarray(state.chosen)

        cot_cols = _kernel_cols(x, x[idx], "cot")
        gamma, _, flagged = _solve_constrained(cot_cols, fy, idx, fy[idx])
        res = _residual(cot_cols, gamma, fy, idx)
        err = float(np.max(res))
        state.iteration += 1
        state.residual = res
        history.append((state.iteration, err))
        if err < best[0]:
            best = (err, list(state.chosen), gamma.copy())

    converged = err <= target
    if not converged:
        err, chosen, gamma = best
        idx = np.asarray(chosen)
    else:
        idx = np.asarray(state.chosen)

    order = np.argsort(x[idx])
    model = TrigRational(
        nodes=x[idx][order],
        weights=_realign(gamma[order]),
        node_values=fy[idx][order],
        mean_offset=mean,
    )
    report = ConvergenceReport(
        converged=converged,
        m=model.degree,
        error=err,
        details={
            "scale": scale,
            "node_history": node_history,
            "residual_history": history,
            "half_pick_divergence_step": half_divergence_step,
        },
    )
    if flagged:
        report.warnings.append("degenerate-constraint")
    if not converged:
        report.warnings.append("max-degree-reached")

    model, cleanup_report = cleanup(model, grid, cfg)
    report.details["cleanup"] = cleanup_report.details
    report.warnings += cleanup_report.warnings
    report.m = model.degree
    report.error = cleanup_report.error
    report.converged = report.error <= target
    return model, report


def _realign(gamma):
    # Weights are real by construction here; strip any -0.0 noise and
    # fix the overall sign for reproducibility.
    g = np.real_if_close(gamma, tol=2)
    j = int(np.argmax(np.abs(g)))
    return g if g[j] >= 0 else -g


def _spurious_mask(eta, res, tol, scale):
    return (np.abs(eta.imag) <= REAL_POLE_BAND) | (
        np.abs(res) <= tol * RESIDUE_FACTOR * scale
    )


def _grid_error(model: TrigRational, x, fy):
    idx = np.searchsorted(x, model.nodes)
    idx = np.clip(idx, 0, x.size - 1)
    mask = np.ones(x.size, dtype=bool)
    mask[idx[np.abs(x[idx] - model.nodes) == 0.0]] = False
    cols = _kernel_cols(x, model.nodes, "cot")
    r = _eval_quotient(cols, model.weights, model.node_values, mask)
    err = np.abs(fy[mask] - r)
    err[~np.isfinite(err)] = np.inf
    return float(np.max(err)) if err.size else 0.0


def cleanup(model: TrigRational, grid: SampleGrid, cfg: FitConfig = FitConfig()):
    """Remove spurious poles by deleting their nearest nodes and re-solving.

    Poles are spurious when they are real-valued (within the band) or carry a
    negligible residue.  Rounds continue until no spurious poles remain or
    the grid error degrades beyond the tolerance, in which case the recorded
    iterate with the fewest spurious poles is returned with a warning flag.
    Always returns ``(model, report)``.
    """
    x = grid.locations
    fy = grid.values - model.mean_offset
    scale = float(np.max(np.abs(fy)))
    if scale == 0.0:
        scale = model.scale

    def census(mdl):
        eta, res = mdl.all_poles()
        if eta.size == 0:
            return 0, eta, res
        sp = _spurious_mask(eta, res, cfg.tol, scale)
        return int(np.sum(sp)), eta[sp], res[sp]

    err0 = _grid_error(model, x, fy)
    n_sp, eta_sp, _ = census(model)
    record = [(n_sp, err0, model)]
    report = ConvergenceReport(m=model.degree, error=err0)
    report.details["spurious_initial"] = n_sp
    report.details["rounds"] = 0
    if n_sp == 0:
        report.details["spurious_remaining"] = 0
        return model, report

    budget = max(cfg.tol * scale, 2.0 * err0)
    current = model
    rounds = 0
    while n_sp and current.nodes.size > 2 and rounds < model.degree + 2:
        rounds += 1
        nodes = current.nodes
        claimed = np.zeros(nodes.size, dtype=bool)
        for p in eta_sp.real:
            d = circular_distance(p, nodes)
            d[claimed] = np.inf
            j = int(np.argmin(d))
            if np.isfinite(d[j]):
                claimed[j] = True
        if int(np.sum(claimed)) % 2:
            # keep the node count even: claim one extra (or release one)
            d = circular_distance(eta_sp.real[-1], nodes)
            d[claimed] = np.inf
            j = int(np.argmin(d))
            if np.isfinite(d[j]):
                claimed[j] = True
            else:
                claimed[np.nonzero(claimed)[0][-1]] = False
        keep = ~claimed
        if int(np.sum(keep)) < 2 or not np.any(claimed):
            break
        new_nodes = nodes[keep]
        idx = _locate(new_nodes, grid)
        cols = _kernel_cols(x, new_nodes, "cot")
        gamma, _, _ = _solve_constrained(cols, fy, idx, fy[idx])
        candidate = TrigRational(
            nodes=new_nodes,
            weights=_realign(gamma),
            node_values=fy[idx],
            mean_offset=model.mean_offset,
        )
        err = _grid_error(candidate, x, fy)
        n_sp, eta_sp, _ = census(candidate)
        record.append((n_sp, err, candidate))
        if err > budget:
            report.warnings.append("cleanup-degraded-error")
            break
        current = candidate
        if n_sp == 0:
            break

    eligible = [entry for entry in record if entry[1] <= budget] or record
    n_sp, err, chosen = min(eligible, key=lambda e: (e[0], e[1]))
    if n_sp:
        report.warnings.append("spurious-poles-remain")
    report.converged = err <= cfg.tol * scale and n_sp == 0
    report.m = chosen.degree
    report.error = err
    report.details["rounds"] = rounds
    report.details["spurious_remaining"] = n_sp
    return chosen, report
