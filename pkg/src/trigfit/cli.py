"""Command-line interface: fit, transform, evaluate, analyze, operate.

Input samples arrive as CSV (one column of values on an implied equispaced
grid, or two columns x,y); models persist as plain-text model files.  Every
command prints a machine-parsable key=value report to stdout and is
deterministic for fixed inputs, flags, and seed.

Exit codes: 0 success, 2 parse error, 3 non-converged (model still
written), 4 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .core import (
    ExpSum,
    FitConfig,
    SampleGrid,
    TrigRational,
    TrigfitError,
    eval_bary,
    eval_expsum_time,
    fourier_coeffs,
)
from .modelfile import ModelFile, ModelFormatError, load_model, save_model
from .numkernels import NumericalError
from .report import ConvergenceReport

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_NONCONVERGED = 3
EXIT_NUMERICAL = 4


class CsvError(ValueError):
    pass


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def read_csv(path):
    """Read one- or two-column numeric CSV; 'x,y'-style headers auto-skip."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            parts = [p.strip() for p in text.split(",")]
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                if lineno == 1:
                    continue  # header
                raise CsvError(f"{path}:{lineno}: not numeric: {text!r}")
            if len(rows) > 1 and len(rows[-1]) != len(rows[0]):
                raise CsvError(f"{path}:{lineno}: inconsistent column count")
    if not rows:
        raise CsvError(f"{path}: no data rows")
    data = np.asarray(rows, dtype=float)
    if data.shape[1] == 1:
        return None, data[:, 0]
    if data.shape[1] == 2:
        return data[:, 0], data[:, 1]
    raise CsvError(f"{path}: expected 1 or 2 columns, found {data.shape[1]}")


def write_csv(path, columns, header):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _to_unit(x, domain):
    a, b = domain
    return ((np.asarray(x, dtype=float) - a) / (b - a)) % 1.0


def _from_unit(t, domain):
    a, b = domain
    return a + (b - a) * np.asarray(t, dtype=float)


def _grid_from_csv(path, domain):
    x, y = read_csv(path)
    if x is None:
        locs = np.arange(y.size) / y.size
    else:
        locs = _to_unit(x, domain)
        order = np.argsort(locs, kind="stable")
        locs, y = locs[order], y[order]
    return SampleGrid(locs, y)


def _print_report(report: ConvergenceReport, extra=()):
    for line in report.key_values():
        print(line)
    for line in extra:
        print(line)


def _model_eval(mf: ModelFile, t):
    if mf.kind == "rfun":
        return eval_bary(mf.payload, t)
    return eval_expsum_time(mf.payload, t)


def _suspect_noise(grid: SampleGrid) -> bool:
    """Plateau heuristic: a flat coefficient tail suggests a noise floor."""
    if not grid.equispaced or grid.size % 2 == 0 or grid.size < 64:
        return False
    c = np.abs(fourier_coeffs(SampleGrid(grid.locations, grid.values - np.mean(grid.values))))
    n = c.size
    tail = np.median(c[int(0.9 * n):])
    mid = np.median(c[int(0.55 * n): int(0.7 * n)])
    top = float(np.max(c))
    if top == 0.0 or tail <= 1e-12 * top:
        return False
    return tail > 0.3 * mid


def cmd_fit(args) -> int:
    grid = _grid_from_csv(args.input, args.domain)
    cfg = FitConfig(tol=args.tol, max_degree=args.max_degree, seed=args.seed)
    method = args.method
    if method == "auto":
        method = "rpm" if _suspect_noise(grid) else "pronyaaa"
    if method == "rpm" and (not grid.equispaced or grid.size % 2 == 0):
        method = "pronyaaa"

    if method == "rpm":
        from .rpm import fit_rpm

        mean = float(np.mean(grid.values))
        v = fourier_coeffs(SampleGrid(grid.locations, grid.values - mean))
        model, report = fit_rpm(v, cfg)
        model = ExpSum(model.weights, model.exponents, model.constant_term + mean)
    else:
        from .pronyaaa import fit_pronyaaa

        model, report = fit_pronyaaa(grid, cfg)

    mf = ModelFile.from_model(model, domain=args.domain, config=cfg, report=report)
    save_model(mf, args.output)
    _print_report(report, extra=[f"method={method}", f"output={args.output}"])
    return EXIT_OK if report.converged else EXIT_NONCONVERGED


def cmd_transform(args) -> int:
    mf = load_model(args.model)
    cfg = FitConfig(tol=args.tol, seed=args.seed)
    if args.to == "ft":
        if mf.kind != "rfun":
            raise TrigfitError("ft expects an rfun model file")
        from .transforms import ft

        model, report = ft(mf.payload, cfg)
    else:
        if mf.kind != "efun":
            raise TrigfitError("ift expects an efun model file")
        from .transforms import ift

        model, report = ift(mf.payload, cfg)
    out = ModelFile.from_model(model, domain=mf.domain, config=cfg, report=report)
    save_model(out, args.output)
    _print_report(report, extra=[f"output={args.output}"])
    return EXIT_OK if report.converged else EXIT_NONCONVERGED


def cmd_eval(args) -> int:
    mf = load_model(args.model)
    if args.points:
        x, _ = read_csv(args.points)
        if x is None:
            x = read_csv(args.points)[1]  # single column holds locations
        xs = np.asarray(x, dtype=float)
    else:
        a, b = mf.domain
        xs = a + (b - a) * np.arange(args.grid) / args.grid
    t = _to_unit(xs, mf.domain)
    vals = np.atleast_1d(_model_eval(mf, t))
    write_csv(args.output, [xs, vals], ["x", "value"])
    print(f"n={xs.size}")
    print(f"output={args.output}")
    return EXIT_OK


def _as_rfun(mf: ModelFile, cfg):
    if mf.kind == "rfun":
        return mf.payload, None
    from .transforms import ift

    model, report = ift(mf.payload, cfg)
    return model, report


def cmd_analyze(args) -> int:
    mf = load_model(args.model)
    cfg = FitConfig(tol=args.tol, seed=args.seed)
    extra = []
    if args.what == "poles":
        if mf.kind == "efun":
            from .transforms import exponent_to_pole

            eta = exponent_to_pole(mf.payload.exponents)
            res = mf.payload.weights
        else:
            ps = mf.payload.pole_cache
            eta, res = ps.poles, ps.residues
        loc = _from_unit(eta.real, mf.domain) + 1j * eta.imag * (mf.domain[1] - mf.domain[0])
        write_csv(
            args.output,
            [loc.real, loc.imag, res.real, res.imag],
            ["location_re", "location_im", "strength_re", "strength_im"],
        )
        extra.append(f"n={eta.size}")
    else:
        model, conv_report = _as_rfun(mf, cfg)
        if conv_report is not None:
            extra.append("converted=ift")
        if args.what == "roots":
            from .calculus import roots

            zs = roots(model)
            write_csv(args.output, [_from_unit(zs, mf.domain)], ["root"])
            extra.append(f"n={zs.size}")
        else:
            from .calculus import find_extrema

            res = find_extrema(model)
            locs, vals, kinds = [], [], []
            for kind, pairs in (("min", res.minima), ("max", res.maxima), ("flat", res.degenerate)):
                for loc, val in pairs:
                    locs.append(_from_unit(loc, mf.domain))
                    vals.append(val)
                    kinds.append(kind)
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write("location,value,kind\n")
                for loc, val, kind in zip(locs, vals, kinds):
                    fh.write(f"{_fmt(loc)},{_fmt(val)},{kind}\n")
            extra.append(f"n={len(locs)}")
    extra.append(f"output={args.output}")
    for line in extra:
        print(line)
    return EXIT_OK


def cmd_op(args) -> int:
    cfg = FitConfig(tol=args.tol, seed=args.seed)
    mf_a = load_model(args.a)
    mf_b = load_model(args.b)
    if mf_a.domain != mf_b.domain:
        raise TrigfitError("operands live on different domains")
    a_model, b_model = mf_a.payload, mf_b.payload
    if args.what == "add":
        if mf_a.kind == "rfun" and mf_b.kind == "rfun":
            from .algebra import add_rfun

            model, report = add_rfun(a_model, b_model, cfg)
        else:
            from .algebra import add_expsum
            from .transforms import ft

            A = a_model if mf_a.kind == "efun" else ft(a_model, cfg)[0]
            B = b_model if mf_b.kind == "efun" else ft(b_model, cfg)[0]
            model, report = add_expsum(A, B, cfg)
    else:
        from .algebra import conv, corr, mul

        fn = {"conv": conv, "mul": mul, "corr": corr}[args.what]
        model, report = fn(a_model, b_model, tol=max(args.tol, 1e-13), cfg=cfg)
    out = ModelFile.from_model(model, domain=mf_a.domain, config=cfg, report=report)
    save_model(out, args.output)
    _print_report(report, extra=[f"output={args.output}"])
    return EXIT_OK if report.converged else EXIT_NONCONVERGED


def cmd_diff(args) -> int:
    mf = load_model(args.model)
    cfg = FitConfig(tol=args.tol, seed=args.seed)
    span = mf.domain[1] - mf.domain[0]
    extra = []
    if args.refit:
        if mf.kind == "efun":
            from .calculus import diff_expsum

            model, report = diff_expsum(mf.payload, order=args.order, refit=True, cfg=cfg)
        else:
            from .calculus import derivative_model

            model, report = derivative_model(mf.payload, order=args.order, cfg=cfg)
        out = ModelFile.from_model(model, domain=mf.domain, config=cfg, report=report)
        save_model(out, args.output)
        _print_report(report, extra=[f"output={args.output}", "note=derivative-in-unit-coordinates"])
        return EXIT_OK if report.converged else EXIT_NONCONVERGED
    model, conv_report = _as_rfun(mf, cfg)
    if conv_report is not None:
        extra.append("converted=ift")
    from .calculus import DerivativeEvaluator

    dk = DerivativeEvaluator(model, args.order)
    a, b = mf.domain
    xs = a + (b - a) * np.arange(args.grid) / args.grid
    vals = dk(_to_unit(xs, mf.domain)) / span**args.order
    write_csv(args.output, [xs, np.atleast_1d(vals)], ["x", "value"])
    extra += [f"n={xs.size}", f"output={args.output}"]
    for line in extra:
        print(line)
    return EXIT_OK


def cmd_int(args) -> int:
    mf = load_model(args.model)
    cfg = FitConfig(tol=args.tol, seed=args.seed)
    span = mf.domain[1] - mf.domain[0]
    if args.interval is not None:
        from .calculus import definite_sum

        a_t, b_t = (_to_unit(v, mf.domain) for v in args.interval)
        if args.interval[1] == mf.domain[1]:
            b_t = 1.0 - 1e-16  # right endpoint maps to the period seam
        value = definite_sum(mf.payload, float(a_t), float(b_t)) * span
        print(f"integral={_fmt(value)}")
        return EXIT_OK
    if mf.kind == "efun":
        from .calculus import cumsum_expsum_time

        g = cumsum_expsum_time(mf.payload)
    else:
        from .calculus import cumsum_bary

        g = cumsum_bary(mf.payload)
    a, b = mf.domain
    xs = a + (b - a) * np.arange(args.grid) / args.grid
    vals = np.atleast_1d(g(_to_unit(xs, mf.domain))) * span
    write_csv(args.output, [xs, vals], ["x", "value"])
    print(f"n={xs.size}")
    print(f"output={args.output}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="trigfit",
        description="Fit and compute with trigonometric rational signal models.",
    )
    p.add_argument("--version", action="version", version=f"trigfit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, tol=1e-9):
        sp.add_argument("--tol", type=float, default=tol)
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("fit", help="fit a model to CSV samples")
    sp.add_argument("input")
    sp.add_argument("--output", "-o", required=True)
    sp.add_argument("--method", choices=["auto", "pronyaaa", "rpm"], default="auto")
    sp.add_argument("--max-degree", type=int, default=150)
    sp.add_argument("--domain", type=float, nargs=2, default=(0.0, 1.0), metavar=("A", "B"))
    common(sp)
    sp.set_defaults(fn=cmd_fit)

    sp = sub.add_parser("transform", help="convert between rfun and efun")
    sp.add_argument("model")
    sp.add_argument("--to", choices=["ft", "ift"], required=True)
    sp.add_argument("--output", "-o", required=True)
    common(sp)
    sp.set_defaults(fn=cmd_transform)

    sp = sub.add_parser("eval", help="evaluate a model to CSV")
    sp.add_argument("model")
    group = sp.add_mutually_exclusive_group()
    group.add_argument("--grid", type=int, default=1024)
    group.add_argument("--points", help="CSV file of evaluation locations")
    sp.add_argument("--output", "-o", required=True)
    common(sp)
    sp.set_defaults(fn=cmd_eval)

    sp = sub.add_parser("analyze", help="roots, poles, or extrema to CSV")
    sp.add_argument("model")
    sp.add_argument("--what", choices=["roots", "poles", "extrema"], required=True)
    sp.add_argument("--output", "-o", required=True)
    common(sp, tol=1e-8)
    sp.set_defaults(fn=cmd_analyze)

    sp = sub.add_parser("op", help="binary operation on two models")
    sp.add_argument("a")
    sp.add_argument("b")
    sp.add_argument("--what", choices=["add", "conv", "mul", "corr"], required=True)
    sp.add_argument("--output", "-o", required=True)
    common(sp)
    sp.set_defaults(fn=cmd_op)

    sp = sub.add_parser("diff", help="differentiate a model")
    sp.add_argument("model")
    sp.add_argument("--order", type=int, default=1)
    sp.add_argument("--grid", type=int, default=1024)
    sp.add_argument("--refit", action="store_true", help="write a refit model instead of CSV")
    sp.add_argument("--output", "-o", required=True)
    common(sp, tol=1e-8)
    sp.set_defaults(fn=cmd_diff)

    sp = sub.add_parser("int", help="integrate a model")
    sp.add_argument("model")
    sp.add_argument("--interval", type=float, nargs=2, metavar=("A", "B"))
    sp.add_argument("--grid", type=int, default=1024)
    sp.add_argument("--output", "-o")
    common(sp)
    sp.set_defaults(fn=cmd_int)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (CsvError, ModelFormatError, FileNotFoundError) as exc:
        print(f"error={exc}", file=sys.stderr)
        return EXIT_PARSE
    except (NumericalError, TrigfitError, ValueError) as exc:
        print(f"error={exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
