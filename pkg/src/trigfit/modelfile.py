"""Self-describing text persistence for fitted models.

A model file is a flat key=value header followed by named numeric arrays,
one number per line, all decimals written with 17 significant digits so a
load/save round trip is bit-exact.  Plain text was chosen over binary for
diffability.  No timestamps or environment data are written, so identical
inputs produce identical files.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .core import ExpSum, TrigRational
from .report import ConvergenceReport

__all__ = ["ModelFile", "save_model", "load_model", "ModelFormatError"]

FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """Malformed or unsupported model file."""


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass
class ModelFile:
    """In-memory form of a persisted model plus its context."""

    kind: str  # "rfun" | "efun"
    payload: object  # TrigRational | ExpSum
    domain: tuple = (0.0, 1.0)
    provenance: dict = field(default_factory=dict)
    format_version: int = FORMAT_VERSION

    @property
    def model(self):
        return self.payload

    @classmethod
    def from_model(cls, model, domain=(0.0, 1.0), config=None, report: ConvergenceReport = None):
        kind = "rfun" if isinstance(model, TrigRational) else "efun"
        prov = {"tool": f"trigfit {__version__}"}
        if config is not None:
            prov["config_tol"] = _fmt(config.tol)
            prov["config_max_degree"] = str(config.max_degree)
            prov["config_seed"] = str(config.seed)
        if report is not None:
            prov["report_converged"] = str(report.converged).lower()
            prov["report_m"] = str(report.m)
            prov["report_error"] = _fmt(report.error)
            prov["report_fallbacks"] = ";".join(report.fallbacks)
            prov["report_warnings"] = ";".join(report.warnings)
        return cls(kind=kind, payload=model, domain=(float(domain[0]), float(domain[1])), provenance=prov)


def _arrays_for(kind: str, model):
    if kind == "rfun":
        return {
            "nodes": model.nodes,
            "weights": model.weights,
            "node_values": model.node_values,
        }
    return {
        "weights_real": model.weights.real,
        "weights_imag": model.weights.imag,
        "exponents_real": model.exponents.real,
        "exponents_imag": model.exponents.imag,
    }


def save_model(mf: ModelFile, path) -> None:
    lines = [f"format_version = {mf.format_version}", f"kind = {mf.kind}"]
    lines.append(f"domain_a = {_fmt(mf.domain[0])}")
    lines.append(f"domain_b = {_fmt(mf.domain[1])}")
    for key in sorted(mf.provenance):
        lines.append(f"{key} = {mf.provenance[key]}")
    if mf.kind == "rfun":
        lines.append(f"mean_offset = {_fmt(mf.payload.mean_offset)}")
    else:
        lines.append(f"constant_term = {_fmt(mf.payload.constant_term)}")
    for name, arr in _arrays_for(mf.kind, mf.payload).items():
        lines.append(f"[{name}] {arr.size}")
        lines += [_fmt(v) for v in arr]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path) -> ModelFile:
    with open(path, encoding="utf-8") as fh:
        raw = fh.read().splitlines()
    keys: dict = {}
    arrays: dict = {}
    i = 0
    try:
        while i < len(raw):
            line = raw[i].strip()
            i += 1
            if not line:
                continue
            if line.startswith("["):
                name, count = line[1:].split("]")
                name = name.strip()
                n = int(count)
                vals = [float(raw[i + j]) for j in range(n)]
                i += n
                arrays[name] = np.asarray(vals)
            else:
                k, _, v = line.partition("=")
                keys[k.strip()] = v.strip()
    except (ValueError, IndexError) as exc:
        raise ModelFormatError(f"malformed model file near line {i}: {exc}") from exc

    try:
        version = int(keys["format_version"])
        kind = keys["kind"]
        domain = (float(keys.get("domain_a", 0.0)), float(keys.get("domain_b", 1.0)))
    except KeyError as exc:
        raise ModelFormatError(f"missing required key: {exc}") from exc
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported format_version {version}")

    if kind == "rfun":
        try:
            model = TrigRational(
                nodes=arrays["nodes"],
                weights=arrays["weights"],
                node_values=arrays["node_values"],
                mean_offset=float(keys.get("mean_offset", 0.0)),
            )
        except KeyError as exc:
            raise ModelFormatError(f"rfun file missing array: {exc}") from exc
    elif kind == "efun":
        try:
            w = arrays["weights_real"] + 1j * arrays["weights_imag"]
            a = arrays["exponents_real"] + 1j * arrays["exponents_imag"]
            model = ExpSum(w, a, constant_term=float(keys.get("constant_term", 0.0)))
        except KeyError as exc:
            raise ModelFormatError(f"efun file missing array: {exc}") from exc
    else:
        raise ModelFormatError(f"unknown kind {kind!r}")

    prov = {
        k: v
        for k, v in keys.items()
        if k not in ("format_version", "kind", "domain_a", "domain_b", "mean_offset", "constant_term")
    }
    return ModelFile(kind=kind, payload=model, domain=domain, provenance=prov, format_version=version)
