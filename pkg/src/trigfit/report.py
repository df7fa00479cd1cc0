"""Structured convergence/quality reports returned alongside fitted models."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class ConvergenceReport:
    """Outcome of a fit, transform, or pipeline stage.

    ``converged`` means the requested tolerance was met by the returned
    model.  ``fallbacks`` lists the retry strategies that were taken, in
    order; ``warnings`` collects non-fatal diagnostics.  ``details`` holds
    operation-specific extras (iteration traces, grid sizes, ...).
    """

    converged: bool = True
    m: int = 0
    error: float = 0.0
    fallbacks: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def merge_prefixed(self, other: "ConvergenceReport", prefix: str) -> None:
        self.fallbacks += [f"{prefix}:{s}" for s in other.fallbacks]
        self.warnings += [f"{prefix}:{s}" for s in other.warnings]

    def key_values(self) -> list[str]:
        """Machine-parsable key=value lines for CLI output."""
        lines = [
            f"converged={str(self.converged).lower()}",
            f"m={self.m}",
            f"error={self.error:.17g}",
            f"fallbacks={';'.join(self.fallbacks)}",
            f"warnings={';'.join(self.warnings)}",
        ]
        for k in sorted(self.details):
            v = self.details[k]
            if isinstance(v, float):
                lines.append(f"{k}={v:.17g}")
            elif isinstance(v, (int, bool, str)):
                lines.append(f"{k}={v}")
        return lines
