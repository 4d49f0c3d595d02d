"""Analysis report records and their canonical JSON form.

Canonical form: UTF-8, two-space indentation, keys in the order the
dataclasses declare them, reals rounded to 6 significant digits, a trailing
newline, and no timestamps. The layout is described in
``docs/report-schema.json``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .attention import InterfaceMetrics

__all__ = ["SampleRecord", "AnalysisReport", "canonical_real", "report_to_json", "write_report", "read_report"]

DEGENERATE_WARNING = "degenerate_segmentation"


def canonical_real(x: float | None) -> float | None:
    if x is None:
        return None
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot serialise non-finite value {x!r}")
    return float(f"{x:.6g}")


@dataclass
class SampleRecord:
    sample_id: str
    source: str
    error: str | None = None
    threshold: int | None = None
    best_fitness: float | None = None
    iterations_used: int | None = None
    evaluations: int | None = None
    white_fraction: float | None = None
    edge_count: int | None = None
    hole_count: int | None = None
    warnings: list[str] = field(default_factory=list)
    metrics: InterfaceMetrics | None = None
    outputs: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        metrics = None
        if self.metrics is not None:
            m = self.metrics
            metrics = {
                "transition_sharpness": canonical_real(m.transition_sharpness),
                "defect_density": canonical_real(m.defect_density),
                "edge_density": canonical_real(m.edge_density),
                "white_fraction": canonical_real(m.white_fraction),
                "threshold": canonical_real(m.threshold),
            }
        return {
            "sample_id": self.sample_id,
            "source": self.source,
            "error": self.error,
            "threshold": self.threshold,
            "best_fitness": canonical_real(self.best_fitness),
            "iterations_used": self.iterations_used,
            "evaluations": self.evaluations,
            "white_fraction": canonical_real(self.white_fraction),
            "edge_count": self.edge_count,
            "hole_count": self.hole_count,
            "warnings": list(self.warnings),
            "metrics": metrics,
            "outputs": {k: self.outputs[k] for k in sorted(self.outputs)},
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "SampleRecord":
        m = d.get("metrics")
        return cls(
            sample_id=d["sample_id"],
            source=d["source"],
            error=d.get("error"),
            threshold=d.get("threshold"),
            best_fitness=d.get("best_fitness"),
            iterations_used=d.get("iterations_used"),
            evaluations=d.get("evaluations"),
            white_fraction=d.get("white_fraction"),
            edge_count=d.get("edge_count"),
            hole_count=d.get("hole_count"),
            warnings=list(d.get("warnings") or []),
            metrics=InterfaceMetrics(**m) if m is not None else None,
            outputs=dict(d.get("outputs") or {}),
        )


@dataclass
class AnalysisReport:
    seed: int
    config_digest: str
    tool_version: str
    samples: list[SampleRecord] = field(default_factory=list)
    tool: str = "swarmseg"

    @property
    def failed(self) -> list[SampleRecord]:
        return [s for s in self.samples if s.error is not None]

    def to_dict(self) -> dict[str, Any]:
        return {
            "tool": self.tool,
            "tool_version": self.tool_version,
            "seed": self.seed,
            "config_digest": self.config_digest,
            "samples": [s.to_dict() for s in self.samples],
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "AnalysisReport":
        return cls(
            tool=d.get("tool", "swarmseg"),
            tool_version=d["tool_version"],
            seed=d["seed"],
            config_digest=d["config_digest"],
            samples=[SampleRecord.from_dict(s) for s in d.get("samples", [])],
        )


def report_to_json(report: AnalysisReport) -> str:
    return json.dumps(report.to_dict(), indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def write_report(report: AnalysisReport, path) -> None:
    Path(path).write_bytes(report_to_json(report).encode("utf-8"))


def read_report(path) -> AnalysisReport:
    return AnalysisReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
