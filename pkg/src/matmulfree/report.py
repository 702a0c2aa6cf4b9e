"""Block-level aggregation, sweep grids and CSV/JSON/markdown serialization."""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from . import __version__
from .amdahl import AmdahlCurve, FractionReport, MemoryBasis, Metric, OpRecord, curves
from .cost import op_cost
from .errors import ConfigError
from .hardware import Dataflow, HardwareConfig
from .memory import traffic
from .models import ModelConfig, enumerate_block_ops

logger = logging.getLogger(__name__)

DEFAULT_SEQLENS = (128, 256, 512, 1024, 2048, 4096)
FORMATS = ("markdown", "csv", "json")
TOOL = "matmulfree"


def analyze_block(
    model: ModelConfig,
    l: int,
    hw: HardwareConfig,
    memory_basis=MemoryBasis.SRAM,
    layers: int = 1,
) -> FractionReport:
    basis = MemoryBasis(memory_basis)
    if layers < 1:
        raise ConfigError(f"layer count must be >= 1, got {layers}")
    records = []
    totals = {True: [0, 0], False: [0, 0]}
    for op in enumerate_block_ops(model, l):
        cost = op_cost(op, hw)
        tr = traffic(op, hw)
        records.append(
            OpRecord(
                role=op.role,
                head_index=op.head_index,
                m=op.m,
                k=op.k,
                n=op.n,
                quantizable=op.quantizable,
                compute_cycles=cost.compute_cycles,
                folds=cost.folds,
                mac_count=cost.mac_count,
                utilization=cost.utilization,
                sram_accesses=tr.sram_accesses,
                dram_bytes=tr.dram_bytes,
            )
        )
        bucket = totals[op.quantizable]
        bucket[0] += cost.compute_cycles
        bucket[1] += tr.sram_accesses if basis is MemoryBasis.SRAM else tr.dram_bytes
    return FractionReport(
        model=model,
        seqlen=l,
        hardware=hw,
        memory_basis=basis,
        cycles_projection=totals[True][0],
        cycles_attention=totals[False][0],
        memory_projection=totals[True][1],
        memory_attention=totals[False][1],
        per_op=tuple(records),
        layers=layers,
    )


@dataclass(frozen=True)
class SweepGrid:
    """MatMul-free fraction per (sequence length, model) cell."""

    hardware: HardwareConfig
    metric: Metric
    memory_basis: MemoryBasis
    seqlens: Tuple[int, ...]
    models: Tuple[str, ...]
    cells: Tuple[Tuple[float, ...], ...]

    @property
    def hardware_name(self) -> str:
        return self.hardware.name

    def cell(self, model: str, l: int) -> float:
        return self.cells[self.seqlens.index(l)][self.models.index(model)]

    def to_dict(self) -> dict:
        return {
            "hardware": self.hardware.to_dict(),
            "metric": self.metric.value,
            "memory_basis": self.memory_basis.value,
            "seqlens": list(self.seqlens),
            "models": list(self.models),
            "cells": [list(row) for row in self.cells],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SweepGrid":
        return cls(
            hardware=HardwareConfig.from_dict(data["hardware"]),
            metric=Metric(data["metric"]),
            memory_basis=MemoryBasis(data["memory_basis"]),
            seqlens=tuple(data["seqlens"]),
            models=tuple(data["models"]),
            cells=tuple(tuple(float(v) for v in row) for row in data["cells"]),
        )


def sweep(
    models: Sequence[ModelConfig],
    seqlens: Sequence[int],
    hw: HardwareConfig,
    metric=Metric.COMPUTE,
    memory_basis=MemoryBasis.SRAM,
) -> SweepGrid:
    if not models:
        raise ConfigError("sweep needs at least one model")
    if not seqlens:
        raise ConfigError("sweep needs at least one sequence length")
    metric = Metric(metric)
    cells = tuple(
        tuple(analyze_block(model, l, hw, memory_basis).fraction(metric) for model in models)
        for l in seqlens
    )
    return SweepGrid(
        hardware=hw,
        metric=metric,
        memory_basis=MemoryBasis(memory_basis),
        seqlens=tuple(seqlens),
        models=tuple(m.name for m in models),
        cells=cells,
    )


def memory_dominance_violations(
    models: Iterable[ModelConfig], seqlens: Iterable[int], hw: HardwareConfig
) -> List[Tuple[str, int, float, float]]:
    """Cells where the memory fraction falls below the compute fraction."""
    seqlens = list(seqlens)
    bad = []
    for model in models:
        for l in seqlens:
            rep = analyze_block(model, l, hw)
            if rep.f_memory < rep.f_compute:
                bad.append((model.name, l, rep.f_compute, rep.f_memory))
    for name, l, fc, fm in bad:
        logger.warning("%s @ %d on %s: memory fraction %.4f below compute fraction %.4f", name, l, hw.name, fm, fc)
    return bad


@dataclass(frozen=True)
class DataflowRow:
    dataflow: Dataflow
    cycles_projection: int
    cycles_attention: int

    @property
    def total_cycles(self) -> int:
        return self.cycles_projection + self.cycles_attention


def compare_dataflows(model: ModelConfig, l: int, hw: HardwareConfig) -> List[DataflowRow]:
    rows = []
    for dataflow in Dataflow:
        rep = analyze_block(model, l, hw.with_dataflow(dataflow))
        rows.append(DataflowRow(dataflow, rep.cycles_projection, rep.cycles_attention))
    return rows


def winners(rows: Sequence[DataflowRow]) -> List[Dataflow]:
    best = min(r.total_cycles for r in rows)
    return [r.dataflow for r in rows if r.total_cycles == best]


@dataclass(frozen=True)
class CurveSet:
    """Both Amdahl curves for one analyzed block."""

    projection: AmdahlCurve
    attention: AmdahlCurve
    metric: Metric
    model: Optional[str] = None
    seqlen: Optional[int] = None
    hardware: Optional[HardwareConfig] = None

    def to_dict(self) -> dict:
        return {
            "metric": self.metric.value,
            "model": self.model,
            "seqlen": self.seqlen,
            "hardware": self.hardware.to_dict() if self.hardware else None,
            "projection": self.projection.to_dict(),
            "attention": self.attention.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CurveSet":
        return cls(
            projection=AmdahlCurve.from_dict(data["projection"]),
            attention=AmdahlCurve.from_dict(data["attention"]),
            metric=Metric(data["metric"]),
            model=data.get("model"),
            seqlen=data.get("seqlen"),
            hardware=HardwareConfig.from_dict(data["hardware"]) if data.get("hardware") else None,
        )


def amdahl_curves(report: FractionReport, metric=Metric.COMPUTE, s_max: int = 100) -> CurveSet:
    proj, attn = curves(report, metric, s_max)
    return CurveSet(proj, attn, Metric(metric), report.model.name, report.seqlen, report.hardware)


# ---------------------------------------------------------------- serialization


def report_to_dict(rep: FractionReport) -> dict:
    return {
        "model": rep.model.to_dict(),
        "seqlen": rep.seqlen,
        "hardware": rep.hardware.to_dict(),
        "memory_basis": rep.memory_basis.value,
        "layers": rep.layers,
        "cycles_projection": rep.cycles_projection,
        "cycles_attention": rep.cycles_attention,
        "memory_projection": rep.memory_projection,
        "memory_attention": rep.memory_attention,
        "f_compute": rep.f_compute,
        "f_memory": rep.f_memory,
        "per_op": [r.to_dict() for r in rep.per_op],
    }


def report_from_dict(data: dict) -> FractionReport:
    return FractionReport(
        model=ModelConfig.from_dict(data["model"]),
        seqlen=data["seqlen"],
        hardware=HardwareConfig.from_dict(data["hardware"]),
        memory_basis=MemoryBasis(data["memory_basis"]),
        cycles_projection=data["cycles_projection"],
        cycles_attention=data["cycles_attention"],
        memory_projection=data["memory_projection"],
        memory_attention=data["memory_attention"],
        per_op=tuple(OpRecord.from_dict(r) for r in data["per_op"]),
        layers=data.get("layers", 1),
    )


Payload = Union[SweepGrid, FractionReport, CurveSet, Sequence[FractionReport], Tuple[AmdahlCurve, AmdahlCurve]]


def _normalize(payload) -> Tuple[str, object]:
    if isinstance(payload, SweepGrid):
        return "sweep_grid", payload
    if isinstance(payload, FractionReport):
        return "fraction_report", payload
    if isinstance(payload, CurveSet):
        return "amdahl_curves", payload
    if isinstance(payload, (tuple, list)) and payload:
        if all(isinstance(p, AmdahlCurve) for p in payload) and len(payload) == 2:
            return "amdahl_curves", CurveSet(payload[0], payload[1], Metric.COMPUTE)
        if all(isinstance(p, FractionReport) for p in payload):
            return "fraction_reports", list(payload)
    raise TypeError(f"cannot serialize {type(payload).__name__}")


def emit(payload: Payload, fmt: str = "markdown", *, timestamp: bool = False, metric: Optional[str] = None) -> str:
    """Serialize a grid, block report(s) or curve pair as csv, json or markdown.

    ``metric`` only labels JSON block reports, which carry both fractions.
    """
    if fmt not in FORMATS:
        raise ConfigError(f"unsupported format {fmt!r}; expected one of {FORMATS}")
    kind, obj = _normalize(payload)
    if fmt == "json":
        return _to_json(kind, obj, timestamp, metric)
    if kind == "sweep_grid":
        headers, rows = _grid_table(obj)
    elif kind == "amdahl_curves":
        headers, rows = _curve_table(obj)
    else:
        reports = [obj] if kind == "fraction_report" else obj
        if fmt == "markdown":
            return "\n".join(_report_markdown(r) for r in reports)
        headers, rows = _ops_table(reports)
    if fmt == "csv":
        return render_csv(headers, rows)
    return _markdown_heading(kind, obj) + render_markdown(headers, rows)


def parse_json(text: str):
    """Inverse of ``emit(..., "json")``."""
    doc = json.loads(text)
    kind, payload = doc.get("kind"), doc.get("payload")
    if kind == "sweep_grid":
        return SweepGrid.from_dict(payload)
    if kind == "fraction_report":
        return report_from_dict(payload)
    if kind == "fraction_reports":
        return [report_from_dict(p) for p in payload]
    if kind == "amdahl_curves":
        return CurveSet.from_dict(payload)
    raise ConfigError(f"unrecognized document kind {kind!r}")


def json_document(kind: str, payload, *, hardware: Optional[HardwareConfig] = None,
                  metric: Optional[str] = None, timestamp: bool = False) -> str:
    doc = {
        "tool": TOOL,
        "version": __version__,
        "kind": kind,
        "hardware": hardware.to_dict() if hardware else None,
        "dataflow": hardware.dataflow.value if hardware else None,
        "metric": metric,
    }
    if timestamp:
        doc["generated_at"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    doc["payload"] = payload
    return json.dumps(doc, indent=2) + "\n"


def _to_json(kind: str, obj, timestamp: bool, metric: Optional[str] = None) -> str:
    if kind == "sweep_grid":
        return json_document(kind, obj.to_dict(), hardware=obj.hardware, metric=obj.metric.value, timestamp=timestamp)
    if kind == "amdahl_curves":
        return json_document(kind, obj.to_dict(), hardware=obj.hardware, metric=obj.metric.value, timestamp=timestamp)
    if kind == "fraction_report":
        return json_document(kind, report_to_dict(obj), hardware=obj.hardware, metric=metric, timestamp=timestamp)
    hw = obj[0].hardware
    return json_document(kind, [report_to_dict(r) for r in obj], hardware=hw, metric=metric, timestamp=timestamp)


def render_csv(headers: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(headers)
    writer.writerows(rows)
    return buf.getvalue()


def render_markdown(headers: Sequence[str], rows: Iterable[Sequence]) -> str:
    rows = [[str(v) for v in row] for row in rows]
    widths = [max([len(h)] + [len(r[i]) for r in rows]) for i, h in enumerate(headers)]
    line = lambda cells: "| " + " | ".join(c.ljust(w) for c, w in zip(cells, widths)) + " |"
    out = [line(headers), "|" + "|".join("-" * (w + 2) for w in widths) + "|"]
    out.extend(line(r) for r in rows)
    return "\n".join(out) + "\n"


def _grid_table(grid: SweepGrid):
    headers = ["seqlen", *grid.models]
    rows = [[l, *(f"{v:.4f}" for v in row)] for l, row in zip(grid.seqlens, grid.cells)]
    return headers, rows


def _curve_table(cs: CurveSet):
    headers = ["s_partial", "s_total_projection", "s_total_attention"]
    rows = [
        [s, f"{p:.6f}", f"{a:.6f}"]
        for (s, p), (_, a) in zip(cs.projection.samples, cs.attention.samples)
    ]
    return headers, rows


_OP_HEADERS = [
    "model", "seqlen", "role", "head", "m", "k", "n", "quantizable",
    "cycles", "folds", "macs", "utilization", "sram_accesses", "dram_bytes",
]


def _op_row(rep: FractionReport, r: OpRecord) -> list:
    return [
        rep.model.name, rep.seqlen, r.role.value, "" if r.head_index is None else r.head_index,
        r.m, r.k, r.n, str(r.quantizable).lower(), r.compute_cycles, r.folds, r.mac_count,
        f"{r.utilization:.4f}", r.sram_accesses, r.dram_bytes,
    ]


def _ops_table(reports: Sequence[FractionReport]):
    return _OP_HEADERS, [_op_row(rep, r) for rep in reports for r in rep.per_op]


def _markdown_heading(kind: str, obj) -> str:
    if kind == "sweep_grid":
        basis = f", {obj.memory_basis.value.upper()} accesses" if obj.metric is Metric.MEMORY else ""
        return (
            f"## MatMul-free fraction ({obj.metric.value}{basis}) on {obj.hardware.name} "
            f"({obj.hardware.rows}x{obj.hardware.cols}, {obj.hardware.dataflow.value})\n\n"
        )
    where = f" for {obj.model} @ {obj.seqlen}" if obj.model else ""
    return (
        f"## Amdahl curves ({obj.metric.value}){where}\n\n"
        f"- improving projections: F = {obj.projection.f:.4f}, limit {obj.projection.asymptote:.4f}\n"
        f"- improving attention: F = {obj.attention.f:.4f}, limit {obj.attention.asymptote:.4f}\n\n"
    )


def _report_markdown(rep: FractionReport) -> str:
    hw = rep.hardware
    unit = "elements" if rep.memory_basis is MemoryBasis.SRAM else "bytes"
    warn = " (head_dim floored: d not divisible by h)" if rep.model.head_dim_warning else ""
    lines = [
        f"## {rep.model.name} @ seqlen {rep.seqlen} on {hw.name} ({hw.rows}x{hw.cols}, {hw.dataflow.value}){warn}",
        "",
        f"- projection cycles: {rep.cycles_projection}",
        f"- attention cycles: {rep.cycles_attention}",
        f"- MatMul-free compute fraction: {rep.f_compute:.4f}",
        f"- projection memory ({rep.memory_basis.value}, {unit}): {rep.memory_projection}",
        f"- attention memory ({rep.memory_basis.value}, {unit}): {rep.memory_attention}",
        f"- MatMul-free memory fraction: {rep.f_memory:.4f}",
    ]
    if rep.layers > 1:
        lines.append(f"- whole model ({rep.layers} layers): {rep.total_cycles} cycles, {rep.total_memory} {unit}")
    headers, rows = _ops_table([rep])
    return "\n".join(lines) + "\n\n" + render_markdown(headers[2:], [r[2:] for r in rows])
